use std::path::{Path, PathBuf};

use phasefid::bcs::{self, BcsParams};
use phasefid::oracle::{self, OracleConfig};
use phasefid::scanner::{self, Range, SweepGrid, SweepSpec};
use phasefid::stoner::{self, StonerParams, StonerState};
use phasefid::ModeModel;

use crate::args::{
    format_range, parse_f64, parse_range, parse_u64, parse_usize, Cli, Command, CriticalArgs, EquilibriumArgs,
    GapArgs, Model, OracleArgs, ScanArgs, SweepArgs, UhlmannArgs,
};
use crate::config::{pick, render, ConfigFile};
use crate::error::{CliError, CliResult};
use crate::output::{self, num};

const SWEEP_KEYS: [&str; 9] = ["model", "t", "coupling", "dt", "du", "dv", "size", "nu", "threshold"];
const DEFAULT_MAX_FAILURE_RATE: f64 = 1e-3;

pub fn run(cli: Cli) -> CliResult<u8> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let jobs = pick(cli.jobs, &file, "jobs", parse_usize)?;
    match cli.command {
        Command::Scan(a) => scan(a, &file, jobs),
        Command::Critical(a) => critical(a, &file, jobs),
        Command::Oracle(a) => oracle(a, &file),
        Command::Gap(a) => gap(a, &file),
        Command::Equilibrium(a) => equilibrium(a, &file),
        Command::Uhlmann(a) => uhlmann(a, &file),
    }
}

fn with_keys(extra: &[&'static str]) -> Vec<&'static str> {
    let mut keys = vec!["jobs"];
    keys.extend_from_slice(extra);
    keys
}

fn require<T>(v: Option<T>, flag: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn resolve_sweep(a: &SweepArgs, file: &ConfigFile) -> CliResult<SweepSpec> {
    let model = pick(a.model, file, "model", Model::parse)?.unwrap_or(Model::Stoner);
    let mut spec = SweepSpec::default_for(model.mode());
    if let Some(r) = pick(a.t, file, "t", parse_range)? {
        spec.t = r;
    }
    if let Some(r) = pick(a.coupling, file, "coupling", parse_range)? {
        spec.coupling = r;
    }
    if let Some(dt) = pick(a.dt, file, "dt", parse_f64)? {
        spec.dt = dt;
    }
    let du = pick(a.du, file, "du", parse_f64)?;
    let dv = pick(a.dv, file, "dv", parse_f64)?;
    let size = pick(a.size, file, "size", parse_f64)?;
    let nu = pick(a.nu, file, "nu", parse_f64)?;
    let (dc, sz, wrong) = match model {
        Model::Stoner => (du, size, [(dv, "dv"), (nu, "nu")]),
        Model::Bcs => (dv, nu, [(du, "du"), (size, "size")]),
    };
    for (v, name) in wrong {
        if v.is_some() {
            return Err(CliError::Usage(format!("--{name} does not apply to the {} model", model.name())));
        }
    }
    if let Some(dc) = dc {
        spec.dc = dc;
    }
    if let Some(sz) = sz {
        spec.size = sz;
    }
    if let Some(thr) = pick(a.threshold, file, "threshold", parse_f64)? {
        spec.threshold = thr;
    }
    spec.validate()?;
    Ok(spec)
}

fn sweep_entries(spec: &SweepSpec) -> Vec<(&'static str, String)> {
    let (dc, size) = match spec.model {
        ModeModel::Stoner => ("du", "size"),
        ModeModel::Bcs => ("dv", "nu"),
    };
    vec![
        ("model", output::model_name(spec.model).to_string()),
        ("t", format_range(&spec.t)),
        ("coupling", format_range(&spec.coupling)),
        ("dt", spec.dt.to_string()),
        (dc, spec.dc.to_string()),
        (size, spec.size.to_string()),
        ("threshold", spec.threshold.to_string()),
    ]
}

fn manifest(command: &str, mut entries: Vec<(&'static str, String)>) -> String {
    entries.insert(0, ("command", command.to_string()));
    entries.insert(1, ("version", env!("CARGO_PKG_VERSION").to_string()));
    render("phasefid run manifest; rerun with --config manifest", &entries)
}

fn in_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn prepare_out(out: Option<PathBuf>, file: &ConfigFile) -> CliResult<PathBuf> {
    let dir = pick(out, file, "out", |s| Ok(PathBuf::from(s)))?.unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// Exit code of a finished sweep.
pub fn sweep_status(grid: &SweepGrid, max_failure_rate: f64) -> u8 {
    if grid.failure_rate() > max_failure_rate {
        2
    } else {
        0
    }
}

fn scan(a: ScanArgs, file: &ConfigFile, jobs: Option<usize>) -> CliResult<u8> {
    file.check_keys(&with_keys(&[&SWEEP_KEYS[..], &["out", "max_failure_rate"]].concat()))?;
    let spec = resolve_sweep(&a.sweep, file)?;
    let max_rate = pick(a.max_failure_rate, file, "max_failure_rate", parse_f64)?.unwrap_or(DEFAULT_MAX_FAILURE_RATE);
    let dir = prepare_out(a.out, file)?;

    let grid = in_pool(jobs, || scanner::run_sweep(&spec))??;
    let line = in_pool(jobs, || scanner::detect_critical_line(&grid))??;
    output::write_grid(&dir.join("grid.csv"), &grid)?;
    output::write_line(&dir.join("critical_line.csv"), &line)?;
    output::write_plot(&dir.join("plot.gp"), &spec)?;
    let mut entries = sweep_entries(&spec);
    entries.push(("max_failure_rate", max_rate.to_string()));
    output::write_text(&dir.join("manifest"), &manifest("scan", entries))?;

    println!(
        "{} cells, {} failed ({:.3e}), {} critical points, {} rows without onset",
        grid.cells.len(),
        grid.failure_count(),
        grid.failure_rate(),
        line.points.len(),
        line.omitted.len()
    );
    println!("wrote grid.csv, critical_line.csv, plot.gp, manifest to {}", dir.display());
    for c in grid.cells.iter().filter(|c| !c.converged).take(5) {
        eprintln!("failed cell t = {}, coupling = {}: {}", c.t, c.coupling, c.diagnostics.as_deref().unwrap_or(""));
    }
    let status = sweep_status(&grid, max_rate);
    if status != 0 {
        eprintln!("failure rate {:.3e} exceeds {max_rate:e}", grid.failure_rate());
    }
    Ok(status)
}

fn critical(a: CriticalArgs, file: &ConfigFile, jobs: Option<usize>) -> CliResult<u8> {
    file.check_keys(&with_keys(&[&SWEEP_KEYS[..], &["out", "grid"]].concat()))?;
    let grid_path = pick(a.grid, file, "grid", |s| Ok(PathBuf::from(s)))?;
    let (grid, dir) = match &grid_path {
        Some(path) => {
            let mut sweep = a.sweep.clone();
            if sweep.model.is_none() && file.get::<String>("model")?.is_none() {
                sweep.model = Some(sniff_model(path)?);
            }
            // the ranges come from the file itself
            let spec = resolve_sweep(&sweep, file)?;
            let grid = output::read_grid(path, &spec)?;
            let default_dir = path
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .map(Path::to_path_buf)
                .unwrap_or_else(|| PathBuf::from("."));
            let dir = match pick(a.out, file, "out", |s| Ok(PathBuf::from(s)))? {
                Some(d) => d,
                None => default_dir,
            };
            (grid, dir)
        }
        None => {
            let spec = resolve_sweep(&a.sweep, file)?;
            let dir = prepare_out(a.out, file)?;
            (in_pool(jobs, || scanner::run_sweep(&spec))??, dir)
        }
    };
    std::fs::create_dir_all(&dir)?;
    let line = in_pool(jobs, || scanner::detect_critical_line(&grid))??;
    let rows = scanner::compare_line_and_dip(&grid, &line);
    output::write_line(&dir.join("critical_line.csv"), &line)?;
    output::write_comparison(&dir.join("line_compare.csv"), &rows)?;
    let mut entries = sweep_entries(&grid.spec);
    if let Some(p) = &grid_path {
        entries.push(("grid", p.display().to_string()));
    }
    output::write_text(&dir.join("critical_manifest"), &manifest("critical", entries))?;

    let close = rows.iter().filter(|r| r.cells_apart <= 1.0).count();
    println!(
        "{} rows with an onset, {} within one cell of the F minimum ({:.1}%)",
        rows.len(),
        close,
        100.0 * close as f64 / rows.len().max(1) as f64
    );
    if let Some(first) = line.points.first() {
        println!("t = {}: coupling_c = {:.6}", first.t, first.coupling);
    }
    println!("wrote critical_line.csv, line_compare.csv, critical_manifest to {}", dir.display());
    Ok(0)
}

fn sniff_model(path: &Path) -> CliResult<Model> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    match rdr.records().next() {
        Some(rec) => Model::parse(rec?.get(0).unwrap_or("")).map_err(CliError::Usage),
        None => Err(CliError::Usage(format!("{}: grid file has no cells", path.display()))),
    }
}

fn oracle(a: OracleArgs, file: &ConfigFile) -> CliResult<u8> {
    file.check_keys(&with_keys(&["seed", "draws"]))?;
    let cfg = OracleConfig {
        seed: pick(a.seed, file, "seed", parse_u64)?.unwrap_or(oracle::DEFAULT_SEED),
        draws: pick(a.draws, file, "draws", parse_usize)?.unwrap_or(oracle::DEFAULT_DRAWS),
        corruption: a.corrupt.unwrap_or(0.0),
    };
    if cfg.draws == 0 {
        return Err(CliError::Usage("--draws must be positive".into()));
    }
    println!("seed {:#x}, {} draws per suite", cfg.seed, cfg.draws);
    let reports = oracle::run_all(&cfg)?;
    let mut ok = true;
    for r in &reports {
        let verdict = if r.passed() { "pass" } else { "FAIL" };
        println!(
            "{:<9} max deviation {:.3e} (tolerance {:.0e}) {verdict}",
            r.name, r.max_dev, r.tolerance
        );
        ok &= r.passed();
    }
    Ok(if ok { 0 } else { 2 })
}

fn gap(a: GapArgs, file: &ConfigFile) -> CliResult<u8> {
    file.check_keys(&with_keys(&["v", "t"]))?;
    let v = require(pick(a.v, file, "v", parse_f64)?, "v")?;
    let t = require(pick(a.t, file, "t", parse_f64)?, "t")?;
    let s = bcs::solve_gap(v, t)?;
    println!("v = {v}");
    println!("t = {t}");
    println!("gap = {}", num(s.gap));
    println!("residual = {:.3e}", bcs::gap_residual(v, t, s.gap)?);
    if v > 0.0 {
        match bcs::critical_temperature(v) {
            Ok(tc) => println!("t_c = {}", num(tc)),
            Err(e) => println!("t_c unavailable: {e}"),
        }
    }
    println!("zero_t_gap = {}", num(bcs::zero_t_gap(v)));
    Ok(0)
}

fn equilibrium(a: EquilibriumArgs, file: &ConfigFile) -> CliResult<u8> {
    file.check_keys(&with_keys(&["u", "t", "h_ext"]))?;
    let u = require(pick(a.u, file, "u", parse_f64)?, "u")?;
    let t = require(pick(a.t, file, "t", parse_f64)?, "t")?;
    let h = pick(a.h_ext, file, "h_ext", parse_f64)?.unwrap_or(0.0);
    let p = StonerParams::new(t, u).with_field(h);
    p.validate()?;
    println!("u = {u}");
    println!("t = {t}");
    if t == 0.0 {
        let k = stoner::zero_t_solve(u)?;
        println!("x = {}", num(k.x));
        println!("y = {}", num(k.y));
        println!("m = {}", num(k.magnetization()));
        return Ok(0);
    }
    let s = stoner::solve_equilibrium(&p, &StonerState::paramagnetic_seed())?;
    let r = stoner::residuals(&p, s.m, s.mu)?;
    println!("m = {}", num(s.m));
    println!("mu = {}", num(s.mu));
    println!("branch = {:?}", s.branch);
    println!("residual = {:.3e} {:.3e}", r[0], r[1]);
    println!("u_c = {}", num(stoner::linear_critical_coupling(t)?));
    Ok(0)
}

fn uhlmann(a: UhlmannArgs, file: &ConfigFile) -> CliResult<u8> {
    file.check_keys(&with_keys(&["v", "t", "dt", "dv", "xi", "out"]))?;
    let v = require(pick(a.v, file, "v", parse_f64)?, "v")?;
    let t = require(pick(a.t, file, "t", parse_f64)?, "t")?;
    let dt = pick(a.dt, file, "dt", parse_f64)?.unwrap_or(0.0);
    let dv = pick(a.dv, file, "dv", parse_f64)?.unwrap_or(1e-3);
    let xi = pick(a.xi, file, "xi", parse_range)?.unwrap_or(Range::new(-0.1, 0.1, 201));
    if xi.n < 2 {
        return Err(CliError::Usage("--xi needs at least two points".into()));
    }
    let p = BcsParams::new(t, v).with_delta(dt, dv);
    p.validate()?;
    let q = p.neighbor();
    let (sa, sb) = (bcs::solve_gap(p.v, p.t)?, bcs::solve_gap(q.v, q.t)?);
    let samples = bcs::uhlmann_profile(&p, &sa, &sb, &xi.values())?;
    let mut text = String::from("xi,uhl_dev,identity_residual\n");
    for s in &samples {
        text.push_str(&format!("{},{},{}\n", num(s.xi), num(s.uhl_dev), num(s.identity_residual)));
    }
    match pick(a.out, file, "out", |s| Ok(PathBuf::from(s)))? {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            output::write_text(&dir.join("uhlmann.csv"), &text)?;
        }
        None => print!("{text}"),
    }
    Ok(0)
}
