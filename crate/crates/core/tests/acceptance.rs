//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs the default 200×200 sweeps of both models once (twice for the
//! determinism check). Set `ACCEPTANCE_STRICT=1` to exit nonzero on FAIL.

use std::f64::consts::PI;
use std::time::Instant;

use phasefid::bcs::{self, BcsParams};
use phasefid::oracle::{self, OracleConfig};
use phasefid::scanner::{
    check_susceptibility_relation, compare_line_and_dip, detect_critical_line, run_sweep, CriticalLine,
    SweepGrid, SweepSpec,
};
use phasefid::stoner::{self, StonerParams, StonerState};
use phasefid::ModeModel;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

struct Sweep {
    grid: SweepGrid,
    line: CriticalLine,
    seconds: f64,
}

fn sweep(model: ModeModel) -> Sweep {
    let spec = SweepSpec::default_for(model);
    let start = Instant::now();
    let grid = run_sweep(&spec).expect("valid default spec");
    let seconds = start.elapsed().as_secs_f64();
    let line = detect_critical_line(&grid).expect("line detection");
    Sweep { grid, line, seconds }
}

/// Distance in grid cells from each cell to the critical coupling of its row.
fn cells_from_line(s: &Sweep, it: usize, ic: usize) -> f64 {
    let cell = s.grid.cell(it, ic);
    match s.line.points.iter().find(|p| p.t == cell.t) {
        Some(p) => (cell.coupling - p.coupling).abs() / s.grid.spec.coupling.spacing(),
        None => f64::INFINITY,
    }
}

fn coupling_from_line(s: &Sweep, it: usize, ic: usize) -> f64 {
    cells_from_line(s, it, ic) * s.grid.spec.coupling.spacing()
}

fn for_each_cell(s: &Sweep, mut f: impl FnMut(usize, usize)) {
    for it in 0..s.grid.spec.t.n {
        for ic in 0..s.grid.spec.coupling.n {
            f(it, ic);
        }
    }
}

// ---------------------------------------------------------------------------

fn c1_stoner_criterion(st: &Sweep) -> Outcome {
    let Some(p) = st.line.points.iter().find(|p| (p.t - 0.01).abs() < 1e-12) else {
        return Outcome::new(false, "no onset detected in the t = 0.01 row");
    };
    Outcome::new((p.coupling - 1.0).abs() <= 0.02, format!("u_c(0.01) = {:.6} (target 1 +- 0.02)", p.coupling))
}

/// Brute-force scan of `s³ − (9/4u)s² + 1` on the partially polarised branch.
fn cubic_oracle(u: f64) -> (f64, f64) {
    let k = 9.0 / (4.0 * u);
    let f = |s: f64| s * s * (s - k) + 1.0;
    let (lo0, hi0) = (2f64.cbrt(), 2.0 / u);
    let n = 100_000;
    let mut bracket = None;
    for i in 0..n {
        let a = lo0 + (hi0 - lo0) * i as f64 / n as f64;
        let b = lo0 + (hi0 - lo0) * (i + 1) as f64 / n as f64;
        if f(a) * f(b) <= 0.0 {
            bracket = Some((a, b));
            break;
        }
    }
    let (mut a, mut b) = bracket.expect("cubic root in range");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(a) * f(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    let s = 0.5 * (a + b);
    // x³ + y³ = 2 fixes the product
    let p = (s * s * s - 2.0) / (3.0 * s);
    let d = (s * s - 4.0 * p).sqrt();
    (0.5 * (s + d), 0.5 * (s - d))
}

fn c2_zero_temperature() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let m = stoner::zero_t_solve(1.05).expect("T = 0 solve");
    let (ox, oy) = cubic_oracle(1.05);
    let ok = (m.x - 1.2).abs() <= 1e-3 && (m.y - 0.65).abs() <= 1e-3 && (m.x - ox).abs() < 1e-9 && (m.y - oy).abs() < 1e-9;
    pass &= ok;
    notes.push(format!("(x, y)(1.05) = ({:.6}, {:.6}) oracle ({ox:.6}, {oy:.6})", m.x, m.y));

    let u_full = 3.0 / (2.0 * 2f64.cbrt());
    let below = stoner::zero_t_solve(u_full - 2e-6).expect("below full polarisation");
    let above = stoner::zero_t_solve(u_full + 2e-6).expect("above full polarisation");
    let ok = (stoner::full_polarization_coupling() - u_full).abs() <= 1e-6 && below.y > 0.0 && above.y == 0.0;
    pass &= ok;
    notes.push(format!("full polarisation at {:.9}", stoner::full_polarization_coupling()));

    let mut worst: f64 = 0.0;
    for i in 0..=58 {
        let u = 1.01 + 0.005 * i as f64;
        let h = 1e-6;
        if (u - u_full).abs() < 2.0 * h {
            continue;
        }
        let (dx, dy) = stoner::zero_t_derivatives(u).expect("derivatives");
        let (a, b) = (stoner::zero_t_solve(u + h).unwrap(), stoner::zero_t_solve(u - h).unwrap());
        let (fx, fy) = ((a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h));
        for (d, fd) in [(dx, fx), (dy, fy)] {
            let dev = if fd == 0.0 { d.abs() } else { (d - fd).abs() / fd.abs() };
            worst = worst.max(dev);
        }
    }
    pass &= worst <= 0.01;
    notes.push(format!("derivative vs FD max rel {worst:.1e}"));

    let mut smallest: f64 = f64::INFINITY;
    for k in [1e-3, 5e-4, 1e-4, 1e-5, 1e-6, 1e-7] {
        smallest = smallest.min(stoner::zero_t_derivatives(1.0 + k).unwrap().0.abs());
    }
    let at = stoner::zero_t_derivatives(1.0 + 1e-3).unwrap().0.abs();
    pass &= smallest > 1e3;
    notes.push(format!("|dx/du| at u-1 = 1e-3 is {at:.3e}, min over u-1 < 1e-3 samples {smallest:.3e} (needs > 1e3)"));
    Outcome::new(pass, notes.join("; "))
}

fn c3_bcs_gap(bc: &Sweep) -> Outcome {
    let mut notes = Vec::new();
    let mut worst_res: f64 = 0.0;
    for c in &bc.grid.cells {
        if c.converged && c.order_param > 0.0 {
            let r = bcs::gap_residual(c.coupling, c.t, c.order_param).expect("residual");
            worst_res = worst_res.max(r.abs());
        }
    }
    let mut pass = worst_res <= 1e-12;
    notes.push(format!("max |residual| {worst_res:.1e} over ordered grid cells"));

    // integral equation at t → 0 solved numerically against 1/sinh(1/v)
    let mut worst_sinh: f64 = 0.0;
    for i in 0..=6 {
        let v = 0.2 + 0.05 * i as f64;
        let d = bcs::solve_gap(v, 1e-4).unwrap().gap;
        worst_sinh = worst_sinh.max((d * (1.0 / v).sinh() - 1.0).abs());
        let d0 = bcs::solve_gap(v, 0.0).unwrap().gap;
        worst_sinh = worst_sinh.max((d0 * (1.0 / v).sinh() - 1.0).abs());
    }
    pass &= worst_sinh <= 1e-6;
    notes.push(format!("max |delta sinh(1/v) - 1| {worst_sinh:.1e}"));

    // π e^{-γ}
    let universal = PI * (-0.577_215_664_901_532_9_f64).exp();
    let mut worst_ratio: f64 = 0.0;
    for v in [0.1, 0.15, 0.2, 0.25, 0.3] {
        let ratio = bcs::zero_t_gap(v) / bcs::critical_temperature(v).unwrap();
        worst_ratio = worst_ratio.max((ratio / 1.764 - 1.0).abs());
        assert!((ratio / universal - 1.0).abs() < 0.01);
    }
    pass &= worst_ratio <= 0.01;
    notes.push(format!("universal ratio max rel dev {worst_ratio:.2e}"));
    Outcome::new(pass, notes.join("; "))
}

fn c4_oracle() -> Outcome {
    let start = Instant::now();
    let reports = oracle::run_all(&OracleConfig::default()).expect("oracle suites");
    let secs = start.elapsed().as_secs_f64();
    let pass = reports.iter().all(|r| r.passed()) && secs < 60.0 && reports.iter().skip(1).all(|r| r.draws >= 1000);
    let detail = reports
        .iter()
        .map(|r| format!("{} {:.1e}/{:.0e}", r.name, r.max_dev, r.tolerance))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(pass, format!("{detail}; {secs:.2} s"))
}

fn c5_dip(st: &Sweep, bc: &Sweep) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, s) in [("stoner", st), ("bcs", bc)] {
        let cmp = compare_line_and_dip(&s.grid, &s.line);
        let ok = cmp.iter().filter(|c| c.cells_apart <= 1.0).count();
        let frac = ok as f64 / cmp.len().max(1) as f64;
        pass &= frac >= 0.95 && !cmp.is_empty();
        notes.push(format!("{name} {ok}/{} rows within one cell", cmp.len()));
    }
    Outcome::new(pass, notes.join("; "))
}

fn c6_ordering(st: &Sweep, bc: &Sweep) -> Outcome {
    let tol = 1e-12;
    let mut violations = 0;
    for s in [st, bc] {
        for c in s.grid.cells.iter().filter(|c| c.converged) {
            if c.c > c.h + tol || c.h > c.f + tol {
                violations += 1;
            }
        }
    }
    let mut strict_far = 0;
    let mut worst_off: f64 = 0.0;
    let (mut min_cf, mut min_cf_cells) = (f64::INFINITY, 0.0);
    let (mut min_hf, mut min_hf_cells) = (f64::INFINITY, 0.0);
    let dv = bc.grid.spec.dc.abs();
    for_each_cell(bc, |it, ic| {
        let c = bc.grid.cell(it, ic);
        if !c.converged {
            return;
        }
        let cells = cells_from_line(bc, it, ic);
        if c.h - c.c > tol && c.f - c.h > tol && cells > 10.0 {
            strict_far += 1;
        }
        if coupling_from_line(bc, it, ic) > 10.0 * dv {
            worst_off = worst_off.max(1.0 - c.f);
        }
        if c.c_minus_f() < min_cf {
            (min_cf, min_cf_cells) = (c.c_minus_f(), cells);
        }
        if c.h_minus_f() < min_hf {
            (min_hf, min_hf_cells) = (c.h_minus_f(), cells);
        }
    });
    let pass = violations == 0 && strict_far == 0 && worst_off <= 1e-4 && min_cf_cells <= 1.0 && min_hf_cells <= 1.0;
    Outcome::new(
        pass,
        format!(
            "{violations} ordering violations; {strict_far} BCS cells with strict gaps beyond 10 cells; \
             max off-line 1-F {worst_off:.2e} (needs <= 1e-4); min C-F {min_cf:.2e} at {min_cf_cells:.2} cells, \
             min H-F {min_hf:.2e} at {min_hf_cells:.2} cells from the line"
        ),
    )
}

fn c7_commuting(st: &Sweep) -> Outcome {
    let ok: Vec<_> = st.grid.cells.iter().filter(|c| c.converged).collect();
    let cf = ok.iter().map(|c| (c.c - c.f).abs()).fold(0.0, f64::max);
    let dev = ok.iter().map(|c| c.uhl_dev_max).fold(0.0, f64::max);
    Outcome::new(
        cf <= 1e-10 && dev <= 1e-10 && !ok.is_empty(),
        format!("max |C-F| {cf:.1e}, max uhl_dev {dev:.1e} over {} cells", ok.len()),
    )
}

fn c8_susceptibility() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for t in [0.05, 0.1, 0.3, 0.6] {
        let uc = stoner::linear_critical_coupling(t).unwrap();
        for u in [0.2, 0.5, 0.75 * uc, 0.9 * uc] {
            let r = check_susceptibility_relation(&StonerParams::new(t, u), 1e-4).expect("paramagnetic point");
            worst = worst.max(r.rel_err);
            count += 1;
        }
    }
    Outcome::new(worst <= 0.05, format!("max rel err {worst:.2e} over {count} points"))
}

fn c9_uhlmann(bc: &Sweep) -> Outcome {
    let xi: Vec<f64> = (0..=200).map(|i| -1.0 + 0.01 * i as f64).collect();
    let mut worst_res: f64 = 0.0;
    let spec = bc.grid.spec;
    for it in (0..spec.t.n).step_by(25) {
        for ic in (0..spec.coupling.n).step_by(25) {
            let c = bc.grid.cell(it, ic);
            let p = BcsParams::new(c.t, c.coupling).with_delta(spec.dt, spec.dc);
            let a = bcs::solve_gap(p.v, p.t).unwrap();
            let pb = p.neighbor();
            let b = bcs::solve_gap(pb.v, pb.t).unwrap();
            for s in bcs::uhlmann_profile(&p, &a, &b, &xi).unwrap() {
                worst_res = worst_res.max(s.identity_residual.abs());
            }
        }
    }
    let mut on_line: f64 = 0.0;
    let mut off_line: f64 = 0.0;
    for_each_cell(bc, |it, ic| {
        let c = bc.grid.cell(it, ic);
        if !c.converged {
            return;
        }
        if cells_from_line(bc, it, ic) <= 1.0 {
            on_line = on_line.max(c.uhl_dev_max);
        }
        if coupling_from_line(bc, it, ic) > 10.0 * spec.dc.abs() {
            off_line = off_line.max(c.uhl_dev_max);
        }
    });
    Outcome::new(
        worst_res <= 1e-10 && on_line > 0.01 && off_line <= 1e-6,
        format!(
            "identity residual {worst_res:.1e}; max uhl_dev on the line {on_line:.3e} (needs > 0.01); \
             off-line {off_line:.3e} (needs <= 1e-6)"
        ),
    )
}

fn c10_low_temperature() -> Outcome {
    let mut worst_f: f64 = 0.0;
    for v in [0.2, 0.3, 0.4, 0.5] {
        let p = BcsParams::new(1e-4, v);
        let a = bcs::solve_gap(v, p.t).unwrap();
        let b = bcs::solve_gap(p.neighbor().v, p.t).unwrap();
        let f = bcs::total_fidelity(&p, &a, &b).unwrap().f;
        worst_f = worst_f.max((f - bcs::zero_t_fidelity(v, p.neighbor().v, p.nu)).abs());
    }
    let mut worst_m: f64 = 0.0;
    for u in [1.02, 1.05, 1.1, 1.15, 1.18, 1.3] {
        let s = stoner::solve_equilibrium(&StonerParams::new(1e-3, u), &StonerState::magnetic_seed()).unwrap();
        worst_m = worst_m.max((s.m - stoner::zero_t_solve(u).unwrap().magnetization()).abs());
    }
    Outcome::new(
        worst_f <= 1e-6 && worst_m <= 1e-3,
        format!("BCS |F - F0| {worst_f:.1e}; Stoner |m - m0| {worst_m:.1e}"),
    )
}

fn bits(g: &SweepGrid) -> Vec<u64> {
    g.cells
        .iter()
        .flat_map(|c| {
            [c.t, c.coupling, c.order_param, c.mu, c.f, c.c, c.h, c.uhl_dev_max]
                .map(f64::to_bits)
                .into_iter()
                .chain([c.critical as u64, c.converged as u64])
        })
        .collect()
}

fn c11_performance(st: &Sweep, bc: &Sweep) -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for (s, model) in [(st, ModeModel::Stoner), (bc, ModeModel::Bcs)] {
        let again = run_sweep(&SweepSpec::default_for(model)).unwrap();
        let same = bits(&again) == bits(&s.grid);
        let rate = s.grid.failure_rate();
        pass &= same && rate < 1e-3 && s.seconds <= 300.0;
        notes.push(format!(
            "{model:?} {:.1} s on {} threads, failure rate {rate:.1e}, rerun identical {same}",
            s.seconds,
            rayon::current_num_threads()
        ));
    }
    Outcome::new(pass, notes.join("; "))
}

fn main() {
    let st = sweep(ModeModel::Stoner);
    let bc = sweep(ModeModel::Bcs);
    let results: Vec<(&str, Outcome)> = vec![
        ("stoner criterion u_c(t -> 0) = 1", c1_stoner_criterion(&st)),
        ("T = 0 Stoner branch", c2_zero_temperature()),
        ("BCS gap", c3_bcs_gap(&bc)),
        ("oracle equivalence", c4_oracle()),
        ("fidelity-dip localization", c5_dip(&st, &bc)),
        ("ordering and inequality", c6_ordering(&st, &bc)),
        ("commuting-case degeneracy", c7_commuting(&st)),
        ("susceptibility relation", c8_susceptibility()),
        ("Uhlmann identity", c9_uhlmann(&bc)),
        ("T -> 0 consistency", c10_low_temperature()),
        ("performance and determinism", c11_performance(&st, &bc)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
