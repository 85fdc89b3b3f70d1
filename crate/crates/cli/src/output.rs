//! CSV, gnuplot and manifest files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use phasefid::scanner::{CriticalLine, LineComparison, Range, SweepCell, SweepGrid, SweepSpec};
use phasefid::ModeModel;

use crate::error::{CliError, CliResult};

pub const GRID_HEADER: [&str; 13] = [
    "model",
    "t",
    "coupling",
    "order_param",
    "mu",
    "F",
    "C",
    "H",
    "C_minus_F",
    "H_minus_F",
    "uhl_dev_max",
    "critical",
    "converged",
];

/// 17 significant digits, `.` as decimal separator.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn model_name(m: ModeModel) -> &'static str {
    match m {
        ModeModel::Stoner => "stoner",
        ModeModel::Bcs => "bcs",
    }
}

fn writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

pub fn write_grid(path: &Path, grid: &SweepGrid) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(GRID_HEADER)?;
    let model = model_name(grid.spec.model);
    for c in &grid.cells {
        w.write_record([
            model.to_string(),
            num(c.t),
            num(c.coupling),
            num(c.order_param),
            num(c.mu),
            num(c.f),
            num(c.c),
            num(c.h),
            num(c.c_minus_f()),
            num(c.h_minus_f()),
            num(c.uhl_dev_max),
            flag(c.critical).to_string(),
            flag(c.converged).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_line(path: &Path, line: &CriticalLine) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "coupling_c"])?;
    for p in &line.points {
        w.write_record([num(p.t), num(p.coupling)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_comparison(path: &Path, rows: &[LineComparison]) -> CliResult<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "coupling_c", "coupling_dipF", "cells_apart"])?;
    for r in rows {
        w.write_record([num(r.t), num(r.coupling_c), num(r.coupling_dip), num(r.cells_apart)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_plot(path: &Path, spec: &SweepSpec) -> CliResult<()> {
    let coupling = match spec.model {
        ModeModel::Stoner => "u",
        ModeModel::Bcs => "v",
    };
    let script = format!(
        "# F over the (coupling, t) plane with the detected critical line\n\
         set datafile separator ','\n\
         set terminal pngcairo size 900,700\n\
         set output 'fidelity.png'\n\
         set xlabel '{coupling}'\n\
         set ylabel 't'\n\
         set cblabel 'F'\n\
         set view map\n\
         set xrange [{clo}:{chi}]\n\
         set yrange [{tlo}:{thi}]\n\
         plot 'grid.csv' skip 1 using 3:2:6 with image notitle, \\\n\
         \x20    'critical_line.csv' skip 1 using 2:1 with lines lw 2 lc rgb 'white' title 'critical line'\n",
        clo = spec.coupling.lo,
        chi = spec.coupling.hi,
        tlo = spec.t.lo,
        thi = spec.t.hi,
    );
    std::fs::write(path, script).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    let mut f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn parse_field(record: &csv::StringRecord, i: usize, line: u64) -> CliResult<f64> {
    let raw = record.get(i).unwrap_or("");
    raw.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("grid line {line}: column {} is not a number: `{raw}`", GRID_HEADER[i])))
}

fn uniform(values: &[f64], what: &str) -> CliResult<Range> {
    let r = Range::new(values[0], values[values.len() - 1], values.len());
    if values.len() < 2 || values.iter().enumerate().any(|(i, v)| *v != r.value(i)) {
        return Err(CliError::Usage(format!("grid {what} values are not a uniform lo:hi:n range")));
    }
    Ok(r)
}

/// Reads a grid written by [`write_grid`]. Settings the file does not carry
/// (offsets, size, threshold) come from `base`.
pub fn read_grid(path: &Path, base: &SweepSpec) -> CliResult<SweepGrid> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(GRID_HEADER.iter().copied()) {
        return Err(CliError::Usage(format!("{}: not a grid file (unexpected header)", path.display())));
    }
    let mut model = None;
    let mut cells = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k as u64 + 2;
        let m = match rec.get(0) {
            Some("stoner") => ModeModel::Stoner,
            Some("bcs") => ModeModel::Bcs,
            other => return Err(CliError::Usage(format!("grid line {line}: unknown model {other:?}"))),
        };
        if *model.get_or_insert(m) != m {
            return Err(CliError::Usage(format!("grid line {line}: mixed models")));
        }
        let x = |i| parse_field(&rec, i, line);
        cells.push(SweepCell {
            t: x(1)?,
            coupling: x(2)?,
            order_param: x(3)?,
            mu: x(4)?,
            f: x(5)?,
            c: x(6)?,
            h: x(7)?,
            uhl_dev_max: x(10)?,
            critical: x(11)? != 0.0,
            converged: x(12)? != 0.0,
            diagnostics: None,
        });
    }
    let Some(model) = model else {
        return Err(CliError::Usage(format!("{}: grid file has no cells", path.display())));
    };
    if model != base.model {
        return Err(CliError::Usage(format!(
            "grid holds the {} model but {} was requested",
            model_name(model),
            model_name(base.model)
        )));
    }
    let couplings: Vec<f64> = cells.iter().take_while(|c| c.t == cells[0].t).map(|c| c.coupling).collect();
    let nc = couplings.len();
    if nc < 2 || cells.len() % nc != 0 {
        return Err(CliError::Usage("grid rows have unequal lengths".into()));
    }
    let temps: Vec<f64> = cells.iter().step_by(nc).map(|c| c.t).collect();
    let spec = SweepSpec {
        t: uniform(&temps, "t")?,
        coupling: uniform(&couplings, "coupling")?,
        ..*base
    };
    for (k, c) in cells.iter().enumerate() {
        if c.t != temps[k / nc] || c.coupling != couplings[k % nc] {
            return Err(CliError::Usage(format!("grid line {}: cell out of row-major order", k + 2)));
        }
    }
    Ok(SweepGrid { spec, cells })
}
