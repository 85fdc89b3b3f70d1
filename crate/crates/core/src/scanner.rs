//! Sweeps over the `(t, coupling)` plane, critical-line detection and the
//! fidelity-dip comparison.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::algebra::{build_mode_operators, gibbs_root, polar_from_roots, DenseOperator, ModeModel, ModeOperators, SpinVector, SPIN_BLOCK};
use crate::bcs::{self, BcsParams, BcsState, ModePoint};
use crate::error::{Error, Result};
use crate::numerics::{solve_bracketed, SolverConfig};
use crate::stoner::{self, Branch, StonerFields, StonerParams, StonerState};

/// `n` evenly spaced values from `lo` to `hi` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.n - 1) as f64
        }
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.value(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub model: ModeModel,
    pub t: Range,
    pub coupling: Range,
    pub dt: f64,
    /// `δu` for Stoner, `δv` for BCS.
    pub dc: f64,
    /// `size` for Stoner, `nu` for BCS.
    pub size: f64,
    /// Order-parameter threshold of the ordered phase.
    pub threshold: f64,
}

impl SweepSpec {
    pub fn default_for(model: ModeModel) -> Self {
        match model {
            ModeModel::Stoner => Self {
                model,
                t: Range::new(0.01, 0.6, 200),
                coupling: Range::new(0.6, 1.6, 200),
                dt: 0.0,
                dc: 2e-3,
                size: 750.0,
                threshold: 1e-6,
            },
            ModeModel::Bcs => Self {
                model,
                t: Range::new(0.005, 0.12, 200),
                coupling: Range::new(0.05, 0.5, 200),
                dt: 0.0,
                dc: 1e-3,
                size: 500.0,
                threshold: 1e-6,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.to_string()));
        if self.t.n < 2 || self.coupling.n < 2 {
            return bad("grid counts must be at least 2");
        }
        if !(self.t.hi > self.t.lo) || !(self.coupling.hi > self.coupling.lo) {
            return bad("ranges must have positive length");
        }
        if self.dt == 0.0 && self.dc == 0.0 {
            return bad("at least one offset must be nonzero");
        }
        if !(self.t.lo > 0.0) || self.t.lo + self.dt.min(0.0) <= 0.0 {
            return bad("temperatures must stay positive");
        }
        if self.coupling.lo < 0.0 || self.coupling.lo + self.dc.min(0.0) < 0.0 {
            return bad("couplings must stay non-negative");
        }
        if !(self.size > 0.0) || !(self.threshold > 0.0) {
            return bad("size and threshold must be positive");
        }
        if self.dt.abs() > 0.1 || self.dc.abs() > 0.1 {
            return bad("offsets must not exceed 0.1");
        }
        Ok(())
    }

    fn stoner_params(&self, t: f64, u: f64) -> StonerParams {
        StonerParams::new(t, u).with_size(self.size).with_delta(self.dt, self.dc)
    }

    fn bcs_params(&self, t: f64, v: f64) -> BcsParams {
        BcsParams::new(t, v).with_nu(self.size).with_delta(self.dt, self.dc)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub t: f64,
    pub coupling: f64,
    pub order_param: f64,
    /// Chemical potential (Stoner only; NaN for BCS).
    pub mu: f64,
    pub f: f64,
    pub c: f64,
    pub h: f64,
    pub uhl_dev_max: f64,
    pub critical: bool,
    pub converged: bool,
    pub diagnostics: Option<String>,
}

impl SweepCell {
    fn failed(t: f64, coupling: f64, err: &Error) -> Self {
        Self {
            t,
            coupling,
            order_param: f64::NAN,
            mu: f64::NAN,
            f: f64::NAN,
            c: f64::NAN,
            h: f64::NAN,
            uhl_dev_max: f64::NAN,
            critical: false,
            converged: false,
            diagnostics: Some(err.to_string()),
        }
    }

    pub fn c_minus_f(&self) -> f64 {
        self.c - self.f
    }

    pub fn h_minus_f(&self) -> f64 {
        self.h - self.f
    }
}

/// Row-major grid: row `i` holds temperature `spec.t.value(i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub spec: SweepSpec,
    pub cells: Vec<SweepCell>,
}

impl SweepGrid {
    pub fn cell(&self, it: usize, ic: usize) -> &SweepCell {
        &self.cells[it * self.spec.coupling.n + ic]
    }

    pub fn row(&self, it: usize) -> &[SweepCell] {
        let n = self.spec.coupling.n;
        &self.cells[it * n..(it + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[SweepCell]> {
        self.cells.chunks(self.spec.coupling.n)
    }

    pub fn failure_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.converged).count()
    }

    pub fn failure_rate(&self) -> f64 {
        self.failure_count() as f64 / self.cells.len() as f64
    }
}

fn stoner_ops() -> &'static ModeOperators {
    static OPS: OnceLock<ModeOperators> = OnceLock::new();
    OPS.get_or_init(|| build_mode_operators(ModeModel::Stoner))
}

/// Largest `‖Û − Î‖` over modes sampled around the Fermi points.
fn stoner_uhl_dev(fa: &StonerFields, fb: &StonerFields) -> Result<f64> {
    let ops = stoner_ops();
    let mut worst: f64 = 0.0;
    let centres = [-fa.shift - 0.5 * fa.h_z * fa.t, -fa.shift + 0.5 * fa.h_z * fa.t];
    for c in centres {
        for s in [-4.0, -1.0, 0.0, 1.0, 4.0] {
            let e = (c + s * fa.t).max(0.0);
            let ga = ops.number_generator(fa.alpha(e), &SpinVector::along_z(fa.h_z));
            let gb = ops.number_generator(fb.alpha(e), &SpinVector::along_z(fb.h_z));
            let polar = polar_from_roots(&gibbs_root(&ga)?, &gibbs_root(&gb)?)?;
            let shifted = polar.connection - DenseOperator::identity();
            worst = worst.max(shifted.block_norm(SPIN_BLOCK));
        }
    }
    Ok(worst)
}

/// Largest Uhlmann deviation over modes at `ε̄ = ±s·max(δ_a, δ_b, t)`.
pub fn bcs_uhl_dev(p: &BcsParams, a: &BcsState, b: &BcsState) -> Result<f64> {
    let pb = p.neighbor();
    let scale = a.gap.max(b.gap).max(p.t);
    let mut worst: f64 = 0.0;
    for s in [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        for sign in [1.0, -1.0] {
            let xi = sign * s * scale;
            let m = bcs::uhlmann_mode(&ModePoint::new(p.t, a.gap, xi), &ModePoint::new(pb.t, b.gap, xi))?;
            worst = worst.max(m.deviation);
        }
    }
    Ok(worst)
}

fn stoner_row(spec: &SweepSpec, t: f64) -> Vec<SweepCell> {
    let mut seed = StonerState::paramagnetic_seed();
    spec.coupling
        .values()
        .into_iter()
        .map(|u| {
            let p = spec.stoner_params(t, u);
            let run = || -> Result<(SweepCell, StonerState)> {
                let a = stoner::solve_equilibrium(&p, &seed)?;
                let b = stoner::solve_equilibrium(&p.neighbor(), &a)?;
                let fid = stoner::total_fidelity(&p, &a, &b)?;
                let dev = stoner_uhl_dev(&StonerFields::new(&p, &a), &StonerFields::new(&p.neighbor(), &b))?;
                let cell = SweepCell {
                    t,
                    coupling: u,
                    order_param: a.m,
                    mu: a.mu,
                    f: fid.f,
                    c: fid.c,
                    h: fid.h,
                    uhl_dev_max: dev,
                    critical: false,
                    converged: true,
                    diagnostics: None,
                };
                Ok((cell, a))
            };
            match run() {
                Ok((cell, a)) => {
                    seed = a;
                    cell
                }
                Err(e) => {
                    seed = StonerState::paramagnetic_seed();
                    SweepCell::failed(t, u, &e)
                }
            }
        })
        .collect()
}

fn bcs_cell(spec: &SweepSpec, t: f64, v: f64) -> SweepCell {
    let p = spec.bcs_params(t, v);
    let run = || -> Result<SweepCell> {
        let a = bcs::solve_gap(v, t)?;
        let pb = p.neighbor();
        let b = bcs::solve_gap(pb.v, pb.t)?;
        let fid = bcs::total_fidelity(&p, &a, &b)?;
        Ok(SweepCell {
            t,
            coupling: v,
            order_param: a.gap,
            mu: f64::NAN,
            f: fid.f,
            c: fid.c,
            h: fid.h,
            uhl_dev_max: bcs_uhl_dev(&p, &a, &b)?,
            critical: false,
            converged: true,
            diagnostics: None,
        })
    };
    run().unwrap_or_else(|e| SweepCell::failed(t, v, &e))
}

fn mark_critical(grid: &mut SweepGrid) {
    let n = grid.spec.coupling.n;
    let thr = grid.spec.threshold;
    for row in grid.cells.chunks_mut(n) {
        for j in 0..n - 1 {
            let (a, b) = (&row[j], &row[j + 1]);
            if a.converged && b.converged && (a.order_param > thr) != (b.order_param > thr) {
                row[j].critical = true;
            }
        }
    }
}

/// Evaluates every cell. Stoner rows are continued along `u`; BCS columns
/// along `t`. Units run in parallel on the current rayon pool and are
/// assembled by index, so the result does not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepGrid> {
    spec.validate()?;
    let (nt, nc) = (spec.t.n, spec.coupling.n);
    let mut cells = match spec.model {
        ModeModel::Stoner => {
            let rows: Vec<Vec<SweepCell>> = (0..nt)
                .into_par_iter()
                .map(|i| stoner_row(spec, spec.t.value(i)))
                .collect();
            rows.into_iter().flatten().collect::<Vec<_>>()
        }
        ModeModel::Bcs => {
            let cols: Vec<Vec<SweepCell>> = (0..nc)
                .into_par_iter()
                .map(|j| {
                    let v = spec.coupling.value(j);
                    (0..nt).map(|i| bcs_cell(spec, spec.t.value(i), v)).collect()
                })
                .collect();
            let mut cells = Vec::with_capacity(nt * nc);
            for i in 0..nt {
                for col in &cols {
                    cells.push(col[i].clone());
                }
            }
            cells
        }
    };
    cells.shrink_to_fit();
    let mut grid = SweepGrid { spec: *spec, cells };
    mark_critical(&mut grid);
    Ok(grid)
}

/// Order parameter at one point, solved from scratch.
pub fn order_parameter(spec: &SweepSpec, t: f64, coupling: f64) -> Result<f64> {
    match spec.model {
        ModeModel::Stoner => {
            let s = stoner::solve_equilibrium(&spec.stoner_params(t, coupling), &StonerState::paramagnetic_seed())?;
            Ok(if s.branch == Branch::Magnetic { s.m } else { 0.0 })
        }
        ModeModel::Bcs => Ok(bcs::solve_gap(coupling, t)?.gap),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub t: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalLine {
    pub points: Vec<CriticalPoint>,
    /// Temperatures of rows without an onset.
    pub omitted: Vec<f64>,
}

/// Onset coupling per row, refined by bisection to `1e-6` between the
/// first pair of cells that brackets the threshold.
pub fn detect_critical_line(grid: &SweepGrid) -> Result<CriticalLine> {
    let spec = grid.spec;
    let rows: Vec<Result<Option<CriticalPoint>>> = (0..spec.t.n)
        .into_par_iter()
        .map(|i| {
            let row = grid.row(i);
            let Some(j) = row.iter().position(|c| c.critical) else {
                return Ok(None);
            };
            let t = row[j].t;
            let thr = spec.threshold;
            let cfg = SolverConfig::default().with_step_tol(1e-6);
            let rising = row[j + 1].order_param > thr;
            let c = solve_bracketed(
                |c| {
                    let ordered = order_parameter(&spec, t, c)? > thr;
                    Ok(if ordered == rising { 1.0 } else { -1.0 })
                },
                row[j].coupling,
                row[j + 1].coupling,
                &cfg,
            )?;
            Ok(Some(CriticalPoint { t, coupling: c }))
        })
        .collect();
    let mut line = CriticalLine {
        points: Vec::new(),
        omitted: Vec::new(),
    };
    for (i, r) in rows.into_iter().enumerate() {
        match r? {
            Some(p) => line.points.push(p),
            None => line.omitted.push(spec.t.value(i)),
        }
    }
    Ok(line)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityDip {
    pub t: f64,
    /// `None` for rows whose `F` is flat to `1e-12`.
    pub coupling: Option<f64>,
    pub f_min: f64,
}

/// Per-row argmin of `F` over converged cells.
pub fn locate_fidelity_dip(grid: &SweepGrid) -> Vec<FidelityDip> {
    grid.rows()
        .map(|row| {
            let t = row[0].t;
            let ok: Vec<&SweepCell> = row.iter().filter(|c| c.converged && c.f.is_finite()).collect();
            let Some(min) = ok.iter().min_by(|a, b| a.f.total_cmp(&b.f)) else {
                return FidelityDip {
                    t,
                    coupling: None,
                    f_min: f64::NAN,
                };
            };
            let max = ok.iter().map(|c| c.f).fold(f64::NEG_INFINITY, f64::max);
            FidelityDip {
                t,
                coupling: (max - min.f > 1e-12).then_some(min.coupling),
                f_min: min.f,
            }
        })
        .collect()
}

/// One row of the line/dip comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineComparison {
    pub t: f64,
    pub coupling_c: f64,
    pub coupling_dip: f64,
    /// `|coupling_dip − coupling_c|` in units of the grid spacing.
    pub cells_apart: f64,
}

pub fn compare_line_and_dip(grid: &SweepGrid, line: &CriticalLine) -> Vec<LineComparison> {
    let dips = locate_fidelity_dip(grid);
    let spacing = grid.spec.coupling.spacing();
    line.points
        .iter()
        .map(|p| {
            let dip = dips
                .iter()
                .find(|d| d.t == p.t)
                .and_then(|d| d.coupling)
                .unwrap_or(f64::NAN);
            LineComparison {
                t: p.t,
                coupling_c: p.coupling,
                coupling_dip: dip,
                cells_apart: (dip - p.coupling).abs() / spacing,
            }
        })
        .collect()
}

/// Both sides of the small-field relation between `C` and the susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityCheck {
    /// `−2 ln C/(β N Δh²)` for states at `h = ±Δh`.
    pub lhs: f64,
    /// `∂m/∂h` by finite differences.
    pub rhs: f64,
    pub rel_err: f64,
}

fn thermodynamic_lhs(p: &StonerParams, zero: &StonerState, dh: f64) -> Result<f64> {
    let plus = StonerParams { h_ext: dh, ..*p };
    let minus = StonerParams { h_ext: -dh, ..*p };
    let sp = stoner::solve_equilibrium(&plus, zero)?;
    let sm = stoner::solve_equilibrium(&minus, &StonerState { m: -sp.m, ..sp })?;
    // ln C / N = −β [A(0) − ½A(Δh) − ½A(−Δh)]
    let d_plus = stoner::free_energy_difference(p, zero, &plus, &sp)?;
    let d_minus = stoner::free_energy_difference(p, zero, &minus, &sm)?;
    Ok((d_plus + d_minus) / (dh * dh))
}

/// Compares `−2 ln C/(βΔh²)` with `χ = ∂m/∂h`, both Richardson-extrapolated
/// from `h_probe` and `h_probe/2`.
pub fn check_susceptibility_relation(p: &StonerParams, h_probe: f64) -> Result<SusceptibilityCheck> {
    let base = StonerParams { h_ext: 0.0, ..*p };
    let zero = stoner::solve_equilibrium(&base, &StonerState::paramagnetic_seed())?;
    if zero.branch == Branch::Magnetic {
        return Err(Error::Domain(format!("(t, u) = ({}, {}) is magnetic", p.t, p.u)));
    }
    let richardson = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
        Ok((4.0 * f(0.5 * h_probe)? - f(h_probe)?) / 3.0)
    };
    let lhs = richardson(&|dh| thermodynamic_lhs(&base, &zero, dh))?;
    let rhs = richardson(&|dh| stoner::susceptibility_fd(&base, dh))?;
    Ok(SusceptibilityCheck {
        lhs,
        rhs,
        rel_err: (lhs - rhs).abs() / rhs.abs(),
    })
}
