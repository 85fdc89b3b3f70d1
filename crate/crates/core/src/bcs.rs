//! BCS superconductor in the mean-field approximation.
//!
//! Energies are measured in units of `ħω_D`, `v = D_F·V` and `nu = V·D_F·ħω_D`
//! is the number of modes per unit energy. The chemical potential is pinned
//! at the Fermi level, so each mode is described by its Nambu vector
//! `(2βΔ*, 2βΔ, −2βε̄)` alone.

use std::sync::OnceLock;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::algebra::{
    build_mode_operators, gibbs_root, gibbs_state, polar_from_roots, ln_cosh, ln_cosh_half_from_ln_cosh, log_cosh_c,
    softplus, DenseOperator, ModeModel, NambuVector, NAMBU_BLOCK,
};
use crate::error::{Error, Result};
use crate::numerics::{integrate_finite, integrate_with_breakpoints, solve_bracketed, NodeSet, Quadrature, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcsParams {
    pub v: f64,
    pub t: f64,
    pub nu: f64,
    /// Offsets `(δt, δv)` of the neighbouring point.
    pub delta: (f64, f64),
}

impl BcsParams {
    pub fn new(t: f64, v: f64) -> Self {
        Self {
            v,
            t,
            nu: 500.0,
            delta: (0.0, 1e-3),
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_delta(mut self, dt: f64, dv: f64) -> Self {
        self.delta = (dt, dv);
        self
    }

    pub fn neighbor(&self) -> Self {
        Self {
            t: self.t + self.delta.0,
            v: self.v + self.delta.1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.v >= 0.0
            && self.t >= 0.0
            && self.nu > 0.0
            && self.v.is_finite()
            && self.t.is_finite()
            && self.delta.0.is_finite()
            && self.delta.1.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid BCS parameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcsState {
    /// `δ = Δ/ħω_D`.
    pub gap: f64,
    pub converged: bool,
}

// ---------------------------------------------------------------------------
// gap equation

fn gap_quadrature() -> Quadrature {
    Quadrature::default().with_rel_tol(2e-14)
}

/// Breakpoints `s·4^k` below 1 for the scales `s` of the integrand.
fn scale_breakpoints(scales: &[f64]) -> Vec<f64> {
    let mut pts = Vec::new();
    for &s in scales {
        let mut x = s;
        while x > 0.0 && x < 1.0 {
            pts.push(x);
            x *= 4.0;
        }
    }
    pts
}

/// `tanh(E/2t)/E` with its `E → 0` limit.
fn gap_kernel(e: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 1.0 / e;
    }
    let z = 0.5 * e / t;
    if z < 1e-8 {
        0.5 / t
    } else {
        z.tanh() / e
    }
}

/// `1 − v ∫₀¹ tanh(√(x²+δ²)/2t)/√(x²+δ²) dx`.
pub fn gap_residual(v: f64, t: f64, gap: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0 - v * (1.0 / gap).asinh());
    }
    let pts = scale_breakpoints(&[gap, t]);
    let i = integrate_with_breakpoints(
        |x| gap_kernel((x * x + gap * gap).sqrt(), t),
        0.0,
        1.0,
        &pts,
        &gap_quadrature(),
    )?;
    Ok(1.0 - v * i)
}

/// Zero-temperature gap `1/sinh(1/v)`.
pub fn zero_t_gap(v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let x = 1.0 / v;
    if x > 700.0 {
        2.0 * (-x).exp()
    } else {
        1.0 / x.sinh()
    }
}

/// Self-consistent gap at `(v, t)`; zero when no positive root exists.
pub fn solve_gap(v: f64, t: f64) -> Result<BcsState> {
    if !(v >= 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("invalid (v, t) = ({v}, {t})")));
    }
    let normal = BcsState {
        gap: 0.0,
        converged: true,
    };
    if v == 0.0 {
        return Ok(normal);
    }
    let top = zero_t_gap(v);
    if t == 0.0 || top == 0.0 {
        return Ok(BcsState {
            gap: top,
            converged: true,
        });
    }
    if gap_residual(v, t, 0.0)? >= 0.0 {
        return Ok(normal);
    }
    // deep in the ordered phase the T=0 gap is a root to rounding
    let hi = top * (1.0 + 1e-9);
    if gap_residual(v, t, hi)? <= 0.0 {
        return Ok(BcsState {
            gap: top,
            converged: true,
        });
    }
    let cfg = SolverConfig::default().with_step_tol(1e-17);
    let gap = solve_bracketed(|g| gap_residual(v, t, g), 0.0, hi, &cfg)?;
    Ok(BcsState { gap, converged: true })
}

/// Temperature at which the gap closes, from the linearised gap equation.
pub fn critical_temperature(v: f64) -> Result<f64> {
    if !(v > 0.0) {
        return Err(Error::InvalidParameter(format!("coupling {v} must be positive")));
    }
    let guess = 1.134 * (-1.0 / v).exp();
    if guess < 1e-280 {
        return Err(Error::Domain(format!("critical temperature underflows at v = {v}")));
    }
    let f = |lt: f64| gap_residual(v, lt.exp(), 0.0);
    let (mut lo, mut hi) = ((0.5 * guess).ln(), (2.0 * guess).ln());
    while f(lo)? > 0.0 {
        lo -= 1.0;
    }
    while f(hi)? < 0.0 {
        hi += 1.0;
    }
    let cfg = SolverConfig::default().with_step_tol(1e-13);
    Ok(solve_bracketed(f, lo, hi, &cfg)?.exp())
}

// ---------------------------------------------------------------------------
// per-mode quantities

/// One mode at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePoint {
    pub t: f64,
    pub gap: Complex64,
    pub xi: f64,
}

impl ModePoint {
    pub fn new(t: f64, gap: f64, xi: f64) -> Self {
        Self {
            t,
            gap: Complex64::new(gap, 0.0),
            xi,
        }
    }

    pub fn nambu(&self) -> NambuVector {
        NambuVector::nambu(1.0 / self.t, self.gap, self.xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTriple {
    pub f: f64,
    pub c: f64,
    pub h: f64,
    pub uhl_dev: f64,
}

fn ln_one_plus_cosh_from_ln_cosh(l: f64) -> f64 {
    softplus(l)
}

/// `(ln F_k, ln C_k, ln H_k)` between two Nambu vectors.
pub fn mode_logs_vectors(a: &NambuVector, b: &NambuVector) -> (f64, f64, f64) {
    if a == b {
        return (0.0, 0.0, 0.0);
    }
    let na = a.norm().expect("physical Nambu vector");
    let nb = b.norm().expect("physical Nambu vector");
    let norm = 0.5 * ln_one_plus_cosh_from_ln_cosh(ln_cosh(0.5 * na))
        + 0.5 * ln_one_plus_cosh_from_ln_cosh(ln_cosh(0.5 * nb));
    let lc = log_cosh_c(a, b).expect("physical Nambu vector");
    let f = ln_one_plus_cosh_from_ln_cosh(ln_cosh_half_from_ln_cosh(lc)) - norm;
    let mean = (*a + *b).norm().expect("physical Nambu vector");
    let c = ln_one_plus_cosh_from_ln_cosh(ln_cosh(0.25 * mean)) - norm;
    let lh = log_cosh_c(&a.scale(0.5), &b.scale(0.5)).expect("physical Nambu vector");
    let h = ln_one_plus_cosh_from_ln_cosh(lh) - norm;
    (f.min(0.0), c.min(0.0), h.min(0.0))
}

pub fn mode_logs(pa: &ModePoint, pb: &ModePoint) -> (f64, f64, f64) {
    mode_logs_vectors(&pa.nambu(), &pb.nambu())
}

fn nambu_ops() -> &'static crate::algebra::ModeOperators {
    static OPS: OnceLock<crate::algebra::ModeOperators> = OnceLock::new();
    OPS.get_or_init(|| build_mode_operators(ModeModel::Bcs))
}

/// Dense per-mode Gibbs state `e^{a·T̂}/Tr e^{a·T̂}`.
pub fn mode_density(p: &ModePoint) -> Result<DenseOperator> {
    gibbs_state(&nambu_ops().generator(&p.nambu()))
}

/// Per-mode Uhlmann data: closed-form connection, dense modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UhlmannMode {
    pub connection: DenseOperator,
    /// `‖Û − Î‖₂` on the `Î_t` block.
    pub deviation: f64,
    /// `Tr[|√ρ_a√ρ_b|(Û − Î)]`.
    pub trace_term: f64,
    pub degenerate: bool,
}

/// `√ρ` restricted to the `Î_t` block, up to a positive factor:
/// `1 + 2 tanh(|a|/4) Ĝ(â)`.
fn half_root_block(p: &ModePoint) -> Result<Matrix2<Complex64>> {
    let a = p.nambu();
    let n = a.norm()?;
    let mut s = Matrix2::identity();
    if n > 0.0 {
        let g = nambu_ops().generator(&a.scale(1.0 / n));
        let k = 2.0 * (0.25 * n).tanh();
        for (i, &r) in NAMBU_BLOCK.iter().enumerate() {
            for (j, &c) in NAMBU_BLOCK.iter().enumerate() {
                s[(i, j)] += g.0[(r, c)] * k;
            }
        }
    }
    Ok(s)
}

/// Uhlmann connection from the 2×2 polar formula: for `M = W|M|` with
/// `det M > 0`, `W ∝ M + adj(M)†`. Stays exact when the states are nearly
/// pure and the dense SVD loses the small singular directions.
pub fn closed_form_connection(pa: &ModePoint, pb: &ModePoint) -> Result<DenseOperator> {
    let m = half_root_block(pa)? * half_root_block(pb)?;
    let adj = Matrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]);
    let k = m + adj.adjoint();
    let det = k[(0, 0)] * k[(1, 1)] - k[(0, 1)] * k[(1, 0)];
    let w = k.unscale(det.norm().sqrt());
    let u = w.adjoint();
    let mut out = DenseOperator::identity();
    for (i, &r) in NAMBU_BLOCK.iter().enumerate() {
        for (j, &c) in NAMBU_BLOCK.iter().enumerate() {
            out.0[(r, c)] = u[(i, j)];
        }
    }
    Ok(out)
}

pub fn uhlmann_mode(pa: &ModePoint, pb: &ModePoint) -> Result<UhlmannMode> {
    let sa = gibbs_root(&nambu_ops().generator(&pa.nambu()))?;
    let sb = gibbs_root(&nambu_ops().generator(&pb.nambu()))?;
    let polar = polar_from_roots(&sa, &sb)?;
    let connection = closed_form_connection(pa, pb)?;
    let shifted = connection - DenseOperator::identity();
    Ok(UhlmannMode {
        connection,
        deviation: shifted.block_norm(NAMBU_BLOCK),
        trace_term: (polar.modulus * shifted).trace().re,
        degenerate: polar.degenerate,
    })
}

/// Closed-form `F_k`, `C_k`, `H_k` with the dense Uhlmann deviation.
pub fn mode_triple(pa: &ModePoint, pb: &ModePoint) -> Result<ModeTriple> {
    let (f, c, h) = mode_logs(pa, pb);
    Ok(ModeTriple {
        f: f.exp(),
        c: c.exp(),
        h: h.exp(),
        uhl_dev: uhlmann_mode(pa, pb)?.deviation,
    })
}

// ---------------------------------------------------------------------------
// totals

/// The node set of the mode integral over the Debye window.
pub fn window_nodes() -> &'static NodeSet {
    static NODES: OnceLock<NodeSet> = OnceLock::new();
    NODES.get_or_init(|| NodeSet::graded_symmetric(40, 1e-5, 25))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcsFidelity {
    pub f: f64,
    pub c: f64,
    pub h: f64,
}

/// `ln X = nu·∫₋₁¹ ln X_k dε̄` between `a` at `p` and `b` at `p.neighbor()`,
/// plus the commuting contribution of the modes outside the window when the
/// two temperatures differ.
pub fn total_fidelity(p: &BcsParams, a: &BcsState, b: &BcsState) -> Result<BcsFidelity> {
    p.validate()?;
    let pb = p.neighbor();
    if !(p.t > 0.0 && pb.t > 0.0) {
        return Err(Error::InvalidParameter("total fidelity needs t > 0 at both points".into()));
    }
    let (mut lf, mut lc, mut lh) = (0.0, 0.0, 0.0);
    let nodes = window_nodes();
    for (x, w) in nodes.nodes.iter().zip(&nodes.weights) {
        let (f, c, h) = mode_logs(&ModePoint::new(p.t, a.gap, *x), &ModePoint::new(pb.t, b.gap, *x));
        lf += w * f;
        lc += w * c;
        lh += w * h;
    }
    if p.t != pb.t {
        let width = p.t.max(pb.t);
        let outside = integrate_finite(
            |x| mode_logs(&ModePoint::new(p.t, 0.0, x), &ModePoint::new(pb.t, 0.0, x)).0,
            1.0,
            1.0 + 40.0 * width,
            &Quadrature::default().with_rel_tol(1e-10),
        )?;
        // symmetric in ε̄ and identical for F, C and H
        lf += 2.0 * outside;
        lc += 2.0 * outside;
        lh += 2.0 * outside;
    }
    Ok(BcsFidelity {
        f: (p.nu * lf).exp(),
        c: (p.nu * lc).exp(),
        h: (p.nu * lh).exp(),
    })
}

/// Ground-state fidelity `∏_k √(½(1 + (ε̄² + Δ_aΔ_b)/(E_aE_b)))`.
pub fn zero_t_fidelity(va: f64, vb: f64, nu: f64) -> f64 {
    let (da, db) = (zero_t_gap(va), zero_t_gap(vb));
    let log = window_nodes().integrate(|x| zero_t_mode_log(da, db, x));
    (nu * log).exp()
}

/// `ln √(½(1 + n̂_a·n̂_b))` for one mode at zero temperature.
pub fn zero_t_mode_log(da: f64, db: f64, xi: f64) -> f64 {
    // with n̂ = (sin θ, cos θ), ½(1 + n̂_a·n̂_b) = cos²((θ_a − θ_b)/2)
    let (ta, tb) = (da.atan2(-xi), db.atan2(-xi));
    let s = (0.25 * (ta - tb)).sin();
    (-2.0 * s * s).ln_1p()
}

/// One row of [`uhlmann_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UhlmannSample {
    pub xi: f64,
    pub uhl_dev: f64,
    /// `(H_k − F_k) − Tr[|√ρ_a√ρ_b|(Û − Î)]`.
    pub identity_residual: f64,
}

pub fn uhlmann_profile(
    p: &BcsParams,
    a: &BcsState,
    b: &BcsState,
    xi_grid: &[f64],
) -> Result<Vec<UhlmannSample>> {
    let pb = p.neighbor();
    if !(p.t > 0.0 && pb.t > 0.0) {
        return Err(Error::InvalidParameter("Uhlmann profile needs t > 0".into()));
    }
    xi_grid
        .iter()
        .map(|&xi| {
            let ma = ModePoint::new(p.t, a.gap, xi);
            let mb = ModePoint::new(pb.t, b.gap, xi);
            let (lf, _, lh) = mode_logs(&ma, &mb);
            let u = uhlmann_mode(&ma, &mb)?;
            Ok(UhlmannSample {
                xi,
                uhl_dev: u.deviation,
                identity_residual: (lh.exp() - lf.exp()) - u.trace_term,
            })
        })
        .collect()
}

/// Ordered product of the pairwise connections around a closed loop of
/// `(t, v)` points for the mode at `xi`.
pub fn loop_composition(points: &[(f64, f64)], xi: f64) -> Result<DenseOperator> {
    if points.len() < 3 || points.first() != points.last() {
        return Err(Error::InvalidParameter("a loop needs at least three points and first = last".into()));
    }
    let modes = points
        .iter()
        .map(|&(t, v)| {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("loop point t = {t} must be positive")));
            }
            Ok(ModePoint::new(t, solve_gap(v, t)?.gap, xi))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = DenseOperator::identity();
    for w in modes.windows(2) {
        total = uhlmann_mode(&w[0], &w[1])?.connection * total;
    }
    Ok(total)
}
