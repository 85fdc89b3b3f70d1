//! Stoner–Hubbard itinerant magnet in the mean-field approximation.
//!
//! Units: `ε_F = 1`, `u = D_F·U`, `m = M/N`, `size = V·D_F·ε_F = ¾N`. With
//! the shorthand `E_σ(ε) = ε + (4/3)u(½ ∓ m) − μ ∓ h/2` the self-consistent
//! pair reads
//!
//! ```text
//! 1 = (3/4) ∫ √ε [f(E↑) + f(E↓)] dε
//! m = (3/8) ∫ √ε [f(E↑) − f(E↓)] dε
//! ```

use std::f64::consts::LN_2;

use crate::algebra::{ln_cosh, log_cosh_c_split, softplus, SpinVector};
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_semi_infinite, integrate_semi_infinite_with_edges, solve_bracketed, solve_system,
    Quadrature, SolverConfig, Weight,
};

/// Coupling above which the `T = 0` ground state is fully polarised.
pub fn full_polarization_coupling() -> f64 {
    1.5 / 2f64.cbrt()
}

const M_MIN: f64 = 1e-7;
const TWO_THIRDS: f64 = 2.0 / 3.0;
const FOUR_THIRDS: f64 = 4.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StonerParams {
    pub u: f64,
    pub t: f64,
    pub size: f64,
    /// Offsets `(δt, δu)` of the neighbouring point.
    pub delta: (f64, f64),
    /// Symmetry-breaking field added to `h_z` (zero except for probes).
    pub h_ext: f64,
}

impl StonerParams {
    pub fn new(t: f64, u: f64) -> Self {
        Self {
            u,
            t,
            size: 750.0,
            delta: (0.0, 2e-3),
            h_ext: 0.0,
        }
    }

    pub fn with_size(mut self, size: f64) -> Self {
        self.size = size;
        self
    }

    pub fn with_delta(mut self, dt: f64, du: f64) -> Self {
        self.delta = (dt, du);
        self
    }

    pub fn with_field(mut self, h_ext: f64) -> Self {
        self.h_ext = h_ext;
        self
    }

    /// The neighbouring point `q + δq`.
    pub fn neighbor(&self) -> Self {
        Self {
            t: self.t + self.delta.0,
            u: self.u + self.delta.1,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.u >= 0.0
            && self.t >= 0.0
            && self.size > 0.0
            && self.delta.0.abs() <= 0.1
            && self.delta.1.abs() <= 0.1
            && self.u.is_finite()
            && self.t.is_finite()
            && self.h_ext.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid Stoner parameters {self:?}")))
        }
    }
}

/// Dimensionless Fermi momenta `k_F↑/k_F`, `k_F↓/k_F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiMomenta {
    pub x: f64,
    pub y: f64,
}

impl FermiMomenta {
    pub fn magnetization(&self) -> f64 {
        (self.x.powi(3) - self.y.powi(3)) / 4.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Paramagnetic,
    Magnetic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StonerState {
    pub m: f64,
    pub mu: f64,
    pub converged: bool,
    pub branch: Branch,
}

impl StonerState {
    pub fn paramagnetic_seed() -> Self {
        Self {
            m: 0.0,
            mu: 1.0,
            converged: false,
            branch: Branch::Paramagnetic,
        }
    }

    pub fn magnetic_seed() -> Self {
        Self {
            m: 0.25,
            mu: 1.0,
            converged: false,
            branch: Branch::Magnetic,
        }
    }
}

// ---------------------------------------------------------------------------
// zero temperature

/// Fermi momenta of the ground state.
pub fn zero_t_solve(u: f64) -> Result<FermiMomenta> {
    if !(u >= 0.0) {
        return Err(Error::InvalidParameter(format!("coupling {u} must be non-negative")));
    }
    if u <= 1.0 {
        return Ok(FermiMomenta { x: 1.0, y: 1.0 });
    }
    if u >= full_polarization_coupling() {
        return Ok(FermiMomenta {
            x: 2f64.cbrt(),
            y: 0.0,
        });
    }
    // s = x + y solves s³ − (9/4u)s² + 1 = 0 on the branch s ∈ (2^{1/3}, 2/u)
    let k = 9.0 / (4.0 * u);
    let cfg = SolverConfig::default().with_step_tol(1e-15);
    let s = solve_bracketed(|s| Ok(s * s * (s - k) + 1.0), 2f64.cbrt(), 2.0 / u, &cfg)?;
    let p = s * s - 1.5 * s / u;
    let disc = (s * s - 4.0 * p).max(0.0).sqrt();
    let momenta = FermiMomenta {
        x: 0.5 * (s + disc),
        y: (0.5 * (s - disc)).max(0.0),
    };
    let balanced = ground_energy(u, 0.0);
    if ground_energy(u, momenta.magnetization()) > balanced {
        return Err(Error::Domain(format!("magnetic root above the balanced energy at u = {u}")));
    }
    Ok(momenta)
}

/// `(dx/du, dy/du)` on the partially polarised branch.
pub fn zero_t_derivatives(u: f64) -> Result<(f64, f64)> {
    if !(u > 1.0) {
        return Err(Error::Domain(format!("derivatives exist only for u > 1, got {u}")));
    }
    if u >= full_polarization_coupling() {
        return Ok((0.0, 0.0));
    }
    let FermiMomenta { x, y } = zero_t_solve(u)?;
    let k = 0.75 / (u * u) * (x + y) / (x - y);
    Ok((k * y / x, -k * x / y))
}

/// Ground-state energy per electron in units of `ε_F`.
pub fn ground_energy(u: f64, m: f64) -> f64 {
    let up = (1.0 + 2.0 * m).max(0.0);
    let down = (1.0 - 2.0 * m).max(0.0);
    0.3 * (up.powf(5.0 / 3.0) + down.powf(5.0 / 3.0)) + u / 3.0 * (1.0 - 4.0 * m * m)
}

/// Overlap of two Fermi-sea ground states: 1 when both spin species hold
/// the same number of electrons, 0 otherwise.
pub fn ground_state_overlap(a: &FermiMomenta, b: &FermiMomenta, size: f64) -> f64 {
    let half_n = 0.5 * size / 0.75;
    let same_up = (half_n * (a.x.powi(3) - b.x.powi(3))).abs() < 0.5;
    let same_down = (half_n * (a.y.powi(3) - b.y.powi(3))).abs() < 0.5;
    if same_up && same_down {
        1.0
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// finite temperature

fn fermi(y: f64) -> f64 {
    if y > 0.0 {
        let e = (-y).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + y.exp())
    }
}

/// `f(x − δ) − f(x + δ) = sinh δ / (cosh x + cosh δ)`.
fn fermi_split(x: f64, d: f64) -> f64 {
    let big = x.abs().max(d.abs());
    let num = if d.abs() < 20.0 {
        2.0 * d.sinh() * (-big).exp()
    } else {
        (d - big).exp() - (-d - big).exp()
    };
    let den = (x - big).exp() + (-x - big).exp() + (d - big).exp() + (-d - big).exp();
    num / den
}

/// Single-particle levels at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Levels {
    t: f64,
    /// `E_c(ε) = ε + shift` is the spin-averaged level.
    shift: f64,
    /// Half the exchange plus Zeeman splitting.
    split: f64,
}

impl Levels {
    fn new(t: f64, u: f64, h_ext: f64, m: f64, mu: f64) -> Self {
        Self {
            t,
            shift: TWO_THIRDS * u - mu,
            split: FOUR_THIRDS * u * m + 0.5 * h_ext,
        }
    }

    fn edges(&self) -> [f64; 2] {
        [-self.shift - self.split, -self.shift + self.split]
    }

    fn number(&self, q: &Quadrature) -> Result<f64> {
        let (t, s, d) = (self.t, self.shift, self.split);
        let v = integrate_semi_infinite_with_edges(
            |e| fermi((e + s - d) / t) + fermi((e + s + d) / t),
            Weight::Sqrt,
            &self.edges(),
            t,
            q,
        )?;
        Ok(0.75 * v)
    }

    fn magnetization(&self, q: &Quadrature) -> Result<f64> {
        let (t, s, d) = (self.t, self.shift, self.split);
        let v = integrate_semi_infinite_with_edges(
            |e| fermi_split((e + s) / t, d / t),
            Weight::Sqrt,
            &self.edges(),
            t,
            q,
        )?;
        Ok(0.375 * v)
    }

    /// `−t(3/4)∫√ε [ln(1+e^{−E↑/t}) + ln(1+e^{−E↓/t})] dε`.
    fn grand_potential(&self, q: &Quadrature) -> Result<f64> {
        let (t, s, d) = (self.t, self.shift, self.split);
        let v = integrate_semi_infinite_with_edges(
            |e| softplus(-(e + s - d) / t) + softplus(-(e + s + d) / t),
            Weight::Sqrt,
            &self.edges(),
            t,
            q,
        )?;
        Ok(-0.75 * t * v)
    }
}

fn residual_quadrature() -> Quadrature {
    Quadrature::default().with_rel_tol(1e-13)
}

/// Residuals `(number − 1, magnetization − m)` of the self-consistent pair.
pub fn residuals(p: &StonerParams, m: f64, mu: f64) -> Result<[f64; 2]> {
    let lv = Levels::new(p.t, p.u, p.h_ext, m, mu);
    let q = residual_quadrature();
    Ok([lv.number(&q)? - 1.0, lv.magnetization(&q)? - m])
}

/// Chemical potential of the non-interacting gas at temperature `t`.
pub fn free_chemical_potential(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("temperature {t} must be positive")));
    }
    let q = residual_quadrature();
    let cfg = SolverConfig::default().with_step_tol(1e-15);
    let count = |mu: f64| -> Result<f64> {
        let v = integrate_semi_infinite(|e| fermi((e - mu) / t), Weight::Sqrt, mu, t, &q)?;
        Ok(1.5 * v - 1.0)
    };
    let (mut lo, hi) = (-1.0, 1.5);
    while count(lo)? > 0.0 {
        lo -= 4.0 * lo.abs().max(1.0);
    }
    solve_bracketed(count, lo, hi, &cfg)
}

/// `I(t) = ∫√ε (−∂f/∂ε) dε` at the free chemical potential; the
/// paramagnet becomes linearly unstable when `u·I(t) > 1`.
pub fn linear_response(t: f64) -> Result<f64> {
    let mu0 = free_chemical_potential(t)?;
    let q = residual_quadrature();
    integrate_semi_infinite(
        |e| {
            let c = (0.5 * (e - mu0) / t).cosh();
            0.25 / (t * c * c)
        },
        Weight::Sqrt,
        mu0,
        t,
        &q,
    )
}

/// Coupling at which the paramagnet turns linearly unstable.
pub fn linear_critical_coupling(t: f64) -> Result<f64> {
    Ok(1.0 / linear_response(t)?)
}

fn equilibrium_config() -> SolverConfig {
    SolverConfig {
        max_iterations: 60,
        ..SolverConfig::default()
    }
}

fn newton(p: &StonerParams, m: f64, mu: f64) -> Result<StonerState> {
    let x = solve_system(
        |x| Ok(residuals(p, x[0], x[1])?.to_vec()),
        &[m, mu],
        &equilibrium_config(),
    )?;
    let branch = if x[0].abs() > M_MIN {
        Branch::Magnetic
    } else {
        Branch::Paramagnetic
    };
    Ok(StonerState {
        m: x[0],
        mu: x[1],
        converged: true,
        branch,
    })
}

fn paramagnetic(p: &StonerParams) -> Result<StonerState> {
    Ok(StonerState {
        m: 0.0,
        mu: free_chemical_potential(p.t)? + TWO_THIRDS * p.u,
        converged: true,
        branch: Branch::Paramagnetic,
    })
}

/// Chemical potential fixing the particle number at magnetisation `m`.
fn mu_at(p: &StonerParams, m: f64) -> Result<f64> {
    let q = residual_quadrature();
    let cfg = SolverConfig::default().with_step_tol(1e-15);
    let f = |mu: f64| Levels::new(p.t, p.u, p.h_ext, m, mu).number(&q).map(|n| n - 1.0);
    let centre = TWO_THIRDS * p.u + 1.0;
    let (mut lo, mut hi) = (centre - 1.0, centre + 0.5);
    while f(lo)? > 0.0 {
        lo -= 2.0 * (centre - lo).max(1.0);
    }
    while f(hi)? < 0.0 {
        hi += 2.0 * (hi - centre).max(1.0);
    }
    solve_bracketed(f, lo, hi, &cfg)
}

/// `M(m)/m − 1` with the number equation enforced.
fn reduced_gain(p: &StonerParams, m: f64) -> Result<f64> {
    let mu = mu_at(p, m)?;
    let q = residual_quadrature();
    Ok(Levels::new(p.t, p.u, p.h_ext, m, mu).magnetization(&q)? / m - 1.0)
}

fn magnetic_from_scratch(p: &StonerParams) -> Result<Option<StonerState>> {
    if p.u * linear_response(p.t)? <= 1.0 {
        return Ok(None);
    }
    if reduced_gain(p, M_MIN)? <= 0.0 {
        return Ok(None);
    }
    // a nonnegative gain at m = 1/2 means full polarisation to rounding
    let m = if reduced_gain(p, 0.5)? >= 0.0 {
        0.5
    } else {
        let cfg = SolverConfig::default().with_step_tol(1e-13);
        solve_bracketed(|m| reduced_gain(p, m), M_MIN, 0.5, &cfg)?
    };
    let mu = mu_at(p, m)?;
    let state = match residuals(p, m, mu) {
        Ok(r) if r[0].abs().max(r[1].abs()) <= equilibrium_config().residual_tol => StonerState {
            m,
            mu,
            converged: true,
            branch: Branch::Magnetic,
        },
        _ => newton(p, m, mu)?,
    };
    Ok((state.m > M_MIN).then_some(state))
}

/// Free energy per electron `A/N` of a self-consistent state.
pub fn free_energy(p: &StonerParams, s: &StonerState) -> Result<f64> {
    let lv = Levels::new(p.t, p.u, p.h_ext, s.m, s.mu);
    let omega = lv.grand_potential(&residual_quadrature())?;
    Ok(omega - FOUR_THIRDS * p.u * (0.25 - s.m * s.m) + s.mu)
}

/// `A_a/N − A_b/N` evaluated under a single integral.
pub fn free_energy_difference(
    pa: &StonerParams,
    a: &StonerState,
    pb: &StonerParams,
    b: &StonerState,
) -> Result<f64> {
    let la = Levels::new(pa.t, pa.u, pa.h_ext, a.m, a.mu);
    let lb = Levels::new(pb.t, pb.u, pb.h_ext, b.m, b.mu);
    let [a0, a1] = la.edges();
    let [b0, b1] = lb.edges();
    let width = pa.t.max(pb.t);
    let v = integrate_semi_infinite_with_edges(
        |e| {
            let ga = pa.t
                * (softplus(-(e + la.shift - la.split) / pa.t) + softplus(-(e + la.shift + la.split) / pa.t));
            let gb = pb.t
                * (softplus(-(e + lb.shift - lb.split) / pb.t) + softplus(-(e + lb.shift + lb.split) / pb.t));
            ga - gb
        },
        Weight::Sqrt,
        &[a0, a1, b0, b1],
        width,
        // the difference can be far below the size of either term
        &Quadrature::default().with_rel_tol(1e-13).with_abs_tol(1e-16),
    )?;
    let rest = |p: &StonerParams, s: &StonerState| -FOUR_THIRDS * p.u * (0.25 - s.m * s.m) + s.mu;
    Ok(-0.75 * v + rest(pa, a) - rest(pb, b))
}

/// Self-consistent `(m, μ)` at `(p.t, p.u)`.
///
/// A magnetic seed is continued by Newton's method; otherwise the magnetic
/// branch is searched on the reduced one-dimensional equation whenever the
/// paramagnet is linearly unstable. The branch with lower free energy wins.
pub fn solve_equilibrium(p: &StonerParams, seed: &StonerState) -> Result<StonerState> {
    p.validate()?;
    if !(p.t > 0.0) {
        return Err(Error::InvalidParameter("finite-temperature solve needs t > 0".into()));
    }
    if p.h_ext != 0.0 {
        let mu = if seed.converged { seed.mu } else { free_chemical_potential(p.t)? + TWO_THIRDS * p.u };
        return newton(p, seed.m, mu);
    }
    let para = paramagnetic(p)?;
    let mut magnetic = None;
    if seed.branch == Branch::Magnetic && seed.m.abs() > M_MIN {
        let mu = if seed.converged { seed.mu } else { mu_at(p, seed.m.abs())? };
        if let Ok(s) = newton(p, seed.m.abs(), mu) {
            if s.m > M_MIN {
                magnetic = Some(s);
            }
        }
    }
    if magnetic.is_none() {
        magnetic = magnetic_from_scratch(p)?;
    }
    match magnetic {
        Some(mag) if free_energy(p, &mag)? < free_energy(p, &para)? => Ok(mag),
        _ => Ok(para),
    }
}

// ---------------------------------------------------------------------------
// fidelity

/// Per-mode exponents: `α(ε) = −(ε + shift)/t` multiplies `n̂` and `h_z`
/// multiplies `Ŝᶻ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StonerFields {
    pub t: f64,
    pub shift: f64,
    pub h_z: f64,
}

impl StonerFields {
    pub fn new(p: &StonerParams, s: &StonerState) -> Self {
        let lv = Levels::new(p.t, p.u, p.h_ext, s.m, s.mu);
        Self {
            t: p.t,
            shift: lv.shift,
            h_z: 2.0 * lv.split / p.t,
        }
    }

    pub fn alpha(&self, eps: f64) -> f64 {
        -(eps + self.shift) / self.t
    }

    fn fermi_points(&self) -> [f64; 2] {
        let d = 0.5 * self.h_z * self.t;
        [-self.shift - d, -self.shift + d]
    }
}

/// `ln[cosh r̄² / (cosh(r̄+d) cosh(r̄−d))] / 2`, exact for any magnitude.
fn second_difference_ln_cosh(r_bar: f64, d: f64) -> f64 {
    if d == 0.0 {
        return 0.0;
    }
    let (a, r) = (d.abs(), r_bar.abs());
    let ratio = (a - r).exp() * (-(-2.0 * a).exp_m1()) / (1.0 + (-2.0 * r).exp());
    -0.5 * (ratio * ratio).ln_1p()
}

/// Logarithm of the commuting-case mode factor
/// `(cosh ᾱ + cosh h̄/2)/√[(cosh α_a + cosh h_a/2)(cosh α_b + cosh h_b/2)]`.
///
/// Uses `cosh A + cosh B = 2 cosh((A+B)/2) cosh((A−B)/2)`, which turns the
/// ratio into two second differences of `ln cosh` along linear coordinates.
pub fn mode_log_factor(fa: &StonerFields, fb: &StonerFields, eps: f64) -> f64 {
    let (aa, ab) = (fa.alpha(eps), fb.alpha(eps));
    let mut total = 0.0;
    for sign in [1.0, -1.0] {
        let ra = 0.5 * (aa + sign * 0.5 * fa.h_z);
        let rb = 0.5 * (ab + sign * 0.5 * fb.h_z);
        total += second_difference_ln_cosh(0.5 * (ra + rb), 0.5 * (ra - rb));
    }
    total
}

/// Per-mode `ln F` from its defining commuting-case formula.
pub fn mode_log_fidelity(p: &StonerParams, a: &StonerState, b: &StonerState, eps: f64) -> f64 {
    mode_log_factor(&StonerFields::new(p, a), &StonerFields::new(&p.neighbor(), b), eps)
}

/// `ln[(cosh ᾱ + e^{l}) / √((cosh α_a + e^{l_a})(cosh α_b + e^{l_b}))]` with
/// `ᾱ = (α_a + α_b)/2`, pivoted on whichever term dominates. `excess` is
/// `l − l_a/2 − l_b/2`, supplied in cancellation-free form.
fn pivoted_log_ratio(aa: f64, ab: f64, l: f64, la: f64, lb: f64, excess: f64) -> f64 {
    let alpha_bar = 0.5 * (aa + ab);
    let (c, ca, cb) = (ln_cosh(alpha_bar), ln_cosh(aa), ln_cosh(ab));
    if c >= l {
        second_difference_ln_cosh(alpha_bar, 0.5 * (aa - ab)) + softplus(l - c)
            - 0.5 * softplus(la - ca)
            - 0.5 * softplus(lb - cb)
    } else {
        excess + softplus(c - l) - 0.5 * softplus(ca - la) - 0.5 * softplus(cb - lb)
    }
}

/// `ln cosh(h/2) − |h|/2`.
fn ln_cosh_half_excess(h: f64) -> f64 {
    (-h.abs()).exp().ln_1p() - LN_2
}

/// Per-mode `ln F` through the generic composition `e^{a·Ŝ/2} e^{b·Ŝ} e^{a·Ŝ/2}`.
pub fn mode_log_fidelity_generic(fa: &StonerFields, fb: &StonerFields, eps: f64) -> f64 {
    let (lin, rest) = log_cosh_c_split(&SpinVector::along_z(fa.h_z), &SpinVector::along_z(fb.h_z))
        .expect("physical z vectors");
    let lc = lin + rest;
    // ln cosh(c/2) = (ln cosh c + ln(1 + 1/cosh c) − ln 2)/2
    let tail = 0.5 * ((-lc).exp().ln_1p() - LN_2);
    let l = 0.5 * lin + 0.5 * rest + tail;
    let (xa, xb) = (ln_cosh_half_excess(fa.h_z), ln_cosh_half_excess(fb.h_z));
    let excess = 0.5 * rest + tail - 0.5 * xa - 0.5 * xb;
    let (la, lb) = (ln_cosh(0.5 * fa.h_z), ln_cosh(0.5 * fb.h_z));
    pivoted_log_ratio(fa.alpha(eps), fb.alpha(eps), l, la, lb, excess).min(0.0)
}

/// Per-mode `ln H` through the half-generator product.
pub fn mode_log_overlap(fa: &StonerFields, fb: &StonerFields, eps: f64) -> f64 {
    let (lin, rest) = log_cosh_c_split(&SpinVector::along_z(0.5 * fa.h_z), &SpinVector::along_z(0.5 * fb.h_z))
        .expect("physical z vectors");
    let (xa, xb) = (ln_cosh_half_excess(fa.h_z), ln_cosh_half_excess(fb.h_z));
    let excess = rest - 0.5 * xa - 0.5 * xb;
    let (la, lb) = (ln_cosh(0.5 * fa.h_z), ln_cosh(0.5 * fb.h_z));
    pivoted_log_ratio(fa.alpha(eps), fb.alpha(eps), lin + rest, la, lb, excess).min(0.0)
}

/// Per-mode `(ln F, ln C, ln H)`: `F` through the generic composition,
/// `C` through the mean generator and `H` through the half-generator product.
pub fn mode_logs(fa: &StonerFields, fb: &StonerFields, eps: f64) -> (f64, f64, f64) {
    (
        mode_log_fidelity_generic(fa, fb, eps),
        mode_log_factor(fa, fb, eps),
        mode_log_overlap(fa, fb, eps),
    )
}

/// Totals `F`, `C`, `H` over all modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StonerFidelity {
    pub f: f64,
    pub c: f64,
    pub h: f64,
}

/// `ln X = size·∫√ε ln X(ε) dε` for `X ∈ {F, C, H}` between `a` at `p` and
/// `b` at `p.neighbor()`.
pub fn total_fidelity(p: &StonerParams, a: &StonerState, b: &StonerState) -> Result<StonerFidelity> {
    let pb = p.neighbor();
    let fa = StonerFields::new(p, a);
    let fb = StonerFields::new(&pb, b);
    let [e0, e1] = fa.fermi_points();
    let [e2, e3] = fb.fermi_points();
    let edges = [e0, e1, e2, e3];
    let width = p.t.max(pb.t);
    let q = Quadrature {
        max_panels: 4000,
        rel_tol: 1e-10,
        abs_tol: 1e-12 / p.size,
        tail_multiplier: 40.0,
    };
    let integral = |g: fn(&StonerFields, &StonerFields, f64) -> f64| -> Result<f64> {
        let v = integrate_semi_infinite_with_edges(|e| g(&fa, &fb, e), Weight::Sqrt, &edges, width, &q)?;
        Ok((p.size * v).exp())
    };
    Ok(StonerFidelity {
        f: integral(mode_log_fidelity_generic)?,
        c: integral(mode_log_factor)?,
        h: integral(mode_log_overlap)?,
    })
}

/// `χ = ∂m/∂h` from the response to a probe field `±h_probe`.
pub fn susceptibility_fd(p: &StonerParams, h_probe: f64) -> Result<f64> {
    let base = StonerParams { h_ext: 0.0, ..*p };
    let zero = solve_equilibrium(&base, &StonerState::paramagnetic_seed())?;
    if zero.branch == Branch::Magnetic {
        return Err(Error::Domain(format!("u = {} is on the magnetic side at t = {}", p.u, p.t)));
    }
    let probe = StonerParams { h_ext: h_probe, ..*p };
    let s = solve_equilibrium(&probe, &zero)?;
    Ok(s.m / h_probe)
}
