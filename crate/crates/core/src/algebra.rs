//! su(2) field vectors, closed-form trace identities and the dense 4×4 oracle.
//!
//! Every momentum mode lives on the Fock space spanned by
//! `(|0⟩, |↑⟩, |↓⟩, |↑↓⟩)`, in that order. Two su(2) triples act on it: the
//! spin triple `Ŝ` (supported on the singly occupied block) and the Nambu
//! triple `T̂` (supported on the empty/doubly occupied block). The closed forms
//! in this module are cross-checked against explicit 4×4 matrices.

use std::f64::consts::LN_2;
use std::ops::{Add, Mul, Sub};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Basis index of the empty state.
pub const EMPTY: usize = 0;
/// Basis index of `|↑⟩`.
pub const UP: usize = 1;
/// Basis index of `|↓⟩`.
pub const DOWN: usize = 2;
/// Basis index of the doubly occupied state.
pub const PAIR: usize = 3;

/// Indices of the block on which the spin triple acts.
pub const SPIN_BLOCK: [usize; 2] = [UP, DOWN];
/// Indices of the block on which the Nambu triple acts.
pub const NAMBU_BLOCK: [usize; 2] = [EMPTY, PAIR];

const PHYSICAL_TOL: f64 = 1e-12;
const OVERFLOW_ARG: f64 = 500.0;

// ---------------------------------------------------------------------------
// scalar helpers

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `ln cosh x` without overflow.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `ln(1 + cosh x)`.
pub fn ln_one_plus_cosh(x: f64) -> f64 {
    2.0 * ln_cosh(0.5 * x) + LN_2
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

// ---------------------------------------------------------------------------
// field vectors

/// Field vector `(h⁺, h⁻, h⁰)` multiplying an su(2) triple, so that
/// `h·Ŝ = ½(h⁺Ŝ⁻ + h⁻Ŝ⁺) + h⁰Ŝᶻ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinVector {
    pub plus: Complex64,
    pub minus: Complex64,
    pub zero: f64,
}

/// Nambu vectors share the representation of spin vectors.
pub type NambuVector = SpinVector;

impl SpinVector {
    pub const ZERO: SpinVector = SpinVector {
        plus: Complex64::new(0.0, 0.0),
        minus: Complex64::new(0.0, 0.0),
        zero: 0.0,
    };

    /// A physical vector: `h⁻ = conj(h⁺)`.
    pub fn physical(plus: Complex64, zero: f64) -> Self {
        Self {
            plus,
            minus: plus.conj(),
            zero,
        }
    }

    /// Components as given; may be non-physical.
    pub fn raw(plus: Complex64, minus: Complex64, zero: f64) -> Self {
        Self { plus, minus, zero }
    }

    pub fn from_cartesian(x: f64, y: f64, z: f64) -> Self {
        Self::physical(Complex64::new(x, y), z)
    }

    pub fn along_z(z: f64) -> Self {
        Self::from_cartesian(0.0, 0.0, z)
    }

    /// Nambu vector `(2βΔ*, 2βΔ, −2βε̄)` of a BCS mode.
    pub fn nambu(beta: f64, gap: Complex64, xi: f64) -> Self {
        Self {
            plus: gap.conj() * (2.0 * beta),
            minus: gap * (2.0 * beta),
            zero: -2.0 * beta * xi,
        }
    }

    pub fn is_physical(&self) -> bool {
        self.physical_mismatch() <= PHYSICAL_TOL * (1.0 + self.plus.norm())
    }

    fn physical_mismatch(&self) -> f64 {
        (self.minus - self.plus.conj()).norm()
    }

    pub fn check_physical(&self) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(Error::NonPhysicalVector {
                mismatch: self.physical_mismatch(),
            })
        }
    }

    /// `h⁺h⁻ + (h⁰)²`, complex for non-physical vectors.
    pub fn norm_sq(&self) -> Complex64 {
        vec_dot(self, self)
    }

    /// Euclidean norm of a physical vector.
    pub fn norm(&self) -> Result<f64> {
        self.check_physical()?;
        Ok(self.norm_sq().re.max(0.0).sqrt())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            plus: self.plus * s,
            minus: self.minus * s,
            zero: self.zero * s,
        }
    }

    /// Cartesian components `(x, y, z)` of a physical vector.
    pub fn cartesian(&self) -> [f64; 3] {
        [self.plus.re, self.plus.im, self.zero]
    }
}

impl Add for SpinVector {
    type Output = SpinVector;
    fn add(self, rhs: Self) -> Self {
        Self {
            plus: self.plus + rhs.plus,
            minus: self.minus + rhs.minus,
            zero: self.zero + rhs.zero,
        }
    }
}

impl Sub for SpinVector {
    type Output = SpinVector;
    fn sub(self, rhs: Self) -> Self {
        Self {
            plus: self.plus - rhs.plus,
            minus: self.minus - rhs.minus,
            zero: self.zero - rhs.zero,
        }
    }
}

/// Scalar product `½(a⁺b⁻ + a⁻b⁺) + a⁰b⁰`.
pub fn vec_dot(a: &SpinVector, b: &SpinVector) -> Complex64 {
    0.5 * (a.plus * b.minus + a.minus * b.plus) + a.zero * b.zero
}

// ---------------------------------------------------------------------------
// closed-form traces

/// `Tr[exp(h·Ŝ)] = 2(1 + cosh(h/2))`.
pub fn trace_exp_spin(h: &SpinVector) -> Result<f64> {
    let n = h.norm()?;
    if 0.5 * n > OVERFLOW_ARG {
        return Err(Error::Overflow { argument: 0.5 * n });
    }
    Ok(2.0 * (1.0 + (0.5 * n).cosh()))
}

pub fn log_trace_exp_spin(h: &SpinVector) -> Result<f64> {
    Ok(LN_2 + ln_one_plus_cosh(0.5 * h.norm()?))
}

/// `Tr[exp(αn̂ + h·Ŝ)] = 2e^α(cosh α + cosh(h/2))`, evaluated in the
/// factorised form `(1 + e^{α+h/2})(1 + e^{α−h/2})`.
pub fn trace_exp_number_spin(alpha: f64, h: &SpinVector) -> Result<f64> {
    let half = 0.5 * h.norm()?;
    if alpha.abs() > OVERFLOW_ARG || half > OVERFLOW_ARG {
        return Err(Error::Overflow {
            argument: alpha.abs().max(half),
        });
    }
    Ok((1.0 + (alpha + half).exp()) * (1.0 + (alpha - half).exp()))
}

pub fn log_trace_exp_number_spin(alpha: f64, h: &SpinVector) -> Result<f64> {
    let half = 0.5 * h.norm()?;
    Ok(softplus(alpha + half) + softplus(alpha - half))
}

/// `Tr[exp(a·T̂)] = 2(1 + cosh(a/2))`.
pub fn trace_exp_nambu(a: &NambuVector) -> Result<f64> {
    trace_exp_spin(a)
}

pub fn log_trace_exp_nambu(a: &NambuVector) -> Result<f64> {
    log_trace_exp_spin(a)
}

/// `cosh c = cosh(a/2)cosh(b/2) + sinh(a/2)sinh(b/2)(a·b)/(ab)`, the
/// composition law `exp(a·T̂/2) exp(b·T̂) exp(a·T̂/2) = exp(2c·T̂)`.
pub fn cosh_c(a: &SpinVector, b: &SpinVector) -> Result<f64> {
    let l = log_cosh_c(a, b)?;
    if l > 700.0 {
        return Err(Error::Overflow { argument: l });
    }
    Ok(l.exp())
}

/// `ln cosh c`, stable for arbitrarily large norms.
///
/// With `p = e^{-a}`, `q = e^{-b}` and unit vectors `â`, `b̂`:
/// `cosh c = e^{(a+b)/2}/4 · [(1+ĉ)(1+pq) + (1−ĉ)(p+q)]`, where
/// `1 ± ĉ = |â ± b̂|²/2` keeps the (anti)parallel limits exact.
pub fn log_cosh_c(a: &SpinVector, b: &SpinVector) -> Result<f64> {
    let (linear, rest) = log_cosh_c_split(a, b)?;
    Ok(linear + rest)
}

/// `ln cosh c` as `(|a|/2 + |b|/2, remainder)`, so callers can cancel the
/// linear part against other `ln cosh` terms exactly.
pub fn log_cosh_c_split(a: &SpinVector, b: &SpinVector) -> Result<(f64, f64)> {
    let na = a.norm()?;
    let nb = b.norm()?;
    let (ha, hb) = (0.5 * na, 0.5 * nb);
    if na == 0.0 || nb == 0.0 {
        let n = na.max(nb);
        return Ok((0.5 * n, (-n).exp().ln_1p() - LN_2));
    }
    let ua = a.scale(1.0 / na);
    let ub = b.scale(1.0 / nb);
    let one_plus = 0.5 * (ua + ub).norm_sq().re.max(0.0);
    let one_minus = 0.5 * (ua - ub).norm_sq().re.max(0.0);
    let p = (-na).exp();
    let q = (-nb).exp();
    let k = one_plus * (1.0 + p * q) + one_minus * (p + q);
    Ok((ha + hb, k.ln() - 2.0 * LN_2))
}

/// `ln cosh(c/2)` from `ln cosh c`, via `cosh²(c/2) = (1 + cosh c)/2`.
pub fn ln_cosh_half_from_ln_cosh(ln_cosh_c: f64) -> f64 {
    0.5 * (softplus(ln_cosh_c) - LN_2)
}

// ---------------------------------------------------------------------------
// dense operators

/// A 4×4 complex operator in the fixed mode basis `(|0⟩, |↑⟩, |↓⟩, |↑↓⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseOperator(pub Matrix4<Complex64>);

impl DenseOperator {
    pub fn zeros() -> Self {
        Self(Matrix4::zeros())
    }

    pub fn identity() -> Self {
        Self(Matrix4::identity())
    }

    pub fn from_diagonal(d: [f64; 4]) -> Self {
        let mut m = Matrix4::zeros();
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(*v, 0.0);
        }
        Self(m)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self(self.0 * s)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 - other.0 * self.0)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(self.0 * other.0 + other.0 * self.0)
    }

    /// Largest entry-wise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (self.0 - self.0.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= 1e-12 * (1.0 + self.max_abs())
    }

    fn check_hermitian(&self) -> Result<()> {
        if self.is_hermitian() {
            Ok(())
        } else {
            Err(Error::NonHermitian {
                deviation: self.hermitian_deviation(),
            })
        }
    }

    fn hermitian_part(&self) -> Matrix4<Complex64> {
        (self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// Eigen-decomposition of the Hermitian part.
    fn eigen(&self) -> SymmetricEigen<Complex64, nalgebra::U4> {
        SymmetricEigen::new(self.hermitian_part())
    }

    fn from_spectrum(
        eig: &SymmetricEigen<Complex64, nalgebra::U4>,
        f: impl Fn(f64) -> f64,
    ) -> Self {
        let v = &eig.eigenvectors;
        let d = Matrix4::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(f(l), 0.0)));
        Self(v * d * v.adjoint())
    }

    /// Checks the density-operator invariants: Hermitian, PSD, unit trace.
    pub fn check_density(&self) -> Result<()> {
        self.check_hermitian()?;
        let min = self.eigen().eigenvalues.min();
        if min < -1e-12 {
            return Err(Error::NotPositive { eigenvalue: min });
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "density operator trace {tr} differs from 1"
            )));
        }
        Ok(())
    }

    /// Operator 2-norm of the 2×2 block on `indices`.
    pub fn block_norm(&self, indices: [usize; 2]) -> f64 {
        let [i, j] = indices;
        let m = Matrix2::new(
            self.0[(i, i)],
            self.0[(i, j)],
            self.0[(j, i)],
            self.0[(j, j)],
        );
        let fro2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).norm();
        let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
        (0.5 * (fro2 + disc)).sqrt()
    }
}

impl Add for DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sub for DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: Self) -> Self {
        Self(self.0 - rhs.0)
    }
}

impl Mul for DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 * rhs.0)
    }
}

impl Mul<DenseOperator> for f64 {
    type Output = DenseOperator;
    fn mul(self, rhs: DenseOperator) -> DenseOperator {
        DenseOperator(rhs.0 * Complex64::new(self, 0.0))
    }
}

// ---------------------------------------------------------------------------
// mode operators

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeModel {
    Stoner,
    Bcs,
}

/// The su(2) triple of one model together with the number operators and the
/// projector `Î` that acts as the identity of the triple.
#[derive(Debug, Clone)]
pub struct ModeOperators {
    pub model: ModeModel,
    pub raise: DenseOperator,
    pub lower: DenseOperator,
    pub diag: DenseOperator,
    /// `Î_s` (singly occupied) or `Î_t` (empty + doubly occupied).
    pub unit: DenseOperator,
    /// `Î − unit`, i.e. `Ẑ_t` for the Nambu triple.
    pub complement: DenseOperator,
    pub number: DenseOperator,
    pub n_up: DenseOperator,
    pub n_down: DenseOperator,
}

fn fermion_creators() -> (DenseOperator, DenseOperator) {
    let one = Complex64::new(1.0, 0.0);
    let mut up = Matrix4::zeros();
    up[(UP, EMPTY)] = one;
    up[(PAIR, DOWN)] = one;
    // |↑↓⟩ = c↑† c↓† |0⟩, so c↓† |↑⟩ = −|↑↓⟩
    let mut down = Matrix4::zeros();
    down[(DOWN, EMPTY)] = one;
    down[(PAIR, UP)] = -one;
    (DenseOperator(up), DenseOperator(down))
}

/// Builds the operators of one mode from explicit fermion matrices.
pub fn build_mode_operators(model: ModeModel) -> ModeOperators {
    let (cu_dag, cd_dag) = fermion_creators();
    let (cu, cd) = (cu_dag.adjoint(), cd_dag.adjoint());
    let n_up = cu_dag * cu;
    let n_down = cd_dag * cd;
    let number = n_up + n_down;
    let id = DenseOperator::identity();
    let (raise, lower, diag) = match model {
        ModeModel::Stoner => (cu_dag * cd, cd_dag * cu, 0.5 * (n_up - n_down)),
        ModeModel::Bcs => (cu_dag * cd_dag, cd * cu, 0.5 * (number - id)),
    };
    let unit = raise.anticommutator(&lower);
    ModeOperators {
        model,
        raise,
        lower,
        diag,
        unit,
        complement: id - unit,
        number,
        n_up,
        n_down,
    }
}

impl ModeOperators {
    /// `h·triple = ½(h⁺·lower + h⁻·raise) + h⁰·diag`.
    pub fn generator(&self, h: &SpinVector) -> DenseOperator {
        self.lower.scale(0.5 * h.plus) + self.raise.scale(0.5 * h.minus) + h.zero * self.diag
    }

    /// `αn̂ + h·triple`.
    pub fn number_generator(&self, alpha: f64, h: &SpinVector) -> DenseOperator {
        alpha * self.number + self.generator(h)
    }

    /// Block on which the triple acts.
    pub fn block(&self) -> [usize; 2] {
        match self.model {
            ModeModel::Stoner => SPIN_BLOCK,
            ModeModel::Bcs => NAMBU_BLOCK,
        }
    }

    /// `(Î − unit) + cosh(h/2)·unit + 2 sinh(h/2)(h·triple)/h`.
    pub fn exp_closed_form(&self, h: &SpinVector) -> Result<DenseOperator> {
        let n = h.norm()?;
        let mut out = self.complement + (0.5 * n).cosh() * self.unit;
        if n > 0.0 {
            out = out + (2.0 * (0.5 * n).sinh() / n) * self.generator(h);
        }
        Ok(out)
    }
}

/// `exp(αn̂) = Î + u·n̂ + v·n̂²`.
pub fn exp_number_closed_form(alpha: f64) -> DenseOperator {
    let ops = build_mode_operators(ModeModel::Stoner);
    let e1 = alpha.exp();
    let e2 = e1 * e1;
    let u = -(0.5 * e2 - 2.0 * e1 + 1.5);
    let v = 0.5 * e2 - e1 + 0.5;
    DenseOperator::identity() + u * ops.number + v * (ops.number * ops.number)
}

// ---------------------------------------------------------------------------
// dense linear algebra

/// Matrix exponential of a Hermitian operator.
pub fn dense_exp(h: &DenseOperator) -> Result<DenseOperator> {
    h.check_hermitian()?;
    Ok(DenseOperator::from_spectrum(&h.eigen(), f64::exp))
}

/// Normalised Gibbs state `exp(G)/Tr exp(G)` of a Hermitian generator,
/// shifted by the top eigenvalue so large generators do not overflow.
pub fn gibbs_state(generator: &DenseOperator) -> Result<DenseOperator> {
    generator.check_hermitian()?;
    let eig = generator.eigen();
    let top = eig.eigenvalues.max();
    let z: f64 = eig.eigenvalues.iter().map(|l| (l - top).exp()).sum();
    Ok(DenseOperator::from_spectrum(&eig, |l| (l - top).exp() / z))
}

/// `√ρ` of the Gibbs state, built as `exp(G/2)/√Tr exp(G)`; unlike
/// [`dense_sqrt`] it keeps full relative precision on tiny eigenvalues.
pub fn gibbs_root(generator: &DenseOperator) -> Result<DenseOperator> {
    generator.check_hermitian()?;
    let eig = generator.eigen();
    let top = eig.eigenvalues.max();
    let z: f64 = eig.eigenvalues.iter().map(|l| (l - top).exp()).sum();
    let norm = z.sqrt();
    Ok(DenseOperator::from_spectrum(&eig, |l| (0.5 * (l - top)).exp() / norm))
}

/// Principal square root of a Hermitian PSD operator.
pub fn dense_sqrt(rho: &DenseOperator) -> Result<DenseOperator> {
    rho.check_hermitian()?;
    let eig = rho.eigen();
    let min = eig.eigenvalues.min();
    if min < -1e-9 {
        return Err(Error::NotPositive { eigenvalue: min });
    }
    Ok(DenseOperator::from_spectrum(&eig, |l| l.max(0.0).sqrt()))
}

/// `F = Tr √(√ρ_a ρ_b √ρ_a)`.
pub fn dense_fidelity(rho_a: &DenseOperator, rho_b: &DenseOperator) -> Result<f64> {
    Ok(root_fidelity(&dense_sqrt(rho_a)?, &dense_sqrt(rho_b)?))
}

/// `Tr|√ρ_a√ρ_b|` from the square roots, as the sum of singular values.
pub fn root_fidelity(sa: &DenseOperator, sb: &DenseOperator) -> f64 {
    (*sa * *sb).0.singular_values().sum()
}

/// `Tr[√ρ_a √ρ_b]`, the Uhlmann overlap.
pub fn dense_overlap(rho_a: &DenseOperator, rho_b: &DenseOperator) -> Result<Complex64> {
    Ok((dense_sqrt(rho_a)? * dense_sqrt(rho_b)?).trace())
}

/// Polar decomposition `√ρ_a√ρ_b = |√ρ_a√ρ_b| V̂` and the Uhlmann connection
/// `Û = V̂†`.
#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub connection: DenseOperator,
    /// `|√ρ_a√ρ_b| = (XX†)^{1/2}`.
    pub modulus: DenseOperator,
    pub product: DenseOperator,
    /// Set when the product is rank deficient; the unitary is then completed
    /// by the singular-vector basis returned by the SVD.
    pub degenerate: bool,
}

pub fn polar_unitary(rho_a: &DenseOperator, rho_b: &DenseOperator) -> Result<PolarDecomposition> {
    polar_from_roots(&dense_sqrt(rho_a)?, &dense_sqrt(rho_b)?)
}

/// [`polar_unitary`] given `√ρ_a` and `√ρ_b` directly.
pub fn polar_from_roots(sa: &DenseOperator, sb: &DenseOperator) -> Result<PolarDecomposition> {
    let x = *sa * *sb;
    let svd = x.0.svd(true, true);
    let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else {
        return Err(Error::Domain("SVD did not return singular vectors".into()));
    };
    let s = svd.singular_values;
    let degenerate = s.min() <= 1e-14 * s.max().max(f64::MIN_POSITIVE);
    let sigma = Matrix4::from_diagonal(&s.map(|v| Complex64::new(v, 0.0)));
    let v_hat = u * v_t;
    Ok(PolarDecomposition {
        connection: DenseOperator(v_hat.adjoint()),
        modulus: DenseOperator(u * sigma * u.adjoint()),
        product: x,
        degenerate,
    })
}
