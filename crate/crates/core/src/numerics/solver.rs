//! Nonlinear equation solvers: damped Newton for small systems and a
//! bracketing root finder for scalar equations.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
    /// Smallest and largest Newton damping factor.
    pub damping: (f64, f64),
    /// Relative finite-difference step of the Jacobian.
    pub fd_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            step_tol: 1e-14,
            residual_tol: 1e-10,
            damping: (1.0 / 1024.0, 1.0),
            fd_step: f64::EPSILON.sqrt(),
        }
    }
}

impl SolverConfig {
    pub fn with_residual_tol(mut self, tol: f64) -> Self {
        self.residual_tol = tol;
        self
    }

    pub fn with_step_tol(mut self, tol: f64) -> Self {
        self.step_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.damping;
        if self.max_iterations == 0
            || !(self.step_tol > 0.0)
            || !(self.residual_tol > 0.0)
            || !(self.fd_step > 0.0)
            || !(lo > 0.0 && lo <= hi && hi <= 1.0)
        {
            return Err(Error::InvalidParameter(format!("invalid solver config {self:?}")));
        }
        Ok(())
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| if x.is_nan() { f64::INFINITY } else { m.max(x.abs()) })
}

fn two_norm(v: &[f64]) -> f64 {
    let s: f64 = v.iter().map(|x| x * x).sum();
    if s.is_nan() {
        f64::INFINITY
    } else {
        s.sqrt()
    }
}

fn jacobian<F>(residual: &mut F, x: &[f64], r: &[f64], cfg: &SolverConfig) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let m = r.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let h = cfg.fd_step * x[j].abs().max(1.0);
        xp[j] = x[j] + h;
        let h = xp[j] - x[j];
        let rp = residual(&xp)?;
        for i in 0..m {
            jac[(i, j)] = (rp[i] - r[i]) / h;
        }
        xp[j] = x[j];
    }
    Ok(jac)
}

/// Solves `residual(x) = 0` by damped Newton with a forward-difference
/// Jacobian and step halving; when no damped step reduces the residual a
/// coordinate-wise sweep is tried before giving up.
///
/// The returned point always satisfies `‖residual(x)‖∞ ≤ residual_tol`.
pub fn solve_system<F>(mut residual: F, initial: &[f64], cfg: &SolverConfig) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    cfg.validate()?;
    let mut x = initial.to_vec();
    let mut r = residual(&x)?;
    let fail = |iterations, x: Vec<f64>, r: &[f64]| Error::NoConvergence {
        iterations,
        last: x,
        residual_norm: inf_norm(r),
    };
    for iter in 0..cfg.max_iterations {
        if inf_norm(&r) <= cfg.residual_tol {
            return Ok(x);
        }
        let norm = two_norm(&r);
        let jac = jacobian(&mut residual, &x, &r, cfg)?;
        let rhs = -DVector::from_column_slice(&r);
        let step = jac.clone().lu().solve(&rhs);
        let mut accepted = false;
        if let Some(dx) = step.filter(|d| d.iter().all(|v| v.is_finite())) {
            let mut lambda = cfg.damping.1;
            while lambda >= cfg.damping.0 {
                let xn: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + lambda * d).collect();
                if let Ok(rn) = residual(&xn) {
                    if two_norm(&rn) < (1.0 - 1e-4 * lambda) * norm || inf_norm(&rn) <= cfg.residual_tol {
                        let moved = x
                            .iter()
                            .zip(&xn)
                            .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
                            .fold(0.0, f64::max);
                        x = xn;
                        r = rn;
                        accepted = true;
                        if moved <= cfg.step_tol && inf_norm(&r) > cfg.residual_tol {
                            return Err(fail(iter + 1, x, &r));
                        }
                        break;
                    }
                }
                lambda *= 0.5;
            }
        }
        if !accepted {
            let (xs, rs) = coordinate_sweep(&mut residual, &x, &r, &jac, cfg)?;
            if two_norm(&rs) >= norm {
                return Err(fail(iter + 1, x, &r));
            }
            x = xs;
            r = rs;
        }
    }
    if inf_norm(&r) <= cfg.residual_tol {
        Ok(x)
    } else {
        Err(fail(cfg.max_iterations, x, &r))
    }
}

/// One pass of scalar Newton/bisection on each equation along its own
/// coordinate, keeping only moves that reduce the residual norm.
fn coordinate_sweep<F>(
    residual: &mut F,
    x: &[f64],
    r: &[f64],
    jac: &DMatrix<f64>,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let mut x = x.to_vec();
    let mut r = r.to_vec();
    let n = x.len().min(r.len());
    for i in 0..n {
        let d = jac[(i, i)];
        if d == 0.0 || !d.is_finite() {
            continue;
        }
        let step = -r[i] / d;
        let mut lambda = 1.0;
        while lambda >= cfg.damping.0 {
            let mut xn = x.clone();
            xn[i] += lambda * step;
            if let Ok(rn) = residual(&xn) {
                if two_norm(&rn) < two_norm(&r) {
                    x = xn;
                    r = rn;
                    break;
                }
            }
            lambda *= 0.5;
        }
    }
    Ok((x, r))
}

/// Root of a scalar function on a sign-changing bracket (Brent's method:
/// bisection safeguarding secant and inverse quadratic steps).
pub fn solve_bracketed<F>(mut f: F, lo: f64, hi: f64, cfg: &SolverConfig) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    cfg.validate()?;
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..cfg.max_iterations.max(200) {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * cfg.step_tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NoConvergence {
        iterations: cfg.max_iterations.max(200),
        last: vec![b],
        residual_norm: fb.abs(),
    })
}
