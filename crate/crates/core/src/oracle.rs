//! Seeded equivalence suites: every closed form against explicit 4×4 matrices.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{
    build_mode_operators, cosh_c, dense_exp, dense_fidelity, dense_overlap, exp_number_closed_form, gibbs_root,
    gibbs_state, polar_from_roots, root_fidelity, trace_exp_nambu, trace_exp_number_spin, trace_exp_spin,
    DenseOperator, ModeModel, ModeOperators, SpinVector,
};
use crate::bcs::{self, ModePoint};
use crate::error::Result;
use crate::stoner::{self, StonerFields};

pub const DEFAULT_SEED: u64 = 0x5eed_cafe;
pub const DEFAULT_DRAWS: usize = 1000;
pub const ORACLE_TOL: f64 = 1e-10;
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub seed: u64,
    pub draws: usize,
    /// Relative perturbation applied to every closed-form value before
    /// comparison. Nonzero values exist only for negative controls.
    pub corruption: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            draws: DEFAULT_DRAWS,
            corruption: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub draws: usize,
    pub max_dev: f64,
    pub tolerance: f64,
    /// Index of the draw that produced `max_dev`.
    pub worst: usize,
}

impl SuiteReport {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self {
            name,
            draws: 0,
            max_dev: 0.0,
            tolerance,
            worst: 0,
        }
    }

    fn record(&mut self, dev: f64) {
        // NaN must fail the suite
        if !(dev <= self.max_dev) {
            self.max_dev = if dev.is_nan() { f64::INFINITY } else { dev };
            self.worst = self.draws;
        }
    }

    fn next(&mut self) {
        self.draws += 1;
    }

    pub fn passed(&self) -> bool {
        self.max_dev <= self.tolerance
    }
}

fn rel_dev(closed: f64, dense: f64) -> f64 {
    (closed - dense).abs() / dense.abs().max(f64::MIN_POSITIVE)
}

fn random_vector(rng: &mut ChaCha8Rng, scale: f64) -> SpinVector {
    let x = rng.random_range(-1.0..1.0) * scale;
    let y = rng.random_range(-1.0..1.0) * scale;
    let z = rng.random_range(-1.0..1.0) * scale;
    SpinVector::from_cartesian(x, y, z)
}

fn trace_re(op: &DenseOperator) -> f64 {
    op.trace().re
}

/// Trace and exponential closed forms.
pub fn algebra_suite(cfg: &OracleConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spin = build_mode_operators(ModeModel::Stoner);
    let nambu = build_mode_operators(ModeModel::Bcs);
    let k = 1.0 + cfg.corruption;
    let mut report = SuiteReport::new("algebra", ORACLE_TOL);
    for _ in 0..cfg.draws {
        let h = random_vector(&mut rng, 8.0);
        let g = random_vector(&mut rng, 8.0);
        let alpha = rng.random_range(-6.0..6.0);

        let dense = trace_re(&dense_exp(&spin.generator(&h))?);
        report.record(rel_dev(k * trace_exp_spin(&h)?, dense));

        let dense = trace_re(&dense_exp(&spin.number_generator(alpha, &h))?);
        report.record(rel_dev(k * trace_exp_number_spin(alpha, &h)?, dense));

        let dense = trace_re(&dense_exp(&nambu.generator(&h))?);
        report.record(rel_dev(k * trace_exp_nambu(&h)?, dense));

        // e^{a·T̂/2} e^{b·T̂} e^{a·T̂/2} has block trace 2 cosh c
        let half = dense_exp(&nambu.generator(&h.scale(0.5)))?;
        let product = half * dense_exp(&nambu.generator(&g))? * half;
        let dense = 0.5 * trace_re(&(nambu.unit * product));
        report.record(rel_dev(k * cosh_c(&h, &g)?, dense));

        for ops in [&spin, &nambu] {
            let closed = ops.exp_closed_form(&h)?;
            let dense = dense_exp(&ops.generator(&h))?;
            report.record(k * closed.distance(&dense) / dense.max_abs());
        }
        let dense = dense_exp(&(alpha * spin.number))?;
        report.record(k * exp_number_closed_form(alpha).distance(&dense) / dense.max_abs());
        report.next();
    }
    Ok(report)
}

struct DenseTriple {
    f: f64,
    c: f64,
    h: f64,
}

fn dense_triple(ga: &DenseOperator, gb: &DenseOperator) -> Result<DenseTriple> {
    let (sa, sb) = (gibbs_root(ga)?, gibbs_root(gb)?);
    let shift = |g: &DenseOperator| -> f64 {
        let m = g.0.map(|z| z.re);
        (0..4).map(|i| m[(i, i)]).fold(f64::NEG_INFINITY, f64::max)
    };
    // partition functions with a common shift so the ratio stays finite
    let s = shift(ga).max(shift(gb));
    let id = DenseOperator::identity();
    let z = |g: &DenseOperator| -> Result<f64> { Ok(trace_re(&dense_exp(&(*g - s * id))?)) };
    let mean = 0.5 * (*ga + *gb);
    Ok(DenseTriple {
        f: root_fidelity(&sa, &sb),
        c: z(&mean)? / (z(ga)? * z(gb)?).sqrt(),
        h: (sa * sb).trace().re,
    })
}

fn record_triple(report: &mut SuiteReport, k: f64, logs: (f64, f64, f64), dense: &DenseTriple) {
    report.record((k * logs.0.exp() - dense.f).abs());
    report.record((k * logs.1.exp() - dense.c).abs());
    report.record((k * logs.2.exp() - dense.h).abs());
}

fn stoner_number_generator(ops: &ModeOperators, f: &StonerFields, eps: f64) -> DenseOperator {
    ops.number_generator(f.alpha(eps), &SpinVector::along_z(f.h_z))
}

/// Per-mode Stoner `F`, `C`, `H` against dense Gibbs states.
pub fn stoner_suite(cfg: &OracleConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x51);
    let ops = build_mode_operators(ModeModel::Stoner);
    let k = 1.0 + cfg.corruption;
    let mut report = SuiteReport::new("stoner", ORACLE_TOL);
    for _ in 0..cfg.draws {
        let t = rng.random_range(0.02..1.0);
        let fa = StonerFields {
            t,
            shift: rng.random_range(-2.0..0.5),
            h_z: rng.random_range(-10.0..10.0),
        };
        let fb = StonerFields {
            t: t + rng.random_range(0.0..0.05),
            shift: fa.shift + rng.random_range(-0.05..0.05),
            h_z: fa.h_z + rng.random_range(-1.0..1.0),
        };
        let eps = rng.random_range(0.0..2.5);
        let dense = dense_triple(
            &stoner_number_generator(&ops, &fa, eps),
            &stoner_number_generator(&ops, &fb, eps),
        )?;
        record_triple(&mut report, k, stoner::mode_logs(&fa, &fb, eps), &dense);
        report.next();
    }
    Ok(report)
}

fn random_gap(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.0..0.3), rng.random_range(-3.2..3.2))
}

/// Per-mode BCS `F`, `C`, `H` with complex gaps, the `H − F` trace identity
/// and the closed-form Uhlmann connection.
pub fn bcs_suite(cfg: &OracleConfig) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xbc5);
    let ops = build_mode_operators(ModeModel::Bcs);
    let k = 1.0 + cfg.corruption;
    let mut report = SuiteReport::new("bcs", ORACLE_TOL);
    for _ in 0..cfg.draws {
        let pa = ModePoint {
            t: rng.random_range(0.02..0.5),
            gap: random_gap(&mut rng),
            xi: rng.random_range(-1.0..1.0),
        };
        let pb = ModePoint {
            t: rng.random_range(0.02..0.5),
            gap: random_gap(&mut rng),
            xi: rng.random_range(-1.0..1.0),
        };
        let (ga, gb) = (ops.generator(&pa.nambu()), ops.generator(&pb.nambu()));
        let dense = dense_triple(&ga, &gb)?;
        let logs = bcs::mode_logs(&pa, &pb);
        record_triple(&mut report, k, logs, &dense);

        let u = bcs::uhlmann_mode(&pa, &pb)?;
        let residual = (logs.2.exp() - logs.0.exp()) - u.trace_term;
        report.record(k * residual.abs() + (k - 1.0).abs());
        let polar = polar_from_roots(&gibbs_root(&ga)?, &gibbs_root(&gb)?)?;
        // the dense unitary is only accurate to ε/σ_min
        let sv = polar.product.0.singular_values();
        if sv.min() > 1e-4 * sv.max() {
            report.record(k * u.connection.distance(&polar.connection));
        }
        let (ra, rb) = (gibbs_state(&ga)?, gibbs_state(&gb)?);
        if ra.0.symmetric_eigenvalues().min().min(rb.0.symmetric_eigenvalues().min()) > 1e-6 {
            report.record((dense_fidelity(&ra, &rb)? - dense.f).abs());
            report.record((dense_overlap(&ra, &rb)?.re - dense.h).abs());
        }
        report.next();
    }
    Ok(report)
}

/// su(2) and projector identities of both triples.
pub fn identity_suite(cfg: &OracleConfig) -> SuiteReport {
    let mut report = SuiteReport::new("identities", IDENTITY_TOL);
    let k = 1.0 + cfg.corruption;
    let id = DenseOperator::identity();
    for model in [ModeModel::Stoner, ModeModel::Bcs] {
        let o = build_mode_operators(model);
        let checks = [
            o.diag.commutator(&o.raise).distance(&o.raise),
            o.diag.commutator(&o.lower).distance(&(-1.0 * o.lower)),
            o.raise.commutator(&o.lower).distance(&(2.0 * o.diag)),
            (o.unit * o.unit).distance(&o.unit),
            (o.complement * o.complement).distance(&o.complement),
            (o.unit * o.complement).max_abs(),
            (o.unit + o.complement).distance(&id),
            (o.raise * o.raise).max_abs(),
            (o.lower * o.lower).max_abs(),
            o.raise.adjoint().distance(&o.lower),
            (o.diag * o.diag + 0.5 * o.raise.anticommutator(&o.lower)).distance(&(0.75 * o.unit)),
            (o.unit * o.raise).distance(&o.raise),
            (o.unit * o.diag).distance(&o.diag),
            (o.unit.trace().re - 2.0).abs(),
            o.diag.trace().norm(),
            (o.n_up + o.n_down).distance(&o.number),
            match model {
                ModeModel::Stoner => o.number.commutator(&o.raise).max_abs(),
                ModeModel::Bcs => o.number.commutator(&o.raise).distance(&(2.0 * o.raise)),
            },
        ];
        for c in checks {
            report.record(k * c + (k - 1.0).abs());
        }
    }
    report.next();
    report
}

/// Runs every suite in a fixed order.
pub fn run_all(cfg: &OracleConfig) -> Result<Vec<SuiteReport>> {
    Ok(vec![
        identity_suite(cfg),
        algebra_suite(cfg)?,
        stoner_suite(cfg)?,
        bcs_suite(cfg)?,
    ])
}
