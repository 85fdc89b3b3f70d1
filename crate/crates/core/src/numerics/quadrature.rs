//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre node sets.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Settings for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Maximum number of panels the adaptive bisection may create.
    pub max_panels: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Semi-infinite integrals are cut at `edge + tail_multiplier·width`.
    pub tail_multiplier: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            max_panels: 2000,
            rel_tol: 1e-12,
            abs_tol: 0.0,
            tail_multiplier: 40.0,
        }
    }
}

impl Quadrature {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 1e-14 && self.rel_tol < 1e-2) {
            return Err(Error::InvalidParameter(format!(
                "relative tolerance {} outside (1e-14, 1e-2)",
                self.rel_tol
            )));
        }
        if self.tail_multiplier < 10.0 {
            return Err(Error::InvalidParameter(format!(
                "tail multiplier {} below 10",
                self.tail_multiplier
            )));
        }
        if self.max_panels == 0 || self.abs_tol < 0.0 {
            return Err(Error::InvalidParameter("invalid panel budget or tolerance".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(centre - x);
        let f2 = f(centre + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let value = res_k * half;
    res_abs *= h;
    res_asc *= h;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    }
}

/// Adaptive integral over `[a, b]` with the interval pre-split at
/// `breakpoints` (points outside `(a, b)` are ignored).
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    q: &Quadrature,
) -> Result<f64> {
    q.validate()?;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid interval [{a}, {b}]")));
    }
    let mut edges = vec![a];
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|p| *p > a && *p < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    edges.extend(inner);
    edges.push(b);

    let mut heap = BinaryHeap::new();
    let mut settled = Vec::new();
    for w in edges.windows(2) {
        heap.push(kronrod15(&mut f, w[0], w[1]));
    }
    let mut panels = heap.len();
    loop {
        let (value, error, abs_value) = heap
            .iter()
            .chain(settled.iter())
            .fold((0.0, 0.0, 0.0), |acc, p: &Panel| {
                (acc.0 + p.value, acc.1 + p.error, acc.2 + p.abs_value)
            });
        if !value.is_finite() {
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
            });
        }
        let tol = q
            .abs_tol
            .max(q.rel_tol * value.abs())
            .max(1e2 * f64::EPSILON * abs_value);
        if error <= tol {
            return Ok(value);
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return Err(Error::Quadrature {
                    estimate: value,
                    error_bound: error,
                })
            }
        };
        if panels >= q.max_panels {
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let resolvable = (worst.b - worst.a) > 1e3 * f64::EPSILON * worst.a.abs().max(worst.b.abs())
            && mid > worst.a
            && mid < worst.b;
        if !resolvable {
            settled.push(worst);
            continue;
        }
        heap.push(kronrod15(&mut f, worst.a, mid));
        heap.push(kronrod15(&mut f, mid, worst.b));
        panels += 1;
    }
}

/// Adaptive integral over a finite interval.
pub fn integrate_finite<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, q: &Quadrature) -> Result<f64> {
    integrate_with_breakpoints(f, a, b, &[], q)
}

/// Weight multiplying the integrand of a semi-infinite integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Unit,
    /// `√ε`, removed by the substitution `ε = s²`.
    Sqrt,
}

/// `∫₀^∞ w(ε) f(ε) dε` for integrands that decay beyond `edge` on the scale
/// `width` (a Fermi point and the temperature, for instance).
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    f: F,
    weight: Weight,
    edge: f64,
    width: f64,
    q: &Quadrature,
) -> Result<f64> {
    integrate_semi_infinite_with_edges(f, weight, &[edge], width, q)
}

/// As [`integrate_semi_infinite`] with several edges; the cutoff follows the
/// largest one and every edge becomes a breakpoint.
pub fn integrate_semi_infinite_with_edges<F: FnMut(f64) -> f64>(
    mut f: F,
    weight: Weight,
    edges: &[f64],
    width: f64,
    q: &Quadrature,
) -> Result<f64> {
    if !(width > 0.0) {
        return Err(Error::InvalidParameter(format!("tail width {width} must be positive")));
    }
    let top = edges.iter().copied().fold(0.0, f64::max);
    let upper = top + q.tail_multiplier * width;
    // Graded breakpoints around each edge so no panel hides a step that is
    // narrow compared with the panel.
    let mut points = Vec::with_capacity(9 * edges.len());
    for e in edges {
        points.push(*e);
        for k in [1.0, 4.0, 16.0, 64.0] {
            points.push(e - k * width);
            points.push(e + k * width);
        }
    }
    points.retain(|p| *p > 0.0 && *p < upper);
    let edges = &points[..];
    match weight {
        Weight::Unit => integrate_with_breakpoints(f, 0.0, upper, edges, q),
        Weight::Sqrt => {
            let breaks: Vec<f64> = edges.iter().filter(|e| **e > 0.0).map(|e| e.sqrt()).collect();
            integrate_with_breakpoints(
                |s| {
                    let e = s * s;
                    2.0 * e * f(e)
                },
                0.0,
                upper.sqrt(),
                &breaks,
                q,
            )
        }
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A fixed quadrature rule `Σ wᵢ f(xᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    /// Composite Gauss–Legendre rule on `[−1, 1]`, symmetric about 0, with
    /// panel edges `0, smallest, …, 1` in geometric progression on each side.
    pub fn graded_symmetric(panels_per_side: usize, smallest: f64, nodes_per_panel: usize) -> Self {
        let (gx, gw) = gauss_legendre(nodes_per_panel);
        let ratio = (1.0 / smallest).powf(1.0 / (panels_per_side.max(2) - 1) as f64);
        let mut edges = vec![0.0];
        let mut e = smallest;
        for _ in 0..panels_per_side.saturating_sub(1) {
            edges.push(e);
            e *= ratio;
        }
        edges.push(1.0);
        edges.truncate(panels_per_side + 1);
        *edges.last_mut().unwrap() = 1.0;

        let mut positive = Vec::new();
        for w in edges.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in gx.iter().zip(&gw) {
                positive.push((c + h * x, h * wt));
            }
        }
        let mut nodes = Vec::with_capacity(2 * positive.len());
        let mut weights = Vec::with_capacity(2 * positive.len());
        for (x, w) in positive.iter().rev() {
            nodes.push(-x);
            weights.push(*w);
        }
        for (x, w) in &positive {
            nodes.push(*x);
            weights.push(*w);
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}
