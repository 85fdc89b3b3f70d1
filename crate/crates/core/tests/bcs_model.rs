use num_complex::Complex64;
use phasefid::algebra::{build_mode_operators, dense_exp, dense_fidelity, dense_sqrt, ModeModel};
use phasefid::bcs::{
    critical_temperature, gap_residual, loop_composition, mode_density, mode_logs, mode_triple, solve_gap,
    total_fidelity, uhlmann_mode, uhlmann_profile, zero_t_fidelity, zero_t_mode_log, BcsParams, BcsState, ModePoint,
};
use phasefid::DenseOperator;
use proptest::prelude::*;

/// Euler–Mascheroni constant.
const GAMMA: f64 = 0.577_215_664_901_532_9;

/// `1 − v∫₀¹ tanh(E/2t)/E dx` by composite Simpson on a fine uniform grid.
fn simpson_residual(v: f64, t: f64, gap: f64) -> f64 {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let g = |x: f64| {
        let e = (x * x + gap * gap).sqrt();
        if e < 1e-300 {
            0.5 / t
        } else {
            (0.5 * e / t).tanh() / e
        }
    };
    let mut s = g(0.0) + g(1.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * g(i as f64 * h);
    }
    1.0 - v * s * h / 3.0
}

fn gap(v: f64, t: f64) -> f64 {
    solve_gap(v, t).unwrap().gap
}

#[test]
fn gap_without_coupling_or_above_tc() {
    assert_eq!(gap(0.0, 0.01), 0.0);
    let tc = critical_temperature(0.3).unwrap();
    assert_eq!(gap(0.3, tc * 1.01), 0.0);
    assert_eq!(gap(0.3, 0.2), 0.0);
}

#[test]
fn zero_temperature_gap() {
    for v in [0.2, 0.3, 0.5] {
        let d = gap(v, 0.0);
        assert!((d * (1.0 / v).sinh() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn finite_temperature_gap_solves_the_integral_equation() {
    let d = gap(0.3, 1e-4);
    assert!(gap_residual(0.3, 1e-4, d).unwrap().abs() <= 1e-12);
    for (v, t) in [(0.3, 0.02), (0.4, 0.05)] {
        let d = gap(v, t);
        assert!(d > 0.0);
        assert!(simpson_residual(v, t, d).abs() < 1e-8);
    }
}

#[test]
fn critical_temperature_weak_coupling() {
    let tc = critical_temperature(0.3).unwrap();
    let asymptotic = 2.0 * GAMMA.exp() / std::f64::consts::PI * (-1.0 / 0.3f64).exp();
    assert!((tc / asymptotic - 1.0).abs() < 0.02, "{tc}");
    assert!(simpson_residual(0.3, tc, 0.0).abs() < 1e-8);
    assert!(critical_temperature(0.05).unwrap() < 1e-8);
}

#[test]
fn universal_gap_ratio() {
    let target = std::f64::consts::PI * (-GAMMA).exp();
    for v in [0.15, 0.2, 0.3] {
        let ratio = gap(v, 0.0) / critical_temperature(v).unwrap();
        assert!((ratio / target - 1.0).abs() < 0.01, "v = {v}: {ratio}");
    }
}

#[test]
fn gap_decreases_with_temperature_and_grows_with_coupling() {
    let v = 0.35;
    let tc = critical_temperature(v).unwrap();
    let gaps: Vec<f64> = (1..40).map(|i| gap(v, tc * i as f64 / 40.0)).collect();
    // at the lowest temperatures the decrease is below rounding
    assert!(gaps.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-14)));
    assert!(gaps[2..].windows(2).all(|w| w[1] < w[0]));
    assert!(gap(0.36, 0.3 * tc) > gap(v, 0.3 * tc));
}

#[test]
fn mode_triple_matches_dense_example() {
    let pa = ModePoint::new(0.2, 0.1, 0.3);
    let pb = ModePoint::new(0.2, 0.12, 0.3);
    let m = mode_triple(&pa, &pb).unwrap();
    let (ra, rb) = (mode_density(&pa).unwrap(), mode_density(&pb).unwrap());
    let ops = build_mode_operators(ModeModel::Bcs);
    let z = |p: &ModePoint| dense_exp(&ops.generator(&p.nambu())).unwrap().trace().re;
    let mean = ModePoint {
        gap: 0.5 * (pa.gap + pb.gap),
        ..pa
    };
    let c = z(&mean) / (z(&pa) * z(&pb)).sqrt();
    let h = (dense_sqrt(&ra).unwrap() * dense_sqrt(&rb).unwrap()).trace().re;
    assert!((m.f - dense_fidelity(&ra, &rb).unwrap()).abs() < 1e-10);
    assert!((m.c - c).abs() < 1e-10);
    assert!((m.h - h).abs() < 1e-10);
    assert!(m.c < m.h && m.h < m.f);
}

#[test]
fn identical_and_normal_modes() {
    let p = ModePoint::new(0.05, 0.03, -0.2);
    let m = mode_triple(&p, &p).unwrap();
    assert_eq!((m.f, m.c, m.h), (1.0, 1.0, 1.0));
    assert!(m.uhl_dev < 1e-12);
    let m = mode_triple(&ModePoint::new(0.05, 0.0, 0.2), &ModePoint::new(0.06, 0.0, 0.2)).unwrap();
    assert!((m.f - m.c).abs() < 1e-14 && (m.f - m.h).abs() < 1e-14);
    assert!(m.uhl_dev <= 1e-10);
}

#[test]
fn total_fidelity_at_coinciding_points() {
    let p = BcsParams::new(0.02, 0.35).with_delta(0.0, 0.0);
    let a = solve_gap(p.v, p.t).unwrap();
    let fid = total_fidelity(&p, &a, &a).unwrap();
    assert_eq!((fid.f, fid.c, fid.h), (1.0, 1.0, 1.0));
}

#[test]
fn total_fidelity_is_ordered_and_symmetric() {
    let v = 0.3;
    let tc = critical_temperature(v).unwrap();
    let p = BcsParams::new(tc * 0.999, v).with_delta(0.0, 1e-3);
    let q = p.neighbor();
    let (a, b) = (solve_gap(p.v, p.t).unwrap(), solve_gap(q.v, q.t).unwrap());
    let ab = total_fidelity(&p, &a, &b).unwrap();
    assert!(ab.c <= ab.h + 1e-12 && ab.h <= ab.f + 1e-12);
    assert!(ab.c < ab.f);
    let back = BcsParams::new(q.t, q.v).with_delta(0.0, -1e-3);
    let ba = total_fidelity(&back, &b, &a).unwrap();
    assert!((ab.f - ba.f).abs() < 1e-12 && (ab.c - ba.c).abs() < 1e-12 && (ab.h - ba.h).abs() < 1e-12);
}

#[test]
fn low_temperature_limit_matches_ground_state_fidelity() {
    let (v, dv, nu) = (0.35, 1e-3, 500.0);
    let p = BcsParams::new(1e-4, v).with_nu(nu).with_delta(0.0, dv);
    let (a, b) = (solve_gap(v, 1e-4).unwrap(), solve_gap(v + dv, 1e-4).unwrap());
    let finite = total_fidelity(&p, &a, &b).unwrap().f;
    assert!((finite - zero_t_fidelity(v, v + dv, nu)).abs() <= 1e-6);
}

#[test]
fn ground_state_fidelity_examples() {
    assert_eq!(zero_t_fidelity(0.3, 0.3, 500.0), 1.0);
    let d = 0.01;
    for xi in [-0.5, -1e-3, 0.0, 0.02, 0.7] {
        let e = (xi * xi + d * d as f64).sqrt();
        let anderson = (0.5 * (1.0 + xi.abs() / e)).sqrt().ln();
        assert!((zero_t_mode_log(0.0, d, xi) - anderson).abs() < 1e-14);
    }
    let f: Vec<f64> = [1e2, 1e4, 1e6, 1e8].iter().map(|&nu| zero_t_fidelity(0.3, 0.32, nu)).collect();
    assert!(f.windows(2).all(|w| w[1] < w[0]));
    assert!(f[3] < 1e-100);
}

#[test]
fn uhlmann_profile_examples() {
    let v = 0.3;
    let tc = critical_temperature(v).unwrap();
    let xi_grid = [-0.3, -0.01, 0.0, 0.004, 0.2];

    let p = BcsParams::new(2.0 * tc, v).with_delta(0.0, 1e-3);
    let normal = BcsState {
        gap: 0.0,
        converged: true,
    };
    for s in uhlmann_profile(&p, &normal, &normal, &xi_grid).unwrap() {
        assert!(s.uhl_dev <= 1e-10);
        assert!(s.identity_residual.abs() <= 1e-10);
    }

    let p = BcsParams::new(tc * 0.99, v).with_delta(0.0, 1e-3);
    let q = p.neighbor();
    let (a, b) = (solve_gap(p.v, p.t).unwrap(), solve_gap(q.v, q.t).unwrap());
    for s in uhlmann_profile(&p, &a, &b, &xi_grid).unwrap() {
        assert!(s.identity_residual.abs() <= 1e-10);
    }

    // exactly at ε̄ = 0 the normal-phase vector vanishes and the connection is trivial
    let xi = 0.5 * tc;
    let at_fermi = uhlmann_mode(&ModePoint::new(tc, 0.0, 0.0), &ModePoint::new(tc, 0.5 * tc, 0.0)).unwrap();
    assert!(at_fermi.deviation < 1e-12);
    let straddle = uhlmann_mode(&ModePoint::new(tc, 0.0, xi), &ModePoint::new(tc, 0.5 * tc, xi)).unwrap();
    assert!(straddle.deviation > 0.01, "{}", straddle.deviation);
}

#[test]
fn loop_holonomy() {
    let v = 0.3;
    let tc = critical_temperature(v).unwrap();
    let id = DenseOperator::identity();

    let p = (0.5 * tc, v);
    assert!(loop_composition(&[p, p, p], 0.0).unwrap().distance(&id) < 1e-12);

    let t = 3.0 * tc;
    let normal = [(t, v), (1.1 * t, v), (1.1 * t, v + 0.01), (t, v), (t, v)];
    assert!(loop_composition(&normal, 0.01).unwrap().distance(&id) <= 1e-6);

    let straddle = [(0.9 * tc, v), (1.1 * tc, v), (1.1 * tc, v + 0.02), (0.9 * tc, v + 0.02), (0.9 * tc, v)];
    let w = loop_composition(&straddle, 0.5 * tc).unwrap();
    assert!((w * w.adjoint()).distance(&id) < 1e-10);
    assert!(w.distance(&id) > 0.0);

    assert!(loop_composition(&[p, p], 0.0).is_err());
    assert!(loop_composition(&[p, (tc, v), (0.2 * tc, v)], 0.0).is_err());
}

fn mode_point() -> impl Strategy<Value = ModePoint> {
    (0.02..0.5f64, 0.0..0.3f64, -3.2..3.2f64, -1.0..1.0f64).prop_map(|(t, r, phase, xi)| ModePoint {
        t,
        gap: Complex64::from_polar(r, phase),
        xi,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mode_measures_are_ordered(pa in mode_point(), pb in mode_point()) {
        let (f, c, h) = mode_logs(&pa, &pb);
        let (f, c, h) = (f.exp(), c.exp(), h.exp());
        prop_assert!(c > 0.0 && f <= 1.0 + 1e-10);
        prop_assert!(c <= h + 1e-12 && h <= f + 1e-12);
    }

    #[test]
    fn mode_measures_are_symmetric(pa in mode_point(), pb in mode_point()) {
        let ab = mode_logs(&pa, &pb);
        let ba = mode_logs(&pb, &pa);
        prop_assert!((ab.0 - ba.0).abs() < 1e-12 && (ab.1 - ba.1).abs() < 1e-12 && (ab.2 - ba.2).abs() < 1e-12);
    }

    #[test]
    fn overlap_gap_is_the_connection_trace(pa in mode_point(), pb in mode_point()) {
        let (f, _, h) = mode_logs(&pa, &pb);
        let u = uhlmann_mode(&pa, &pb).unwrap();
        prop_assert!(((h.exp() - f.exp()) - u.trace_term).abs() <= 1e-10);
        let w = u.connection;
        prop_assert!((w * w.adjoint()).distance(&DenseOperator::identity()) < 1e-10);
        prop_assert!(u.deviation >= 0.0 && u.deviation <= 2.0 + 1e-12);
    }

    #[test]
    fn gap_is_monotone_in_temperature(v in 0.25..0.5f64, x in 0.05..0.95f64, y in 0.05..0.95f64) {
        prop_assume!((x - y).abs() > 1e-3);
        let tc = critical_temperature(v).unwrap();
        let (lo, hi) = (x.min(y) * tc, x.max(y) * tc);
        prop_assert!(gap(v, lo) > gap(v, hi));
    }
}
