use phasefid::stoner::{
    full_polarization_coupling, ground_energy, ground_state_overlap, linear_critical_coupling, mode_log_factor,
    mode_log_fidelity, mode_logs, residuals, solve_equilibrium, susceptibility_fd, total_fidelity, zero_t_derivatives,
    zero_t_solve, Branch, FermiMomenta, StonerFields, StonerParams, StonerState,
};
use proptest::prelude::*;

/// Occupation weights of `|0⟩, |↑⟩, |↓⟩, |↑↓⟩` for `e^{αn̂ + h Ŝᶻ}`.
fn weights(alpha: f64, h: f64) -> [f64; 4] {
    let e = [0.0, alpha + 0.5 * h, alpha - 0.5 * h, 2.0 * alpha];
    let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = e.map(|x| (x - top).exp());
    let z: f64 = w.iter().sum();
    w.map(|x| x / z)
}

fn diagonal_fidelity(fa: &StonerFields, fb: &StonerFields, eps: f64) -> f64 {
    let pa = weights(fa.alpha(eps), fa.h_z);
    let pb = weights(fb.alpha(eps), fb.h_z);
    pa.iter().zip(pb.iter()).map(|(a, b)| (a * b).sqrt()).sum()
}

fn equilibrium(t: f64, u: f64) -> StonerState {
    solve_equilibrium(&StonerParams::new(t, u), &StonerState::paramagnetic_seed()).unwrap()
}

/// Root of `s³ − (9/4u)s² + 1` above `2^{1/3}` by scanning and bisection.
fn cubic_sum(u: f64) -> f64 {
    let g = |s: f64| s * s * (s - 2.25 / u) + 1.0;
    let mut lo = 2f64.cbrt();
    let mut hi = lo;
    while g(hi) < 0.0 {
        lo = hi;
        hi += 1e-4;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn paramagnetic_ground_state_below_criterion() {
    for u in [0.0, 0.8, 1.0] {
        assert_eq!(zero_t_solve(u).unwrap(), FermiMomenta { x: 1.0, y: 1.0 });
    }
}

#[test]
fn magnetic_ground_state_matches_cubic() {
    let u = 1.05;
    let k = zero_t_solve(u).unwrap();
    assert!((k.x + k.y - cubic_sum(u)).abs() < 1e-9);
    assert!((k.x.powi(3) + k.y.powi(3) - 2.0).abs() < 1e-12);
    assert!((k.x - 1.200).abs() < 5e-3 && (k.y - 0.650).abs() < 5e-3, "{k:?}");
    assert!(ground_energy(u, k.magnetization()) < ground_energy(u, 0.0));
}

#[test]
fn full_polarization_beyond_threshold() {
    let k = zero_t_solve(full_polarization_coupling() + 0.01).unwrap();
    assert_eq!(k.y, 0.0);
    assert!((k.magnetization() - 0.5).abs() < 1e-15);
}

#[test]
fn derivatives_match_finite_differences() {
    assert!(zero_t_derivatives(1.0).is_err());
    for u in [1.05, 1.15] {
        let (dx, dy) = zero_t_derivatives(u).unwrap();
        assert!(dx > 0.0 && dy < 0.0);
        let h = 1e-6;
        let (p, m) = (zero_t_solve(u + h).unwrap(), zero_t_solve(u - h).unwrap());
        let fx = (p.x - m.x) / (2.0 * h);
        let fy = (p.y - m.y) / (2.0 * h);
        assert!((dx - fx).abs() / fx.abs() < 1e-2);
        assert!((dy - fy).abs() / fy.abs() < 1e-2);
    }
    let near = zero_t_derivatives(1.0 + 1e-6).unwrap().0;
    let far = zero_t_derivatives(1.01).unwrap().0;
    assert!(near > 10.0 * far);
}

#[test]
fn ground_energy_curvature_changes_sign_at_criterion() {
    let h = 1e-4;
    for u in [0.5, 1.0, 1.3] {
        let d1 = (ground_energy(u, h) - ground_energy(u, -h)) / (2.0 * h);
        assert!(d1.abs() < 1e-12);
    }
    let curv = |u: f64| (ground_energy(u, h) - 2.0 * ground_energy(u, 0.0) + ground_energy(u, -h)) / (h * h);
    assert!(curv(0.99) > 0.0 && curv(1.01) < 0.0);
}

#[test]
fn ground_energy_minimizer_agrees_with_branch_choice() {
    for i in 0..=150 {
        let u = i as f64 * 0.01;
        let m_best = (0..=5000)
            .map(|j| j as f64 * 1e-4)
            .min_by(|a, b| ground_energy(u, *a).total_cmp(&ground_energy(u, *b)))
            .unwrap();
        let m = zero_t_solve(u).unwrap().magnetization();
        assert!((m - m_best).abs() < 2e-3, "u = {u}: {m} vs {m_best}");
    }
}

#[test]
fn ground_state_overlap_is_zero_or_one() {
    let size = 750.0;
    let a = zero_t_solve(0.9).unwrap();
    assert_eq!(ground_state_overlap(&a, &a, size), 1.0);
    assert_eq!(ground_state_overlap(&a, &zero_t_solve(0.95).unwrap(), size), 1.0);
    let (b, c) = (zero_t_solve(0.99).unwrap(), zero_t_solve(1.01).unwrap());
    assert_eq!(ground_state_overlap(&b, &c, size), 0.0);
}

#[test]
fn equilibrium_satisfies_self_consistency() {
    let p = StonerParams::new(0.05, 1.1);
    let s = solve_equilibrium(&p, &StonerState::magnetic_seed()).unwrap();
    assert!(s.converged && s.branch == Branch::Magnetic && s.m > 0.0);
    let r = residuals(&p, s.m, s.mu).unwrap();
    assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);
    assert_eq!(equilibrium(0.2, 0.5).m, 0.0);
}

#[test]
fn low_temperature_limit_matches_ground_state() {
    let s = equilibrium(1e-3, 1.05);
    let m0 = zero_t_solve(1.05).unwrap().magnetization();
    assert!((s.m - m0).abs() < 1e-3, "{} vs {m0}", s.m);
}

#[test]
fn strong_coupling_saturates() {
    let s = equilibrium(0.05, 5.0);
    assert!((s.m - 0.5).abs() < 1e-6);
}

#[test]
fn critical_coupling_rises_with_temperature() {
    let uc: Vec<f64> = (1..=30).map(|i| linear_critical_coupling(0.02 * i as f64).unwrap()).collect();
    assert!(uc.windows(2).all(|w| w[1] >= w[0]));
    assert!((linear_critical_coupling(1e-3).unwrap() - 1.0).abs() < 0.02);
}

#[test]
fn mode_fidelity_examples() {
    let p = StonerParams::new(0.05, 1.02).with_delta(0.0, 2e-3);
    let a = equilibrium(p.t, p.u);
    let b = equilibrium(p.t, p.u + 2e-3);
    let fa = StonerFields::new(&p, &a);
    let fb = StonerFields::new(&p.neighbor(), &b);
    let closed = mode_log_fidelity(&p, &a, &b, 1.0).exp();
    assert!((closed - diagonal_fidelity(&fa, &fb, 1.0)).abs() < 1e-10);
    let same = StonerParams::new(0.05, 1.02).with_delta(0.0, 0.0);
    assert_eq!(mode_log_fidelity(&same, &a, &a, 1.0), 0.0);
}

#[test]
fn total_fidelity_examples() {
    let p = StonerParams::new(0.05, 1.02).with_delta(0.0, 0.0);
    let a = equilibrium(p.t, p.u);
    let unit = total_fidelity(&p, &a, &a).unwrap();
    assert_eq!((unit.f, unit.c, unit.h), (1.0, 1.0, 1.0));

    let p = StonerParams::new(0.3, 0.5).with_delta(0.0, 2e-3);
    let (a, b) = (equilibrium(0.3, 0.5), equilibrium(0.3, 0.502));
    let fid = total_fidelity(&p, &a, &b).unwrap();
    assert!(fid.f > 0.9999 && fid.f <= 1.0);
    assert!((fid.c - fid.f).abs() < 1e-10 && (fid.h - fid.f).abs() < 1e-10);
}

#[test]
fn susceptibility_grows_towards_the_line() {
    let t = 0.05;
    let chi: Vec<f64> = [0.0, 0.5, 0.9]
        .iter()
        .map(|&u| susceptibility_fd(&StonerParams::new(t, u), 1e-6).unwrap())
        .collect();
    assert!(chi[0] > 0.0 && chi[1] > chi[0] && chi[2] > chi[1]);
    assert!(susceptibility_fd(&StonerParams::new(t, 1.2), 1e-6).is_err());
}

fn fields() -> impl Strategy<Value = (StonerFields, StonerFields, f64)> {
    (0.02..1.0f64, -2.0..0.5f64, -10.0..10.0f64, 0.0..0.05f64, -0.05..0.05f64, -1.0..1.0f64, 0.0..2.5f64).prop_map(
        |(t, shift, h, dt, ds, dh, eps)| {
            let fa = StonerFields { t, shift, h_z: h };
            let fb = StonerFields {
                t: t + dt,
                shift: shift + ds,
                h_z: h + dh,
            };
            (fa, fb, eps)
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn commuting_modes_have_equal_measures((fa, fb, eps) in fields()) {
        let (f, c, h) = mode_logs(&fa, &fb, eps);
        prop_assert!(f <= 0.0);
        prop_assert!((f.exp() - c.exp()).abs() < 1e-10);
        prop_assert!((h.exp() - f.exp()).abs() < 1e-10);
        prop_assert!((f.exp() - diagonal_fidelity(&fa, &fb, eps)).abs() < 1e-10);
    }

    #[test]
    fn mode_factor_is_symmetric_and_even((fa, fb, eps) in fields()) {
        let ab = mode_log_factor(&fa, &fb, eps);
        prop_assert!((ab - mode_log_factor(&fb, &fa, eps)).abs() < 1e-13);
        let flip = |f: &StonerFields| StonerFields { h_z: -f.h_z, ..*f };
        prop_assert!((ab - mode_log_factor(&flip(&fa), &flip(&fb), eps)).abs() < 1e-13);
    }

    #[test]
    fn coinciding_fields_give_unit_factor((fa, _fb, eps) in fields()) {
        prop_assert_eq!(mode_log_factor(&fa, &fa, eps), 0.0);
    }
}
