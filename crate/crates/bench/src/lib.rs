//! Fixed parameter points shared by the benchmarks.

use phasefid::bcs::{self, BcsParams, BcsState, ModePoint};
use phasefid::scanner::{Range, SweepSpec};
use phasefid::stoner::{self, StonerFields, StonerParams, StonerState};
use phasefid::ModeModel;

/// A magnetic Stoner point and its neighbour, both solved.
pub fn stoner_pair() -> (StonerParams, StonerState, StonerState) {
    let p = StonerParams::new(0.2, 1.2);
    let a = stoner::solve_equilibrium(&p, &StonerState::magnetic_seed()).expect("solves");
    let b = stoner::solve_equilibrium(&p.neighbor(), &a).expect("solves");
    (p, a, b)
}

pub fn stoner_fields() -> (StonerFields, StonerFields) {
    let (p, a, b) = stoner_pair();
    (StonerFields::new(&p, &a), StonerFields::new(&p.neighbor(), &b))
}

/// A superconducting BCS point and its neighbour, both solved.
pub fn bcs_pair() -> (BcsParams, BcsState, BcsState) {
    let p = BcsParams::new(0.02, 0.3);
    let q = p.neighbor();
    let a = bcs::solve_gap(p.v, p.t).expect("solves");
    let b = bcs::solve_gap(q.v, q.t).expect("solves");
    (p, a, b)
}

pub fn bcs_modes() -> (ModePoint, ModePoint) {
    let (p, a, b) = bcs_pair();
    let q = p.neighbor();
    (ModePoint::new(p.t, a.gap, 0.01), ModePoint::new(q.t, b.gap, 0.01))
}

/// A small grid for timing whole sweeps.
pub fn small_sweep(model: ModeModel) -> SweepSpec {
    let base = SweepSpec::default_for(model);
    SweepSpec {
        t: Range::new(base.t.lo, base.t.hi, 8),
        coupling: Range::new(base.coupling.lo, base.coupling.hi, 8),
        ..base
    }
}
