//! Quadrature and root finding used by the mean-field models.

mod quadrature;
mod solver;

pub use quadrature::{
    gauss_legendre, integrate_finite, integrate_semi_infinite, integrate_semi_infinite_with_edges,
    integrate_with_breakpoints, NodeSet, Quadrature, Weight,
};
pub use solver::{solve_bracketed, solve_system, SolverConfig};
