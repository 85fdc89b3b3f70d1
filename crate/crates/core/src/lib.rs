//! Fidelity, partition-function ratio and Uhlmann overlap between thermal
//! states of the Stoner–Hubbard and BCS mean-field models.
//!
//! The crate is organised by model: [`stoner`] and [`bcs`] solve the
//! self-consistent equations and evaluate per-mode closed forms built from
//! [`algebra`]; [`scanner`] sweeps the `(t, coupling)` plane; [`oracle`]
//! checks the closed forms against explicit 4×4 matrices.

pub mod algebra;
pub mod bcs;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod scanner;
pub mod stoner;

pub use algebra::{DenseOperator, ModeModel, NambuVector, SpinVector};
pub use error::{Error, Result};
