use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A field vector whose `minus` component is not the conjugate of `plus`.
    #[error("vector is not physical: h- differs from conj(h+) by {mismatch:e}")]
    NonPhysicalVector { mismatch: f64 },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositive { eigenvalue: f64 },

    /// The closed form would overflow; use the logarithmic companion instead.
    #[error("closed form overflows for argument {argument}; use the log-space variant")]
    Overflow { argument: f64 },

    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual_norm:e})")]
    NoConvergence {
        iterations: usize,
        last: Vec<f64>,
        residual_norm: f64,
    },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("{0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
