use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is numerically singular (eigenvalue scale {eigenvalue_scale:.3e} below tolerance {tolerance:.3e})")]
    SingularMatrix {
        eigenvalue_scale: f64,
        tolerance: f64,
    },

    #[error("design matrix is singular in a required direction (residual {residual:.3e})")]
    SingularDesign { residual: f64 },

    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    #[error("insufficient samples: got {got}, need at least {needed}")]
    InsufficientSamples { got: usize, needed: usize },

    #[error("infeasible budget: tau = {tau:.6e} is below the required {required:.6e}")]
    InfeasibleBudget { tau: f64, required: f64 },

    #[error("inner solver failed in {context}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    InnerSolver {
        context: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
