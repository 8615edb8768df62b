use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix dimension must be in 1..={max}, got {n}")]
    Dimension { n: usize, max: usize },

    #[error("expected {expected} entries for an {n}x{n} matrix, got {found}")]
    DataLength {
        n: usize,
        expected: usize,
        found: usize,
    },

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric: asymmetry {asymmetry:e} exceeds {allowed:e}")]
    Asymmetric { asymmetry: f64, allowed: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("symmetric eigensolver did not converge for n = {n}")]
    EigenNonConvergence { n: usize },

    #[error("eigenvalue {eigenvalue:e} is outside the domain of {function}")]
    Domain { function: &'static str, eigenvalue: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("order hypothesis A > B fails: smallest eigenvalue of A - B is {gap:e}")]
    Order { gap: f64 },

    #[error("parameter {name} = {value} outside {expected}")]
    Parameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not converge after {refinements} refinements (last estimates {previous:e}, {last:e})")]
    Convergence {
        refinements: usize,
        previous: f64,
        last: f64,
    },

    #[error("linear solve failed: {0}")]
    Solve(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
