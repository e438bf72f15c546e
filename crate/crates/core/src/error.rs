//! Error type shared by all modules.

/// Everything that can go wrong in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mode count mismatch: {0} vs {1}")]
    ModeMismatch(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max |A - A^dag| = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("matrix is singular or near-singular (sigma_min/sigma_max = {0:.3e})")]
    SingularMatrix(f64),

    #[error("eigensolver did not converge (off-diagonal residual {0:.3e})")]
    EigNonConvergence(f64),

    #[error("codewords are linearly dependent (Gram relative min eigenvalue {0:.3e})")]
    LinearDependence(f64),

    #[error("operation requires equal priors")]
    UnequalPriors,

    #[error("enumeration budget exceeded ({0} elements)")]
    BudgetExceeded(usize),

    #[error("supplied elements do not form a subgroup")]
    NotSubgroup,

    #[error("group does not leave the Gram matrix invariant")]
    GramNotInvariant,

    #[error("unsupported group or action for representation data: {0}")]
    UnsupportedRepresentation(String),

    #[error("formula used outside its certified domain: {0}")]
    FormulaDomain(String),

    #[error("solver failed: {0}")]
    SolveFailed(String),

    #[error("no solution branch satisfies the optimality inequality ({0} branches tried)")]
    NoValidBranch(usize),

    #[error("symmetry pattern too coarse: best solution fails optimality (min eigenvalue {0:.3e})")]
    PatternTooCoarse(f64),

    #[error("quadrature did not converge")]
    QuadratureNonConvergence,

    #[error("measurement basis is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
