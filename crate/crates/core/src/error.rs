use thiserror::Error;

/// Errors produced by basis construction, transforms, samplers and solvers.
#[derive(Debug, Error)]
pub enum PceError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("point outside domain: {0}")]
    Domain(String),

    #[error("ill-posed orthogonalization: basis function {basis_index} is numerically dependent (|R_nn|/|R_11| = {ratio:.3e})")]
    IllPosedOrthogonalization { basis_index: usize, ratio: f64 },

    #[error("unisolvence failure at Leja step {step}: pivot magnitude {pivot:.3e} below threshold")]
    UnisolvenceFailure { step: usize, pivot: f64 },

    #[error("correlation matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("marginal CDF hit support boundary (F in {{0,1}}), transform is infinite")]
    Boundary,

    #[error("target correlation {target} is unattainable for these marginals (attainable range [{lo:.6}, {hi:.6}])")]
    InfeasibleCorrelation { target: f64, lo: f64, hi: f64 },

    #[error("root solve did not converge: {0}")]
    NonConvergence(String),

    #[error("rejection sampling acceptance rate {rate:.2e} too low; increase the bound or shrink the proposal box")]
    RejectionEfficiency { rate: f64 },

    #[error("quadrature weights sum to {sum:.3e} <= 0, rule is degenerate")]
    DegenerateRule { sum: f64 },

    #[error("division by zero dominating density at node {node}")]
    ZeroDominatingDensity { node: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, PceError>;
