use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor or operation received parameters outside its domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The noise level violates the admissible range of the chosen recipe.
    #[error("inadmissible noise level: epsilon = {epsilon} but {constraint} requires epsilon < {limit}")]
    Admissibility {
        constraint: String,
        epsilon: f64,
        limit: f64,
    },

    /// No positive noise level satisfies the requested condition-number budget.
    #[error("infeasible budget: kappa_max * lambda_N = {product} does not exceed lambda_1 = {lambda1}")]
    InfeasibleBudget { product: f64, lambda1: f64 },

    /// The template has no analytic certificate; use the general algorithm.
    #[error("{0}: no analytic eigenvalue bounds, route through the general algorithm")]
    RequiresGeneralAlgorithm(String),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (relative off-diagonal norm {residual:e})")]
    NonConvergence { sweeps: usize, residual: f64 },

    #[error("matrix is not positive definite: Cholesky pivot {pivot} = {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,
}
