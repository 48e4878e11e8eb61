use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("hypergeometric series did not converge after {terms} terms (z = {z})")]
    NonConvergence { terms: usize, z: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("mode {n} exceeds the constants table (n_max = {n_max})")]
    IndexOutOfTable { n: usize, n_max: usize },

    #[error("no sign change of E_n(b) up to n_max = {n_max}; raise the table size (VSTATES_NMAX)")]
    TableExhausted { n_max: usize },

    #[error("eigenvalue at m = {m} is not simple (Δ_m = {delta:e}); m is below the threshold")]
    NotSimple { m: usize, delta: f64 },

    #[error("m = {m} is below the threshold N(b) = {threshold}")]
    BelowThreshold { m: usize, threshold: usize },

    #[error("Ω = {omega} is not an eigenvalue of M_{m} (kernel residual {residual:e})")]
    NotAnEigenvalue { m: usize, omega: f64, residual: f64 },

    #[error("boundaries collide: minimum node distance {distance:e}")]
    BoundaryCollision { distance: f64 },

    #[error("patch violates the disjointness guard: weighted coefficient sum {sum:e} >= {limit:e}")]
    GuardViolation { sum: f64, limit: f64 },

    #[error("Newton failed to converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian (condition estimate {condition:e})")]
    SingularJacobian { condition: f64 },
}
