use thiserror::Error;

use crate::basis::BasisFamily;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hermite recurrence overflowed at x = {x} (n = {n})")]
    HermiteOverflow { n: usize, x: f64 },

    #[error("index {index} is not valid for {family}")]
    InvalidIndex { family: BasisFamily, index: usize },

    #[error("quadrature node search did not converge for node {node} after {iterations} iterations")]
    QuadratureConvergence { node: usize, iterations: usize },

    #[error("invalid quadrature parameters: {0}")]
    QuadratureParams(String),

    #[error("grid too coarse or too narrow: relative difference {rel_diff:.3e} between resolutions exceeds {tol:.0e}")]
    GridInadequate { rel_diff: f64, tol: f64 },

    #[error("imaginary residual {residual:.3e} exceeds tolerance in coupling ({n1},{n2},{n3},{n4})")]
    ImaginaryResidual { n1: usize, n2: usize, n3: usize, n4: usize, residual: f64 },

    #[error("hamiltonian imaginary residual {residual:.3e}: tensor lacks pair-exchange symmetry")]
    HamiltonianResidual { residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("implicit midpoint iteration failed to converge at t = {t}")]
    ImplicitSolve { t: f64 },

    #[error("gibbs rejection sampler stalled: {accepted} acceptances in {attempts} attempts; use the independence-Metropolis sampler")]
    RejectionStall { accepted: u64, attempts: u64 },

    #[error("insufficient tail mass: {0}")]
    InsufficientTail(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("tensor cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
