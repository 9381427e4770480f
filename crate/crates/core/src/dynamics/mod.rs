//! Truncated CR flows: right-hand side, time integration, projectors and
//! conserved quantities.
//!
//! The reduced ODE is implemented as written, i∂_t c_n = Σ α c_{n1} c_{n2} c̄_{n3},
//! with no extra factor ½. An overall rescaling of time would not change any
//! invariance statement.

pub(crate) mod field;
mod integrate;
mod kernel;
mod projector;
mod state;

use num_complex::Complex64;

use crate::coupling::CouplingTensor;
use crate::error::Result;

pub use field::{eval_field, spacetime_l4_direct, FieldSamples};
pub use integrate::{
    advance, evolve, ConservationLog, ConservationRecord, Drift, Integrator, IntegratorConfig, Method,
};
pub use kernel::{nonlinearity_grouped, nonlinearity_sparse, rhs, rhs_grouped, rhs_sparse, RhsWorkspace};
pub use projector::{smooth_cutoff, Projector, ProjectorKind};
pub use state::CoefficientState;

pub fn mass(state: &CoefficientState) -> f64 {
    state.coeffs.iter().map(|c| c.norm_sqr()).sum()
}

/// Σ λ_n |c_n|².
pub fn energy(state: &CoefficientState) -> f64 {
    state.coeffs.iter().enumerate().map(|(n, c)| state.family.eigenvalue(n) * c.norm_sqr()).sum()
}

/// Σ W c_{n1} c_{n2} c̄_{n3} c̄_{n4} over all resonant quadruples.
pub fn hamiltonian(state: &CoefficientState, tensor: &CouplingTensor) -> Result<f64> {
    kernel::check_compatible(state, tensor)?;
    kernel::quartic_form(tensor, &state.coeffs)
}

/// Hamiltonian of the truncated system, H(χc); conserved by the projected flow.
pub fn projected_hamiltonian(state: &CoefficientState, tensor: &CouplingTensor, proj: &Projector) -> Result<f64> {
    kernel::check_compatible(state, tensor)?;
    let chi = proj.weights(tensor.family(), tensor.dim());
    projected_hamiltonian_with(state, tensor, &chi)
}

pub(crate) fn projected_hamiltonian_with(
    state: &CoefficientState,
    tensor: &CouplingTensor,
    chi: &[f64],
) -> Result<f64> {
    let c: Vec<Complex64> = state.coeffs.iter().zip(chi).map(|(c, w)| c * w).collect();
    kernel::quartic_form(tensor, &c)
}

/// √(Σ λ_n^s |c_n|²).
pub fn sobolev_norm(state: &CoefficientState, s: f64) -> f64 {
    state.coeffs.iter().enumerate().map(|(n, c)| state.family.eigenvalue(n).powf(s) * c.norm_sqr()).sum::<f64>().sqrt()
}

/// e^{−iτH}: c_n ← e^{−iτλ_n} c_n.
pub fn propagate_linear(state: &CoefficientState, tau: f64) -> CoefficientState {
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(n, c)| c * Complex64::from_polar(1.0, -tau * state.family.eigenvalue(n)))
        .collect();
    CoefficientState { family: state.family, coeffs, time: state.time }
}

/// ‖e^{−itH}u‖⁴ in L⁴([−π/4, π/4] × ℝ²), read off the quartic form: the
/// stored weights are 2π/constant times the space-time integral.
pub fn spacetime_l4_fourth(state: &CoefficientState, tensor: &CouplingTensor) -> Result<f64> {
    Ok(hamiltonian(state, tensor)? * tensor.constant() / (2.0 * std::f64::consts::PI))
}
