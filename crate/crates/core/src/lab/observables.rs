use serde::{Deserialize, Serialize};

use crate::coupling::CouplingTensor;
use crate::dynamics::{energy, hamiltonian, mass, sobolev_norm, CoefficientState};
use crate::error::Result;

/// Which functionals of a state enter the invariance comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSet {
    pub actions: bool,
    pub real_imag: bool,
    pub mass: bool,
    pub energy: bool,
    pub hamiltonian: bool,
    /// σ values for ‖u‖_{H^{−σ}}.
    #[serde(default)]
    pub negative_sobolev: Vec<f64>,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self {
            actions: true,
            real_imag: true,
            mass: true,
            energy: true,
            hamiltonian: true,
            negative_sobolev: vec![1.5],
        }
    }
}

impl ObservableSet {
    pub fn names(&self, dim: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.actions {
            out.extend((0..dim).map(|n| format!("action_{n}")));
        }
        if self.real_imag {
            for n in 0..dim {
                out.push(format!("re_{n}"));
                out.push(format!("im_{n}"));
            }
        }
        if self.mass {
            out.push("mass".into());
        }
        if self.energy {
            out.push("energy".into());
        }
        if self.hamiltonian {
            out.push("hamiltonian".into());
        }
        out.extend(self.negative_sobolev.iter().map(|s| format!("h_minus_{s}")));
        out
    }

    pub fn evaluate(&self, state: &CoefficientState, tensor: &CouplingTensor) -> Result<Vec<f64>> {
        let mut out = Vec::new();
        if self.actions {
            out.extend(state.coeffs.iter().map(|c| c.norm_sqr()));
        }
        if self.real_imag {
            for c in &state.coeffs {
                out.push(c.re);
                out.push(c.im);
            }
        }
        if self.mass {
            out.push(mass(state));
        }
        if self.energy {
            out.push(energy(state));
        }
        if self.hamiltonian {
            out.push(hamiltonian(state, tensor)?);
        }
        out.extend(self.negative_sobolev.iter().map(|&s| sobolev_norm(state, -s)));
        Ok(out)
    }
}
