use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectorKind {
    /// Π_N, the orthogonal projector on modes with λ_n ≤ λ_N.
    Sharp,
    /// S_N = χ(H / λ_N) with a quintic smoothstep profile.
    Smooth,
}

/// Spectral multiplier χ(λ_n / λ_N) applied to coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projector {
    pub kind: ProjectorKind,
    pub cutoff: usize,
}

impl Projector {
    pub fn sharp(cutoff: usize) -> Self {
        Self { kind: ProjectorKind::Sharp, cutoff }
    }

    pub fn smooth(cutoff: usize) -> Self {
        Self { kind: ProjectorKind::Smooth, cutoff }
    }

    /// Profile χ: 1 on [−½, ½], 0 outside (−1, 1) for the smooth kind; the
    /// indicator of [0, 1] for the sharp kind.
    pub fn profile(&self, x: f64) -> f64 {
        match self.kind {
            ProjectorKind::Sharp => {
                if (0.0..=1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            ProjectorKind::Smooth => smooth_cutoff(x),
        }
    }

    /// χ(λ_n / λ_N) for n = 0..dim.
    pub fn weights(&self, family: BasisFamily, dim: usize) -> Vec<f64> {
        let reference = family.eigenvalue(self.cutoff);
        (0..dim).map(|n| self.profile(family.eigenvalue(n) / reference)).collect()
    }
}

/// C² quintic smoothstep cutoff.
pub fn smooth_cutoff(x: f64) -> f64 {
    let a = x.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let t = (a - 0.5) / 0.5;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}
