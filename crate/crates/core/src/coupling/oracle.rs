use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{alpha_hol, build_tensor};
use crate::basis::{build_quadrature, envelope_table, nodes_for_quartic, BasisFamily, QuadratureRule};
use crate::error::{Error, Result};

const IMAG_TOL: f64 = 1e-10;
/// Gaussian scale carried by a product of four basis functions.
const QUARTIC_SCALE: f64 = 2.0;

/// ∫_{−π/4}^{π/4} e^{iτΔλ} dτ in closed form (real by symmetry).
pub(crate) fn time_integral(delta_lambda: f64) -> f64 {
    if delta_lambda == 0.0 {
        PI / 2.0
    } else {
        2.0 * (delta_lambda * PI / 4.0).sin() / delta_lambda
    }
}

/// Envelopes of every mode at every node of a tensor-product Gauss–Hermite
/// rule, so that each coupling is a single weighted dot product.
pub struct OracleEvaluator {
    family: BasisFamily,
    max_index: usize,
    point_weights: Vec<f64>,
    /// mode-major: table[k * points + p]
    table: Vec<Complex64>,
}

impl OracleEvaluator {
    /// Evaluator with enough nodes to integrate every quartic product exactly.
    pub fn new(family: BasisFamily, max_index: usize) -> Result<Self> {
        let rule = build_quadrature(nodes_for_quartic(family, max_index), QUARTIC_SCALE)?;
        Self::with_rule(family, max_index, &rule)
    }

    pub fn with_rule(family: BasisFamily, max_index: usize, rule: &QuadratureRule) -> Result<Self> {
        if rule.scale() != QUARTIC_SCALE {
            return Err(Error::QuadratureParams(format!(
                "coupling integrand carries e^(-2|x|^2); rule has scale {}",
                rule.scale()
            )));
        }
        let max_index = family.max_index(max_index);
        let points = rule.len() * rule.len();
        let mut point_weights = Vec::with_capacity(points);
        let mut table = vec![Complex64::default(); (max_index + 1) * points];
        let mut p = 0;
        for (&x1, &w1) in rule.nodes().iter().zip(rule.weights()) {
            for (&x2, &w2) in rule.nodes().iter().zip(rule.weights()) {
                point_weights.push(w1 * w2);
                for (k, v) in envelope_table(family, max_index, [x1, x2]).into_iter().enumerate() {
                    table[k * points + p] = v;
                }
                p += 1;
            }
        }
        Ok(Self { family, max_index, point_weights, table })
    }

    fn mode(&self, k: usize) -> &[Complex64] {
        let points = self.point_weights.len();
        &self.table[k * points..(k + 1) * points]
    }

    /// ∫ φ_{n1} φ_{n2} conj(φ_{n3} φ_{n4}) dx.
    pub fn space_integral(&self, n: [usize; 4]) -> Result<Complex64> {
        for &k in &n {
            self.family.validate_index(k)?;
            if k > self.max_index {
                return Err(Error::InvalidIndex { family: self.family, index: k });
            }
        }
        let (a, b, c, d) = (self.mode(n[0]), self.mode(n[1]), self.mode(n[2]), self.mode(n[3]));
        let mut acc = Complex64::default();
        for p in 0..self.point_weights.len() {
            acc += (a[p] * b[p] * (c[p] * d[p]).conj()) * self.point_weights[p];
        }
        Ok(acc)
    }

    /// 2π · I_time · I_space, the quartic form ⟨T(φ1, φ2, φ3), φ4⟩.
    pub fn coupling(&self, n: [usize; 4]) -> Result<f64> {
        let space = self.space_integral(n)?;
        let lam: Vec<f64> = n.iter().map(|&k| self.family.eigenvalue(k)).collect();
        let time = time_integral(lam[2] + lam[3] - lam[0] - lam[1]);
        let value = Complex64::new(2.0 * PI * time, 0.0) * space;
        if value.im.abs() > IMAG_TOL * value.re.abs().max(1.0) {
            return Err(Error::ImaginaryResidual { n1: n[0], n2: n[1], n3: n[2], n4: n[3], residual: value.im.abs() });
        }
        Ok(value.re)
    }
}

/// Quadrature evaluation of the harmonic-oscillator form of the quartic
/// coupling for one quadruple, with a caller-supplied rule of scale 2.
pub fn oracle_coupling(family: BasisFamily, n: [usize; 4], rule: &QuadratureRule) -> Result<f64> {
    let max = *n.iter().max().unwrap();
    OracleEvaluator::with_rule(family, max, rule)?.coupling(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportionality {
    /// Mean of oracle / weight.
    pub constant: f64,
    pub min: f64,
    pub max: f64,
    /// (max − min) / |mean|
    pub spread: f64,
    pub count: usize,
}

/// Ratio of quadrature couplings to the stored weights over every resonant
/// quadruple with indices ≤ `max_index`. On the holomorphic chain the
/// weights are the closed-form α; on other families they come from
/// `build_tensor` and are re-integrated here with a finer rule.
pub fn proportionality_sweep(family: BasisFamily, max_index: usize) -> Result<Proportionality> {
    let max_index = family.max_index(max_index);
    let rule = build_quadrature(nodes_for_quartic(family, max_index) + 16, QUARTIC_SCALE)?;
    let eval = OracleEvaluator::with_rule(family, max_index, &rule)?;
    let mut ratios = Vec::new();
    match family {
        BasisFamily::Holomorphic => {
            for n1 in 0..=max_index {
                for n2 in 0..=max_index {
                    for n3 in 0..=max_index {
                        let Some(n4) = (n1 + n2).checked_sub(n3).filter(|&v| v <= max_index) else {
                            continue;
                        };
                        ratios.push(eval.coupling([n1, n2, n3, n4])? / alpha_hol(n1, n2, n3, n4));
                    }
                }
            }
        }
        _ => {
            let tensor = build_tensor(family, max_index)?;
            let scale = tensor.entries().iter().map(|e| e.weight.abs()).fold(0.0, f64::max);
            for e in tensor.entries() {
                // E_N couplings vanish by parity; only compare non-trivial weights
                if e.weight.abs() < 1e-8 * scale {
                    continue;
                }
                let n = e.n.map(|v| v as usize);
                ratios.push(eval.coupling(n)? / e.weight);
            }
        }
    }
    let count = ratios.len();
    let mean = ratios.iter().sum::<f64>() / count as f64;
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(Proportionality { constant: mean, min, max, spread: (max - min) / mean.abs(), count })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rule() -> QuadratureRule {
        build_quadrature(40, 2.0).unwrap()
    }

    #[test]
    fn ground_quadruple_is_pi_over_two() {
        let v = oracle_coupling(BasisFamily::Holomorphic, [0, 0, 0, 0], &rule()).unwrap();
        assert!((v - PI / 2.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn broken_resonance_vanishes() {
        let v = oracle_coupling(BasisFamily::Holomorphic, [0, 0, 1, 0], &rule()).unwrap();
        assert!(v.abs() < 1e-10);
        // the λ-phase integral alone is non-zero here, the angular integral kills it
        assert!((time_integral(2.0) - 1.0).abs() < 1e-15);
        assert!(time_integral(4.0).abs() < 1e-15);
    }

    #[test]
    fn wrong_rule_scale_rejected() {
        let r = build_quadrature(10, 1.0).unwrap();
        assert!(oracle_coupling(BasisFamily::Holomorphic, [0, 0, 0, 0], &r).is_err());
    }

    #[test]
    fn holomorphic_constant_is_four() {
        let p = proportionality_sweep(BasisFamily::Holomorphic, 5).unwrap();
        assert!((p.constant - 4.0).abs() < 1e-10, "{p:?}");
        assert!(p.spread < 1e-10);
    }
}
