use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::hermite::PI_M4;
use crate::error::{Error, Result};

const MAX_NEWTON: usize = 200;
const SIDECAR_MAGIC: &[u8; 8] = b"CRQUAD\0\0";
const SIDECAR_VERSION: u32 = 1;

/// Gauss–Hermite rule for ∫ f(x) e^{-s x²} dx.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    scale: f64,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Highest polynomial degree integrated exactly against e^{-s x²}.
    pub fn exactness_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// Tensor-product rule on ℝ² against e^{-s |x|²}.
    pub fn integrate_2d<T, F>(&self, mut f: F) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
        F: FnMut(f64, f64) -> T,
    {
        let mut acc = T::default();
        for (&x1, &w1) in self.nodes.iter().zip(&self.weights) {
            for (&x2, &w2) in self.nodes.iter().zip(&self.weights) {
                acc = acc + f(x1, x2) * (w1 * w2);
            }
        }
        acc
    }

    /// Load a rule from the sidecar directory, building and storing it on a miss.
    pub fn cached(dir: &Path, n_nodes: usize, scale: f64) -> Result<Self> {
        let path = sidecar_path(dir, n_nodes, scale);
        if let Ok(rule) = Self::read_sidecar(&path) {
            if rule.nodes.len() == n_nodes && rule.scale == scale {
                return Ok(rule);
            }
        }
        let rule = build_quadrature(n_nodes, scale)?;
        fs::create_dir_all(dir)?;
        rule.write_sidecar(&path)?;
        Ok(rule)
    }

    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(24 + 16 * self.nodes.len());
        buf.extend_from_slice(SIDECAR_MAGIC);
        buf.extend_from_slice(&SIDECAR_VERSION.to_le_bytes());
        buf.extend_from_slice(&(self.nodes.len() as u32).to_le_bytes());
        buf.extend_from_slice(&self.scale.to_le_bytes());
        for v in self.nodes.iter().chain(&self.weights) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        fs::File::create(path)?.write_all(&buf)?;
        Ok(())
    }

    pub fn read_sidecar(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        fs::File::open(path)?.read_to_end(&mut buf)?;
        let bad = |msg: &str| Error::Cache(format!("{}: {msg}", path.display()));
        if buf.len() < 24 || &buf[..8] != SIDECAR_MAGIC {
            return Err(bad("not a quadrature sidecar"));
        }
        let version = u32::from_le_bytes(buf[8..12].try_into().unwrap());
        if version != SIDECAR_VERSION {
            return Err(bad("unsupported version"));
        }
        let n = u32::from_le_bytes(buf[12..16].try_into().unwrap()) as usize;
        let scale = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        if buf.len() != 24 + 16 * n {
            return Err(bad("truncated"));
        }
        let vals: Vec<f64> = buf[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { nodes: vals[..n].to_vec(), weights: vals[n..].to_vec(), scale })
    }
}

fn sidecar_path(dir: &Path, n_nodes: usize, scale: f64) -> PathBuf {
    dir.join(format!("gauss-hermite-{n_nodes}-{:016x}.bin", scale.to_bits()))
}

/// Gauss–Hermite nodes and weights by Newton iteration on the orthonormal
/// Hermite recurrence, then rescaled to the weight e^{-s x²}.
pub fn build_quadrature(n_nodes: usize, scale: f64) -> Result<QuadratureRule> {
    if n_nodes == 0 {
        return Err(Error::QuadratureParams("node count must be at least 1".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::QuadratureParams(format!("gaussian scale must be positive, got {scale}")));
    }
    let n = n_nodes;
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0;
    for i in 0..m {
        // initial guesses for the largest roots, then extrapolate from previous roots
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut converged = false;
        let mut deriv = 0.0;
        for _ in 0..MAX_NEWTON {
            let (p, pp) = orthonormal_hermite_and_derivative(n, z);
            deriv = pp;
            let z1 = z;
            z = z1 - p / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::QuadratureConvergence { node: i, iterations: MAX_NEWTON });
        }
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
            deriv = orthonormal_hermite_and_derivative(n, 0.0).1;
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (deriv * deriv);
        w[n - 1 - i] = w[i];
    }
    let inv = scale.sqrt().recip();
    // ascending order
    let nodes: Vec<f64> = x.iter().rev().map(|v| v * inv).collect();
    let weights: Vec<f64> = w.iter().rev().map(|v| v * inv).collect();
    debug_assert!((weights.iter().sum::<f64>() - (PI / scale).sqrt()).abs() < 1e-10);
    Ok(QuadratureRule { nodes, weights, scale })
}

/// Orthonormal Hermite polynomial p_n (weight e^{-x²}) and its derivative.
fn orthonormal_hermite_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI_M4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
    }
    (p1, (2.0 * n as f64).sqrt() * p2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_node_rule() {
        let rule = build_quadrature(1, 1.0).unwrap();
        assert_eq!(rule.nodes(), &[0.0]);
        assert_relative_eq!(rule.weights()[0], PI.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn weights_sum_to_gaussian_mass() {
        for n in [2, 7, 20, 64, 150] {
            let rule = build_quadrature(n, 2.0).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - (PI / 2.0).sqrt()).abs() < 1e-13, "n={n}: {total}");
            assert!(rule.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn second_moment() {
        let rule = build_quadrature(20, 1.0).unwrap();
        let m2 = rule.integrate(|x| x * x);
        assert!((m2 - PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn exact_to_declared_degree() {
        // ∫ x^{2k} e^{-x²} = Γ(k + 1/2)
        let rule = build_quadrature(6, 1.0).unwrap();
        assert_eq!(rule.exactness_degree(), 11);
        let mut gamma_half = PI.sqrt();
        for k in 0..6 {
            let got = rule.integrate(|x| x.powi(2 * k));
            assert_relative_eq!(got, gamma_half, max_relative = 1e-13);
            gamma_half *= k as f64 + 0.5;
            assert!(rule.integrate(|x| x.powi(2 * k + 1)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_quadrature(0, 1.0).is_err());
        assert!(build_quadrature(4, 0.0).is_err());
        assert!(build_quadrature(4, -1.0).is_err());
    }

    #[test]
    fn sidecar_cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("crlab-quad-{}", std::process::id()));
        let a = QuadratureRule::cached(&dir, 33, 2.0).unwrap();
        let b = QuadratureRule::cached(&dir, 33, 2.0).unwrap();
        assert_eq!(a, b);
        let _ = fs::remove_dir_all(&dir);
    }
}
