//! Resonant interaction coefficients: the closed-form α weights on the
//! holomorphic chain, quadrature couplings on any family, the sparse
//! [`CouplingTensor`] that drives the dynamics, and two combinatorial
//! identities used in the Cauchy estimates.

mod cache;
mod lemmas;
mod oracle;

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::basis::BasisFamily;
use crate::error::Result;
use crate::special::{ln_binomial, ln_factorial};

pub use cache::{load_or_build, read_tensor, write_tensor, CACHE_FORMAT_VERSION};
pub use lemmas::{falling_factorial_ratio, falling_factorial_scan, lemma_sum_check, FallingFactorialScan};
pub use oracle::{oracle_coupling, proportionality_sweep, OracleEvaluator, Proportionality};

/// α_{n1,n2,n3,n4} = π/8 · (n1+n2)! / (2^{n1+n2} √(n1! n2! n3! n4!)) on the
/// resonant set n1+n2 = n3+n4, zero elsewhere.
pub fn alpha_hol(n1: usize, n2: usize, n3: usize, n4: usize) -> f64 {
    let s = n1 + n2;
    if s != n3 + n4 {
        return 0.0;
    }
    // summing in sorted order makes every symmetric image bitwise equal
    let mut idx = [n1, n2, n3, n4];
    idx.sort_unstable();
    let half_sum = 0.5 * idx.iter().map(|&n| ln_factorial(n)).sum::<f64>();
    ((PI / 8.0).ln() + ln_factorial(s) - s as f64 * std::f64::consts::LN_2 - half_sum).exp()
}

/// One stored quadruple, canonical with n1 ≤ n2. The output index is n4.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub n: [u32; 4],
    pub weight: f64,
}

impl TensorEntry {
    /// Number of ordered (n1, n2) pairs this entry stands for.
    #[inline]
    pub fn multiplicity(&self) -> f64 {
        if self.n[0] < self.n[1] {
            2.0
        } else {
            1.0
        }
    }
}

/// Factorized form of the holomorphic weights,
/// α = c · β(S, n1) β(S, n3) with β(S, k) = √(C(S, k) / 2^S),
/// which lets the RHS and Hamiltonian be evaluated grouped by S = n1 + n2.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedWeights {
    prefactor: f64,
    cutoff: usize,
    beta: Vec<f64>,
}

impl GroupedWeights {
    fn holomorphic(cutoff: usize, prefactor: f64) -> Self {
        let width = cutoff + 1;
        let mut beta = vec![0.0; (2 * cutoff + 1) * width];
        for s in 0..=2 * cutoff {
            for k in s.saturating_sub(cutoff)..=s.min(cutoff) {
                beta[s * width + k] = (0.5 * (ln_binomial(s, k) - s as f64 * std::f64::consts::LN_2)).exp();
            }
        }
        Self { prefactor, cutoff, beta }
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn beta(&self, s: usize, k: usize) -> f64 {
        self.beta[s * (self.cutoff + 1) + k]
    }
}

/// Sparse list of resonant quadruples with real weights.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingTensor {
    family: BasisFamily,
    cutoff: usize,
    /// Ratio oracle_coupling / stored weight shared by all families.
    constant: f64,
    entries: Vec<TensorEntry>,
    grouped: Option<GroupedWeights>,
}

impl CouplingTensor {
    pub(crate) fn from_parts(family: BasisFamily, cutoff: usize, constant: f64, entries: Vec<TensorEntry>) -> Self {
        let grouped = match family {
            BasisFamily::Holomorphic => {
                let g = GroupedWeights::holomorphic(cutoff, PI / 8.0);
                // a tensor read back from disk may carry a global rescaling
                let scale = entries.iter().find(|e| e.n == [0, 0, 0, 0]).map(|e| e.weight / (PI / 8.0)).unwrap_or(1.0);
                Some(GroupedWeights { prefactor: g.prefactor * scale, ..g })
            }
            _ => None,
        };
        Self { family, cutoff, constant, entries, grouped }
    }

    pub fn family(&self) -> BasisFamily {
        self.family
    }

    /// Highest mode index (for E_N this is N, the last of its N+1 modes).
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn entries(&self) -> &[TensorEntry] {
        &self.entries
    }

    pub fn grouped(&self) -> Option<&GroupedWeights> {
        self.grouped.as_ref()
    }

    /// Full weight W(n1, n2, n3, n4) looked up from the canonical entries.
    pub fn weight(&self, n: [usize; 4]) -> f64 {
        let (a, b) = if n[0] <= n[1] { (n[0], n[1]) } else { (n[1], n[0]) };
        let key = [a as u32, b as u32, n[2] as u32, n[3] as u32];
        self.entries.iter().find(|e| e.n == key).map_or(0.0, |e| e.weight)
    }

    /// Same tensor with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.weight *= factor;
        }
        if let Some(g) = &mut out.grouped {
            g.prefactor *= factor;
        }
        out
    }

    /// Same support with all weights zero: the linear (free) flow.
    pub fn zeroed(&self) -> Self {
        self.scaled(0.0)
    }

    /// Number of quadruple classes modulo n1↔n2 and n3↔n4.
    pub fn count_up_to_symmetry(&self) -> usize {
        self.entries.iter().filter(|e| e.n[2] <= e.n[3]).count()
    }
}

/// All canonical (n1 ≤ n2, n3, n4) index quadruples of the resonant set.
fn resonant_support(family: BasisFamily, cutoff: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    match family {
        BasisFamily::Eigenspace { level } => {
            for a in 0..=level {
                for b in a..=level {
                    for c in 0..=level {
                        for d in 0..=level {
                            out.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        _ => {
            for s in 0..=2 * cutoff {
                for n1 in s.saturating_sub(cutoff)..=s / 2 {
                    let n2 = s - n1;
                    for n3 in s.saturating_sub(cutoff)..=s.min(cutoff) {
                        out.push([n1, n2, n3, s - n3]);
                    }
                }
            }
        }
    }
    out
}

/// Ratio oracle_coupling / α on the holomorphic chain, measured once.
pub fn convention_constant() -> f64 {
    static CONSTANT: OnceLock<f64> = OnceLock::new();
    *CONSTANT.get_or_init(|| {
        proportionality_sweep(BasisFamily::Holomorphic, 4)
            .expect("holomorphic quadrature sweep cannot fail at small indices")
            .constant
    })
}

/// Enumerate the resonant quadruples with indices ≤ `cutoff` and attach
/// weights: α for the holomorphic chain, quadrature couplings divided by
/// the holomorphic convention constant otherwise.
pub fn build_tensor(family: BasisFamily, cutoff: usize) -> Result<CouplingTensor> {
    let support = resonant_support(family, cutoff);
    let cutoff = family.max_index(cutoff);
    let constant = convention_constant();
    let entries = match family {
        BasisFamily::Holomorphic => support
            .into_iter()
            .map(|[a, b, c, d]| TensorEntry {
                n: [a as u32, b as u32, c as u32, d as u32],
                weight: alpha_hol(a, b, c, d),
            })
            .collect(),
        _ => {
            // real basis functions: the coupling is symmetric under every
            // permutation, compute it once per sorted multiset
            let eval = OracleEvaluator::new(family, cutoff)?;
            let mut memo = std::collections::HashMap::new();
            let mut entries = Vec::with_capacity(support.len());
            for q in support {
                let mut key = q;
                key.sort_unstable();
                let w = match memo.get(&key) {
                    Some(&w) => w,
                    None => {
                        let w = eval.coupling(q)? / constant;
                        memo.insert(key, w);
                        w
                    }
                };
                entries.push(TensorEntry { n: [q[0] as u32, q[1] as u32, q[2] as u32, q[3] as u32], weight: w });
            }
            entries
        }
    };
    Ok(CouplingTensor::from_parts(family, cutoff, constant, entries))
}
