use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::special::{ln_binomial, ln_factorial};

/// Partial sum Σ_{k=n}^{K} 2^{-k} C(k, n); the full series equals 2.
pub fn lemma_sum_check(n: usize, truncation: usize) -> f64 {
    assert!(n <= truncation, "need n ≤ K");
    (n..=truncation).map(|k| (ln_binomial(k, n) - k as f64 * LN_2).exp()).sum()
}

/// L! / (2^L (L − p)!) divided by 2^{−L/2}.
pub fn falling_factorial_ratio(l: usize, p: usize) -> f64 {
    assert!(p <= l);
    (ln_factorial(l) - ln_factorial(l - p) - 0.5 * l as f64 * LN_2).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FallingFactorialScan {
    /// sup over L ≤ L_max, p ≤ L^exponent of the ratio.
    pub sup: f64,
    pub argmax_l: usize,
    /// sup over p at L = L_max.
    pub at_end: f64,
}

/// Scan L ≤ `l_max` and p ≤ L^`exponent` for the worst ratio.
pub fn falling_factorial_scan(l_max: usize, exponent: f64) -> FallingFactorialScan {
    let mut sup = 0.0;
    let mut argmax_l = 1;
    let mut at_end = 0.0;
    for l in 1..=l_max {
        let p_max = ((l as f64).powf(exponent).floor() as usize).min(l);
        let worst = (1..=p_max.max(1)).map(|p| falling_factorial_ratio(l, p)).fold(0.0, f64::max);
        if worst > sup {
            sup = worst;
            argmax_l = l;
        }
        if l == l_max {
            at_end = worst;
        }
    }
    FallingFactorialScan { sup, argmax_l, at_end }
}
