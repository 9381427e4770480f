use statrs::function::gamma::ln_gamma;

const EXACT_FACTORIALS: usize = 20;

/// ln(n!). Exact factorials up to 20!, log-gamma above.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= EXACT_FACTORIALS {
        let mut f: u64 = 1;
        for k in 2..=n as u64 {
            f *= k;
        }
        (f as f64).ln()
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// ln C(n, k) for k ≤ n.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_table_and_gamma_agree_at_the_seam() {
        let exact: f64 = (1..=21u64).map(|k| (k as f64).ln()).sum();
        assert!((ln_factorial(21) - exact).abs() < 1e-12);
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - 120f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn binomial() {
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-13);
    }
}
