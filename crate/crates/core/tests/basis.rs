use std::f64::consts::PI;

use crlab::basis::{build_quadrature, envelope_table, eval_basis, eval_hermite_1d, lp_norm, BasisFamily, Grid2D};
use num_complex::Complex64;

const FAMILIES: [BasisFamily; 3] =
    [BasisFamily::Holomorphic, BasisFamily::Radial, BasisFamily::Eigenspace { level: 15 }];

#[test]
fn gram_matrix_of_first_sixteen_modes() {
    let rule = build_quadrature(48, 1.0).unwrap();
    for family in FAMILIES {
        let mut gram = vec![vec![Complex64::default(); 16]; 16];
        for (&x1, &w1) in rule.nodes().iter().zip(rule.weights()) {
            for (&x2, &w2) in rule.nodes().iter().zip(rule.weights()) {
                let e = envelope_table(family, 15, [x1, x2]);
                for (i, row) in gram.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v += e[i] * e[j].conj() * (w1 * w2);
                    }
                }
            }
        }
        for (i, row) in gram.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((v - expected).norm() < 1e-8, "{family} ({i},{j}): {v}");
            }
        }
    }
}

/// ⟨(−Δ + |x|²)φ, φ⟩ with a fourth-order finite-difference Laplacian.
fn fd_energy(family: BasisFamily, n: usize) -> f64 {
    let l = 8.0;
    let points = 401;
    let h = 2.0 * l / (points - 1) as f64;
    let coord = |i: usize| -l + i as f64 * h;
    let phi: Vec<Complex64> =
        (0..points * points).map(|k| eval_basis(family, n, [coord(k / points), coord(k % points)]).unwrap()).collect();
    let at = |i: usize, j: usize| phi[i * points + j];
    let mut total = 0.0;
    for i in 2..points - 2 {
        for j in 2..points - 2 {
            let d2 = |a: Complex64, b: Complex64, c: Complex64, d: Complex64, e: Complex64| {
                (-a + b * 16.0 - c * 30.0 + d * 16.0 - e) / (12.0 * h * h)
            };
            let lap = d2(at(i - 2, j), at(i - 1, j), at(i, j), at(i + 1, j), at(i + 2, j))
                + d2(at(i, j - 2), at(i, j - 1), at(i, j), at(i, j + 1), at(i, j + 2));
            let r2 = coord(i).powi(2) + coord(j).powi(2);
            total += ((-lap + at(i, j) * r2) * at(i, j).conj()).re;
        }
    }
    total * h * h
}

#[test]
fn eigenrelation_by_finite_differences() {
    for family in [BasisFamily::Holomorphic, BasisFamily::Radial] {
        for n in 0..=8 {
            let e = fd_energy(family, n);
            let lambda = family.eigenvalue(n);
            assert!((e - lambda).abs() < 1e-4 * lambda, "{family} n={n}: {e} vs {lambda}");
        }
    }
    let family = BasisFamily::Eigenspace { level: 8 };
    for k in [0, 3, 8] {
        let e = fd_energy(family, k);
        assert!((e - 18.0).abs() < 1e-4 * 18.0, "E_8 k={k}: {e}");
    }
}

#[test]
fn hermite_five_is_normalized_by_quadrature() {
    let rule = build_quadrature(64, 1.0).unwrap();
    // h_5(x)² e^{x²} is a polynomial of degree 10 against e^{−x²}
    let v = rule.integrate(|x| eval_hermite_1d(5, x).unwrap().powi(2) * (x * x).exp());
    assert!((v - 1.0).abs() < 1e-12);
}

#[test]
fn holomorphic_three_is_normalized_in_two_dimensions() {
    let rule = build_quadrature(32, 1.0).unwrap();
    let v: f64 = rule.integrate_2d(|x1, x2| envelope_table(BasisFamily::Holomorphic, 3, [x1, x2])[3].norm_sqr());
    assert!((v - 1.0).abs() < 1e-10);
}

#[test]
fn parity_of_eigenspace_modes() {
    let f = BasisFamily::Eigenspace { level: 5 };
    for k in 0..=5 {
        let a = eval_basis(f, k, [0.3, -1.1]).unwrap();
        let b = eval_basis(f, k, [-0.3, 1.1]).unwrap();
        assert_eq!(a, b * (-1.0f64).powi(5));
    }
}

#[test]
fn sup_exponent_between_two_indices() {
    let f = BasisFamily::Holomorphic;
    let a = lp_norm(f, 64, f64::INFINITY, &Grid2D::for_1d(f.eigenvalue(64))).unwrap();
    let b = lp_norm(f, 256, f64::INFINITY, &Grid2D::for_1d(f.eigenvalue(256))).unwrap();
    let exponent = (b.value / a.value).ln() / 4f64.ln();
    assert!((exponent + 0.25).abs() < 0.05);
}

#[test]
fn values_at_origin() {
    let c = 1.0 / PI.sqrt();
    assert!((eval_basis(BasisFamily::Holomorphic, 0, [0.0, 0.0]).unwrap().re - c).abs() < 1e-15);
    assert!((eval_basis(BasisFamily::Radial, 0, [0.0, 0.0]).unwrap().re - c).abs() < 1e-15);
    assert!((eval_hermite_1d(0, 0.0).unwrap() - PI.powf(-0.25)).abs() < 1e-15);
}
