use crlab::basis::{BasisFamily, Grid2D};
use crlab::coupling::build_tensor;
use crlab::dynamics::{
    advance, eval_field, evolve, mass, propagate_linear, CoefficientState, IntegratorConfig, Method, Projector,
};
use crlab::measures::{stream_rng, GaussianDraw};
use num_complex::Complex64;

fn random_state(family: BasisFamily, cutoff: usize, seed: u64) -> CoefficientState {
    let dim = family.max_index(cutoff) + 1;
    let g = GaussianDraw::draw(&mut stream_rng(seed, 0), dim).g;
    let s = CoefficientState::new(family, g).unwrap();
    let m = mass(&s).sqrt();
    s.scaled(Complex64::new(1.0 / m, 0.0))
}

#[test]
fn conservation_at_cutoff_sixty_four() {
    let tensor = build_tensor(BasisFamily::Holomorphic, 64).unwrap();
    for proj in [Projector::sharp(64), Projector::smooth(64)] {
        let s = random_state(BasisFamily::Holomorphic, 64, 11);
        let (_, log) = evolve(&s, &tensor, &proj, 20.0, &IntegratorConfig::default()).unwrap();
        let d = log.max_relative_drift();
        assert!(d.mass < 1e-8 && d.energy < 1e-8 && d.hamiltonian < 1e-8, "{d:?}");
        assert!(log.records.len() > 10);
    }
}

#[test]
fn zero_coupling_is_stationary() {
    // coefficients evolve in the interaction picture, so only the quartic part moves them
    let tensor = build_tensor(BasisFamily::Radial, 12).unwrap().zeroed();
    let s = random_state(BasisFamily::Radial, 12, 3);
    let out = advance(&s, &tensor, &Projector::sharp(12), 2.5, &IntegratorConfig::default()).unwrap();
    assert!(out.distance(&s) < 1e-15);
}

#[test]
fn linear_propagation_on_an_eigenspace_is_a_phase() {
    // e^{−iλt} is common to every mode of E_N
    let e = BasisFamily::Eigenspace { level: 3 };
    let s = random_state(e, 3, 4);
    let p = propagate_linear(&s, 0.7);
    let phase = Complex64::from_polar(1.0, -0.7 * e.eigenvalue(0));
    for (a, b) in p.coeffs.iter().zip(&s.coeffs) {
        assert!((a - b * phase).norm() < 1e-14);
    }
}

#[test]
fn field_mass_tracks_coefficient_mass() {
    let tensor = build_tensor(BasisFamily::Holomorphic, 16).unwrap();
    let s = random_state(BasisFamily::Holomorphic, 16, 5);
    let out = advance(&s, &tensor, &Projector::sharp(16), 3.0, &IntegratorConfig::default()).unwrap();
    let grid = Grid2D::new(9.0, 301);
    let field = eval_field(&out, &grid).unwrap();
    assert!((field.lp_sum(2.0) - mass(&out)).abs() < 1e-6);
}

#[test]
fn integrators_agree_on_an_eigenspace() {
    let e = BasisFamily::Eigenspace { level: 5 };
    let tensor = build_tensor(e, 5).unwrap();
    let s = random_state(e, 5, 6);
    let proj = Projector::sharp(5);
    let rk = advance(&s, &tensor, &proj, 1.0, &IntegratorConfig::default()).unwrap();
    let mid_cfg = IntegratorConfig { method: Method::ImplicitMidpoint, max_step: 1e-3, ..IntegratorConfig::default() };
    let mid = advance(&s, &tensor, &proj, 1.0, &mid_cfg).unwrap();
    assert!(rk.distance(&mid) < 1e-5, "{}", rk.distance(&mid));
}

#[test]
fn backward_then_forward_returns() {
    let tensor = build_tensor(BasisFamily::Holomorphic, 32).unwrap();
    let proj = Projector::smooth(32);
    let cfg = IntegratorConfig::default();
    let s = random_state(BasisFamily::Holomorphic, 32, 7);
    let back = advance(&s, &tensor, &proj, -5.0, &cfg).unwrap();
    let again = advance(&back, &tensor, &proj, 5.0, &cfg).unwrap();
    assert!(again.distance(&s) < 1e-8);
}
