//! Acceptance suite: one line per criterion, process exit status reflects
//! the conjunction. Runs as a plain binary so the lines always reach the
//! test log.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use crlab::basis::{lp_norm, BasisFamily, Grid2D};
use crlab::coupling::{alpha_hol, build_tensor, proportionality_sweep};
use crlab::dynamics::ProjectorKind;
use crlab::dynamics::{advance, evolve, mass, CoefficientState, Integrator, IntegratorConfig, Projector};
use crlab::lab::{
    cauchy_study, concentration_study, invariance_test, CauchyConfig, ConcentrationConfig, EnsembleReport,
    ObservableSet, Verdict,
};
use crlab::measures::{stream_rng, tail_study, Functional, GaussianDraw, LambdaGrid, MeasureSpec};
use crlab::stats::least_squares;
use num_complex::Complex64;

const HOL: BasisFamily = BasisFamily::Holomorphic;

type Outcome = Result<(bool, String), String>;

fn unit_mass_state(family: BasisFamily, cutoff: usize, seed: u64) -> CoefficientState {
    let mut rng = stream_rng(seed, 0);
    let dim = family.max_index(cutoff) + 1;
    let mut s = CoefficientState::new(family, GaussianDraw::draw(&mut rng, dim).g).unwrap();
    let m = mass(&s).sqrt();
    s = s.scaled(Complex64::new(1.0 / m, 0.0));
    s
}

fn c1_coefficients() -> Outcome {
    let mut worst: f64 = 0.0;
    let check = |v: f64, expected: f64| (v - expected).abs() / expected.abs().max(1.0);
    worst = worst.max(check(alpha_hol(0, 0, 0, 0), PI / 8.0));
    worst = worst.max(check(alpha_hol(1, 1, 1, 1), PI / 16.0));
    let mut support_ok = true;
    for a in 0..=20 {
        for b in 0..=20 {
            for c in 0..=20 {
                for d in 0..=20 {
                    let v = alpha_hol(a, b, c, d);
                    if (v != 0.0) != (a + b == c + d) || v < 0.0 {
                        support_ok = false;
                    }
                    if v == 0.0 {
                        continue;
                    }
                    for w in [alpha_hol(b, a, c, d), alpha_hol(a, b, d, c), alpha_hol(c, d, a, b)] {
                        worst = worst.max((w - v).abs() / v);
                    }
                }
            }
        }
    }
    Ok((support_ok && worst <= 1e-14, format!("support exact: {support_ok}, max relative deviation {worst:.1e}")))
}

fn c2_oracle() -> Outcome {
    let p = proportionality_sweep(HOL, 10).map_err(|e| e.to_string())?;
    Ok((p.spread < 1e-6, format!("{} quadruples, constant {:.12}, spread {:.1e}", p.count, p.constant, p.spread)))
}

fn c3_conservation() -> Outcome {
    let tensor = build_tensor(HOL, 32).map_err(|e| e.to_string())?;
    let mut worst = [0.0f64; 3];
    for seed in 0..3 {
        let s = unit_mass_state(HOL, 32, 100 + seed);
        let (_, log) = evolve(&s, &tensor, &Projector::sharp(32), 100.0, &IntegratorConfig::default())
            .map_err(|e| e.to_string())?;
        let d = log.max_relative_drift();
        worst = [worst[0].max(d.mass), worst[1].max(d.energy), worst[2].max(d.hamiltonian)];
    }
    Ok((
        worst.iter().all(|&d| d < 1e-8),
        format!("max drift mass {:.1e}, energy {:.1e}, hamiltonian {:.1e}", worst[0], worst[1], worst[2]),
    ))
}

fn c4_closed_form() -> Outcome {
    let tensor = build_tensor(HOL, 4).map_err(|e| e.to_string())?;
    let s = CoefficientState::single_mode(HOL, 4, 0, Complex64::new(1.0, 0.0)).unwrap();
    let out =
        advance(&s, &tensor, &Projector::sharp(4), 10.0, &IntegratorConfig::default()).map_err(|e| e.to_string())?;
    let single = (out.coeffs[0] - Complex64::from_polar(1.0, -PI / 8.0 * 10.0)).norm();

    let t1 = build_tensor(HOL, 1).map_err(|e| e.to_string())?;
    let two = CoefficientState::new(HOL, vec![Complex64::new(0.7, -0.2), Complex64::new(0.1, 0.6)]).unwrap();
    let mut state = two.clone();
    let mut worst: f64 = 0.0;
    let mut integ =
        Integrator::new(&t1, &Projector::sharp(1), IntegratorConfig::default()).map_err(|e| e.to_string())?;
    integ
        .advance_to(&mut state, 10.0, |st| {
            for (a, b) in st.coeffs.iter().zip(&two.coeffs) {
                worst = worst.max((a.norm() - b.norm()).abs());
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok((
        single < 1e-10 && worst < 1e-10,
        format!("single-mode error {single:.1e} at t=10, two-mode modulus drift {worst:.1e}"),
    ))
}

fn summarize(r: &EnsembleReport) -> String {
    format!(
        "{} observables, max |z| {:.2}, min Bonferroni KS p {:.3}, cross-check {}",
        r.observables.len(),
        r.max_abs_z,
        r.min_p_bonferroni,
        if r.cross_check.pass { "ok" } else { "FAILED" }
    )
}

fn invariance(spec: MeasureSpec, proj: Projector, samples: usize) -> Outcome {
    let tensor = build_tensor(spec.family, spec.cutoff).map_err(|e| e.to_string())?;
    let r =
        invariance_test(&spec, &tensor, &proj, 1.0, samples, &ObservableSet::default(), &IntegratorConfig::default())
            .map_err(|e| e.to_string())?;
    Ok((r.verdict == Verdict::Pass, summarize(&r)))
}

fn c5_white_noise() -> Outcome {
    invariance(MeasureSpec::white_noise(16, 5), Projector::sharp(16), 10_000)
}

fn c6_gibbs() -> Outcome {
    invariance(MeasureSpec::gibbs(HOL, 16, 1.0, 6), Projector::smooth(16), 10_000)
}

fn c7_eigenspace() -> Outcome {
    invariance(MeasureSpec::eigenspace(4, 7), Projector::sharp(4), 5_000)
}

fn c8_cauchy() -> Outcome {
    let cfg = CauchyConfig { sigma: 1.5, cutoff: 64, m_values: vec![4, 8, 16, 32], n_samples: 1000, seed: 8 };
    let r = cauchy_study(&cfg).map_err(|e| e.to_string())?;
    let slope = r.log_log_slope.unwrap_or(f64::NAN);
    let table: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("M={}: {:.3e}±{:.1e}", row.m, row.estimate.mean, row.estimate.stderr))
        .collect();
    Ok((r.monotone && slope < 0.0, format!("{}; log-log slope {slope:.3}", table.join(", "))))
}

fn c9_concentration() -> Outcome {
    let cfg = ConcentrationConfig { seed: 9, ..ConcentrationConfig::default() };
    let r = concentration_study(&cfg).map_err(|e| e.to_string())?;
    let table: Vec<String> = r
        .rows
        .iter()
        .map(|row| format!("N={}: median {:.3}, outside {:.3}", row.level, row.median, row.out_of_band))
        .collect();
    Ok((
        r.band_stable,
        format!(
            "{}; median spread ×{:.3}, refinement check {:.1e}",
            table.join(", "),
            r.median_spread,
            r.refinement_check
        ),
    ))
}

fn c10_hermite_decay() -> Outcome {
    let sup_ns = [64usize, 128, 256, 512, 1024];
    let mut design = Vec::new();
    let mut y = Vec::new();
    for &n in &sup_ns {
        let grid = Grid2D::for_1d(HOL.eigenvalue(n));
        let v = lp_norm(HOL, n, f64::INFINITY, &grid).map_err(|e| e.to_string())?;
        design.push(vec![1.0, (n as f64).ln()]);
        y.push(v.value.ln());
    }
    let sup_slope = least_squares(&design, &y)[1];

    let l4_ns = [64usize, 96, 128, 192, 256, 384, 512, 768, 1024];
    let mut design = Vec::new();
    let mut y = Vec::new();
    for &n in &l4_ns {
        let family = BasisFamily::Radial;
        let grid = Grid2D::for_1d(family.eigenvalue(n));
        let v = lp_norm(family, n, 4.0, &grid).map_err(|e| e.to_string())?;
        let ln = (n as f64).ln();
        design.push(vec![1.0, ln, ln.ln()]);
        y.push(v.value.ln());
    }
    let fit = least_squares(&design, &y);
    let ok = (sup_slope + 0.25).abs() <= 0.05 && (fit[1] + 0.25).abs() <= 0.05 && fit[2] > 0.0;
    Ok((
        ok,
        format!(
            "holomorphic L∞ exponent {sup_slope:.4}; radial L⁴ exponent {:.4} with log coefficient {:.4}",
            fit[1], fit[2]
        ),
    ))
}

fn c11_tails() -> Outcome {
    let spec = MeasureSpec::gaussian_free(HOL, 32, 11);
    let curve = tail_study(
        &spec,
        Functional::SpacetimeL4 { projector: ProjectorKind::Smooth },
        &LambdaGrid::Auto { points: 25 },
        10_000,
    )
    .map_err(|e| e.to_string())?;
    Ok((
        curve.fit.slope < 0.0 && curve.fit.r_squared > 0.9,
        format!(
            "λ ∈ [{:.4}, {:.4}], slope {:.3}, R² {:.4}",
            curve.points.first().map(|p| p.lambda).unwrap_or(f64::NAN),
            curve.points.last().map(|p| p.lambda).unwrap_or(f64::NAN),
            curve.fit.slope,
            curve.fit.r_squared
        ),
    ))
}

fn c12_reversibility() -> Outcome {
    let tensor = build_tensor(HOL, 16).map_err(|e| e.to_string())?;
    let s = unit_mass_state(HOL, 16, 12);
    let p = Projector::sharp(16);
    let cfg = IntegratorConfig::default();
    let fwd = advance(&s, &tensor, &p, 5.0, &cfg).map_err(|e| e.to_string())?;
    let back = advance(&fwd, &tensor, &p, -5.0, &cfg).map_err(|e| e.to_string())?;
    let round_trip = back.distance(&s);

    let run = || -> Result<String, String> {
        let spec = MeasureSpec::white_noise(8, 1234);
        let t = build_tensor(HOL, 8).map_err(|e| e.to_string())?;
        let r = invariance_test(&spec, &t, &Projector::sharp(8), 1.0, 500, &ObservableSet::default(), &cfg)
            .map_err(|e| e.to_string())?;
        serde_json::to_string(&r).map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    let identical = a.as_bytes() == b.as_bytes();
    Ok((
        round_trip < 1e-8 && identical,
        format!("round trip {round_trip:.1e}; reports byte-identical: {identical} ({} bytes)", a.len()),
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("coefficient correctness", c1_coefficients),
        ("oracle proportionality", c2_oracle),
        ("conservation", c3_conservation),
        ("closed-form anchor", c4_closed_form),
        ("white-noise invariance", c5_white_noise),
        ("gibbs invariance", c6_gibbs),
        ("eigenspace invariance", c7_eigenspace),
        ("cauchy decay", c8_cauchy),
        ("concentration", c9_concentration),
        ("hermite decay", c10_hermite_decay),
        ("tail bounds", c11_tails),
        ("reversibility and determinism", c12_reversibility),
    ];
    let only: Option<usize> = std::env::var("CRLAB_CRITERION").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<30} {}  [{:.1}s] {}",
            i + 1,
            name,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
