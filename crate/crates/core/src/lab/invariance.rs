use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ObservableSet;
use crate::basis::BasisFamily;
use crate::coupling::{build_tensor, CouplingTensor};
use crate::dynamics::{
    projected_hamiltonian, CoefficientState, Integrator, IntegratorConfig, Projector, ProjectorKind,
};
use crate::error::{Error, Result};
use crate::measures::{MeasureKind, MeasureSpec, Sampler};
use crate::stats::{ks_two_sample, mean_stderr, z_score, MeanEstimate};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const Z_THRESHOLD: f64 = 4.0;
pub const P_THRESHOLD: f64 = 0.001;
/// Relative mismatch between the flow tensor and a freshly built reference
/// above which the cross-check fails.
pub const CONSISTENCY_TOL: f64 = 1e-8;
pub const DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub family: BasisFamily,
    pub cutoff: usize,
    pub tensor_constant: f64,
    pub projector: Projector,
    pub t: f64,
    pub integrator: IntegratorConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSummary {
    pub name: String,
    pub initial: MeanEstimate,
    #[serde(rename = "final")]
    pub evolved: MeanEstimate,
    pub z: f64,
    pub ks_statistic: f64,
    pub ks_p: f64,
    pub ks_p_bonferroni: f64,
}

/// Hamiltonian bookkeeping against a reference tensor built from scratch.
/// A flow tensor with the wrong overall scale still transports the measure
/// (it is a time change) but shows up here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    /// max over samples of |H_flow(t) − H_flow(0)| / H_flow(0)
    pub flow_hamiltonian_drift: f64,
    /// same quantity for the reference Hamiltonian
    pub reference_hamiltonian_drift: f64,
    /// max over samples of |H_flow − H_ref| / H_ref at t = 0
    pub tensor_consistency: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub index: u64,
    pub initial: Vec<f64>,
    #[serde(rename = "final")]
    pub evolved: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub schema_version: u32,
    pub spec: MeasureSpec,
    pub flow: FlowParams,
    pub n_samples: usize,
    pub observables: Vec<String>,
    pub summaries: Vec<ObservableSummary>,
    pub max_abs_z: f64,
    pub min_p_bonferroni: f64,
    pub verdict: Verdict,
    pub cross_check: CrossCheck,
    pub rows: Vec<SampleRow>,
}

/// Rejects measure/flow pairings that carry no invariance claim.
pub fn check_consistency(spec: &MeasureSpec, tensor: &CouplingTensor, proj: &Projector) -> Result<()> {
    spec.validate()?;
    if tensor.family() != spec.family || tensor.dim() != spec.dim() {
        return Err(Error::Config(format!(
            "tensor ({}, N={}) does not match measure ({}, N={})",
            tensor.family(),
            tensor.cutoff(),
            spec.family,
            spec.cutoff
        )));
    }
    if proj.cutoff != spec.cutoff {
        return Err(Error::Config(format!(
            "projector cutoff {} differs from measure cutoff {}",
            proj.cutoff, spec.cutoff
        )));
    }
    let wanted = match spec.kind {
        MeasureKind::Eigenspace | MeasureKind::WhiteNoise => ProjectorKind::Sharp,
        MeasureKind::GaussianFree | MeasureKind::Gibbs => ProjectorKind::Smooth,
    };
    if proj.kind != wanted {
        return Err(Error::Config(format!(
            "{:?} measure is paired with the {wanted:?} projector, got {:?}",
            spec.kind, proj.kind
        )));
    }
    if spec.kind == MeasureKind::Gibbs && spec.gibbs_projector != proj.kind {
        return Err(Error::Config("the Gibbs weight and the flow must use the same cutoff".into()));
    }
    Ok(())
}

/// Samples the measure, evolves every sample to time `t`, and compares the
/// marginal laws of each observable before and after.
pub fn invariance_test(
    spec: &MeasureSpec,
    tensor: &CouplingTensor,
    proj: &Projector,
    t: f64,
    n_samples: usize,
    observables: &ObservableSet,
    integrator: &IntegratorConfig,
) -> Result<EnsembleReport> {
    check_consistency(spec, tensor, proj)?;
    integrator.validate()?;
    if !t.is_finite() {
        return Err(Error::Config(format!("t must be finite, got {t}")));
    }
    if n_samples < 2 {
        return Err(Error::Config("need at least two samples".into()));
    }
    let reference = build_tensor(tensor.family(), tensor.cutoff())?;
    let sampler = Sampler::with_tensor(*spec, &reference)?;
    let names = observables.names(spec.dim());

    struct Outcome {
        row: SampleRow,
        h_flow: [f64; 2],
        h_ref: [f64; 2],
    }
    let outcomes: Vec<Outcome> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let initial = sampler.sample(i)?;
            let mut state: CoefficientState = initial.clone();
            let mut integ = Integrator::new(tensor, proj, *integrator)?;
            integ.advance_to(&mut state, t, |_| Ok(()))?;
            Ok(Outcome {
                h_flow: [projected_hamiltonian(&initial, tensor, proj)?, projected_hamiltonian(&state, tensor, proj)?],
                h_ref: [
                    projected_hamiltonian(&initial, &reference, proj)?,
                    projected_hamiltonian(&state, &reference, proj)?,
                ],
                row: SampleRow {
                    index: i,
                    initial: observables.evaluate(&initial, tensor)?,
                    evolved: observables.evaluate(&state, tensor)?,
                },
            })
        })
        .collect::<Result<_>>()?;

    let k = names.len();
    let mut summaries = Vec::with_capacity(k);
    for (j, name) in names.iter().enumerate() {
        let a: Vec<f64> = outcomes.iter().map(|o| o.row.initial[j]).collect();
        let b: Vec<f64> = outcomes.iter().map(|o| o.row.evolved[j]).collect();
        let (ma, mb) = (mean_stderr(&a), mean_stderr(&b));
        let ks = ks_two_sample(&a, &b);
        summaries.push(ObservableSummary {
            name: name.clone(),
            initial: ma,
            evolved: mb,
            z: z_score(&ma, &mb),
            ks_statistic: ks.statistic,
            ks_p: ks.p_value,
            ks_p_bonferroni: (ks.p_value * k as f64).min(1.0),
        });
    }
    let max_abs_z = summaries.iter().map(|s| s.z.abs()).fold(0.0, f64::max);
    let min_p_bonferroni = summaries.iter().map(|s| s.ks_p_bonferroni).fold(1.0, f64::min);
    let verdict = if max_abs_z < Z_THRESHOLD && min_p_bonferroni > P_THRESHOLD { Verdict::Pass } else { Verdict::Fail };

    let rel = |x: f64, x0: f64| if x0 == 0.0 { x.abs() } else { ((x - x0) / x0).abs() };
    let cross_check = {
        let flow = outcomes.iter().map(|o| rel(o.h_flow[1], o.h_flow[0])).fold(0.0, f64::max);
        let refd = outcomes.iter().map(|o| rel(o.h_ref[1], o.h_ref[0])).fold(0.0, f64::max);
        let cons = outcomes.iter().map(|o| rel(o.h_flow[0], o.h_ref[0])).fold(0.0, f64::max);
        CrossCheck {
            flow_hamiltonian_drift: flow,
            reference_hamiltonian_drift: refd,
            tensor_consistency: cons,
            pass: cons < CONSISTENCY_TOL && flow < DRIFT_TOL,
        }
    };

    Ok(EnsembleReport {
        schema_version: REPORT_SCHEMA_VERSION,
        spec: *spec,
        flow: FlowParams {
            family: tensor.family(),
            cutoff: tensor.cutoff(),
            tensor_constant: tensor.constant(),
            projector: *proj,
            t,
            integrator: *integrator,
        },
        n_samples,
        observables: names,
        summaries,
        max_abs_z,
        min_p_bonferroni,
        verdict,
        cross_check,
        rows: outcomes.into_iter().map(|o| o.row).collect(),
    })
}
