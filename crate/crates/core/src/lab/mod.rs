//! Statistical experiments on the truncated flows: measure invariance,
//! Poincaré recurrence on E_N, the Cauchy property of T_N, and
//! concentration of L^∞ norms under μ_N.

mod cauchy;
mod concentration;
mod invariance;
mod observables;
mod recurrence;

pub use cauchy::{cauchy_study, CauchyConfig, CauchyReport, CauchyRow};
pub use concentration::{concentration_study, sup_norm_eigenspace, ConcentrationConfig, ConcentrationReport, LevelRow};
pub use invariance::{
    check_consistency, invariance_test, CrossCheck, EnsembleReport, FlowParams, ObservableSummary, Verdict,
    REPORT_SCHEMA_VERSION,
};
pub use observables::ObservableSet;
pub use recurrence::{recurrence_experiment, RecurrenceConfig, RecurrenceReport, SampleRecurrence};
