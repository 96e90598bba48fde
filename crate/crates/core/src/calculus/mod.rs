//! Azéma supermartingale, the compensated default martingale, the drift of
//! base martingales in the enlarged filtration (oracle and closed forms),
//! changes of measure and sH-measures.

mod azema;
mod drift;
mod measure;
mod sh;

pub(crate) use azema::AzemaCache;
pub use azema::{azema_decomposition, azema_positivity_defect, azema_z, default_martingale_l, AzemaDecomposition};
pub use drift::{
    drift_after_honest_formula, drift_after_honest_signed, drift_before_formula, drift_exact, drift_natural_formula,
    first_drift_mismatch, natural_drift_report, resolve_after_default_sign, AfterDefaultSign, DriftDecomposition,
    DriftRegion, NaturalDriftReport, SignResolution,
};
pub use measure::{girsanov_transform, stochastic_exponential, MeasureChange, StochasticExponential};
pub use sh::{
    build_sh_measure_honest, build_sh_measure_honest_with, density_sh_measure, honest_window, one_step_covering,
    sh_measure_check, CoveringWindow, HonestShMeasure, HonestShMutation, ShReport, ShWitness,
};
