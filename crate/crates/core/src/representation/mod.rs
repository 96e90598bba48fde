//! Exact tests of the martingale representation property, the explicit
//! integrands of the before-default and honest-time representations, and the
//! harness comparing the equivalent characterizations.

pub mod linalg;
mod harness;
mod mrp;
mod solver;

pub use harness::{
    drivers_predictable_at_default, immersion_check, immersion_witness, stopped_enlarged_filtration, theorem_harness,
    CoveringStatus, Equivalence, HarnessReport, GLOBAL_REPRESENTATION_EQUIVALENCE, IMMERSION_EQUIVALENCE,
    STOPPED_REPRESENTATION_EQUIVALENCE,
};
pub use mrp::{mrp_check, GapWitness, MrpCertificate, MrpVerdict, StepDimensions};
pub use solver::{
    fragment_mrp_check, honest_full_representation, integrand_solver_before, HonestRepresentation,
    RepresentationTriple,
};
