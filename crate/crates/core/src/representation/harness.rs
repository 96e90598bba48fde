use num::Zero;

use super::mrp::mrp_check;
use super::solver::fragment_mrp_check;
use crate::calculus::{default_martingale_l, drift_exact, one_step_covering, sh_measure_check};
use crate::enlargement::{g_before, gtau_equality, EnlargedSpace};
use crate::error::{Error, Result};
use crate::finite_prob::{is_martingale, sigma_at, Filtration, ProcessTable, Rational, SigmaKind};

/// Index of the first basis martingale of `F̂` that drifts in `G`.
pub fn immersion_witness(space: &EnlargedSpace) -> Result<Option<usize>> {
    for (i, x) in space.f_martingale_basis()?.iter().enumerate() {
        if !drift_exact(x, space)?.drift.is_zero() {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Every `F̂`-martingale stays a `G`-martingale.
pub fn immersion_check(space: &EnlargedSpace) -> Result<bool> {
    Ok(immersion_witness(space)?.is_none())
}

/// `G` stopped at `τ`: stage `k` is `G_{τ∧k}`.
pub fn stopped_enlarged_filtration(space: &EnlargedSpace) -> Result<Filtration> {
    let stages = (0..space.columns())
        .map(|k| sigma_at(&space.tau().min_const(k), space.g(), SigmaKind::At))
        .collect::<Result<Vec<_>>>()?;
    Filtration::new(space.g().grid().to_vec(), stages)
}

/// `W_τ 1_{0<τ<∞}` is `G_{τ−}`-measurable for every driver.
pub fn drivers_predictable_at_default(space: &EnlargedSpace, drivers: &[ProcessTable]) -> Result<bool> {
    let before = g_before(space, space.tau())?;
    let window = space.finite_positive_default();
    Ok(drivers.iter().all(|w| {
        let at: Vec<Rational> = w
            .evaluate_at(space.tau().values())
            .into_iter()
            .zip(&window)
            .map(|(v, &inside)| if inside { v } else { Rational::zero() })
            .collect();
        before.is_measurable(&at)
    }))
}

/// Whether the after-default interval is covered by verified sH-fragments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoveringStatus {
    /// Every one-step window carries an sH-measure with a spanning fragment.
    Verified,
    /// A window's measure or fragment test failed.
    Failed(String),
    /// No one-step covering exists for this model.
    Missing(String),
}

/// One equivalence between harness booleans.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equivalence {
    pub name: &'static str,
    pub lhs: bool,
    pub rhs: bool,
    /// False when a hypothesis (the covering) is not available.
    pub applicable: bool,
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        !self.applicable || self.lhs == self.rhs
    }
}

pub const STOPPED_REPRESENTATION_EQUIVALENCE: &str = "stopped-representation-and-predictable-driver-iff-no-jump-information";
pub const GLOBAL_REPRESENTATION_EQUIVALENCE: &str = "global-representation-and-predictable-driver-iff-no-jump-information";
pub const IMMERSION_EQUIVALENCE: &str = "immersion-and-predictable-driver-iff-raw-representation-and-no-jump-information";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessReport {
    /// Representation in `G` stopped at `τ` by `(W̃^τ, L)`.
    pub stopped_representation: bool,
    /// `W_τ 1_{0<τ<∞}` is `G_{τ−}`-measurable.
    pub driver_predictable_at_default: bool,
    /// `G_τ = G_{τ−}` on `{0 < τ < ∞}`.
    pub no_jump_information: bool,
    pub immersion: bool,
    /// Representation in `G` by `(W̃, L)`.
    pub global_representation: bool,
    /// The drivers are `G`-martingales and represent with `L` in `G`.
    pub raw_representation: bool,
    pub covering: CoveringStatus,
    pub equivalences: Vec<Equivalence>,
}

impl HarnessReport {
    pub fn all_hold(&self) -> bool {
        self.equivalences.iter().all(Equivalence::holds)
    }

    /// Fails when the covering hypothesis is not verified.
    pub fn require_covering(&self) -> Result<()> {
        match &self.covering {
            CoveringStatus::Verified => Ok(()),
            CoveringStatus::Failed(why) | CoveringStatus::Missing(why) => Err(Error::MissingCovering(why.clone())),
        }
    }
}

fn covering_status(space: &EnlargedSpace, drivers: &[ProcessTable]) -> Result<CoveringStatus> {
    let windows = match one_step_covering(space) {
        Ok(w) => w,
        Err(Error::MissingCovering(why)) => return Ok(CoveringStatus::Missing(why)),
        Err(e) => return Err(e),
    };
    let basis = space.f_martingale_basis()?;
    for (i, w) in windows.iter().enumerate() {
        if let Some(witness) = sh_measure_check(space, &w.measure, &w.s, &w.t, &basis)?.witness {
            return Ok(CoveringStatus::Failed(format!(
                "window {} fails the fragment martingale test at step {}",
                i + 1,
                witness.step
            )));
        }
        if !fragment_mrp_check(space, &w.measure, &w.s, &w.t, drivers)?.is_spanning() {
            return Ok(CoveringStatus::Failed(format!("window {} has a representation gap", i + 1)));
        }
    }
    Ok(CoveringStatus::Verified)
}

/// Evaluates the harness booleans for `F̂`-drivers with the representation
/// property in `F̂`, and the three equivalences between them.
pub fn theorem_harness(space: &EnlargedSpace, drivers: &[ProcessTable]) -> Result<HarnessReport> {
    let base = mrp_check(space.weights(), space.lifted(), drivers)?;
    if let Some(w) = base.witness {
        return Err(Error::RepresentationGap { step: w.step, block: w.block });
    }
    let w = space.weights();
    let l = default_martingale_l(space)?;
    let tilde = drivers.iter().map(|d| Ok(drift_exact(d, space)?.martingale_part)).collect::<Result<Vec<_>>>()?;

    let stopped_f = stopped_enlarged_filtration(space)?;
    let mut stopped_drivers: Vec<ProcessTable> = tilde.iter().map(|x| x.stopped_at(space.tau().values())).collect();
    stopped_drivers.push(l.clone());
    let a = mrp_check(w, &stopped_f, &stopped_drivers)?.is_spanning();

    let b = drivers_predictable_at_default(space, drivers)?;
    let c = gtau_equality(space);
    let d = immersion_check(space)?;

    let mut global = tilde.clone();
    global.push(l.clone());
    let e = mrp_check(w, space.g(), &global)?.is_spanning();

    let mut raw = true;
    for x in drivers {
        raw &= is_martingale(x, space.g(), w)?;
    }
    let e_w = raw && {
        let mut with_l = drivers.to_vec();
        with_l.push(l);
        mrp_check(w, space.g(), &with_l)?.is_spanning()
    };

    let covering = covering_status(space, drivers)?;
    let equivalences = vec![
        Equivalence { name: STOPPED_REPRESENTATION_EQUIVALENCE, lhs: a && b, rhs: c, applicable: true },
        Equivalence {
            name: GLOBAL_REPRESENTATION_EQUIVALENCE,
            lhs: e && b,
            rhs: c,
            applicable: covering == CoveringStatus::Verified,
        },
        Equivalence { name: IMMERSION_EQUIVALENCE, lhs: d && b, rhs: e_w && c, applicable: true },
    ];
    Ok(HarnessReport {
        stopped_representation: a,
        driver_predictable_at_default: b,
        no_jump_information: c,
        immersion: d,
        global_representation: e,
        raw_representation: e_w,
        covering,
        equivalences,
    })
}
