use num::{One, Signed, Zero};

use super::azema::azema_decomposition;
use super::measure::{stochastic_exponential, MeasureChange};
use crate::enlargement::{fragment_filtration, fragment_process, EnlargedSpace};
use crate::error::{Error, Result};
use crate::finite_prob::{cond_exp, martingale_defect, predictable_bracket, ProcessTable, Rational, StoppingTime};
use crate::models::{honesty_defect, DensityParams};

/// Outcome of an sH-measure check: the first basis martingale that fails to be
/// a fragment martingale, and the step where its drift appears.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShReport {
    pub witness: Option<ShWitness>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShWitness {
    pub basis_index: usize,
    pub step: usize,
}

impl ShReport {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// `qp` is an sH-measure on `(S, T]` when every `X^(S,T]`, for `X` in the
/// basis of `F̂`-martingales, is a martingale under `(qp, G^(S,T])`.
pub fn sh_measure_check(
    space: &EnlargedSpace,
    qp: &MeasureChange,
    s: &StoppingTime,
    t: &StoppingTime,
    basis: &[ProcessTable],
) -> Result<ShReport> {
    if qp.density().len() != space.atoms() {
        return Err(Error::Dimension("measure change and space differ in atoms".into()));
    }
    let weights = qp.weights(space.weights());
    let filtration = fragment_filtration(space, s, t)?;
    for (basis_index, x) in basis.iter().enumerate() {
        let fragment = fragment_process(x, s, t)?;
        if let Some(step) = martingale_defect(&fragment, &filtration, &weights)? {
            return Ok(ShReport { witness: Some(ShWitness { basis_index, step }) });
        }
    }
    Ok(ShReport { witness: None })
}

/// Density model: `dQ'_n/dQ = 1/α_n(τ)` makes `τ` independent of `F̂_n`, so
/// `Q'_n` is an sH-measure on `(0, t_n]`.
pub fn density_sh_measure(space: &EnlargedSpace, params: &DensityParams, n: usize) -> Result<MeasureChange> {
    if n > space.horizon() {
        return Err(Error::InvalidParameters(format!("step {n} beyond horizon {}", space.horizon())));
    }
    if params.alpha.len() != space.columns() {
        return Err(Error::Dimension("one density table per default date required".into()));
    }
    let density = (0..space.atoms())
        .map(|i| {
            let a = params.alpha[space.tau().value(i)].at(n, space.origin()[i]);
            if a.is_positive() {
                Ok(a.recip())
            } else {
                Err(Error::NonPositive(format!("conditional density {a} at atom {i}")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MeasureChange::new(density, space.weights())
}

/// The honest-time construction: `(S_a, T_{a,n}]` and the density martingale
/// that removes the after-default drift on it.
#[derive(Clone, Debug, PartialEq)]
pub struct HonestShMeasure {
    pub s: StoppingTime,
    pub t: StoppingTime,
    pub eta: ProcessTable,
    pub measure: MeasureChange,
}

/// Deliberate corruptions of the honest construction, used to show the
/// check has teeth.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HonestShMutation {
    /// Integrand 1 instead of `1/(1 − Z_{k−1})`.
    DropDenominator,
}

/// `P(τ ≤ k | F̂_{k+1})`, the after-default mass each child of a stage-`k`
/// node carries.
fn defaulted_mass(space: &EnlargedSpace, k: usize) -> Result<Vec<Rational>> {
    let dead: Vec<Rational> =
        space.tau().values().iter().map(|&t| if t <= k { Rational::one() } else { Rational::zero() }).collect();
    cond_exp(&dead, space.lifted().stage(k + 1), space.weights())
}

/// Nodes at stage `k` that carry defaulted mass but have a child without it:
/// past `k`, no equivalent change of measure can restore the base law there.
fn singular_nodes(space: &EnlargedSpace, z: &ProcessTable, k: usize) -> Result<Vec<bool>> {
    let mass = defaulted_mass(space, k)?;
    let stage = space.lifted().stage(k);
    let mut singular = vec![false; stage.block_count()];
    for i in 0..space.atoms() {
        if mass[i].is_zero() && !(Rational::one() - z.at(k, i)).is_zero() {
            singular[stage.block_of(i)] = true;
        }
    }
    Ok((0..space.atoms()).map(|i| singular[stage.block_of(i)]).collect())
}

/// `S_a = τ ∨ a` and `T_{a,n}`: the first `k ≥ S_a` at which the node is
/// singular or `Σ_{S_a<j≤k} Δ⟨M⟩_j/(1 − Z_{j−1})² > n`, capped at the horizon.
pub fn honest_window(space: &EnlargedSpace, a: usize, n: &Rational) -> Result<(StoppingTime, StoppingTime)> {
    if let Some(k) = honesty_defect(space.tau().values(), space.lifted()) {
        return Err(Error::NotHonest(format!("default time is not determined by stage {k} on {{τ ≤ {k}}}")));
    }
    let horizon = space.horizon();
    let d = azema_decomposition(space)?;
    let bracket = predictable_bracket(&d.m, &d.m, space.lifted(), space.weights())?;
    let singular = (0..horizon).map(|k| singular_nodes(space, &d.z, k)).collect::<Result<Vec<_>>>()?;
    let s: Vec<usize> = space.tau().values().iter().map(|&t| t.max(a)).collect();
    let t = (0..space.atoms())
        .map(|i| {
            let mut energy = Rational::zero();
            for k in s[i]..horizon {
                if k > s[i] {
                    let gap = Rational::one() - d.z.at(k - 1, i);
                    energy += (bracket.at(k, i) - bracket.at(k - 1, i)) / (&gap * &gap);
                }
                if singular[k][i] || energy > *n {
                    return k;
                }
            }
            horizon
        })
        .collect();
    Ok((space.g_stopping_time(s)?, space.g_stopping_time(t)?))
}

/// Honest-time sH-measure on `(S_a, T_{a,n}]`. The density martingale is
/// `η = ℰ(1_{(S_a,T]} / (1 − Z_−) · V)` where
/// `ΔV_k = ΔU_k (1 − Z_{k−1}) / (1 − Z_{k−1} − ΔU_k)` and `U = M + Â − A`,
/// i.e. each step multiplies by `(1 − Z_{k−1}) / P(τ < k | F̂_k)`.
pub fn build_sh_measure_honest(space: &EnlargedSpace, a: usize, n: &Rational) -> Result<HonestShMeasure> {
    build_sh_measure_honest_with(space, a, n, None)
}

pub fn build_sh_measure_honest_with(
    space: &EnlargedSpace,
    a: usize,
    n: &Rational,
    mutation: Option<HonestShMutation>,
) -> Result<HonestShMeasure> {
    let (s, t) = honest_window(space, a, n)?;
    let d = azema_decomposition(space)?;
    let u = d.u()?;
    let columns = space.columns();
    let mut j = ProcessTable::zeros(columns, space.atoms());
    let mut v_increments = vec![vec![Rational::zero(); space.atoms()]];
    for k in 1..columns {
        let du = u.increment(k);
        let mut inc = vec![Rational::zero(); space.atoms()];
        for i in 0..space.atoms() {
            if !(s.value(i) < k && k <= t.value(i)) {
                continue;
            }
            let gap = Rational::one() - d.z.at(k - 1, i);
            let remaining = &gap - &du[i];
            if !remaining.is_positive() {
                return Err(Error::NonPositive(format!("no defaulted mass left at step {k}, atom {i}")));
            }
            inc[i] = &du[i] * &gap / remaining;
            let integrand = match mutation {
                None => gap.recip(),
                Some(HonestShMutation::DropDenominator) => Rational::one(),
            };
            j.set(k, i, integrand);
        }
        v_increments.push(inc);
    }
    let v = ProcessTable::from_increments(v_increments)?;
    let exp = stochastic_exponential(&j, &v, space.g())?;
    if let Some((k, i)) = exp.first_non_positive {
        return Err(Error::NonPositive(format!("density process {} at column {k}, atom {i}", exp.eta.at(k, i))));
    }
    let measure = MeasureChange::from_martingale(&exp.eta, space.weights())?;
    Ok(HonestShMeasure { s, t, eta: exp.eta, measure })
}

/// One window of the one-step covering of `(τ, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoveringWindow {
    pub s: StoppingTime,
    pub t: StoppingTime,
    pub measure: MeasureChange,
}

/// Covers `(τ, ∞)` by the windows `(τ ∨ (k−1), k]`. On `{τ < k}` the density
/// is `p(c | b) / q(c | b, τ)`, the base transition from the stage-`(k−1)`
/// node `b` to the child `c` over its conditional law given `τ`; elsewhere 1.
/// Fails with `MissingCovering` when some child has base mass but none given `τ`.
pub fn one_step_covering(space: &EnlargedSpace) -> Result<Vec<CoveringWindow>> {
    let w = space.weights();
    let mut windows = Vec::new();
    for k in 1..space.columns() {
        let child = space.lifted().stage(k);
        let base_parent = space.lifted().stage(k - 1);
        let parent = space.g().stage(k - 1);
        let given_tau = |i: usize| space.tau().value(i) < k;
        let child_ind = |i: usize| -> Vec<Rational> {
            let block = child.block_of(i);
            (0..space.atoms()).map(|j| if child.block_of(j) == block { Rational::one() } else { Rational::zero() }).collect()
        };
        let mut density = vec![Rational::one(); space.atoms()];
        for (i, value) in density.iter_mut().enumerate() {
            if !given_tau(i) {
                continue;
            }
            let ind = child_ind(i);
            let p = cond_exp(&ind, base_parent, w)?[i].clone();
            let q = cond_exp(&ind, parent, w)?[i].clone();
            *value = p / q;
        }
        // A child with base mass but no mass given some τ < k cannot be reached.
        for i in (0..space.atoms()).filter(|&i| given_tau(i)) {
            let b = base_parent.block_of(i);
            let block = parent.block_of(i);
            let reached: Vec<usize> =
                (0..space.atoms()).filter(|&j| parent.block_of(j) == block).map(|j| child.block_of(j)).collect();
            if let Some(missing) =
                (0..space.atoms()).find(|&j| base_parent.block_of(j) == b && !reached.contains(&child.block_of(j)))
            {
                return Err(Error::MissingCovering(format!(
                    "step {k}: atom {missing} is unreachable once τ = {} is known",
                    space.tau().value(i)
                )));
            }
        }
        let s = space.g_stopping_time(space.tau().values().iter().map(|&t| t.max(k - 1)).collect())?;
        let t = StoppingTime::constant(k, space.g());
        windows.push(CoveringWindow { s, t, measure: MeasureChange::new(density, w)? });
    }
    Ok(windows)
}
