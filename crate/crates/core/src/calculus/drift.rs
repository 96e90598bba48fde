use num::{One, Signed, Zero};

use super::azema::azema_cached;
use crate::enlargement::EnlargedSpace;
use crate::error::{Error, Result};
use crate::finite_prob::{cond_exp, martingale_defect, predictable_bracket, ProcessTable, Rational};
use crate::models::{honesty_defect, NaturalModel};

/// `X = X̃ + Γ(X)` with `X̃` a `G`-martingale and `Γ(X)` predictable, `Γ(X)_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftDecomposition {
    pub martingale_part: ProcessTable,
    pub drift: ProcessTable,
}

/// Part of the time axis on which two drifts are compared.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DriftRegion {
    /// Steps `k` with `τ ≥ k`, i.e. `(0, τ]`.
    BeforeDefault,
    /// Steps `k` with `τ < k`, i.e. `(τ, ∞)`.
    AfterDefault,
    All,
}

impl DriftRegion {
    pub fn contains(self, tau: usize, k: usize) -> bool {
        match self {
            DriftRegion::BeforeDefault => tau >= k,
            DriftRegion::AfterDefault => tau < k,
            DriftRegion::All => true,
        }
    }
}

fn require_f_martingale(x: &ProcessTable, space: &EnlargedSpace) -> Result<()> {
    if !x.shape_matches(space.lifted()) {
        // Let the generic routine report the shape error.
        martingale_defect(x, space.lifted(), space.weights())?;
    }
    if let Some(column) = x.first_non_adapted(space.lifted()) {
        return Err(Error::NotAdapted { column });
    }
    match azema_cached(space)?.lifted.martingale_defect(x, space.lifted()) {
        Some(step) => Err(Error::NotMartingale { step }),
        None => Ok(()),
    }
}

/// Oracle drift `ΔΓ(X)_k = E[ΔX_k | G_{k−1}]` for an `F̂`-martingale `X`.
pub fn drift_exact(x: &ProcessTable, space: &EnlargedSpace) -> Result<DriftDecomposition> {
    require_f_martingale(x, space)?;
    let mut increments = vec![vec![Rational::zero(); space.atoms()]];
    for k in 1..space.columns() {
        increments.push(cond_exp(&x.increment(k), space.g().stage(k - 1), space.weights())?);
    }
    let drift = ProcessTable::from_increments(increments)?;
    let martingale_part = x.sub(&drift)?;
    Ok(DriftDecomposition { martingale_part, drift })
}

/// Builds a drift table from per-step increments, leaving steps outside
/// `region` at zero.
fn drift_from(
    space: &EnlargedSpace,
    region: DriftRegion,
    mut step: impl FnMut(usize, usize) -> Result<Rational>,
) -> Result<ProcessTable> {
    let mut increments = vec![vec![Rational::zero(); space.atoms()]];
    for k in 1..space.columns() {
        let mut inc = vec![Rational::zero(); space.atoms()];
        for (i, v) in inc.iter_mut().enumerate() {
            if region.contains(space.tau().value(i), k) {
                *v = step(k, i)?;
            }
        }
        increments.push(inc);
    }
    ProcessTable::from_increments(increments)
}

/// `Δ⟨U, X⟩_k / D` on `region`, where `D` is the `F̂_{k−1}`-measurable
/// denominator. Both factors are constant on blocks of the lifted stage
/// `k − 1`, so each block is divided once.
fn u_bracket_ratio(
    x: &ProcessTable,
    space: &EnlargedSpace,
    region: DriftRegion,
    denominator: impl Fn(&Rational) -> Rational,
    singular: impl Fn(usize) -> Error,
) -> Result<ProcessTable> {
    let cache = azema_cached(space)?;
    let means = cache.lifted.bracket_means(&cache.u, x, space.lifted());
    let mut memo: Vec<Option<Rational>> = Vec::new();
    let mut current = 0;
    drift_from(space, region, |k, i| {
        let stage = space.lifted().stage(k - 1);
        if current != k {
            memo = vec![None; stage.block_count()];
            current = k;
        }
        let b = stage.block_of(i);
        if let Some(v) = &memo[b] {
            return Ok(v.clone());
        }
        let den = denominator(cache.d.z.at(k - 1, i));
        if den.is_zero() {
            return Err(singular(k));
        }
        let v = &means[k][b] / den;
        memo[b] = Some(v.clone());
        Ok(v)
    })
}

/// Drift before default: `1_{τ≥k} Δ⟨M + Â − A, X⟩_k / Z_{k−1}`, bracket in `F̂`.
pub fn drift_before_formula(x: &ProcessTable, space: &EnlargedSpace) -> Result<ProcessTable> {
    require_f_martingale(x, space)?;
    u_bracket_ratio(x, space, DriftRegion::BeforeDefault, Rational::clone, |k| {
        Error::Singular(format!("survival probability vanishes before default at step {k}"))
    })
}

/// Sign in front of the after-default honest-time formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AfterDefaultSign {
    Minus,
    Plus,
}

/// Drift after an honest default: `1_{τ<k} Δ⟨M + Â − A, X⟩_k / (1 − Z_{k−1})`
/// with the minus sign, which is the one that matches [`drift_exact`].
pub fn drift_after_honest_formula(x: &ProcessTable, space: &EnlargedSpace) -> Result<ProcessTable> {
    drift_after_honest_signed(x, space, AfterDefaultSign::Minus)
}

pub fn drift_after_honest_signed(x: &ProcessTable, space: &EnlargedSpace, sign: AfterDefaultSign) -> Result<ProcessTable> {
    require_f_martingale(x, space)?;
    if let Some(k) = honesty_defect(space.tau().values(), space.lifted()) {
        return Err(Error::NotHonest(format!("default time is not determined by stage {k} on {{τ ≤ {k}}}")));
    }
    let denominator = |z: &Rational| match sign {
        AfterDefaultSign::Minus => z - Rational::one(),
        AfterDefaultSign::Plus => Rational::one() - z,
    };
    u_bracket_ratio(x, space, DriftRegion::AfterDefault, denominator, |k| {
        Error::Singular(format!("1 − Z vanishes after default at step {k}"))
    })
}

/// Which sign of the after-default formula reproduces the oracle drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignResolution {
    Minus,
    Plus,
    /// The after-default drift vanishes, so either sign fits.
    Both,
    Neither,
}

pub fn resolve_after_default_sign(x: &ProcessTable, space: &EnlargedSpace) -> Result<SignResolution> {
    let exact = drift_exact(x, space)?.drift;
    let fits = |sign| -> Result<bool> {
        let formula = drift_after_honest_signed(x, space, sign)?;
        Ok(first_drift_mismatch(&formula, &exact, space, DriftRegion::AfterDefault).is_none())
    };
    Ok(match (fits(AfterDefaultSign::Minus)?, fits(AfterDefaultSign::Plus)?) {
        (true, true) => SignResolution::Both,
        (true, false) => SignResolution::Minus,
        (false, true) => SignResolution::Plus,
        (false, false) => SignResolution::Neither,
    })
}

/// First `(step, atom)` in `region` where the increments of `a` and `b` differ.
pub fn first_drift_mismatch(
    a: &ProcessTable,
    b: &ProcessTable,
    space: &EnlargedSpace,
    region: DriftRegion,
) -> Option<(usize, usize)> {
    (1..space.columns()).find_map(|k| {
        let (da, db) = (a.increment(k), b.increment(k));
        (0..space.atoms()).find(|&i| region.contains(space.tau().value(i), k) && da[i] != db[i]).map(|i| (k, i))
    })
}

/// The conditional-CDF drift formula next to the oracle.
///
/// `deviation = formula − exact`. `defect` is the part of the formula that the
/// discrete recursion does not reproduce: after default the derivative
/// coefficient `β` against the difference quotient of `g(x) = x f(x − c)`
/// across `[M^{τ−1}, M^τ]`, and before default the first step from `Z = 1`,
/// where `M^{k−1} ≡ 0` and the exact drift vanishes.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalDriftReport {
    pub formula: ProcessTable,
    pub exact: ProcessTable,
    pub deviation: ProcessTable,
    pub defect: ProcessTable,
}

impl NaturalDriftReport {
    pub fn max_abs_deviation(&self) -> Rational {
        (0..self.deviation.columns()).flat_map(|k| self.deviation.column(k)).map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// The deviation is fully explained by the recorded defect.
    pub fn deviation_is_defect(&self) -> bool {
        self.deviation == self.defect
    }
}

struct NaturalTerms {
    formula: ProcessTable,
    defect: ProcessTable,
}

fn natural_terms(x: &ProcessTable, model: &NaturalModel) -> Result<NaturalTerms> {
    let space = &model.space;
    require_f_martingale(x, space)?;
    let n_steps = space.horizon();
    if model.cdf.len() < n_steps + 1 {
        return Err(Error::InvalidParameters(format!(
            "{} conditional-CDF tables supplied, {} needed",
            model.cdf.len(),
            n_steps + 1
        )));
    }
    let p = &model.params;
    let z = space.lift_process(&p.z()?);
    let survival = space.lift_process(&p.survival);
    let cdf: Vec<ProcessTable> = model.cdf.iter().map(|m| space.lift_process(m)).collect();
    let bracket_n = predictable_bracket(&space.lift_process(&p.n), x, space.lifted(), space.weights())?;
    let bracket_y = predictable_bracket(&space.lift_process(&p.y), x, space.lifted(), space.weights())?;
    let g = |v: &Rational, c: &Rational| v * p.f.eval(&(v - c));

    let columns = space.columns();
    let mut formula = vec![vec![Rational::zero(); space.atoms()]];
    let mut defect = vec![vec![Rational::zero(); space.atoms()]];
    for k in 1..columns {
        let mut f_inc = vec![Rational::zero(); space.atoms()];
        let mut d_inc = vec![Rational::zero(); space.atoms()];
        if k <= n_steps {
            let (dn, dy) = (bracket_n.increment(k), bracket_y.increment(k));
            for i in 0..space.atoms() {
                let tau = space.tau().value(i);
                let zk = z.at(k - 1, i);
                let c = Rational::one() - zk;
                if tau >= k {
                    let gamma = survival.at(k - 1, i) / zk;
                    f_inc[i] = &gamma * &dn[i];
                    if c.is_zero() {
                        d_inc[i] = f_inc[i].clone();
                    }
                } else {
                    let m_tau = cdf[tau].at(k - 1, i);
                    let m_prev = if tau == 0 { Rational::zero() } else { cdf[tau - 1].at(k - 1, i).clone() };
                    let alpha = -survival.at(k - 1, i) / &c;
                    let shifted = m_tau - &c;
                    let beta = p.f.eval(&shifted) + m_tau * p.f.derivative(&shifted);
                    let spread = m_tau - &m_prev;
                    if spread.is_zero() {
                        return Err(Error::Singular(format!("default date {tau} has zero conditional mass at step {k}")));
                    }
                    let quotient = (g(m_tau, &c) - g(&m_prev, &c)) / spread;
                    f_inc[i] = alpha * &dn[i] + &beta * &dy[i];
                    d_inc[i] = (beta - quotient) * &dy[i];
                }
            }
        }
        formula.push(f_inc);
        defect.push(d_inc);
    }
    Ok(NaturalTerms { formula: ProcessTable::from_increments(formula)?, defect: ProcessTable::from_increments(defect)? })
}

/// Three-term drift of the conditional-CDF model: `γ_{k−1} Δ⟨N,X⟩_k` before
/// default and `α_{k−1} Δ⟨N,X⟩_k + β_{k−1} Δ⟨Y,X⟩_k` after, with
/// `γ = e^{−Λ}/Z`, `α = −e^{−Λ}/(1−Z)` and
/// `β = f(M^τ − (1−Z)) + M^τ f′(M^τ − (1−Z))`.
pub fn drift_natural_formula(x: &ProcessTable, model: &NaturalModel) -> Result<ProcessTable> {
    Ok(natural_terms(x, model)?.formula)
}

pub fn natural_drift_report(x: &ProcessTable, model: &NaturalModel) -> Result<NaturalDriftReport> {
    let NaturalTerms { formula, defect } = natural_terms(x, model)?;
    let exact = drift_exact(x, &model.space)?.drift;
    let deviation = formula.sub(&exact)?;
    Ok(NaturalDriftReport { formula, exact, deviation, defect })
}
