use num::{One, Signed, Zero};

use crate::enlargement::EnlargedSpace;
use crate::error::{Error, Result};
use crate::finite_prob::{cond_exp, doob_decomposition, dual_projections, ProcessTable, Rational, StageBlocks};

fn indicator(event: &[bool]) -> Vec<Rational> {
    event.iter().map(|&b| if b { Rational::one() } else { Rational::zero() }).collect()
}

/// Survival process `Z_k = Q[τ > t_k | F̂_k]`, with `Z_∞ = Q[τ = ∞ | F̂_∞]`.
pub fn azema_z(space: &EnlargedSpace) -> Result<ProcessTable> {
    let columns = (0..space.columns())
        .map(|k| cond_exp(&indicator(&space.alive(k)), space.lifted().stage(k), space.weights()))
        .collect::<Result<Vec<_>>>()?;
    ProcessTable::new(columns)
}

/// `Z = M − A` together with the optional dual projection `Â`.
#[derive(Clone, Debug, PartialEq)]
pub struct AzemaDecomposition {
    pub z: ProcessTable,
    pub m: ProcessTable,
    pub a: ProcessTable,
    pub a_hat: ProcessTable,
}

impl AzemaDecomposition {
    /// `U = M + Â − A`, the process whose bracket drives the drift formulas.
    pub fn u(&self) -> Result<ProcessTable> {
        self.m.add(&self.a_hat)?.sub(&self.a)
    }
}

/// The decomposition and `U` of a space, computed once per space.
#[derive(Clone, Debug)]
pub(crate) struct AzemaCache {
    pub d: AzemaDecomposition,
    pub u: ProcessTable,
    /// Blocks of the lifted base filtration under the space's weights.
    pub lifted: StageBlocks,
}

pub(crate) fn azema_cached(space: &EnlargedSpace) -> Result<&AzemaCache> {
    if let Some(c) = space.azema.get() {
        return Ok(c);
    }
    let d = azema_decomposition(space)?;
    let u = d.u()?;
    let lifted = StageBlocks::new(space.lifted(), space.weights());
    let _ = space.azema.set(AzemaCache { d, u, lifted });
    Ok(space.azema.get().expect("just set"))
}

pub fn azema_decomposition(space: &EnlargedSpace) -> Result<AzemaDecomposition> {
    let z = azema_z(space)?;
    let (m, a) = doob_decomposition(&z, space.lifted(), space.weights())?;
    let (_, a_hat) = dual_projections(space.tau().values(), space.lifted(), space.weights())?;
    Ok(AzemaDecomposition { z, m, a, a_hat })
}

/// First atom of `{0 < τ < ∞}` where `Z_{τ−} = 0`, with `Z_{0−} = 1`.
pub fn azema_positivity_defect(space: &EnlargedSpace, z: &ProcessTable) -> Option<usize> {
    (0..space.atoms()).find(|&i| {
        let t = space.tau().value(i);
        t > 0 && t < space.terminal() && !z.at(t - 1, i).is_positive()
    })
}

/// Compensated default martingale:
/// `ΔL_k = 1_{τ=k, τ>0} − 1_{τ≥k} ΔA_k / Z_{k−1}` for `1 ≤ k ≤ n`, `ΔL_∞ = 0`.
pub fn default_martingale_l(space: &EnlargedSpace) -> Result<ProcessTable> {
    let d = azema_decomposition(space)?;
    default_martingale_from(space, &d)
}

pub(crate) fn default_martingale_from(space: &EnlargedSpace, d: &AzemaDecomposition) -> Result<ProcessTable> {
    let atoms = space.atoms();
    let mut increments = vec![vec![Rational::zero(); atoms]];
    for k in 1..space.columns() {
        let mut inc = vec![Rational::zero(); atoms];
        if k <= space.horizon() {
            let da = d.a.increment(k);
            for (i, v) in inc.iter_mut().enumerate() {
                let t = space.tau().value(i);
                if t < k {
                    continue;
                }
                let survival = d.z.at(k - 1, i);
                if survival.is_zero() {
                    return Err(Error::Singular(format!("survival probability vanishes before default at step {k}")));
                }
                let jump = if t == k { Rational::one() } else { Rational::zero() };
                *v = jump - &da[i] / survival;
            }
        }
        increments.push(inc);
    }
    ProcessTable::from_increments(increments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::{int, is_martingale, rat};
    use crate::models::catalog;

    #[test]
    fn honest_walk_survival() {
        let m = catalog::honest_walk(2).unwrap();
        let z = azema_z(&m.space).unwrap();
        assert!(z.column(0).iter().all(|v| *v == rat(3, 4)));
        assert!(z.column(1).iter().all(|v| *v == rat(1, 2)));
        assert!(z.column(2).iter().all(Zero::is_zero));
    }

    #[test]
    fn deterministic_cox_survival_and_hazard() {
        let m = catalog::cox_deterministic().unwrap();
        let z = azema_z(&m.space).unwrap();
        for (k, expected) in [int(1), rat(1, 2), rat(1, 4)].iter().enumerate() {
            assert!(z.column(k).iter().all(|v| v == expected));
        }
        let l = default_martingale_l(&m.space).unwrap();
        assert!(is_martingale(&l, m.space.g(), m.space.weights()).unwrap());
        for i in 0..m.space.atoms() {
            if m.space.tau().value(i) == 1 {
                assert_eq!(*l.at(1, i), rat(1, 2));
            }
        }
    }

    #[test]
    fn predictable_default_has_null_martingale() {
        let m = catalog::deterministic_with_coin().unwrap();
        assert!(default_martingale_l(&m.space).unwrap().is_zero());
        let never = catalog::never_default().unwrap();
        assert!(default_martingale_l(&never.space).unwrap().is_zero());
        assert!(azema_z(&never.space).unwrap().columns() > 0);
    }

    #[test]
    fn doob_compensator_is_the_predictable_dual_projection() {
        let m = catalog::density_tilted().unwrap();
        let d = azema_decomposition(&m.space).unwrap();
        let (a, _) = dual_projections(m.space.tau().values(), m.space.lifted(), m.space.weights()).unwrap();
        assert_eq!(d.a, a);
        assert_eq!(azema_positivity_defect(&m.space, &d.z), None);
    }
}
