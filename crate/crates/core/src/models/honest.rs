use rand::Rng;

use crate::enlargement::{build_product_space, DefaultKernel, EnlargedSpace};
use crate::error::{Error, Result};
use crate::finite_prob::{Filtration, FiniteSpace, ProcessTable};

/// How an honest default time is read off the base paths.
#[derive(Clone, Debug, PartialEq)]
pub enum HonestRule {
    /// Last `k ≤ n` with `X_k = max_{j≤n} X_j`.
    LastMaximum(ProcessTable),
    /// Last `k ≤ n` with `X_k = 0` (time 0 if `X` never returns).
    LastZero(ProcessTable),
    /// Explicit time per base atom (`n + 1` for never).
    Custom(Vec<usize>),
}

impl HonestRule {
    pub fn times(&self, f: &Filtration) -> Result<Vec<usize>> {
        let n = f.horizon();
        let last_where = |x: &ProcessTable, hit: &dyn Fn(usize, usize) -> bool| -> Result<Vec<usize>> {
            if !x.shape_matches(f) {
                return Err(Error::Dimension("rule process does not match the filtration".into()));
            }
            Ok((0..f.atoms()).map(|i| (0..=n).rev().find(|&k| hit(k, i)).unwrap_or(0)).collect())
        };
        match self {
            HonestRule::LastMaximum(x) => last_where(x, &|k, i| (0..=n).all(|j| x.at(j, i) <= x.at(k, i))),
            HonestRule::LastZero(x) => last_where(x, &|k, i| num::Zero::is_zero(x.at(k, i))),
            HonestRule::Custom(times) => {
                if times.len() != f.atoms() {
                    return Err(Error::Dimension("one time per base atom required".into()));
                }
                if let Some(t) = times.iter().find(|&&t| t > f.terminal()) {
                    return Err(Error::Dimension(format!("time index {t} beyond terminal")));
                }
                Ok(times.clone())
            }
        }
    }
}

/// Honesty as a partition statement: within each stage-`k` block, the atoms
/// with `τ ≤ k` share one value of `τ`. Returns the first offending stage.
pub fn honesty_defect(times: &[usize], f: &Filtration) -> Option<usize> {
    (0..f.columns()).find(|&k| {
        let stage = f.stage(k);
        let mut seen: Vec<Option<usize>> = vec![None; stage.block_count()];
        times.iter().enumerate().filter(|(_, &t)| t <= k).any(|(i, &t)| {
            let slot = &mut seen[stage.block_of(i)];
            match slot {
                None => {
                    *slot = Some(t);
                    false
                }
                Some(v) => *v != t,
            }
        })
    })
}

pub fn honest_time_model(base: &FiniteSpace, f: &Filtration, rule: &HonestRule) -> Result<EnlargedSpace> {
    let times = rule.times(f)?;
    if let Some(k) = honesty_defect(&times, f) {
        return Err(Error::NotHonest(format!("default time is not determined by stage {k} on {{τ ≤ {k}}}")));
    }
    build_product_space(base.clone(), f.clone(), DefaultKernel::point_mass(&times, f.columns())?)
}

/// Default at a fixed grid index on every path (`n + 1` for never).
pub fn fixed_time_model(base: &FiniteSpace, f: &Filtration, k: usize) -> Result<EnlargedSpace> {
    build_product_space(base.clone(), f.clone(), DefaultKernel::point_mass(&vec![k; f.atoms()], f.columns())?)
}

/// A random honest time: the last visit to randomly chosen adapted sets
/// `E_k` (each stage-`k` block is in `E_k` with probability `visit_probability`,
/// `E_0` is everything).
pub fn random_honest_times<R: Rng>(f: &Filtration, rng: &mut R, visit_probability: f64) -> Vec<usize> {
    let mut times = vec![0; f.atoms()];
    for k in 1..=f.horizon() {
        let stage = f.stage(k);
        let visited: Vec<bool> = (0..stage.block_count()).map(|_| rng.gen_bool(visit_probability)).collect();
        for (i, t) in times.iter_mut().enumerate() {
            if visited[stage.block_of(i)] {
                *t = k;
            }
        }
    }
    times
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{walk_driver, BaseTree};
    use rand::SeedableRng;

    #[test]
    fn last_maximum_of_two_step_walk() {
        let tree = BaseTree::binary(2).unwrap();
        let w = walk_driver(&tree.space, &tree.filtration).unwrap();
        let times = HonestRule::LastMaximum(w).times(&tree.filtration).unwrap();
        assert_eq!(times, vec![2, 1, 2, 0]);
        assert_eq!(honesty_defect(&times, &tree.filtration), None);
    }

    #[test]
    fn last_zero_of_two_step_walk() {
        let tree = BaseTree::binary(2).unwrap();
        let w = walk_driver(&tree.space, &tree.filtration).unwrap();
        assert_eq!(HonestRule::LastZero(w).times(&tree.filtration).unwrap(), vec![0, 2, 2, 0]);
    }

    #[test]
    fn rejects_future_dependent_time() {
        let tree = BaseTree::binary(2).unwrap();
        // On the up branch the time is 1 or 0 depending on the second move.
        let rule = HonestRule::Custom(vec![1, 0, 2, 2]);
        assert!(matches!(honest_time_model(&tree.space, &tree.filtration, &rule), Err(Error::NotHonest(_))));
    }

    #[test]
    fn random_honest_times_are_honest() {
        let tree = BaseTree::binary(3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let times = random_honest_times(&tree.filtration, &mut rng, 0.5);
            assert_eq!(honesty_defect(&times, &tree.filtration), None);
        }
    }
}
