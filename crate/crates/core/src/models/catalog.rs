//! Small named models used by tests, examples and the scenario presets.

use super::{
    cox_model, density_model, fixed_time_model, honest_time_model, natural_model_discrete, walk_driver, BaseTree,
    CoxParams, DensityParams, HonestRule, NaturalModel, NaturalParams, ScalarFn,
};
use crate::enlargement::EnlargedSpace;
use crate::error::Result;
use crate::finite_prob::{int, rat, ProcessTable, Rational};

/// A model together with its base tree and walk driver (over base atoms).
#[derive(Clone, Debug)]
pub struct NamedModel {
    pub name: &'static str,
    pub tree: BaseTree,
    pub walk: ProcessTable,
    pub space: EnlargedSpace,
}

fn named(name: &'static str, tree: BaseTree, space: EnlargedSpace) -> Result<NamedModel> {
    let walk = walk_driver(&tree.space, &tree.filtration)?;
    Ok(NamedModel { name, tree, walk, space })
}

/// Cox model on a four-step grid where coins are tossed at steps 1 and 3 and
/// the intensity (driven by the coins) only accrues at the quiet steps 2 and 4.
pub fn cox_interleaved() -> Result<NamedModel> {
    let tree = BaseTree::uniform(&[2, 1, 2, 1])?;
    let survival = tree_survival(&tree, |path, k| {
        let first = if path[0] == 0 { rat(1, 2) } else { rat(1, 4) };
        let second = if path[2] == 0 { rat(1, 2) } else { rat(2, 3) };
        match k {
            0 | 1 => int(1),
            2 | 3 => first,
            _ => first * second,
        }
    });
    let space = cox_model(&tree.space, &tree.filtration, &CoxParams::new(survival))?;
    named("cox", tree, space)
}

/// Deterministic Cox model `e^{−Λ} = (1, 1/2, 1/4)` on the fair two-step walk.
pub fn cox_deterministic() -> Result<NamedModel> {
    let tree = BaseTree::binary(2)?;
    let params = CoxParams::deterministic(&[int(1), rat(1, 2), rat(1, 4)], tree.atoms());
    let space = cox_model(&tree.space, &tree.filtration, &params)?;
    named("cox-deterministic", tree, space)
}

/// Density model on the fair two-step walk: `μ` uniform on `{1, 2, ∞}` and the
/// densities of dates 1 and 2 tilted by the first coin.
pub fn density_tilted() -> Result<NamedModel> {
    let tree = BaseTree::binary(2)?;
    let (params, _) = density_tilted_params(&tree)?;
    let space = density_model(&tree.space, &tree.filtration, &params)?;
    named("density", tree, space)
}

pub fn density_tilted_params(tree: &BaseTree) -> Result<(DensityParams, Vec<Rational>)> {
    let mu = vec![int(0), rat(1, 3), rat(1, 3), rat(1, 3)];
    let up: Vec<bool> = tree.paths().iter().map(|p| p[0] == 0).collect();
    let tilt = |a: Rational, b: Rational| up.iter().map(|&u| if u { a.clone() } else { b.clone() }).collect();
    let terminal = vec![vec![int(1); tree.atoms()], tilt(rat(3, 2), rat(1, 2)), tilt(rat(1, 2), rat(3, 2)), vec![
        int(1);
        tree.atoms()
    ]];
    let params = DensityParams::from_terminal(&tree.space, &tree.filtration, mu.clone(), terminal)?;
    Ok((params, mu))
}

/// Last time the fair walk sits at its running maximum, on `steps` steps.
pub fn honest_walk(steps: usize) -> Result<NamedModel> {
    let tree = BaseTree::binary(steps)?;
    let walk = walk_driver(&tree.space, &tree.filtration)?;
    let space = honest_time_model(&tree.space, &tree.filtration, &HonestRule::LastMaximum(walk))?;
    named("honest-walk", tree, space)
}

/// Default at time 1 for sure, while a fair coin is revealed at time 1.
pub fn deterministic_with_coin() -> Result<NamedModel> {
    let tree = BaseTree::binary(1)?;
    let space = fixed_time_model(&tree.space, &tree.filtration, 1)?;
    named("deterministic-coin", tree, space)
}

/// No default on the fair two-step walk.
pub fn never_default() -> Result<NamedModel> {
    let tree = BaseTree::binary(2)?;
    let space = fixed_time_model(&tree.space, &tree.filtration, tree.filtration.terminal())?;
    named("never", tree, space)
}

/// Conditional-CDF model on the fair three-step walk with
/// `N = 1 + (W_{k∧2} − W_{k∧1})/8` (so `N` first moves at step 2),
/// `e^{−Λ} = (1, 3/4, 1/2, 1/4)`, `Y = W` and the given `f`.
pub fn natural_coin(f: ScalarFn) -> Result<(NamedModel, NaturalModel)> {
    let tree = BaseTree::binary(3)?;
    let walk = walk_driver(&tree.space, &tree.filtration)?;
    let n = walk.map(|k, i, _| int(1) + (walk.at(k.min(2), i) - walk.at(k.min(1), i)) * rat(1, 8));
    let survival = CoxParams::deterministic(&[int(1), rat(3, 4), rat(1, 2), rat(1, 4)], tree.atoms()).survival;
    let params = NaturalParams { n, survival, y: walk.clone(), f };
    let model = natural_model_discrete(&tree.space, &tree.filtration, &params)?;
    let named = NamedModel { name: "natural", tree, walk, space: model.space.clone() };
    Ok((named, model))
}

/// Survival table from a path-dependent rule; the terminal column repeats the horizon.
fn tree_survival(tree: &BaseTree, rule: impl Fn(&[usize], usize) -> Rational) -> ProcessTable {
    let n = tree.steps();
    ProcessTable::from_fn(n + 2, tree.atoms(), |k, i| rule(&tree.paths()[i], k.min(n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_builds() {
        for m in [cox_interleaved(), cox_deterministic(), density_tilted(), honest_walk(2), deterministic_with_coin(), never_default()] {
            let m = m.unwrap();
            assert!(m.space.atoms() >= m.tree.atoms(), "{}", m.name);
        }
        natural_coin(ScalarFn::Linear { slope: rat(1, 2) }).unwrap();
        natural_coin(ScalarFn::Zero).unwrap();
    }
}
