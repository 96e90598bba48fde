#![allow(dead_code)]

use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use enlargement::enlargement::{build_product_space, EnlargedSpace};
use enlargement::finite_prob::{cond_exp, rat, Filtration, ProcessTable, Rational};
use enlargement::models::{coordinate_drivers, cox_model, random_kernel, BaseTree, CoxParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tree with at least one branching node, so the model is not trivial.
pub fn random_tree(rng: &mut ChaCha8Rng, steps: usize, max_branches: usize) -> BaseTree {
    BaseTree::random(rng, steps, max_branches, 0.25).unwrap()
}

/// Random tree with a random default kernel; `τ = 0` never has mass.
pub fn random_model(rng: &mut ChaCha8Rng, steps: usize, max_branches: usize) -> (BaseTree, EnlargedSpace) {
    let tree = random_tree(rng, steps, max_branches);
    let kernel = random_kernel(rng, tree.atoms(), tree.filtration.columns(), false);
    let space = build_product_space(tree.space.clone(), tree.filtration.clone(), kernel).unwrap();
    (tree, space)
}

/// Coordinate drivers lifted to the product space.
pub fn lifted_drivers(tree: &BaseTree, space: &EnlargedSpace) -> Vec<ProcessTable> {
    coordinate_drivers(&tree.space, &tree.filtration).iter().map(|d| space.lift_process(d)).collect()
}

/// Cox survival `e^{−Λ}` with each step's factor drawn per stage-`k` block.
pub fn random_survival(rng: &mut ChaCha8Rng, tree: &BaseTree) -> ProcessTable {
    let f = &tree.filtration;
    let n = f.horizon();
    let factors = [rat(1, 1), rat(1, 2), rat(2, 3), rat(3, 4)];
    let mut columns = vec![vec![Rational::one(); tree.atoms()]];
    for k in 1..=n {
        let stage = f.stage(k);
        let draw: Vec<Rational> = (0..stage.block_count()).map(|_| factors[rng.gen_range(0..4)].clone()).collect();
        let prev = &columns[k - 1];
        let next = (0..tree.atoms()).map(|i| &prev[i] * &draw[stage.block_of(i)]).collect();
        columns.push(next);
    }
    columns.push(columns[n].clone());
    ProcessTable::new(columns).unwrap()
}

pub fn random_cox(rng: &mut ChaCha8Rng, steps: usize, max_branches: usize) -> (BaseTree, EnlargedSpace, ProcessTable) {
    let tree = random_tree(rng, steps, max_branches);
    let survival = random_survival(rng, &tree);
    let space = cox_model(&tree.space, &tree.filtration, &CoxParams::new(survival.clone())).unwrap();
    (tree, space, survival)
}

/// Integer-valued random variable in `-3..=3`.
pub fn random_variable(rng: &mut ChaCha8Rng, atoms: usize) -> Vec<Rational> {
    (0..atoms).map(|_| Rational::from_integer(rng.gen_range(-3i64..=3).into())).collect()
}

/// Random adapted process: each column is a random variable averaged on the stage.
pub fn random_adapted(rng: &mut ChaCha8Rng, f: &Filtration, w: &[Rational]) -> ProcessTable {
    let columns =
        (0..f.columns()).map(|k| cond_exp(&random_variable(rng, f.atoms()), f.stage(k), w).unwrap()).collect();
    ProcessTable::new(columns).unwrap()
}

/// Random martingale `E[ξ | stage k]`.
pub fn random_martingale(rng: &mut ChaCha8Rng, f: &Filtration, w: &[Rational]) -> ProcessTable {
    let xi = random_variable(rng, f.atoms());
    let columns = (0..f.columns()).map(|k| cond_exp(&xi, f.stage(k), w).unwrap()).collect();
    ProcessTable::new(columns).unwrap()
}

/// Strictly positive unit-mean density martingale.
pub fn random_density(rng: &mut ChaCha8Rng, f: &Filtration, w: &[Rational]) -> ProcessTable {
    let raw: Vec<Rational> = (0..f.atoms()).map(|_| Rational::from_integer(rng.gen_range(1i64..=5).into())).collect();
    let mean: Rational = raw.iter().zip(w).map(|(a, b)| a * b).sum();
    let xi: Vec<Rational> = raw.iter().map(|x| x / &mean).collect();
    let columns = (0..f.columns()).map(|k| cond_exp(&xi, f.stage(k), w).unwrap()).collect();
    ProcessTable::new(columns).unwrap()
}

/// Random predictable process with values in `{−1/2, −1/4, 0, 1/4, 1/2}`.
pub fn random_predictable(rng: &mut ChaCha8Rng, f: &Filtration) -> ProcessTable {
    let mut columns = vec![vec![Rational::zero(); f.atoms()]];
    for k in 1..f.columns() {
        let stage = f.predictable_stage(k);
        let draw: Vec<Rational> = (0..stage.block_count()).map(|_| rat(rng.gen_range(-2i64..=2), 4)).collect();
        columns.push((0..f.atoms()).map(|i| draw[stage.block_of(i)].clone()).collect());
    }
    ProcessTable::new(columns).unwrap()
}
