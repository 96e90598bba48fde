use num::Zero;

use super::linalg::{nullspace, rank, solve, Matrix};
use crate::error::{Error, Result};
use crate::finite_prob::{martingale_defect, Filtration, ProcessTable, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MrpVerdict {
    Spanning,
    Gap,
}

/// Per step: dimension of the mean-zero increments and of the driver span,
/// summed over the stage-`(k−1)` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepDimensions {
    pub step: usize,
    pub martingale_dim: usize,
    pub span_dim: usize,
}

/// A non-null martingale, zero at time 0, orthogonal to every driver.
#[derive(Clone, Debug, PartialEq)]
pub struct GapWitness {
    pub step: usize,
    pub block: usize,
    pub martingale: ProcessTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MrpCertificate {
    pub verdict: MrpVerdict,
    pub dimensions: Vec<StepDimensions>,
    pub witness: Option<GapWitness>,
}

impl MrpCertificate {
    pub fn is_spanning(&self) -> bool {
        self.verdict == MrpVerdict::Spanning
    }
}

/// A stage-`(k−1)` block and its stage-`k` children.
pub(crate) struct Node {
    pub block: usize,
    pub children: Vec<Vec<usize>>,
    pub probabilities: Vec<Rational>,
}

pub(crate) fn nodes(f: &Filtration, w: &[Rational], k: usize) -> Vec<Node> {
    let child_stage = f.stage(k);
    f.stage(k - 1)
        .blocks()
        .into_iter()
        .enumerate()
        .map(|(block, atoms)| {
            let mut keys: Vec<usize> = Vec::new();
            let mut children: Vec<Vec<usize>> = Vec::new();
            for a in atoms {
                let key = child_stage.block_of(a);
                match keys.iter().position(|&k| k == key) {
                    Some(c) => children[c].push(a),
                    None => {
                        keys.push(key);
                        children.push(vec![a]);
                    }
                }
            }
            let probabilities = children.iter().map(|c| c.iter().map(|&a| w[a].clone()).sum()).collect();
            Node { block, children, probabilities }
        })
        .collect()
}

/// Child-by-driver increment matrix at a node.
fn increment_matrix(node: &Node, increments: &[Vec<Rational>]) -> Matrix {
    node.children.iter().map(|c| increments.iter().map(|inc| inc[c[0]].clone()).collect()).collect()
}

fn require_martingales(drivers: &[ProcessTable], f: &Filtration, w: &[Rational]) -> Result<()> {
    for d in drivers {
        if let Some(step) = martingale_defect(d, f, w)? {
            return Err(Error::NotMartingale { step });
        }
    }
    Ok(())
}

/// Node-wise rank test of the martingale representation property: at every
/// node the driver increments must span the `(children − 1)`-dimensional space
/// of mean-zero increments. A gap comes with a witness martingale built from a
/// vector `v` with `Σ p_c v_c = 0` and `Σ p_c v_c ΔW_i(c) = 0` for every driver.
pub fn mrp_check(weights: &[Rational], f: &Filtration, drivers: &[ProcessTable]) -> Result<MrpCertificate> {
    if weights.len() != f.atoms() {
        return Err(Error::Dimension("weights and filtration differ in length".into()));
    }
    require_martingales(drivers, f, weights)?;
    let mut dimensions = Vec::new();
    let mut witness = None;
    for k in 1..f.columns() {
        let increments: Vec<Vec<Rational>> = drivers.iter().map(|d| d.increment(k)).collect();
        let mut dims = StepDimensions { step: k, martingale_dim: 0, span_dim: 0 };
        for node in nodes(f, weights, k) {
            let m = node.children.len();
            let d = increment_matrix(&node, &increments);
            let r = if drivers.is_empty() { 0 } else { rank(&d) };
            dims.martingale_dim += m - 1;
            dims.span_dim += r;
            if r < m - 1 && witness.is_none() {
                witness = Some(gap_witness(f, k, &node, &d, drivers.len()));
            }
        }
        dimensions.push(dims);
    }
    let verdict = if witness.is_some() { MrpVerdict::Gap } else { MrpVerdict::Spanning };
    Ok(MrpCertificate { verdict, dimensions, witness })
}

fn gap_witness(f: &Filtration, k: usize, node: &Node, d: &Matrix, driver_count: usize) -> GapWitness {
    let m = node.children.len();
    let mut constraints: Matrix = vec![node.probabilities.clone()];
    for i in 0..driver_count {
        constraints.push((0..m).map(|c| &node.probabilities[c] * &d[c][i]).collect());
    }
    let v = nullspace(&constraints, m).into_iter().next().expect("rank deficit leaves a null vector");
    let mut increments = vec![vec![Rational::zero(); f.atoms()]; f.columns()];
    for (c, atoms) in node.children.iter().enumerate() {
        for &a in atoms {
            increments[k][a] = v[c].clone();
        }
    }
    let martingale = ProcessTable::from_increments(increments).expect("well-formed increments");
    GapWitness { step: k, block: node.block, martingale }
}

/// Integrands `J_k` (one table per driver, predictable) with
/// `ΔY_k = Σ_i J^i_k ΔW^i_k` at every step, for a martingale `Y`.
pub(crate) fn solve_integrands(
    y: &ProcessTable,
    weights: &[Rational],
    f: &Filtration,
    drivers: &[ProcessTable],
    include: impl Fn(usize, usize) -> bool,
) -> Result<Vec<ProcessTable>> {
    let mut out = vec![ProcessTable::zeros(f.columns(), f.atoms()); drivers.len()];
    for k in 1..f.columns() {
        let target = y.increment(k);
        let increments: Vec<Vec<Rational>> = drivers.iter().map(|d| d.increment(k)).collect();
        for node in nodes(f, weights, k) {
            let first = node.children[0][0];
            if !include(k, first) {
                continue;
            }
            let b: Vec<Rational> = node.children.iter().map(|c| target[c[0]].clone()).collect();
            if b.iter().all(Zero::is_zero) {
                continue;
            }
            let d = increment_matrix(&node, &increments);
            let j = solve(&d, &b, drivers.len()).ok_or(Error::RepresentationGap { step: k, block: node.block })?;
            for atoms in &node.children {
                for &a in atoms {
                    for (i, value) in j.iter().enumerate() {
                        out[i].set(k, a, value.clone());
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::{is_martingale, rat};
    use crate::models::{coordinate_drivers, walk_driver, BaseTree};

    #[test]
    fn binary_walk_spans() {
        let tree = BaseTree::binary(3).unwrap();
        let w = walk_driver(&tree.space, &tree.filtration).unwrap();
        let cert = mrp_check(tree.space.weights(), &tree.filtration, &[w]).unwrap();
        assert!(cert.is_spanning());
        assert_eq!(cert.dimensions[0], StepDimensions { step: 1, martingale_dim: 1, span_dim: 1 });
    }

    #[test]
    fn ternary_node_with_one_driver_has_a_gap() {
        let tree = BaseTree::uniform(&[3]).unwrap();
        let drivers = coordinate_drivers(&tree.space, &tree.filtration);
        let single = &drivers[..1];
        let cert = mrp_check(tree.space.weights(), &tree.filtration, single).unwrap();
        assert_eq!(cert.verdict, MrpVerdict::Gap);
        let n = cert.witness.unwrap().martingale;
        assert!(!n.is_zero());
        assert!(n.column(0).iter().all(Zero::is_zero));
        assert!(is_martingale(&n, &tree.filtration, tree.space.weights()).unwrap());
        let product = n.map(|k, i, _| {
            let mut acc = Rational::zero();
            for j in 1..=k {
                acc += (n.at(j, i) - n.at(j - 1, i)) * (single[0].at(j, i) - single[0].at(j - 1, i));
            }
            acc
        });
        assert!(is_martingale(&product, &tree.filtration, tree.space.weights()).unwrap());
        assert!(mrp_check(tree.space.weights(), &tree.filtration, &drivers).unwrap().is_spanning());
    }

    #[test]
    fn solved_integrands_rebuild_a_martingale() {
        let tree = BaseTree::uniform(&[3, 2]).unwrap();
        let drivers = coordinate_drivers(&tree.space, &tree.filtration);
        let y = tree.path_process(|_, _| rat(0, 1));
        let target = crate::finite_prob::ProcessTable::from_fn(y.columns(), y.atoms(), |k, i| {
            let terminal: Vec<Rational> = (0..tree.atoms()).map(|a| rat(a as i64 * a as i64, 1)).collect();
            crate::finite_prob::cond_exp(&terminal, tree.filtration.stage(k), tree.space.weights()).unwrap()[i].clone()
        });
        let j = solve_integrands(&target, tree.space.weights(), &tree.filtration, &drivers, |_, _| true).unwrap();
        let mut rebuilt = ProcessTable::constant(y.columns(), y.atoms(), target.at(0, 0).clone());
        for (ji, d) in j.iter().zip(&drivers) {
            rebuilt = rebuilt.add(&crate::finite_prob::stochastic_integral(ji, d).unwrap()).unwrap();
        }
        assert_eq!(rebuilt, target);
        assert!(j.iter().all(|t| t.is_predictable(&tree.filtration)));
    }

    #[test]
    fn non_martingale_driver_is_an_error() {
        let tree = BaseTree::binary(1).unwrap();
        let bad = tree.path_process(|_, c| rat(c as i64, 1));
        assert!(matches!(
            mrp_check(tree.space.weights(), &tree.filtration, &[bad]),
            Err(Error::NotMartingale { .. })
        ));
    }
}
