use num::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::finite_prob::{int, Filtration, FiniteSpace, Partition, ProcessTable, Rational};

/// A finite base model: atoms are root-to-leaf paths of a tree, stage `k`
/// groups paths by their first `k` moves and the terminal stage equals stage `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseTree {
    pub space: FiniteSpace,
    pub filtration: Filtration,
    paths: Vec<Vec<usize>>,
}

impl BaseTree {
    /// Builds a tree from explicit paths of length `n` and their weights.
    pub fn from_paths(paths: Vec<Vec<usize>>, weights: Vec<Rational>) -> Result<Self> {
        let n = paths.first().map_or(0, Vec::len);
        if paths.iter().any(|p| p.len() != n) {
            return Err(Error::InvalidSpace("paths of different lengths".into()));
        }
        let labels = paths.iter().map(|p| path_label(p)).collect();
        let space = FiniteSpace::new(labels, weights)?;
        let mut stages: Vec<Partition> =
            (0..=n).map(|k| Partition::from_keys(paths.iter().map(|p| p[..k].to_vec()))).collect();
        stages.push(stages[n].clone());
        let filtration = Filtration::new(Filtration::integer_grid(n), stages)?;
        Ok(Self { space, filtration, paths })
    }

    /// Every node at step `k` has `branches[k−1]` equally likely children.
    pub fn uniform(branches: &[usize]) -> Result<Self> {
        if branches.contains(&0) {
            return Err(Error::InvalidSpace("a node needs at least one child".into()));
        }
        let mut paths: Vec<Vec<usize>> = vec![vec![]];
        for &b in branches {
            paths = paths.into_iter().flat_map(|p| (0..b).map(move |c| [p.clone(), vec![c]].concat())).collect();
        }
        let total: usize = branches.iter().product();
        let weights = vec![Rational::new(1.into(), total.into()); paths.len()];
        Self::from_paths(paths, weights)
    }

    /// The fair binary tree with `n` steps.
    pub fn binary(n: usize) -> Result<Self> {
        Self::uniform(&vec![2; n])
    }

    /// Random tree: each node draws `1..=max_branches` children (two or more
    /// with probability `1 − single_child_probability`) and child weights
    /// proportional to integers in `1..=4`.
    pub fn random<R: Rng>(rng: &mut R, steps: usize, max_branches: usize, single_child_probability: f64) -> Result<Self> {
        if max_branches == 0 {
            return Err(Error::InvalidSpace("max_branches must be positive".into()));
        }
        let mut nodes: Vec<(Vec<usize>, Rational)> = vec![(vec![], Rational::one())];
        for _ in 0..steps {
            let mut next = Vec::new();
            for (path, weight) in nodes {
                let branches = if max_branches == 1 || rng.gen_bool(single_child_probability) {
                    1
                } else {
                    rng.gen_range(2..=max_branches)
                };
                let raw: Vec<i64> = (0..branches).map(|_| rng.gen_range(1..=4)).collect();
                let total: i64 = raw.iter().sum();
                for (c, r) in raw.into_iter().enumerate() {
                    let mut child = path.clone();
                    child.push(c);
                    next.push((child, &weight * Rational::new(r.into(), total.into())));
                }
            }
            nodes = next;
        }
        let (paths, weights) = nodes.into_iter().unzip();
        Self::from_paths(paths, weights)
    }

    pub fn steps(&self) -> usize {
        self.filtration.horizon()
    }

    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn atoms(&self) -> usize {
        self.paths.len()
    }

    /// `X_k = Σ_{j≤k} step(j, move_j)`, with `X_∞ = X_n`.
    pub fn path_process(&self, step: impl Fn(usize, usize) -> Rational) -> ProcessTable {
        let n = self.steps();
        ProcessTable::from_fn(n + 2, self.atoms(), |k, i| {
            (1..=k.min(n)).map(|j| step(j, self.paths[i][j - 1])).fold(Rational::zero(), |a, b| a + b)
        })
    }
}

fn path_label(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".into();
    }
    path.iter()
        .map(|&c| match c {
            0 => 'u',
            1 => 'd',
            c => char::from_digit(c as u32 % 36, 36).unwrap_or('?'),
        })
        .collect()
}

/// `P(c | parent)` for every stage-`k` block `c`.
fn child_probabilities(space: &FiniteSpace, f: &Filtration, k: usize) -> Vec<Rational> {
    let (parent, child) = (f.stage(k - 1), f.stage(k));
    let mut pw = vec![Rational::zero(); parent.block_count()];
    let mut cw = vec![Rational::zero(); child.block_count()];
    let mut parent_of = vec![0; child.block_count()];
    for (i, w) in space.weights().iter().enumerate() {
        pw[parent.block_of(i)] += w;
        cw[child.block_of(i)] += w;
        parent_of[child.block_of(i)] = parent.block_of(i);
    }
    cw.iter().zip(&parent_of).map(|(c, &p)| c / &pw[p]).collect()
}

/// Coordinate drivers: at each node with children `c_0, …, c_{m−1}`, driver
/// `i < m − 1` moves by `1_{c_i} − P(c_i | node)` orthogonalized against the
/// moves of drivers `0..i` under the conditional law, so `⟨W_i, W_j⟩ = 0` for
/// `i ≠ j` and the span at every node is unchanged. Their count is the largest
/// branching number minus one.
pub fn coordinate_drivers(space: &FiniteSpace, f: &Filtration) -> Vec<ProcessTable> {
    let columns = f.columns();
    let width = (1..columns).flat_map(|k| f.children(k)).map(|c| c.len()).max().unwrap_or(1);
    let mut increments = vec![vec![vec![Rational::zero(); space.len()]; columns]; width.saturating_sub(1)];
    for k in 1..columns {
        let probs = child_probabilities(space, f, k);
        let children = f.children(k);
        // Moves per node, indexed by driver then by child position.
        let moves: Vec<Vec<Vec<Rational>>> = children.iter().map(|siblings| node_moves(siblings, &probs)).collect();
        for i in 0..space.len() {
            let node = f.stage(k - 1).block_of(i);
            let own = f.stage(k).block_of(i);
            let position = children[node].iter().position(|&c| c == own).expect("child of its parent");
            for (d, m) in moves[node].iter().enumerate() {
                increments[d][k][i] = m[position].clone();
            }
        }
    }
    increments.into_iter().map(|inc| ProcessTable::from_increments(inc).expect("rectangular")).collect()
}

/// Gram–Schmidt on `1_{c_d} − p_d`, `d < m − 1`, in `L²(p)` over the children.
fn node_moves(siblings: &[usize], probs: &[Rational]) -> Vec<Vec<Rational>> {
    let p: Vec<&Rational> = siblings.iter().map(|&c| &probs[c]).collect();
    let inner = |u: &[Rational], v: &[Rational]| -> Rational {
        u.iter().zip(v).zip(&p).fold(Rational::zero(), |acc, ((a, b), w)| acc + a * b * *w)
    };
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for d in 0..siblings.len().saturating_sub(1) {
        let mut v: Vec<Rational> =
            (0..siblings.len()).map(|c| if c == d { Rational::one() } else { Rational::zero() } - p[d]).collect();
        for u in &out {
            let coef = inner(&v, u) / inner(u, u);
            for (x, y) in v.iter_mut().zip(u) {
                *x -= &coef * y;
            }
        }
        out.push(v);
    }
    out
}

/// Binary walk: at a two-child node the move is `2(1_{c_0} − p)` (so `±1`
/// for fair coins); single-child nodes do not move.
pub fn walk_driver(space: &FiniteSpace, f: &Filtration) -> Result<ProcessTable> {
    let columns = f.columns();
    let mut increments = vec![vec![Rational::zero(); space.len()]; columns];
    for k in 1..columns {
        let probs = child_probabilities(space, f, k);
        let children = f.children(k);
        for i in 0..space.len() {
            let siblings = &children[f.stage(k - 1).block_of(i)];
            match siblings.len() {
                1 => {}
                2 => {
                    let first = siblings[0];
                    let hit = if f.stage(k).block_of(i) == first { Rational::one() } else { Rational::zero() };
                    increments[k][i] = int(2) * (hit - &probs[first]);
                }
                m => return Err(Error::InvalidParameters(format!("walk driver needs at most 2 children, found {m}"))),
            }
        }
    }
    ProcessTable::from_increments(increments)
}
