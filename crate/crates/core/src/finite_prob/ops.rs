use num::{Signed, Zero};

use super::{Filtration, Partition, ProcessTable, Rational, StoppingTime};
use crate::error::{Error, Result};

/// Per-block sums of `w·x` and of `w`.
fn block_sums(x: &[Rational], p: &Partition, w: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut num = vec![Rational::zero(); p.block_count()];
    let mut den = vec![Rational::zero(); p.block_count()];
    for (atom, &b) in p.assignment().iter().enumerate() {
        if !x[atom].is_zero() {
            num[b] += &x[atom] * &w[atom];
        }
        den[b] += &w[atom];
    }
    (num, den)
}

fn check_lengths(x: &[Rational], p: &Partition, w: &[Rational]) -> Result<()> {
    if x.len() != p.len() || w.len() != p.len() {
        return Err(Error::Dimension(format!(
            "variable of length {}, partition of {} atoms, weights of length {}",
            x.len(),
            p.len(),
            w.len()
        )));
    }
    Ok(())
}

fn check_weights(w: &[Rational]) -> Result<()> {
    match w.iter().position(|v| !v.is_positive()) {
        Some(i) => Err(Error::NonPositive(format!("weight {} at atom {i}", w[i]))),
        None => Ok(()),
    }
}

/// Conditional expectation of `x` given the σ-algebra `p` under weights `w`:
/// the `w`-weighted block average, repeated on every atom of the block.
pub fn cond_exp(x: &[Rational], p: &Partition, w: &[Rational]) -> Result<Vec<Rational>> {
    check_lengths(x, p, w)?;
    check_weights(w)?;
    let (num, den) = block_sums(x, p, w);
    let means: Vec<Rational> = num.iter().zip(&den).map(|(n, d)| n / d).collect();
    Ok(p.assignment().iter().map(|&b| means[b].clone()).collect())
}

fn require_adapted(x: &ProcessTable, f: &Filtration) -> Result<()> {
    x.check_shape(f)?;
    match x.first_non_adapted(f) {
        Some(column) => Err(Error::NotAdapted { column }),
        None => Ok(()),
    }
}

/// First step `k ≥ 1` (terminal step included) where `E[ΔX_k | stage k−1] ≠ 0`.
pub fn martingale_defect(x: &ProcessTable, f: &Filtration, w: &[Rational]) -> Result<Option<usize>> {
    require_adapted(x, f)?;
    check_weights(w)?;
    if w.len() != f.atoms() {
        return Err(Error::Dimension("weights and filtration differ in length".into()));
    }
    Ok(StageBlocks::new(f, w).martingale_defect(x, f))
}

/// Exact martingale test; a non-adapted input is an error, not `false`.
pub fn is_martingale(x: &ProcessTable, f: &Filtration, w: &[Rational]) -> Result<bool> {
    Ok(martingale_defect(x, f, w)?.is_none())
}

/// `X = M − A` with `M` a martingale, `A` predictable and `A_0 = 0`.
pub fn doob_decomposition(x: &ProcessTable, f: &Filtration, w: &[Rational]) -> Result<(ProcessTable, ProcessTable)> {
    require_adapted(x, f)?;
    check_weights(w)?;
    let mut incs = vec![vec![Rational::zero(); f.atoms()]];
    for k in 1..f.columns() {
        let dx = x.increment(k);
        incs.push(cond_exp(&dx, f.stage(k - 1), w)?.into_iter().map(|v| -v).collect());
    }
    let a = ProcessTable::from_increments(incs)?;
    let m = x.add(&a)?;
    Ok((m, a))
}

/// Predictable bracket `Δ⟨U,V⟩_k = E[ΔU_k ΔV_k | stage k−1]`, with `⟨U,V⟩_0 = 0`.
pub fn predictable_bracket(u: &ProcessTable, v: &ProcessTable, f: &Filtration, w: &[Rational]) -> Result<ProcessTable> {
    require_adapted(u, f)?;
    require_adapted(v, f)?;
    check_weights(w)?;
    if w.len() != f.atoms() {
        return Err(Error::Dimension("weights and filtration differ in length".into()));
    }
    let blocks = StageBlocks::new(f, w);
    let means = blocks.bracket_means(u, v, f);
    let mut incs = vec![vec![Rational::zero(); f.atoms()]];
    for (k, m) in means.into_iter().enumerate().skip(1) {
        incs.push(f.stage(k - 1).assignment().iter().map(|&b| m[b].clone()).collect());
    }
    ProcessTable::from_increments(incs)
}

/// Block weights and representatives of every stage of a filtration, so that
/// stage-measurable quantities can be averaged block by block.
#[derive(Clone, Debug)]
pub(crate) struct StageBlocks {
    /// `weight[k][b]`: mass of block `b` of stage `k`.
    weight: Vec<Vec<Rational>>,
    /// `first[k][b]`: some atom of block `b` of stage `k`.
    first: Vec<Vec<usize>>,
}

impl StageBlocks {
    pub(crate) fn new(f: &Filtration, w: &[Rational]) -> Self {
        let mut weight = Vec::with_capacity(f.columns());
        let mut first = Vec::with_capacity(f.columns());
        for stage in f.stages() {
            let mut wk = vec![Rational::zero(); stage.block_count()];
            let mut fk = vec![usize::MAX; stage.block_count()];
            for (atom, &b) in stage.assignment().iter().enumerate() {
                wk[b] += &w[atom];
                if fk[b] == usize::MAX {
                    fk[b] = atom;
                }
            }
            weight.push(wk);
            first.push(fk);
        }
        Self { weight, first }
    }

    /// `E[ΔU_k ΔV_k | stage k−1]` per block of stage `k − 1`, for adapted `U`
    /// and `V`; entry 0 is empty.
    pub(crate) fn bracket_means(&self, u: &ProcessTable, v: &ProcessTable, f: &Filtration) -> Vec<Vec<Rational>> {
        let mut out = vec![Vec::new()];
        for k in 1..f.columns() {
            let coarse = f.stage(k - 1);
            let mut num = vec![Rational::zero(); coarse.block_count()];
            for (b, &i) in self.first[k].iter().enumerate() {
                let du = u.at(k, i) - u.at(k - 1, i);
                if du.is_zero() {
                    continue;
                }
                let dv = v.at(k, i) - v.at(k - 1, i);
                if dv.is_zero() {
                    continue;
                }
                num[coarse.block_of(i)] += du * dv * &self.weight[k][b];
            }
            out.push(self.means(num, k - 1));
        }
        out
    }

    /// First step where an adapted `X` has `E[ΔX_k | stage k−1] ≠ 0`.
    pub(crate) fn martingale_defect(&self, x: &ProcessTable, f: &Filtration) -> Option<usize> {
        (1..f.columns()).find(|&k| {
            let coarse = f.stage(k - 1);
            let mut num = vec![Rational::zero(); coarse.block_count()];
            for (b, &i) in self.first[k].iter().enumerate() {
                let dx = x.at(k, i) - x.at(k - 1, i);
                if !dx.is_zero() {
                    num[coarse.block_of(i)] += dx * &self.weight[k][b];
                }
            }
            num.iter().any(|v| !v.is_zero())
        })
    }

    fn means(&self, num: Vec<Rational>, k: usize) -> Vec<Rational> {
        num.into_iter()
            .zip(&self.weight[k])
            .map(|(n, d)| if n.is_zero() { n } else { n / d })
            .collect()
    }
}

/// Predictable and optional dual projections of `1_{τ>0} 1_{[τ,∞)}`.
///
/// `ΔA_k = E[1_{τ=k} | stage k−1]`, `ΔÂ_k = E[1_{τ=k} | stage k]` for
/// `1 ≤ k ≤ n`; both vanish at `k = 0` and across the terminal step.
pub fn dual_projections(tau: &[usize], f: &Filtration, w: &[Rational]) -> Result<(ProcessTable, ProcessTable)> {
    if tau.len() != f.atoms() {
        return Err(Error::Dimension("default time and filtration differ in length".into()));
    }
    if let Some(v) = tau.iter().find(|&&v| v > f.terminal()) {
        return Err(Error::Dimension(format!("default time index {v} beyond terminal")));
    }
    let zero = vec![Rational::zero(); f.atoms()];
    let mut da = vec![zero.clone()];
    let mut dah = vec![zero.clone()];
    for k in 1..=f.horizon() {
        let jump: Vec<Rational> =
            tau.iter().map(|&t| if t == k { Rational::from_integer(1.into()) } else { Rational::zero() }).collect();
        da.push(cond_exp(&jump, f.stage(k - 1), w)?);
        dah.push(cond_exp(&jump, f.stage(k), w)?);
    }
    da.push(zero.clone());
    dah.push(zero);
    Ok((ProcessTable::from_increments(da)?, ProcessTable::from_increments(dah)?))
}

/// Which stopped σ-algebra [`sigma_at`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaKind {
    /// `F_T`: evaluations of adapted processes at `T`.
    At,
    /// `F_{T−}`: evaluations of predictable processes at `T`.
    Before,
}

/// `F_T` or `F_{T−}` for a stopping time `T`; on `{T = ∞}` both carry the
/// terminal stage, and `F_{0−}` is read as stage 0.
pub fn sigma_at(t: &StoppingTime, f: &Filtration, kind: SigmaKind) -> Result<Partition> {
    t.check_stopping(f)?;
    Ok(sigma_at_unchecked(t.values(), f, kind))
}

/// [`sigma_at`] for an arbitrary random time, generated by the same process
/// evaluations.
pub(crate) fn sigma_at_unchecked(t: &[usize], f: &Filtration, kind: SigmaKind) -> Partition {
    let terminal = f.terminal();
    Partition::from_keys(t.iter().enumerate().map(|(atom, &j)| {
        let stage = match kind {
            SigmaKind::At => j,
            SigmaKind::Before if j == terminal => j,
            SigmaKind::Before => j.saturating_sub(1),
        };
        (j, f.stage(stage).block_of(atom))
    }))
}

/// Finite-sum integral `Σ_{1≤j≤k} K_j ΔX_j`, zero at column 0.
pub fn stochastic_integral(k: &ProcessTable, x: &ProcessTable) -> Result<ProcessTable> {
    if k.columns() != x.columns() || k.atoms() != x.atoms() {
        return Err(Error::Dimension("integrand and integrator differ in shape".into()));
    }
    let mut incs = vec![vec![Rational::zero(); x.atoms()]];
    for j in 1..x.columns() {
        incs.push(k.column(j).iter().zip(x.increment(j)).map(|(a, b)| a * b).collect());
    }
    ProcessTable::from_increments(incs)
}
