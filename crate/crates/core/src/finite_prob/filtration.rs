use num::Zero;

use super::{Partition, Rational};
use crate::error::{Error, Result};

/// A refining sequence of partitions indexed by a time grid `t_0 = 0 < … < t_n`
/// plus a terminal stage standing for `∞`.
///
/// Column indices run over `0..=n+1`; index `n + 1` is the terminal stage.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    grid: Vec<Rational>,
    stages: Vec<Partition>,
}

impl Filtration {
    /// `stages` holds one partition per grid point followed by the terminal partition.
    pub fn new(grid: Vec<Rational>, stages: Vec<Partition>) -> Result<Self> {
        if grid.is_empty() || !grid[0].is_zero() {
            return Err(Error::InvalidFiltration("grid must start at 0".into()));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFiltration("grid must be strictly increasing".into()));
        }
        if stages.len() != grid.len() + 1 {
            return Err(Error::InvalidFiltration(format!(
                "{} stages for a grid of {} points (terminal stage required)",
                stages.len(),
                grid.len()
            )));
        }
        let len = stages[0].len();
        if stages.iter().any(|s| s.len() != len) {
            return Err(Error::Dimension("stages on different spaces".into()));
        }
        if let Some(k) = stages.windows(2).position(|w| !w[1].refines(&w[0])) {
            return Err(Error::InvalidFiltration(format!("stage {} does not refine stage {k}", k + 1)));
        }
        Ok(Self { grid, stages })
    }

    /// Integer grid `0, 1, …, n`.
    pub fn integer_grid(n: usize) -> Vec<Rational> {
        (0..=n).map(|k| Rational::from_integer((k as i64).into())).collect()
    }

    /// The same partition at every stage.
    pub fn constant(grid: Vec<Rational>, partition: Partition) -> Result<Self> {
        let stages = vec![partition; grid.len() + 1];
        Self::new(grid, stages)
    }

    pub fn grid(&self) -> &[Rational] {
        &self.grid
    }

    /// Index `n` of the last finite grid point.
    pub fn horizon(&self) -> usize {
        self.grid.len() - 1
    }

    /// Index of the terminal (`∞`) stage.
    pub fn terminal(&self) -> usize {
        self.grid.len()
    }

    /// Number of columns of a process table on this filtration.
    pub fn columns(&self) -> usize {
        self.grid.len() + 1
    }

    pub fn atoms(&self) -> usize {
        self.stages[0].len()
    }

    pub fn stage(&self, k: usize) -> &Partition {
        &self.stages[k]
    }

    pub fn stages(&self) -> &[Partition] {
        &self.stages
    }

    /// Stage `k - 1`, with stage `-1` read as stage `0`.
    pub fn predictable_stage(&self, k: usize) -> &Partition {
        &self.stages[k.saturating_sub(1)]
    }

    /// Parent/child structure for step `k ≥ 1`: for each block of stage `k − 1`,
    /// the distinct stage-`k` blocks it contains, in atom order.
    pub fn children(&self, k: usize) -> Vec<Vec<usize>> {
        let parent = &self.stages[k - 1];
        let child = &self.stages[k];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); parent.block_count()];
        let mut seen = vec![false; child.block_count()];
        for atom in 0..self.atoms() {
            let c = child.block_of(atom);
            if !seen[c] {
                seen[c] = true;
                out[parent.block_of(atom)].push(c);
            }
        }
        out
    }
}

/// A random grid time with values in `{0, …, n, ∞}` (`∞` stored as `n + 1`).
///
/// Constructed through [`StoppingTime::new`] it is validated against a
/// filtration; [`StoppingTime::random`] builds an unvalidated random time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StoppingTime {
    values: Vec<usize>,
    terminal: usize,
}

impl StoppingTime {
    pub fn new(values: Vec<usize>, filtration: &Filtration) -> Result<Self> {
        let t = Self::random(values, filtration.terminal())?;
        t.check_stopping(filtration)?;
        Ok(t)
    }

    pub fn random(values: Vec<usize>, terminal: usize) -> Result<Self> {
        if let Some(v) = values.iter().find(|&&v| v > terminal) {
            return Err(Error::Dimension(format!("time index {v} beyond terminal {terminal}")));
        }
        Ok(Self { values, terminal })
    }

    pub fn constant(k: usize, filtration: &Filtration) -> Self {
        Self { values: vec![k.min(filtration.terminal()); filtration.atoms()], terminal: filtration.terminal() }
    }

    pub fn infinite(filtration: &Filtration) -> Self {
        Self::constant(filtration.terminal(), filtration)
    }

    /// Checks that `{T ≤ k}` is measurable for stage `k` at every `k`.
    pub fn check_stopping(&self, filtration: &Filtration) -> Result<()> {
        if self.values.len() != filtration.atoms() || self.terminal != filtration.terminal() {
            return Err(Error::Dimension("stopping time and filtration differ in shape".into()));
        }
        for k in 0..=filtration.terminal() {
            let event: Vec<bool> = self.values.iter().map(|&v| v <= k).collect();
            if !filtration.stage(k).is_event_measurable(&event) {
                return Err(Error::NotStoppingTime { index: k });
            }
        }
        Ok(())
    }

    pub fn is_stopping_time(&self, filtration: &Filtration) -> bool {
        self.check_stopping(filtration).is_ok()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> usize {
        self.values[atom]
    }

    pub fn terminal(&self) -> usize {
        self.terminal
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self, atom: usize) -> bool {
        self.values[atom] < self.terminal
    }

    pub fn max(&self, other: &StoppingTime) -> StoppingTime {
        self.zip(other, usize::max)
    }

    pub fn min(&self, other: &StoppingTime) -> StoppingTime {
        self.zip(other, usize::min)
    }

    /// `T ∨ k` for a constant `k`.
    pub fn max_const(&self, k: usize) -> StoppingTime {
        StoppingTime { values: self.values.iter().map(|&v| v.max(k)).collect(), terminal: self.terminal }
    }

    pub fn min_const(&self, k: usize) -> StoppingTime {
        StoppingTime { values: self.values.iter().map(|&v| v.min(k)).collect(), terminal: self.terminal }
    }

    fn zip(&self, other: &StoppingTime, f: impl Fn(usize, usize) -> usize) -> StoppingTime {
        StoppingTime {
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            terminal: self.terminal,
        }
    }

    /// Indicator of `{T ≤ k}`.
    pub fn le(&self, k: usize) -> Vec<bool> {
        self.values.iter().map(|&v| v <= k).collect()
    }
}
