use num::Zero;

use super::{Filtration, Rational};
use crate::error::{Error, Result};

/// A grid-index × atom table of rationals; column `k` holds the process at
/// grid index `k`, the last column is the terminal (`∞`) value.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessTable {
    columns: Vec<Vec<Rational>>,
}

impl ProcessTable {
    pub fn new(columns: Vec<Vec<Rational>>) -> Result<Self> {
        let atoms = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != atoms) {
            return Err(Error::Dimension("ragged process table".into()));
        }
        Ok(Self { columns })
    }

    pub fn zeros(columns: usize, atoms: usize) -> Self {
        Self::constant(columns, atoms, Rational::zero())
    }

    pub fn constant(columns: usize, atoms: usize, value: Rational) -> Self {
        Self { columns: vec![vec![value; atoms]; columns] }
    }

    pub fn from_fn(columns: usize, atoms: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        Self { columns: (0..columns).map(|k| (0..atoms).map(|i| f(k, i)).collect()).collect() }
    }

    /// A process that does not move: `X_k = x` at every column.
    pub fn frozen(columns: usize, x: &[Rational]) -> Self {
        Self { columns: vec![x.to_vec(); columns] }
    }

    /// Cumulative sums of `increments`, with `X_0 = increments[0]`.
    pub fn from_increments(increments: Vec<Vec<Rational>>) -> Result<Self> {
        let mut columns: Vec<Vec<Rational>> = Vec::with_capacity(increments.len());
        for (k, inc) in increments.into_iter().enumerate() {
            if k == 0 {
                columns.push(inc);
            } else {
                if inc.len() != columns[k - 1].len() {
                    return Err(Error::Dimension("ragged increments".into()));
                }
                let col = columns[k - 1].iter().zip(&inc).map(|(a, b)| a + b).collect();
                columns.push(col);
            }
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> usize {
        self.columns.len()
    }

    pub fn atoms(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, k: usize) -> &[Rational] {
        &self.columns[k]
    }

    pub fn column_mut(&mut self, k: usize) -> &mut Vec<Rational> {
        &mut self.columns[k]
    }

    pub fn at(&self, k: usize, atom: usize) -> &Rational {
        &self.columns[k][atom]
    }

    pub fn set(&mut self, k: usize, atom: usize, value: Rational) {
        self.columns[k][atom] = value;
    }

    pub fn last(&self) -> &[Rational] {
        &self.columns[self.columns.len() - 1]
    }

    /// `ΔX_k = X_k − X_{k−1}` for `k ≥ 1` and `Δ_0 X = X_0`.
    pub fn increment(&self, k: usize) -> Vec<Rational> {
        if k == 0 {
            return self.columns[0].clone();
        }
        self.columns[k].iter().zip(&self.columns[k - 1]).map(|(a, b)| a - b).collect()
    }

    pub fn map(&self, mut f: impl FnMut(usize, usize, &Rational) -> Rational) -> Self {
        Self {
            columns: self
                .columns
                .iter()
                .enumerate()
                .map(|(k, c)| c.iter().enumerate().map(|(i, v)| f(k, i, v)).collect())
                .collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if self.columns() != other.columns() || self.atoms() != other.atoms() {
            return Err(Error::Dimension(format!(
                "{}x{} table combined with {}x{}",
                self.columns(),
                self.atoms(),
                other.columns(),
                other.atoms()
            )));
        }
        Ok(Self {
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|_, _, v| v * c)
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.iter().all(Zero::is_zero))
    }

    /// `X_{T(ω)}(ω)` atom-wise.
    pub fn evaluate_at(&self, times: &[usize]) -> Vec<Rational> {
        times.iter().enumerate().map(|(i, &t)| self.columns[t][i].clone()).collect()
    }

    /// `X_{k ∧ T}`.
    pub fn stopped_at(&self, times: &[usize]) -> Self {
        self.map(|k, i, _| self.columns[k.min(times[i])][i].clone())
    }

    /// First column that is not measurable for the matching stage.
    pub fn first_non_adapted(&self, filtration: &Filtration) -> Option<usize> {
        (0..self.columns()).find(|&k| !filtration.stage(k).is_measurable(&self.columns[k]))
    }

    pub fn is_adapted(&self, filtration: &Filtration) -> bool {
        self.shape_matches(filtration) && self.first_non_adapted(filtration).is_none()
    }

    /// Column `k` measurable for stage `k − 1` (stage 0 for `k = 0`).
    pub fn is_predictable(&self, filtration: &Filtration) -> bool {
        self.shape_matches(filtration)
            && (0..self.columns()).all(|k| filtration.predictable_stage(k).is_measurable(&self.columns[k]))
    }

    pub fn shape_matches(&self, filtration: &Filtration) -> bool {
        self.columns() == filtration.columns() && self.atoms() == filtration.atoms()
    }

    pub(crate) fn check_shape(&self, filtration: &Filtration) -> Result<()> {
        if self.shape_matches(filtration) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "{}x{} table on a filtration with {} columns and {} atoms",
                self.columns(),
                self.atoms(),
                filtration.columns(),
                filtration.atoms()
            )))
        }
    }

    pub fn into_columns(self) -> Vec<Vec<Rational>> {
        self.columns
    }
}
