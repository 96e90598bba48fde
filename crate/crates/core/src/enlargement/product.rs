use std::sync::OnceLock;

use num::{One, Signed, Zero};

use crate::calculus::AzemaCache;
use crate::error::{Error, Result};
use crate::finite_prob::{cond_exp, FiniteSpace, Filtration, Partition, ProcessTable, Rational, StoppingTime};

/// Conditional law of the default time given the terminal base information:
/// one row per base atom, one column per time index `0..=n` plus `∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct DefaultKernel {
    rows: Vec<Vec<Rational>>,
}

impl DefaultKernel {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let columns = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != columns {
                return Err(Error::InvalidKernel(format!("row {i} has {} entries, expected {columns}", row.len())));
            }
            if row.iter().any(Signed::is_negative) {
                return Err(Error::InvalidKernel(format!("row {i} has a negative entry")));
            }
            if row.iter().all(Zero::is_zero) {
                return Err(Error::InvalidKernel(format!("row {i} is all zero")));
            }
            let total: Rational = row.iter().sum();
            if !total.is_one() {
                return Err(Error::InvalidKernel(format!("row {i} sums to {total}")));
            }
        }
        Ok(Self { rows })
    }

    /// Point mass at `times[ω]` for every base atom.
    pub fn point_mass(times: &[usize], columns: usize) -> Result<Self> {
        let rows = times
            .iter()
            .map(|&t| {
                if t >= columns {
                    return Err(Error::InvalidKernel(format!("time index {t} beyond terminal")));
                }
                let mut row = vec![Rational::zero(); columns];
                row[t] = Rational::one();
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn row(&self, atom: usize) -> &[Rational] {
        &self.rows[atom]
    }

    pub fn columns(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// The product space `{0,…,n,∞} × Ω` carrying the default time `τ`, the lifted
/// base filtration `F̂` and the progressive enlargement `G`.
#[derive(Clone, Debug)]
pub struct EnlargedSpace {
    base: FiniteSpace,
    base_filtration: Filtration,
    kernel: DefaultKernel,
    product: FiniteSpace,
    origin: Vec<usize>,
    tau: StoppingTime,
    lifted: Filtration,
    g: Filtration,
    /// Computed on first use by the drift formulas.
    pub(crate) azema: OnceLock<AzemaCache>,
}

/// Builds the product space with weights `w(ω)·p(k|ω)`, dropping zero pairs.
pub fn build_product_space(base: FiniteSpace, filtration: Filtration, kernel: DefaultKernel) -> Result<EnlargedSpace> {
    if kernel.rows().len() != base.len() || filtration.atoms() != base.len() {
        return Err(Error::Dimension(format!(
            "kernel with {} rows and filtration on {} atoms for a base of {} atoms",
            kernel.rows().len(),
            filtration.atoms(),
            base.len()
        )));
    }
    if kernel.columns() != filtration.columns() {
        return Err(Error::InvalidKernel(format!(
            "kernel has {} columns, the grid needs {}",
            kernel.columns(),
            filtration.columns()
        )));
    }
    let terminal = filtration.terminal();
    let mut labels = Vec::new();
    let mut weights = Vec::new();
    let mut origin = Vec::new();
    let mut tau = Vec::new();
    for (omega, row) in kernel.rows().iter().enumerate() {
        for (k, p) in row.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let time = if k == terminal { "inf".to_string() } else { k.to_string() };
            labels.push(format!("{}@{}", base.label(omega), time));
            weights.push(base.weight(omega) * p);
            origin.push(omega);
            tau.push(k);
        }
    }
    let product = FiniteSpace::new(labels, weights)?;
    let lifted_stages: Vec<Partition> = filtration
        .stages()
        .iter()
        .map(|s| Partition::from_keys(origin.iter().map(|&o| s.block_of(o))))
        .collect();
    let lifted = Filtration::new(filtration.grid().to_vec(), lifted_stages)?;
    let g_stages: Vec<Partition> = (0..filtration.columns())
        .map(|k| {
            let stage = lifted.stage(k);
            Partition::from_keys(tau.iter().enumerate().map(|(atom, &t)| {
                let known = if k == terminal || t <= k { Some(t) } else { None };
                (stage.block_of(atom), known)
            }))
        })
        .collect();
    let g = Filtration::new(filtration.grid().to_vec(), g_stages)?;
    let tau = StoppingTime::new(tau, &g)?;
    Ok(EnlargedSpace { base, base_filtration: filtration, kernel, product, origin, tau, lifted, g, azema: OnceLock::new() })
}

impl EnlargedSpace {
    pub fn base(&self) -> &FiniteSpace {
        &self.base
    }

    pub fn base_filtration(&self) -> &Filtration {
        &self.base_filtration
    }

    pub fn kernel(&self) -> &DefaultKernel {
        &self.kernel
    }

    pub fn product(&self) -> &FiniteSpace {
        &self.product
    }

    /// Product-space weights (the reference measure `Q`).
    pub fn weights(&self) -> &[Rational] {
        self.product.weights()
    }

    /// Base atom under each product atom.
    pub fn origin(&self) -> &[usize] {
        &self.origin
    }

    pub fn tau(&self) -> &StoppingTime {
        &self.tau
    }

    /// The lifted base filtration `F̂`.
    pub fn lifted(&self) -> &Filtration {
        &self.lifted
    }

    /// The progressive enlargement `G`.
    pub fn g(&self) -> &Filtration {
        &self.g
    }

    pub fn atoms(&self) -> usize {
        self.origin.len()
    }

    pub fn columns(&self) -> usize {
        self.g.columns()
    }

    pub fn horizon(&self) -> usize {
        self.g.horizon()
    }

    pub fn terminal(&self) -> usize {
        self.g.terminal()
    }

    pub fn lift_variable(&self, x: &[Rational]) -> Vec<Rational> {
        self.origin.iter().map(|&o| x[o].clone()).collect()
    }

    pub fn lift_process(&self, x: &ProcessTable) -> ProcessTable {
        ProcessTable::from_fn(x.columns(), self.atoms(), |k, i| x.at(k, self.origin[i]).clone())
    }

    /// `{τ > t_k}` for finite `k`; at the terminal column, `{τ = ∞}`.
    pub fn alive(&self, k: usize) -> Vec<bool> {
        let terminal = self.terminal();
        self.tau.values().iter().map(|&t| if k == terminal { t == terminal } else { t > k }).collect()
    }

    /// Default indicator `H_k = 1_{τ ≤ t_k}` (so `H_∞ = 1_{τ<∞}`).
    pub fn default_indicator(&self) -> ProcessTable {
        ProcessTable::from_fn(self.columns(), self.atoms(), |k, i| {
            let t = self.tau.value(i);
            let dead = if k == self.terminal() { t < k } else { t <= k };
            if dead {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    /// `{0 < τ < ∞}`.
    pub fn finite_positive_default(&self) -> Vec<bool> {
        self.tau.values().iter().map(|&t| t > 0 && t < self.terminal()).collect()
    }

    /// Generating basis of `F̂`-martingales: `E[1_B | F̂_k]` for the terminal base blocks `B`.
    pub fn f_martingale_basis(&self) -> Result<Vec<ProcessTable>> {
        let f = &self.base_filtration;
        let blocks = f.stage(f.terminal()).blocks();
        let mut out = Vec::with_capacity(blocks.len());
        for block in blocks {
            let mut indicator = vec![Rational::zero(); self.base.len()];
            for a in block {
                indicator[a] = Rational::one();
            }
            let columns = (0..f.columns())
                .map(|k| cond_exp(&indicator, f.stage(k), self.base.weights()))
                .collect::<Result<Vec<_>>>()?;
            out.push(self.lift_process(&ProcessTable::new(columns)?));
        }
        Ok(out)
    }

    /// Checks a stopping time of `G` on this space.
    pub fn g_stopping_time(&self, values: Vec<usize>) -> Result<StoppingTime> {
        StoppingTime::new(values, &self.g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::{int, rat};

    fn trivial_base(n: usize) -> (FiniteSpace, Filtration) {
        let base = FiniteSpace::uniform(1).unwrap();
        let f = Filtration::constant(Filtration::integer_grid(n), Partition::trivial(1)).unwrap();
        (base, f)
    }

    #[test]
    fn point_mass_at_infinity_reproduces_base() {
        let base = FiniteSpace::uniform(2).unwrap();
        let f = Filtration::new(
            Filtration::integer_grid(1),
            vec![Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)],
        )
        .unwrap();
        let kernel = DefaultKernel::point_mass(&[2, 2], 3).unwrap();
        let space = build_product_space(base, f, kernel).unwrap();
        assert_eq!(space.atoms(), 2);
        assert_eq!(space.g(), space.lifted());
    }

    #[test]
    fn uniform_default_on_two_dates() {
        let (base, f) = trivial_base(2);
        let kernel = DefaultKernel::new(vec![vec![int(0), rat(1, 2), rat(1, 2), int(0)]]).unwrap();
        let space = build_product_space(base, f, kernel).unwrap();
        assert_eq!(space.atoms(), 2);
        assert_eq!(space.g().stage(1), &Partition::discrete(2));
        assert_eq!(space.g().stage(0), &Partition::trivial(2));
    }

    #[test]
    fn kernel_validation() {
        assert!(DefaultKernel::new(vec![vec![rat(1, 2), rat(1, 3)]]).is_err());
        assert!(DefaultKernel::new(vec![vec![int(0), int(0)]]).is_err());
        assert!(DefaultKernel::new(vec![vec![int(2), int(-1)]]).is_err());
    }

    #[test]
    fn restriction_condition_holds() {
        let (base, f) = trivial_base(2);
        let kernel = DefaultKernel::new(vec![vec![int(0), rat(1, 2), rat(1, 4), rat(1, 4)]]).unwrap();
        let space = build_product_space(base, f, kernel).unwrap();
        let mut per_origin = vec![Rational::zero(); space.base().len()];
        for (i, &o) in space.origin().iter().enumerate() {
            per_origin[o] += &space.weights()[i];
        }
        assert_eq!(per_origin, space.base().weights());
        let weights: Vec<_> = space.weights().to_vec();
        assert_eq!(weights, vec![rat(1, 2), rat(1, 4), rat(1, 4)]);
    }
}
