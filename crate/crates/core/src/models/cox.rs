use num::{One, Signed, Zero};

use crate::enlargement::{build_product_space, DefaultKernel, EnlargedSpace};
use crate::error::{Error, Result};
use crate::finite_prob::{Filtration, FiniteSpace, ProcessTable, Rational};

/// Cox parameters given through the survival factors `e^{−Λ_k}`, one column
/// per grid point plus the terminal column (which must repeat column `n`).
#[derive(Clone, Debug, PartialEq)]
pub struct CoxParams {
    pub survival: ProcessTable,
}

impl CoxParams {
    pub fn new(survival: ProcessTable) -> Self {
        Self { survival }
    }

    /// The same survival factors on every atom.
    pub fn deterministic(survival: &[Rational], atoms: usize) -> Self {
        let mut columns: Vec<Vec<Rational>> = survival.iter().map(|s| vec![s.clone(); atoms]).collect();
        if let Some(last) = columns.last().cloned() {
            columns.push(last);
        }
        Self { survival: ProcessTable::new(columns).expect("rectangular") }
    }

    pub fn validate(&self, f: &Filtration) -> Result<()> {
        let s = &self.survival;
        if !s.shape_matches(f) {
            return Err(Error::Dimension("survival table does not match the filtration".into()));
        }
        if let Some(column) = s.first_non_adapted(f) {
            return Err(Error::NotAdapted { column });
        }
        if s.column(0).iter().any(|v| !v.is_one()) {
            return Err(Error::InvalidParameters("intensity must start at 0 (survival factor 1 at time 0)".into()));
        }
        let n = f.horizon();
        if s.column(n + 1) != s.column(n) {
            return Err(Error::InvalidParameters("terminal survival factor must equal the one at the horizon".into()));
        }
        for k in 1..=n {
            for (i, (now, before)) in s.column(k).iter().zip(s.column(k - 1)).enumerate() {
                if now.is_negative() || now > before {
                    return Err(Error::InvalidParameters(format!(
                        "intensity not increasing at step {k}, atom {i} (survival {before} -> {now})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Kernel `p(k|ω) = e^{−Λ_{k−1}} − e^{−Λ_k}`, `p(∞|ω) = e^{−Λ_n}`.
pub fn cox_kernel(f: &Filtration, params: &CoxParams) -> Result<DefaultKernel> {
    params.validate(f)?;
    let s = &params.survival;
    let n = f.horizon();
    let rows = (0..f.atoms())
        .map(|i| {
            let mut row = vec![Rational::zero()];
            row.extend((1..=n).map(|k| s.at(k - 1, i) - s.at(k, i)));
            row.push(s.at(n, i).clone());
            row
        })
        .collect();
    DefaultKernel::new(rows)
}

pub fn cox_model(base: &FiniteSpace, f: &Filtration, params: &CoxParams) -> Result<EnlargedSpace> {
    build_product_space(base.clone(), f.clone(), cox_kernel(f, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::{int, rat, Partition};
    use crate::models::BaseTree;

    #[test]
    fn deterministic_survival_gives_telescoping_law() {
        let f = Filtration::constant(Filtration::integer_grid(2), Partition::trivial(1)).unwrap();
        let params = CoxParams::deterministic(&[int(1), rat(1, 2), rat(1, 4)], 1);
        let kernel = cox_kernel(&f, &params).unwrap();
        assert_eq!(kernel.row(0), &[int(0), rat(1, 2), rat(1, 4), rat(1, 4)]);
    }

    #[test]
    fn zero_intensity_never_defaults() {
        let tree = BaseTree::binary(1).unwrap();
        let params = CoxParams::deterministic(&[int(1), int(1)], 2);
        let space = cox_model(&tree.space, &tree.filtration, &params).unwrap();
        assert!(space.tau().values().iter().all(|&t| t == space.terminal()));
    }

    #[test]
    fn rejects_decreasing_intensity() {
        let f = Filtration::constant(Filtration::integer_grid(2), Partition::trivial(1)).unwrap();
        let params = CoxParams::deterministic(&[int(1), rat(1, 4), rat(1, 2)], 1);
        assert!(matches!(cox_kernel(&f, &params), Err(Error::InvalidParameters(_))));
    }

    #[test]
    fn coin_adapted_intensity_kernel() {
        let tree = BaseTree::binary(1).unwrap();
        let survival = ProcessTable::new(vec![
            vec![int(1), int(1)],
            vec![rat(1, 2), rat(1, 4)],
            vec![rat(1, 2), rat(1, 4)],
        ])
        .unwrap();
        let kernel = cox_kernel(&tree.filtration, &CoxParams::new(survival)).unwrap();
        assert_eq!(kernel.row(0), &[int(0), rat(1, 2), rat(1, 2)]);
        assert_eq!(kernel.row(1), &[int(0), rat(3, 4), rat(1, 4)]);
    }
}
