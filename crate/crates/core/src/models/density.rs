use num::{Signed, Zero};

use crate::enlargement::{build_product_space, DefaultKernel, EnlargedSpace};
use crate::error::{Error, Result};
use crate::finite_prob::{cond_exp, Filtration, FiniteSpace, ProcessTable, Rational};

/// Conditional densities `α_k(θ, ω)` of the default time against the
/// reference law `μ` on `{0, …, n, ∞}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityParams {
    /// `μ(θ)` for `θ = 0, …, n, ∞`.
    pub mu: Vec<Rational>,
    /// One table per `θ`, over the base atoms.
    pub alpha: Vec<ProcessTable>,
}

impl DensityParams {
    /// Builds `α_k(θ) = E[α_∞(θ) | F_k]` from the terminal densities
    /// `terminal[θ][ω]`.
    pub fn from_terminal(
        base: &FiniteSpace,
        f: &Filtration,
        mu: Vec<Rational>,
        terminal: Vec<Vec<Rational>>,
    ) -> Result<Self> {
        let alpha = terminal
            .iter()
            .map(|a| {
                let columns = (0..f.columns()).map(|k| cond_exp(a, f.stage(k), base.weights())).collect::<Result<_>>()?;
                ProcessTable::new(columns)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { mu, alpha })
    }

    /// `α ≡ 1`: the default time is independent of the base with law `μ`.
    pub fn independent(f: &Filtration, mu: Vec<Rational>) -> Self {
        let one = Rational::from_integer(1.into());
        let alpha = mu.iter().map(|_| ProcessTable::constant(f.columns(), f.atoms(), one.clone())).collect();
        Self { mu, alpha }
    }

    pub fn validate(&self, base: &FiniteSpace, f: &Filtration) -> Result<()> {
        if self.mu.len() != f.columns() || self.alpha.len() != f.columns() {
            return Err(Error::Dimension(format!("density needs {} default dates", f.columns())));
        }
        if self.mu.iter().any(Signed::is_negative) {
            return Err(Error::InvalidParameters("reference law has a negative weight".into()));
        }
        let total: Rational = self.mu.iter().sum();
        if total != Rational::from_integer(1.into()) {
            return Err(Error::InvalidParameters(format!("reference law sums to {total}")));
        }
        for (theta, a) in self.alpha.iter().enumerate() {
            if !a.shape_matches(f) {
                return Err(Error::Dimension(format!("density table for date {theta} has the wrong shape")));
            }
            if let Some(column) = a.first_non_adapted(f) {
                return Err(Error::NotAdapted { column });
            }
            if !self.mu[theta].is_zero() && (0..a.columns()).flat_map(|k| a.column(k)).any(|v| !v.is_positive()) {
                return Err(Error::InvalidParameters(format!("density for date {theta} is not strictly positive")));
            }
            for k in 1..f.columns() {
                let projected = cond_exp(a.column(k), f.stage(k - 1), base.weights())?;
                if projected != a.column(k - 1) {
                    return Err(Error::InvalidParameters(format!(
                        "density for date {theta} is not a martingale at step {k}"
                    )));
                }
            }
        }
        for k in 0..f.columns() {
            for i in 0..f.atoms() {
                let mass: Rational = self.alpha.iter().zip(&self.mu).map(|(a, m)| a.at(k, i) * m).sum();
                if mass != Rational::from_integer(1.into()) {
                    return Err(Error::InvalidParameters(format!(
                        "densities integrate to {mass} at column {k}, atom {i}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Kernel `p(θ|ω) = α_∞(θ, ω) μ(θ)`.
pub fn density_kernel(base: &FiniteSpace, f: &Filtration, params: &DensityParams) -> Result<DefaultKernel> {
    params.validate(base, f)?;
    let terminal = f.terminal();
    let rows = (0..f.atoms())
        .map(|i| params.alpha.iter().zip(&params.mu).map(|(a, m)| a.at(terminal, i) * m).collect())
        .collect();
    DefaultKernel::new(rows)
}

pub fn density_model(base: &FiniteSpace, f: &Filtration, params: &DensityParams) -> Result<EnlargedSpace> {
    build_product_space(base.clone(), f.clone(), density_kernel(base, f, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::{int, rat};
    use crate::models::BaseTree;

    fn mu() -> Vec<Rational> {
        vec![int(0), rat(1, 2), rat(1, 2)]
    }

    #[test]
    fn unit_density_is_independent() {
        let tree = BaseTree::binary(1).unwrap();
        let params = DensityParams::independent(&tree.filtration, mu());
        let kernel = density_kernel(&tree.space, &tree.filtration, &params).unwrap();
        assert_eq!(kernel.row(0), kernel.row(1));
        assert_eq!(kernel.row(0), &mu()[..]);
    }

    #[test]
    fn coin_tilted_density() {
        let tree = BaseTree::binary(1).unwrap();
        let terminal = vec![vec![int(1), int(1)], vec![rat(3, 2), rat(1, 2)], vec![rat(1, 2), rat(3, 2)]];
        let params = DensityParams::from_terminal(&tree.space, &tree.filtration, mu(), terminal).unwrap();
        assert_eq!(params.alpha[1].column(0), &[int(1), int(1)]);
        let kernel = density_kernel(&tree.space, &tree.filtration, &params).unwrap();
        assert_eq!(kernel.row(0), &[int(0), rat(3, 4), rat(1, 4)]);
        assert_eq!(kernel.row(1), &[int(0), rat(1, 4), rat(3, 4)]);
    }

    #[test]
    fn rejects_non_martingale_density() {
        let tree = BaseTree::binary(1).unwrap();
        let mut params = DensityParams::independent(&tree.filtration, mu());
        params.alpha[1] = ProcessTable::new(vec![vec![int(1); 2], vec![rat(3, 2), rat(3, 2)], vec![rat(3, 2), rat(3, 2)]])
            .unwrap();
        params.alpha[2] = ProcessTable::new(vec![vec![int(1); 2], vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]])
            .unwrap();
        assert!(matches!(density_kernel(&tree.space, &tree.filtration, &params), Err(Error::InvalidParameters(_))));
    }
}
