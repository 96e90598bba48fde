use num::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::finite_prob::{predictable_bracket, Filtration, ProcessTable, Rational};

/// An equivalent measure given by its density against the reference weights.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureChange {
    density: Vec<Rational>,
}

impl MeasureChange {
    /// Checks strict positivity and `Σ w_i d_i = 1`.
    pub fn new(density: Vec<Rational>, weights: &[Rational]) -> Result<Self> {
        if density.len() != weights.len() {
            return Err(Error::Dimension(format!("{} density values for {} atoms", density.len(), weights.len())));
        }
        if let Some(i) = density.iter().position(|d| !d.is_positive()) {
            return Err(Error::NonPositive(format!("density {} at atom {i}", density[i])));
        }
        let mean: Rational = density.iter().zip(weights).map(|(d, w)| d * w).sum();
        if !mean.is_one() {
            return Err(Error::InvalidParameters(format!("density has mean {mean}, not 1")));
        }
        Ok(Self { density })
    }

    pub fn identity(atoms: usize) -> Self {
        Self { density: vec![Rational::one(); atoms] }
    }

    /// Terminal value of a positive density martingale.
    pub fn from_martingale(eta: &ProcessTable, weights: &[Rational]) -> Result<Self> {
        Self::new(eta.last().to_vec(), weights)
    }

    pub fn density(&self) -> &[Rational] {
        &self.density
    }

    pub fn is_identity(&self) -> bool {
        self.density.iter().all(One::is_one)
    }

    /// Atom weights under the changed measure.
    pub fn weights(&self, reference: &[Rational]) -> Vec<Rational> {
        self.density.iter().zip(reference).map(|(d, w)| d * w).collect()
    }
}

/// `η_k = η_{k−1} (1 + J_k ΔY_k)`, `η_0 = 1`, with the first non-positive
/// entry recorded instead of rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticExponential {
    pub eta: ProcessTable,
    pub first_non_positive: Option<(usize, usize)>,
}

impl StochasticExponential {
    pub fn is_positive(&self) -> bool {
        self.first_non_positive.is_none()
    }
}

pub fn stochastic_exponential(j: &ProcessTable, y: &ProcessTable, f: &Filtration) -> Result<StochasticExponential> {
    j.check_shape(f)?;
    y.check_shape(f)?;
    if !j.is_predictable(f) {
        return Err(Error::InvalidParameters("integrand of the stochastic exponential is not predictable".into()));
    }
    let mut columns = vec![vec![Rational::one(); y.atoms()]];
    for k in 1..y.columns() {
        let dy = y.increment(k);
        let prev = &columns[k - 1];
        let next = (0..y.atoms()).map(|i| &prev[i] * (Rational::one() + j.at(k, i) * &dy[i])).collect();
        columns.push(next);
    }
    let eta = ProcessTable::new(columns)?;
    let first_non_positive =
        (0..eta.columns()).find_map(|k| eta.column(k).iter().position(|v| !v.is_positive()).map(|i| (k, i)));
    Ok(StochasticExponential { eta, first_non_positive })
}

/// `W^{[η]}_k = W_k − Σ_{j≤k} Δ⟨η, W⟩_j / η_{j−1}`, bracket under the reference
/// weights; a martingale under `η_∞ · w` whenever `W` is one under `w`.
pub fn girsanov_transform(w: &ProcessTable, eta: &ProcessTable, f: &Filtration, weights: &[Rational]) -> Result<ProcessTable> {
    if let Some((k, i)) =
        (0..eta.columns()).find_map(|k| eta.column(k).iter().position(|v| !v.is_positive()).map(|i| (k, i)))
    {
        return Err(Error::NonPositive(format!("density process {} at column {k}, atom {i}", eta.at(k, i))));
    }
    let bracket = predictable_bracket(eta, w, f, weights)?;
    let mut increments = vec![vec![Rational::zero(); w.atoms()]];
    for k in 1..w.columns() {
        let db = bracket.increment(k);
        increments.push((0..w.atoms()).map(|i| &db[i] / eta.at(k - 1, i)).collect());
    }
    w.sub(&ProcessTable::from_increments(increments)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::{int, is_martingale, rat, Partition};

    fn one_coin() -> (Filtration, Vec<Rational>, ProcessTable) {
        let f = Filtration::new(
            Filtration::integer_grid(1),
            vec![Partition::trivial(2), Partition::discrete(2), Partition::discrete(2)],
        )
        .unwrap();
        let w = ProcessTable::new(vec![vec![int(0); 2], vec![int(1), int(-1)], vec![int(1), int(-1)]]).unwrap();
        (f, vec![rat(1, 2); 2], w)
    }

    #[test]
    fn one_step_exponential() {
        let (f, _, w) = one_coin();
        let j = ProcessTable::constant(3, 2, rat(1, 2));
        let e = stochastic_exponential(&j, &w, &f).unwrap();
        assert_eq!(e.eta.column(1), &[rat(3, 2), rat(1, 2)]);
        assert!(e.is_positive());
        let zero = stochastic_exponential(&ProcessTable::zeros(3, 2), &w, &f).unwrap();
        assert!(zero.eta.column(2).iter().all(One::is_one));
        let crash = stochastic_exponential(&ProcessTable::constant(3, 2, int(1)), &w, &f).unwrap();
        assert_eq!(crash.first_non_positive, Some((1, 1)));
    }

    #[test]
    fn girsanov_one_coin() {
        let (f, weights, w) = one_coin();
        let e = stochastic_exponential(&ProcessTable::constant(3, 2, rat(1, 2)), &w, &f).unwrap();
        let shifted = girsanov_transform(&w, &e.eta, &f, &weights).unwrap();
        assert_eq!(shifted.column(1), &[rat(1, 2), rat(-3, 2)]);
        let q = MeasureChange::from_martingale(&e.eta, &weights).unwrap();
        assert!(is_martingale(&shifted, &f, &q.weights(&weights)).unwrap());
        let same = girsanov_transform(&w, &ProcessTable::constant(3, 2, int(1)), &f, &weights).unwrap();
        assert_eq!(same, w);
    }

    #[test]
    fn measure_change_validation() {
        let weights = vec![rat(1, 2); 2];
        assert!(MeasureChange::new(vec![rat(3, 2), rat(1, 2)], &weights).is_ok());
        assert!(matches!(MeasureChange::new(vec![int(2), int(0)], &weights), Err(Error::NonPositive(_))));
        assert!(MeasureChange::new(vec![int(1), int(2)], &weights).is_err());
        assert!(MeasureChange::identity(2).is_identity());
    }

    #[test]
    fn non_predictable_integrand_is_rejected() {
        let (f, _, w) = one_coin();
        assert!(stochastic_exponential(&w, &w, &f).is_err());
    }
}
