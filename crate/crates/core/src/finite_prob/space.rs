use num::{One, Signed, Zero};

use super::Rational;
use crate::error::{Error, Result};

/// A finite sample space: ordered atoms with strictly positive rational weights
/// summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    weights: Vec<Rational>,
}

impl FiniteSpace {
    pub fn new(labels: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} labels for {} weights",
                labels.len(),
                weights.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidSpace("space has no atoms".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::InvalidSpace(format!("atom {} has weight {}", labels[i], weights[i])));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidSpace(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { labels, weights })
    }

    /// `n` equally weighted atoms labelled `a1..an`.
    pub fn uniform(n: usize) -> Result<Self> {
        let w = Rational::new(1.into(), (n.max(1) as i64).into());
        Self::new((1..=n).map(|i| format!("a{i}")).collect(), vec![w; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> &Rational {
        &self.weights[atom]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.labels[atom]
    }

    pub fn expectation(&self, x: &[Rational]) -> Result<Rational> {
        if x.len() != self.len() {
            return Err(Error::Dimension(format!("variable of length {} on {} atoms", x.len(), self.len())));
        }
        Ok(x.iter().zip(&self.weights).map(|(v, w)| v * w).sum())
    }

    /// The equivalent measure with the given strictly positive, unit-mean density.
    pub fn with_density(&self, density: &[Rational]) -> Result<Self> {
        if density.len() != self.len() {
            return Err(Error::Dimension(format!("density of length {} on {} atoms", density.len(), self.len())));
        }
        if let Some(i) = density.iter().position(|d| !d.is_positive()) {
            return Err(Error::NonPositive(format!("density {} at atom {}", density[i], self.labels[i])));
        }
        let weights: Vec<Rational> = self.weights.iter().zip(density).map(|(w, d)| w * d).collect();
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::NonPositive(format!("density has mean {total}, not 1")));
        }
        Ok(Self { labels: self.labels.clone(), weights })
    }

    /// Sum of weights over the atoms where `event` holds.
    pub fn probability(&self, event: &[bool]) -> Rational {
        let mut p = Rational::zero();
        for (w, e) in self.weights.iter().zip(event) {
            if *e {
                p += w;
            }
        }
        p
    }
}
