use num::{One, Signed, Zero};

use super::cox::CoxParams;
use crate::enlargement::{build_product_space, DefaultKernel, EnlargedSpace};
use crate::error::{Error, Result};
use crate::finite_prob::{cond_exp, is_martingale, to_f64, Filtration, FiniteSpace, ProcessTable, Rational};

/// Scalar coefficient `f` of the conditional-CDF equation. Every variant has
/// `f(0) = 0` and bounded `f`, `f′` on `[−1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarFn {
    Zero,
    Linear { slope: Rational },
    /// `f(x) = a x / (1 + x²)`.
    Saturating { a: Rational },
    /// `f(x) = Σ c_i x^i`; `c_0` must be zero.
    Polynomial { coeffs: Vec<Rational> },
}

impl ScalarFn {
    pub fn polynomial(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.first().is_some_and(|c| !c.is_zero()) {
            return Err(Error::InvalidParameters("f(0) must be 0".into()));
        }
        Ok(ScalarFn::Polynomial { coeffs })
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        match self {
            ScalarFn::Zero => Rational::zero(),
            ScalarFn::Linear { slope } => slope * x,
            ScalarFn::Saturating { a } => a * x / (Rational::one() + x * x),
            ScalarFn::Polynomial { coeffs } => horner(coeffs, x),
        }
    }

    pub fn derivative(&self, x: &Rational) -> Rational {
        match self {
            ScalarFn::Zero => Rational::zero(),
            ScalarFn::Linear { slope } => slope.clone(),
            ScalarFn::Saturating { a } => {
                let d = Rational::one() + x * x;
                a * (Rational::one() - x * x) / (&d * &d)
            }
            ScalarFn::Polynomial { coeffs } => {
                let derived: Vec<Rational> =
                    coeffs.iter().enumerate().skip(1).map(|(i, c)| c * Rational::from_integer(i.into())).collect();
                horner(&derived, x)
            }
        }
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Linear { slope } => to_f64(slope) * x,
            ScalarFn::Saturating { a } => to_f64(a) * x / (1.0 + x * x),
            ScalarFn::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c)),
        }
    }

    /// Upper bounds for `sup |f|` and `sup |f′|` on `[−1, 1]`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            ScalarFn::Zero => (0.0, 0.0),
            ScalarFn::Linear { slope } => (to_f64(slope).abs(), to_f64(slope).abs()),
            ScalarFn::Saturating { a } => (to_f64(a).abs() / 2.0, to_f64(a).abs()),
            ScalarFn::Polynomial { coeffs } => {
                let sup = coeffs.iter().map(|c| to_f64(c).abs()).sum();
                let dsup = coeffs.iter().enumerate().map(|(i, c)| i as f64 * to_f64(c).abs()).sum();
                (sup, dsup)
            }
        }
    }
}

fn horner(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Inputs of the conditional-CDF model: `N` a positive martingale with
/// `N_0 = 1`, survival factors `e^{−Λ}`, a martingale `Y` and the coefficient `f`.
#[derive(Clone, Debug, PartialEq)]
pub struct NaturalParams {
    pub n: ProcessTable,
    pub survival: ProcessTable,
    pub y: ProcessTable,
    pub f: ScalarFn,
}

impl NaturalParams {
    /// `Z_k = N_k e^{−Λ_k}`.
    pub fn z(&self) -> Result<ProcessTable> {
        self.n.mul(&self.survival)
    }

    pub fn validate(&self, base: &FiniteSpace, f: &Filtration) -> Result<()> {
        CoxParams::new(self.survival.clone()).validate(f)?;
        for (name, x) in [("N", &self.n), ("Y", &self.y)] {
            if !x.shape_matches(f) {
                return Err(Error::Dimension(format!("{name} does not match the filtration")));
            }
            if !is_martingale(x, f, base.weights())? {
                return Err(Error::InvalidParameters(format!("{name} is not a martingale")));
            }
        }
        if self.n.column(0).iter().any(|v| !v.is_one()) {
            return Err(Error::InvalidParameters("N must start at 1".into()));
        }
        if (0..self.n.columns()).flat_map(|k| self.n.column(k)).any(|v| !v.is_positive()) {
            return Err(Error::InvalidParameters("N must be strictly positive".into()));
        }
        let z = self.z()?;
        for k in 1..=f.horizon() {
            if let Some(i) = z.column(k).iter().position(|v| !v.is_positive() || *v >= Rational::one()) {
                return Err(Error::InvalidParameters(format!(
                    "survival probability {} at step {k}, atom {i} is outside (0, 1)",
                    z.at(k, i)
                )));
            }
        }
        Ok(())
    }
}

/// A conditional-CDF model: the enlarged space and `M^u` for `u = 0, …, n`
/// (tables over the base atoms).
#[derive(Clone, Debug)]
pub struct NaturalModel {
    pub space: EnlargedSpace,
    pub cdf: Vec<ProcessTable>,
    pub params: NaturalParams,
}

/// Runs the recursion
/// `M^u_{k+1} = M^u_k (1 − e^{−Λ_k}/(1−Z_k) ΔN_{k+1} + f(M^u_k − (1−Z_k)) ΔY_{k+1})`
/// from `M^u_u = 1 − Z_u` (and `M^u_k = E[1 − Z_u | F_k]` for `k < u`).
pub fn conditional_cdf(base: &FiniteSpace, f: &Filtration, params: &NaturalParams) -> Result<Vec<ProcessTable>> {
    params.validate(base, f)?;
    let z = params.z()?;
    let n = f.horizon();
    let atoms = f.atoms();
    let mut out = Vec::with_capacity(n + 1);
    for u in 0..=n {
        let start: Vec<Rational> = z.column(u).iter().map(|v| Rational::one() - v).collect();
        let mut columns: Vec<Vec<Rational>> = Vec::with_capacity(f.columns());
        for k in 0..u {
            columns.push(cond_exp(&start, f.stage(k), base.weights())?);
        }
        columns.push(start);
        for k in u..=n {
            let (dn, dy) = (params.n.increment(k + 1), params.y.increment(k + 1));
            let next = (0..atoms)
                .map(|i| {
                    let m = &columns[k][i];
                    if m.is_zero() {
                        return Ok(Rational::zero());
                    }
                    let dead = Rational::one() - z.at(k, i);
                    if dead.is_zero() {
                        return Err(Error::InvalidParameters(format!(
                            "invalid parameter set: conditional CDF {u} is {m} where 1 - Z vanishes (step {k}, atom {i})"
                        )));
                    }
                    let factor = Rational::one() - params.survival.at(k, i) / &dead * &dn[i]
                        + params.f.eval(&(m - &dead)) * &dy[i];
                    Ok(m * factor)
                })
                .collect::<Result<Vec<_>>>()?;
            columns.push(next);
        }
        out.push(ProcessTable::new(columns)?);
    }
    validate_cdf(&out)?;
    Ok(out)
}

fn validate_cdf(cdf: &[ProcessTable]) -> Result<()> {
    for (u, m) in cdf.iter().enumerate() {
        for k in u..m.columns() {
            if let Some(i) = m.column(k).iter().position(|v| v.is_negative() || *v > Rational::one()) {
                return Err(Error::InvalidParameters(format!(
                    "invalid parameter set: conditional CDF {u} leaves [0, 1] at column {k}, atom {i} (value {})",
                    m.at(k, i)
                )));
            }
        }
    }
    for u in 1..cdf.len() {
        for k in (u - 1)..cdf[u].columns() {
            if let Some(i) = (0..cdf[u].atoms()).find(|&i| cdf[u - 1].at(k, i) > cdf[u].at(k, i)) {
                return Err(Error::InvalidParameters(format!(
                    "invalid parameter set: conditional CDF decreases from date {} to {u} at column {k}, atom {i}",
                    u - 1
                )));
            }
        }
    }
    Ok(())
}

/// Kernel `p(u) = M^u_∞ − M^{u−1}_∞`, `p(∞) = 1 − M^n_∞`.
pub fn natural_kernel(cdf: &[ProcessTable]) -> Result<DefaultKernel> {
    let atoms = cdf.first().map_or(0, ProcessTable::atoms);
    let rows = (0..atoms)
        .map(|i| {
            let mut row = Vec::with_capacity(cdf.len() + 1);
            let mut previous = Rational::zero();
            for m in cdf {
                let v = &m.last()[i];
                row.push(v - &previous);
                previous = v.clone();
            }
            row.push(Rational::one() - previous);
            row
        })
        .collect();
    DefaultKernel::new(rows)
}

pub fn natural_model_discrete(base: &FiniteSpace, f: &Filtration, params: &NaturalParams) -> Result<NaturalModel> {
    let cdf = conditional_cdf(base, f, params)?;
    let kernel = natural_kernel(&cdf)?;
    let space = build_product_space(base.clone(), f.clone(), kernel)?;
    Ok(NaturalModel { space, cdf, params: params.clone() })
}
