use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ScalarFn;

/// Default intensity `λ(t)` or `λ(t, ω)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Intensity {
    /// `λ(t) = rate`; `Λ_t = rate · t` exactly.
    Constant { rate: f64 },
    /// `λ(t) = a + b t`; `Λ_t = a t + b t²/2` exactly.
    Affine { a: f64, b: f64 },
    /// `λ(t, ω) = max(base + slope · W_t, 0)`, integrated by left sums.
    DriverLinked { base: f64, slope: f64 },
}

/// The martingale `Y` of the conditional-CDF equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum YDriver {
    /// `Y = W`.
    Driver,
    /// A Brownian motion independent of `W`.
    Independent,
}

/// Simulation settings for the conditional-CDF model. `N = ℰ(σ W)`.
#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub dt: f64,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub u_grid: Vec<f64>,
    pub n_volatility: f64,
    pub intensity: Intensity,
    pub y: YDriver,
    pub f: ScalarFn,
    /// Paths where `1 − Z_t` drops below this (from time `u` on) are flagged.
    pub singular_floor: f64,
    /// Allowed decrease of `u ↦ M^u_T` before a path is flagged.
    pub monotonicity_tolerance: f64,
}

impl McConfig {
    /// `Δt = 2⁻¹⁰`, horizon 2, `u ∈ {1/4, …, 2}`, `λ = 1/2`, `N ≡ 1`, `Y = W`, `f ≡ 0`.
    pub fn new(paths: usize, seed: u64) -> Self {
        Self {
            dt: 2f64.powi(-10),
            horizon: 2.0,
            paths,
            seed,
            u_grid: (1..=8).map(|j| j as f64 / 4.0).collect(),
            n_volatility: 0.0,
            intensity: Intensity::Constant { rate: 0.5 },
            y: YDriver::Driver,
            f: ScalarFn::Zero,
            singular_floor: 1e-8,
            monotonicity_tolerance: 1e-9,
        }
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    /// Grid index of a time on the grid.
    pub fn index_of(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::MonteCarlo(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return fail(format!("time step {} must be positive", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return fail(format!("horizon {} must be positive", self.horizon));
        }
        if ((self.horizon / self.dt).round() * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return fail("horizon must be a multiple of the time step".into());
        }
        if self.paths == 0 {
            return fail("at least one path is required".into());
        }
        if self.u_grid.is_empty() || self.u_grid.windows(2).any(|w| w[0] >= w[1]) {
            return fail("u-grid must be non-empty and strictly increasing".into());
        }
        for &u in &self.u_grid {
            if !(0.0..=self.horizon).contains(&u) || ((u / self.dt).round() * self.dt - u).abs() > 1e-9 {
                return fail(format!("u = {u} is not a grid time in [0, horizon]"));
            }
        }
        if !(self.singular_floor > 0.0) {
            return fail("singularity floor must be positive".into());
        }
        if !self.n_volatility.is_finite() {
            return fail("volatility of N must be finite".into());
        }
        let (f_sup, df_sup) = self.f.bounds();
        if !(f_sup.is_finite() && df_sup.is_finite()) || self.f.eval_f64(0.0) != 0.0 {
            return fail("f must satisfy f(0) = 0 with bounded f and f′".into());
        }
        match self.intensity {
            Intensity::Constant { rate } if rate < 0.0 => fail("intensity must be non-negative".into()),
            Intensity::Affine { a, b } if a < 0.0 || a + b * self.horizon < 0.0 => {
                fail("affine intensity must stay non-negative on the horizon".into())
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = McConfig::new(10, 1);
        c.validate().unwrap();
        assert_eq!(c.steps(), 2048);
        assert_eq!(c.index_of(0.25), 256);
    }

    #[test]
    fn rejects_bad_settings() {
        let mut c = McConfig::new(10, 1);
        c.dt = 0.0;
        assert!(c.validate().is_err());
        let mut c = McConfig::new(10, 1);
        c.u_grid = vec![0.3];
        assert!(c.validate().is_err());
        let mut c = McConfig::new(0, 1);
        assert!(c.validate().is_err());
        c.paths = 1;
        c.intensity = Intensity::Constant { rate: -1.0 };
        assert!(c.validate().is_err());
    }
}
