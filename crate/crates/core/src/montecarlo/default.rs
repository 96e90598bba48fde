use rayon::prelude::*;

use super::config::McConfig;
use super::paths::{terminal_cdf, BasePath, PathBundle};

/// How default times are drawn on the u-grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DefaultRule {
    /// `τ = min{u : e^{−s Λ_u} ≤ U}` with an independent uniform; `s = 1` is
    /// the Cox time, other scales give a distorted sampler for sensitivity runs.
    Cox { hazard_scale: f64 },
    /// `τ = min{u : U ≤ M^u_T}`, inverting the simulated conditional CDF.
    Natural,
}

impl DefaultRule {
    pub const COX: DefaultRule = DefaultRule::Cox { hazard_scale: 1.0 };
}

/// Sampled default times. `f64::INFINITY` means no default on the u-grid;
/// excluded paths carry a flag and are left out of estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct DefaultSample {
    pub tau: Vec<f64>,
    pub excluded: Vec<bool>,
}

impl DefaultSample {
    pub fn flagged_fraction(&self) -> f64 {
        self.excluded.iter().filter(|&&e| e).count() as f64 / self.excluded.len().max(1) as f64
    }

    /// Default times of the paths kept for estimation.
    pub fn kept(&self) -> Vec<f64> {
        self.tau.iter().zip(&self.excluded).filter(|(_, &e)| !e).map(|(&t, _)| t).collect()
    }
}

pub(crate) fn sample_path(cfg: &McConfig, path: &BasePath, rule: DefaultRule) -> (f64, bool) {
    match rule {
        DefaultRule::Cox { hazard_scale } => {
            let tau = cfg
                .u_grid
                .iter()
                .copied()
                .find(|&u| (-hazard_scale * path.lambda[cfg.index_of(u)]).exp() <= path.u_cox)
                .unwrap_or(f64::INFINITY);
            (tau, false)
        }
        DefaultRule::Natural => {
            let (terminal, flags) = terminal_cdf(cfg, path);
            let tau = cfg
                .u_grid
                .iter()
                .zip(&terminal)
                .find(|(_, &m)| path.u_natural <= m)
                .map_or(f64::INFINITY, |(&u, _)| u);
            (tau, flags.any())
        }
    }
}

/// Draws one default time per path.
pub fn sample_default(bundle: &PathBundle, rule: DefaultRule) -> DefaultSample {
    let drawn: Vec<(f64, bool)> =
        bundle.paths.par_iter().map(|p| sample_path(&bundle.config, p, rule)).collect();
    let (tau, excluded) = drawn.into_iter().unzip();
    DefaultSample { tau, excluded }
}
