use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Claims with closed-form hedges in the Cox model with constant intensity,
/// where `W` stays a martingale after enlargement and `W̃ = W`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Claim {
    /// `1_{τ>T}`: value `1_{τ>t} e^{−λ(T−t)}`, hedged by `K_t = −e^{−λ(T−t)}` on `L`.
    DefaultableBond,
    /// `W_{T∧τ}`: hedged by `J_t = 1_{τ>t}` on `W`.
    StoppedDriver,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationConfig {
    pub rate: f64,
    pub horizon: f64,
    /// Coarsest rebalancing step; level `j` uses `base_dt / 2^j`.
    pub base_dt: f64,
    pub levels: usize,
    pub paths: usize,
    pub seed: u64,
    pub claim: Claim,
}

impl ReplicationConfig {
    pub fn new(claim: Claim, paths: usize, seed: u64) -> Self {
        Self { rate: 0.5, horizon: 1.0, base_dt: 1.0 / 16.0, levels: 4, paths, seed, claim }
    }

    fn validate(&self) -> Result<()> {
        let steps = self.horizon / self.base_dt;
        if !(self.rate >= 0.0 && self.horizon > 0.0 && self.base_dt > 0.0) || (steps.round() - steps).abs() > 1e-9 {
            return Err(Error::MonteCarlo("rate, horizon and step must be positive with an integral step count".into()));
        }
        if self.levels < 2 || self.levels > 16 {
            return Err(Error::MonteCarlo("between 2 and 16 refinement levels are required".into()));
        }
        if self.paths < 2 {
            return Err(Error::MonteCarlo("at least two paths are required".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationLevel {
    pub dt: f64,
    pub rms_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationReport {
    pub levels: Vec<ReplicationLevel>,
    /// `rms(level j+1) / rms(level j)`.
    pub ratios: Vec<f64>,
}

impl ReplicationReport {
    pub fn converges(&self, max_ratio: f64) -> bool {
        self.ratios.iter().all(|&r| r <= max_ratio)
    }
}

/// Hedging error of one path at every level. Brownian increments are drawn at
/// the finest level and summed for coarser ones; `τ` is the exact exponential.
fn path_errors(cfg: &ReplicationConfig, index: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let uniform: f64 = rng.gen();
    let tau = if cfg.rate > 0.0 { -(1.0 - uniform).ln() / cfg.rate } else { f64::INFINITY };
    let fine_steps = ((cfg.horizon / cfg.base_dt).round() as usize) << (cfg.levels - 1);
    let fine_dt = cfg.horizon / fine_steps as f64;
    let mut w = Vec::with_capacity(fine_steps + 1);
    w.push(0.0);
    for i in 0..fine_steps {
        w.push(w[i] + fine_dt.sqrt() * rng.sample::<f64, _>(StandardNormal));
    }
    // W at τ from the Brownian bridge over the fine step containing τ.
    let stop = tau.min(cfg.horizon);
    let j = ((stop / fine_dt).floor() as usize).min(fine_steps);
    let w_stop = if j == fine_steps {
        w[j]
    } else {
        let frac = stop / fine_dt - j as f64;
        let bridge_sd = (frac * (1.0 - frac) * fine_dt).sqrt();
        w[j] + frac * (w[j + 1] - w[j]) + bridge_sd * rng.sample::<f64, _>(StandardNormal)
    };
    (0..cfg.levels)
        .map(|level| {
            let stride = 1usize << (cfg.levels - 1 - level);
            let steps = fine_steps / stride;
            let dt = cfg.horizon / steps as f64;
            let t = |i: usize| i as f64 * dt;
            match cfg.claim {
                Claim::DefaultableBond => {
                    let mut value = (-cfg.rate * cfg.horizon).exp();
                    for i in 0..steps {
                        let k = -(-cfg.rate * (cfg.horizon - t(i))).exp();
                        let jump = if t(i) < tau && tau <= t(i + 1) { 1.0 } else { 0.0 };
                        let dl = jump - cfg.rate * (t(i + 1).min(tau) - t(i).min(tau));
                        value += k * dl;
                    }
                    value - if tau > cfg.horizon { 1.0 } else { 0.0 }
                }
                Claim::StoppedDriver => {
                    let mut value = 0.0;
                    for i in 0..steps {
                        if tau > t(i) {
                            value += w[(i + 1) * stride] - w[i * stride];
                        }
                    }
                    value - w_stop
                }
            }
        })
        .collect()
}

/// Discrete hedging of the claim at each refinement level; reports the RMS
/// replication error and the error ratio per halving of the step.
pub fn replication_backtest(cfg: &ReplicationConfig) -> Result<ReplicationReport> {
    cfg.validate()?;
    let errors: Vec<Vec<f64>> = (0..cfg.paths).into_par_iter().map(|p| path_errors(cfg, p)).collect();
    let levels: Vec<ReplicationLevel> = (0..cfg.levels)
        .map(|l| {
            let mse = errors.iter().map(|e| e[l] * e[l]).sum::<f64>() / cfg.paths as f64;
            ReplicationLevel { dt: cfg.base_dt / (1u64 << l) as f64, rms_error: mse.sqrt() }
        })
        .collect();
    let ratios = levels.windows(2).map(|w| w[1].rms_error / w[0].rms_error).collect();
    Ok(ReplicationReport { levels, ratios })
}
