use rayon::prelude::*;

use super::config::McConfig;
use super::default::{sample_path, DefaultRule, DefaultSample};
use super::paths::{simulate_path, solve_cdf_path, PathBundle};
use super::stats::{mean_and_se, within};
use crate::error::{Error, Result};

/// Tolerance of the projection and martingale checks, in standard errors.
pub const STANDARD_ERRORS: f64 = 3.0;

/// Empirical `P(τ > t)` against the mean of `Z_t` at one grid time.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionRow {
    pub t: f64,
    pub survival: f64,
    pub projected: f64,
    /// Standard error of the mean of `1_{τ>t} − Z_t`.
    pub standard_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionReport {
    pub rows: Vec<ProjectionRow>,
    pub paths_used: usize,
    pub passed: bool,
}

/// `(1_{τ>t}, Z_t)` per path and per test time.
fn projection_report(times: &[f64], observations: &[Vec<(f64, f64)>]) -> Result<ProjectionReport> {
    if observations.len() < 2 {
        return Err(Error::MonteCarlo("insufficient paths for the projection test".into()));
    }
    let rows: Vec<ProjectionRow> = times
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let survival = observations.iter().map(|o| o[j].0).sum::<f64>() / observations.len() as f64;
            let projected = observations.iter().map(|o| o[j].1).sum::<f64>() / observations.len() as f64;
            let diffs: Vec<f64> = observations.iter().map(|o| o[j].0 - o[j].1).collect();
            let (mean, se) = mean_and_se(&diffs);
            ProjectionRow { t, survival, projected, standard_error: se, passed: within(mean, se, STANDARD_ERRORS) }
        })
        .collect();
    let passed = rows.iter().all(|r| r.passed);
    Ok(ProjectionReport { rows, paths_used: observations.len(), passed })
}

fn check_times(cfg: &McConfig, times: &[f64]) -> Result<Vec<usize>> {
    times
        .iter()
        .map(|&t| {
            if cfg.u_grid.iter().any(|&u| u == t) || t == 0.0 {
                Ok(cfg.index_of(t))
            } else {
                Err(Error::MonteCarlo(format!("test time {t} is not on the u-grid")))
            }
        })
        .collect()
}

/// Checks `P(τ > t | F_t) = Z_t` in mean at each test time, within three
/// standard errors, over the paths not excluded by the sample.
pub fn projection_condition_test(bundle: &PathBundle, sample: &DefaultSample, times: &[f64]) -> Result<ProjectionReport> {
    let idx = check_times(&bundle.config, times)?;
    let observations: Vec<Vec<(f64, f64)>> = bundle
        .paths
        .iter()
        .zip(sample.tau.iter().zip(&sample.excluded))
        .filter(|(_, (_, &e))| !e)
        .map(|(p, (&tau, _))| times.iter().zip(&idx).map(|(&t, &i)| (f64::from(u8::from(tau > t)), p.z[i])).collect())
        .collect();
    projection_report(times, &observations)
}

/// `M^u_T − M^u_u` in mean, for one `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct CdfMartingaleRow {
    pub u: f64,
    pub mean_start: f64,
    pub mean_terminal: f64,
    pub standard_error: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NaturalExperiment {
    pub projection: ProjectionReport,
    pub cdf_martingale: Vec<CdfMartingaleRow>,
    pub flagged_fraction: f64,
    /// Default times of the kept paths.
    pub tau: Vec<f64>,
}

struct PathOutcome {
    flagged: bool,
    tau: f64,
    observations: Vec<(f64, f64)>,
    cdf: Vec<(f64, f64)>,
}

/// Runs the conditional-CDF model path by path without storing trajectories:
/// simulate, solve `M^u` on the u-grid, invert for `τ`, and record the
/// projection and martingale statistics. Per-path results are collected in
/// path order and reduced sequentially, so the output does not depend on the
/// number of threads.
pub fn natural_experiment(cfg: &McConfig, times: &[f64]) -> Result<NaturalExperiment> {
    cfg.validate()?;
    let idx = check_times(cfg, times)?;
    let outcomes: Vec<PathOutcome> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| {
            let path = simulate_path(cfg, p);
            let (tau, flagged) = sample_path(cfg, &path, DefaultRule::Natural);
            let cdf = cfg
                .u_grid
                .iter()
                .map(|&u| {
                    let m = solve_cdf_path(cfg, &path, u, &cfg.f);
                    (m.values[0], m.terminal())
                })
                .collect();
            let observations =
                times.iter().zip(&idx).map(|(&t, &i)| (f64::from(u8::from(tau > t)), path.z[i])).collect();
            PathOutcome { flagged, tau, observations, cdf }
        })
        .collect();
    let kept: Vec<&PathOutcome> = outcomes.iter().filter(|o| !o.flagged).collect();
    let flagged_fraction = (outcomes.len() - kept.len()) as f64 / outcomes.len() as f64;
    let observations: Vec<Vec<(f64, f64)>> = kept.iter().map(|o| o.observations.clone()).collect();
    let projection = projection_report(times, &observations)?;
    let cdf_martingale = cfg
        .u_grid
        .iter()
        .enumerate()
        .map(|(j, &u)| {
            let n = kept.len() as f64;
            let mean_start = kept.iter().map(|o| o.cdf[j].0).sum::<f64>() / n;
            let mean_terminal = kept.iter().map(|o| o.cdf[j].1).sum::<f64>() / n;
            let diffs: Vec<f64> = kept.iter().map(|o| o.cdf[j].1 - o.cdf[j].0).collect();
            let (mean, se) = mean_and_se(&diffs);
            CdfMartingaleRow { u, mean_start, mean_terminal, standard_error: se, passed: within(mean, se, STANDARD_ERRORS) }
        })
        .collect();
    Ok(NaturalExperiment { projection, cdf_martingale, flagged_fraction, tau: kept.iter().map(|o| o.tau).collect() })
}
