use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::config::{Intensity, McConfig, YDriver};
use crate::error::{Error, Result};
use crate::finite_prob::to_f64;
use crate::models::ScalarFn;

/// Reasons a simulated path is excluded from estimates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PathFlags {
    /// `N` hit zero or below under the Euler scheme.
    pub non_positive_n: bool,
    /// `Z = N e^{−Λ}` left `[0, 1]`.
    pub z_out_of_range: bool,
    /// `1 − Z_t` fell below the floor while an `M^u` was running.
    pub near_singular: bool,
    /// Some `M^u` left `[0, 1]`.
    pub cdf_out_of_range: bool,
    /// `u ↦ M^u_T` decreased by more than the tolerance.
    pub non_monotone: bool,
}

impl PathFlags {
    pub fn any(&self) -> bool {
        self.non_positive_n || self.z_out_of_range || self.near_singular || self.cdf_out_of_range || self.non_monotone
    }

    fn merge(&mut self, other: PathFlags) {
        self.non_positive_n |= other.non_positive_n;
        self.z_out_of_range |= other.z_out_of_range;
        self.near_singular |= other.near_singular;
        self.cdf_out_of_range |= other.cdf_out_of_range;
        self.non_monotone |= other.non_monotone;
    }
}

/// One simulated path on the grid `t_i = i Δt`, `i = 0..=steps`.
#[derive(Clone, Debug, PartialEq)]
pub struct BasePath {
    pub w: Vec<f64>,
    pub n: Vec<f64>,
    /// Cumulative intensity `Λ`.
    pub lambda: Vec<f64>,
    pub y: Vec<f64>,
    /// `Z = N e^{−Λ}`.
    pub z: Vec<f64>,
    /// Uniform for the conditional-CDF inversion.
    pub u_natural: f64,
    /// Uniform for the Cox threshold, independent of `u_natural`.
    pub u_cox: f64,
    pub flags: PathFlags,
}

#[derive(Clone, Debug)]
pub struct PathBundle {
    pub config: McConfig,
    pub paths: Vec<BasePath>,
}

impl PathBundle {
    pub fn times(&self) -> Vec<f64> {
        (0..=self.config.steps()).map(|i| self.config.time(i)).collect()
    }
}

/// A solved `M^u` on one path, from grid index `start = u/Δt` to the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct CdfPath {
    pub start: usize,
    pub values: Vec<f64>,
    pub flags: PathFlags,
}

impl CdfPath {
    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("at least the starting value")
    }

    /// `M^u_{t_i}` for `i ≥ start`.
    pub fn at(&self, i: usize) -> f64 {
        self.values[i - self.start]
    }
}

/// `f` with its rational parameters converted once.
enum Coefficient {
    Zero,
    Linear(f64),
    Saturating(f64),
    Polynomial(Vec<f64>),
}

impl Coefficient {
    fn new(f: &ScalarFn) -> Self {
        match f {
            ScalarFn::Zero => Coefficient::Zero,
            ScalarFn::Linear { slope } => Coefficient::Linear(to_f64(slope)),
            ScalarFn::Saturating { a } => Coefficient::Saturating(to_f64(a)),
            ScalarFn::Polynomial { coeffs } => Coefficient::Polynomial(coeffs.iter().map(to_f64).collect()),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Zero => 0.0,
            Coefficient::Linear(s) => s * x,
            Coefficient::Saturating(a) => a * x / (1.0 + x * x),
            Coefficient::Polynomial(c) => c.iter().rev().fold(0.0, |acc, c| acc * x + c),
        }
    }
}

/// Simulates path `index` from its own stream; the result does not depend on
/// which other paths are simulated.
pub fn simulate_path(cfg: &McConfig, index: usize) -> BasePath {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let u_natural: f64 = rng.gen();
    let u_cox: f64 = rng.gen();
    let steps = cfg.steps();
    let sd = cfg.dt.sqrt();
    let mut w = Vec::with_capacity(steps + 1);
    let mut n = Vec::with_capacity(steps + 1);
    let mut lambda = Vec::with_capacity(steps + 1);
    let mut flags = PathFlags::default();
    w.push(0.0);
    n.push(1.0);
    lambda.push(0.0);
    for i in 0..steps {
        let dw = sd * rng.sample::<f64, _>(StandardNormal);
        let next_lambda = match cfg.intensity {
            Intensity::Constant { rate } => rate * cfg.time(i + 1),
            Intensity::Affine { a, b } => {
                let s = cfg.time(i + 1);
                a * s + b * s * s / 2.0
            }
            Intensity::DriverLinked { base, slope } => lambda[i] + (base + slope * w[i]).max(0.0) * cfg.dt,
        };
        w.push(w[i] + dw);
        let next_n = n[i] * (1.0 + cfg.n_volatility * dw);
        if next_n <= 0.0 {
            flags.non_positive_n = true;
        }
        n.push(next_n);
        lambda.push(next_lambda);
    }
    let y = match cfg.y {
        YDriver::Driver => w.clone(),
        YDriver::Independent => {
            let mut y = Vec::with_capacity(steps + 1);
            y.push(0.0);
            for i in 0..steps {
                y.push(y[i] + sd * rng.sample::<f64, _>(StandardNormal));
            }
            y
        }
    };
    let z: Vec<f64> = n.iter().zip(&lambda).map(|(n, l)| n * (-l).exp()).collect();
    if z.iter().any(|z| !(0.0..=1.0).contains(z)) {
        flags.z_out_of_range = true;
    }
    BasePath { w, n, lambda, y, z, u_natural, u_cox, flags }
}

/// Simulates `W`, `N`, `Λ`, `Y` and the two uniforms on every path.
pub fn simulate_base_paths(cfg: &McConfig) -> Result<PathBundle> {
    cfg.validate()?;
    let paths = (0..cfg.paths).into_par_iter().map(|i| simulate_path(cfg, i)).collect();
    Ok(PathBundle { config: cfg.clone(), paths })
}

/// Euler scheme for
/// `dM^u_t = M^u_t (−e^{−Λ_t}/(1−Z_t) dN_t + f(M^u_t − (1−Z_t)) dY_t)`, `t ≥ u`,
/// started at `M^u_u = 1 − Z_u`.
pub fn solve_cdf_path(cfg: &McConfig, path: &BasePath, u: f64, f: &ScalarFn) -> CdfPath {
    let start = cfg.index_of(u);
    let steps = cfg.steps();
    let mut flags = PathFlags::default();
    let mut values = Vec::with_capacity(steps + 1 - start);
    let f = Coefficient::new(f);
    let mut m = 1.0 - path.z[start];
    values.push(m);
    for i in start..steps {
        let c = 1.0 - path.z[i];
        let dn = path.n[i + 1] - path.n[i];
        let dy = path.y[i + 1] - path.y[i];
        let n_term = if dn == 0.0 {
            0.0
        } else {
            if c < cfg.singular_floor {
                flags.near_singular = true;
            }
            -(path.z[i] / path.n[i]) / c.max(cfg.singular_floor) * dn
        };
        m *= 1.0 + n_term + f.eval(m - c) * dy;
        if !(0.0..=1.0).contains(&m) {
            flags.cdf_out_of_range = true;
        }
        values.push(m);
    }
    CdfPath { start, values, flags }
}

/// Solves `M^u` on every path of the bundle.
pub fn solve_natural_sde(bundle: &PathBundle, u: f64, f: &ScalarFn) -> Result<Vec<CdfPath>> {
    let cfg = &bundle.config;
    if !cfg.u_grid.iter().any(|&g| (g - u).abs() < 1e-12) && ((u / cfg.dt).round() * cfg.dt - u).abs() > 1e-9 {
        return Err(Error::MonteCarlo(format!("u = {u} is not a grid time")));
    }
    if !(0.0..=cfg.horizon).contains(&u) {
        return Err(Error::MonteCarlo(format!("u = {u} lies outside [0, horizon]")));
    }
    Ok(bundle.paths.par_iter().map(|p| solve_cdf_path(cfg, p, u, f)).collect())
}

/// `M^u_T` for every `u` on the grid, with the combined flags of the path.
pub(crate) fn terminal_cdf(cfg: &McConfig, path: &BasePath) -> (Vec<f64>, PathFlags) {
    let mut flags = path.flags;
    let mut terminal = Vec::with_capacity(cfg.u_grid.len());
    for &u in &cfg.u_grid {
        let m = solve_cdf_path(cfg, path, u, &cfg.f);
        flags.merge(m.flags);
        terminal.push(m.terminal());
    }
    if terminal.windows(2).any(|w| w[1] < w[0] - cfg.monotonicity_tolerance) {
        flags.non_monotone = true;
    }
    (terminal, flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_prob::rat;

    fn small(paths: usize) -> McConfig {
        let mut c = McConfig::new(paths, 7);
        c.dt = 1.0 / 64.0;
        c
    }

    #[test]
    fn streams_are_independent_of_path_count() {
        let a = simulate_base_paths(&small(3)).unwrap();
        let b = simulate_base_paths(&small(10)).unwrap();
        assert_eq!(a.paths[..], b.paths[..3]);
    }

    #[test]
    fn cox_inputs_stay_exact() {
        let b = simulate_base_paths(&small(2)).unwrap();
        let p = &b.paths[0];
        assert!(p.n.iter().all(|&x| x == 1.0));
        assert_eq!(p.lambda[64], 0.5);
        assert!(!p.flags.any());
    }

    #[test]
    fn zero_coefficient_freezes_the_cdf() {
        let b = simulate_base_paths(&small(4)).unwrap();
        for u in [0.25, 1.0, 2.0] {
            for m in solve_natural_sde(&b, u, &ScalarFn::Zero).unwrap() {
                let expected = 1.0 - (-0.5 * u).exp();
                assert!(m.values.iter().all(|&v| (v - expected).abs() <= f64::EPSILON));
            }
        }
    }

    #[test]
    fn volatile_n_flags_paths() {
        let mut c = small(50);
        c.n_volatility = 3.0;
        let b = simulate_base_paths(&c).unwrap();
        assert!(b.paths.iter().any(|p| p.flags.z_out_of_range));
    }

    #[test]
    fn cdf_is_monotone_in_u_for_a_linear_coefficient() {
        let mut c = small(20);
        c.f = ScalarFn::Linear { slope: rat(1, 2) };
        let b = simulate_base_paths(&c).unwrap();
        for p in &b.paths {
            let (terminal, flags) = terminal_cdf(&c, p);
            assert!(!flags.non_monotone, "{terminal:?}");
        }
    }

    #[test]
    fn off_grid_u_is_rejected() {
        let b = simulate_base_paths(&small(1)).unwrap();
        assert!(solve_natural_sde(&b, 0.3, &ScalarFn::Zero).is_err());
        assert!(solve_natural_sde(&b, 5.0, &ScalarFn::Zero).is_err());
    }
}
