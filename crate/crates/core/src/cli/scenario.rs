use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::finite_prob::{parse_rational, Rational};
use crate::models::ScalarFn;
use crate::montecarlo::{Claim, Intensity, McConfig, ReplicationConfig, YDriver};

/// Default cap on the product-space atom count in exact mode.
pub const DEFAULT_CAP: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Mc,
}

/// Uniform base tree: `branches[k]` children per node at step `k + 1`, fair weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub branches: Vec<usize>,
}

impl BaseSpec {
    pub fn steps(&self) -> usize {
        self.branches.len()
    }

    pub fn atoms(&self) -> usize {
        self.branches.iter().product()
    }
}

/// Coefficient `f`; rationals are written as strings such as `"1/2"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FnSpec {
    Zero,
    Linear { slope: String },
    Saturating { a: String },
    Polynomial { coeffs: Vec<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HonestRuleSpec {
    LastMaximum,
    LastZero,
    Custom,
}

/// The default-time model on the base tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// Deterministic survival factors `e^{−Λ_k}`, `k = 0..=n`.
    Cox { survival: Vec<String> },
    /// Reference law `μ` on `{0, …, n, ∞}` and terminal densities
    /// `alpha[θ][atom]`; independent of the base when `alpha` is omitted.
    Density {
        mu: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alpha: Option<Vec<Vec<String>>>,
    },
    /// Honest time read off the walk driver, or explicit times per atom.
    Honest {
        rule: HonestRuleSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        times: Option<Vec<usize>>,
    },
    /// Conditional-CDF model with `N = 1 + n_slope (W_k − W_{k∧1})`, `Y = W`.
    Natural { survival: Vec<String>, n_slope: String, f: FnSpec },
    /// Kernel rows `P(τ = θ | base atom)`, `θ = 0, …, n, ∞`.
    Kernel { rows: Vec<Vec<String>> },
    /// `τ ≡ time` (`n + 1` for never).
    Fixed { time: usize },
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Cox { .. } => "cox",
            ModelSpec::Density { .. } => "density",
            ModelSpec::Honest { .. } => "honest",
            ModelSpec::Natural { .. } => "natural",
            ModelSpec::Kernel { .. } => "kernel",
            ModelSpec::Fixed { .. } => "fixed",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverKind {
    /// The scaled walk `W` (binary trees).
    #[default]
    Walk,
    /// `branches − 1` coordinate martingales per node.
    Coordinate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Mrp,
    DriftBeforeDefault,
    DriftAfterDefault,
    Appendix,
    Harness,
    ShMeasure,
    Projection,
    Replication,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Mrp => "mrp",
            CheckKind::DriftBeforeDefault => "drift-before-default",
            CheckKind::DriftAfterDefault => "drift-after-default",
            CheckKind::Appendix => "appendix",
            CheckKind::Harness => "harness",
            CheckKind::ShMeasure => "sh-measure",
            CheckKind::Projection => "projection",
            CheckKind::Replication => "replication",
        }
    }

    /// Descriptive label carried by reports.
    pub fn label(self) -> &'static str {
        match self {
            CheckKind::Mrp => "representation-by-compensated-drivers-and-default-martingale",
            CheckKind::DriftBeforeDefault => "drift-before-default-bracket-over-survival",
            CheckKind::DriftAfterDefault => "drift-after-default-bracket-over-defaulted-mass",
            CheckKind::Appendix => "stopped-sigma-algebra-and-fragment-identities",
            CheckKind::Harness => "representation-immersion-and-jump-information-equivalences",
            CheckKind::ShMeasure => "fragment-martingale-measure-with-spanning-fragment",
            CheckKind::Projection => "survival-projection-matches-azema-supermartingale",
            CheckKind::Replication => "hedging-error-shrinks-under-step-halving",
        }
    }

    pub fn exact(self) -> bool {
        !matches!(self, CheckKind::Projection | CheckKind::Replication)
    }
}

/// Deliberate corruptions used to confirm that checks can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MutationSpec {
    /// Flips the sign of the after-default drift formula.
    AfterDefaultSignFlip,
    /// Drops `σ(τ)` from the middle piece of `G*_T`.
    DropTauInMiddlePiece,
    /// Uses base information on the unsettled piece of the fragment filtration.
    BaseInformationInFragment,
    /// Drops the `1/(1 − Z)` factor of the honest fragment density.
    DropShDenominator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckOptions {
    /// Random `(S, T)` pairs for the appendix identities.
    #[serde(default = "default_pairs")]
    pub appendix_pairs: usize,
    #[serde(default)]
    pub seed: u64,
    /// `a` of the honest fragment window.
    #[serde(default = "default_sh_start")]
    pub sh_start: usize,
    /// Date of the density-model measure, or the energy threshold of the honest window.
    #[serde(default = "default_sh_level")]
    pub sh_level: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation: Option<MutationSpec>,
}

fn default_pairs() -> usize {
    50
}
fn default_sh_start() -> usize {
    1
}
fn default_sh_level() -> usize {
    1
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            appendix_pairs: default_pairs(),
            seed: 0,
            sh_start: default_sh_start(),
            sh_level: default_sh_level(),
            mutation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_u_grid")]
    pub u_grid: Vec<f64>,
    #[serde(default)]
    pub n_volatility: f64,
    #[serde(default = "default_intensity")]
    pub intensity: Intensity,
    #[serde(default = "default_y")]
    pub y: YDriver,
    #[serde(default = "default_f")]
    pub f: FnSpec,
    #[serde(default = "default_test_times")]
    pub test_times: Vec<f64>,
    #[serde(default = "default_floor")]
    pub singular_floor: f64,
    #[serde(default = "default_tolerance")]
    pub monotonicity_tolerance: f64,
    /// Largest fraction of flagged paths a passing run may have.
    #[serde(default = "default_flag_limit")]
    pub max_flagged_fraction: f64,
}

fn default_paths() -> usize {
    10_000
}
fn default_dt() -> f64 {
    2f64.powi(-10)
}
fn default_horizon() -> f64 {
    2.0
}
fn default_u_grid() -> Vec<f64> {
    (1..=8).map(|j| j as f64 / 4.0).collect()
}
fn default_intensity() -> Intensity {
    Intensity::Constant { rate: 0.5 }
}
fn default_y() -> YDriver {
    YDriver::Driver
}
fn default_f() -> FnSpec {
    FnSpec::Zero
}
fn default_test_times() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0]
}
fn default_floor() -> f64 {
    1e-8
}
fn default_tolerance() -> f64 {
    1e-9
}
fn default_flag_limit() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicationSpec {
    #[serde(default = "default_claims")]
    pub claims: Vec<Claim>,
    #[serde(default = "default_rate")]
    pub rate: f64,
    #[serde(default = "default_replication_horizon")]
    pub horizon: f64,
    #[serde(default = "default_base_dt")]
    pub base_dt: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_replication_paths")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_ratio")]
    pub max_ratio: f64,
}

fn default_claims() -> Vec<Claim> {
    vec![Claim::DefaultableBond, Claim::StoppedDriver]
}
fn default_rate() -> f64 {
    0.5
}
fn default_replication_horizon() -> f64 {
    1.0
}
fn default_base_dt() -> f64 {
    1.0 / 16.0
}
fn default_levels() -> usize {
    4
}
fn default_replication_paths() -> usize {
    20_000
}
fn default_max_ratio() -> f64 {
    0.85
}

impl Default for ReplicationSpec {
    fn default() -> Self {
        Self {
            claims: default_claims(),
            rate: default_rate(),
            horizon: default_replication_horizon(),
            base_dt: default_base_dt(),
            levels: default_levels(),
            paths: default_replication_paths(),
            seed: 0,
            max_ratio: default_max_ratio(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> String {
    "artifacts".into()
}
fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv, Format::Text]
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats() }
    }
}

/// One experiment: a model (exact mode) or simulation settings (mc mode),
/// the checks to run and where to write artifacts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub mode: Mode,
    pub checks: Vec<CheckKind>,
    #[serde(default = "default_cap")]
    pub cap: usize,
    #[serde(default)]
    pub drivers: DriverKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<BaseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub options: CheckOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replication: Option<ReplicationSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_cap() -> usize {
    DEFAULT_CAP
}

/// A problem found while reading a scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line, when the key can be located.
    pub line: Option<usize>,
    pub key: String,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}: {}", self.key, self.reason),
            None => write!(f, "{}: {}", self.key, self.reason),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

pub fn parse_scenario(path: &Path) -> Result<Scenario, Diagnostics> {
    let source = std::fs::read_to_string(path).map_err(|e| {
        Diagnostics(vec![Diagnostic { line: None, key: path.display().to_string(), reason: e.to_string() }])
    })?;
    parse_scenario_str(&source)
}

pub fn parse_scenario_str(source: &str) -> Result<Scenario, Diagnostics> {
    let scenario: Scenario = toml::from_str(source).map_err(|e| Diagnostics(vec![toml_diagnostic(source, &e)]))?;
    let problems = validate(&scenario);
    if problems.is_empty() {
        Ok(scenario)
    } else {
        Err(Diagnostics(
            problems
                .into_iter()
                .map(|(key, reason)| Diagnostic { line: line_of_key(source, &key), key, reason })
                .collect(),
        ))
    }
}

/// Canonical text form with every default written out.
pub fn to_canonical_toml(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenario fields are all representable in TOML")
}

fn toml_diagnostic(source: &str, e: &toml::de::Error) -> Diagnostic {
    let line = e.span().map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
    let message = e.message().to_string();
    let key = message
        .split('`')
        .nth(1)
        .filter(|_| message.starts_with("unknown field") || message.starts_with("missing field"))
        .unwrap_or("scenario")
        .to_string();
    Diagnostic { line, key, reason: message }
}

/// First line assigning the deepest locatable segment of a dotted key,
/// including keys inside inline tables.
fn line_of_key(source: &str, key: &str) -> Option<usize> {
    let assigns = |line: &str, leaf: &str| {
        line.match_indices(leaf).any(|(at, _)| {
            let before = line[..at].chars().next_back();
            let boundary = before.is_none_or(|c| !(c.is_alphanumeric() || c == '_' || c == '-'));
            boundary && line[at + leaf.len()..].trim_start().starts_with('=')
        })
    };
    let segments: Vec<&str> = key.split('.').map(|s| s.split('[').next().unwrap_or(s)).collect();
    segments.iter().rev().find_map(|leaf| source.lines().position(|l| assigns(l, leaf)).map(|i| i + 1))
}

pub(crate) fn rational(key: &str, s: &str) -> Result<Rational, (String, String)> {
    parse_rational(s).ok_or_else(|| (key.to_string(), format!("`{s}` is not a rational number")))
}

pub(crate) fn rationals(key: &str, xs: &[String]) -> Result<Vec<Rational>, (String, String)> {
    xs.iter().enumerate().map(|(i, s)| rational(&format!("{key}[{i}]"), s)).collect()
}

/// Builds `f`, rejecting coefficients with `f(0) ≠ 0`.
pub(crate) fn scalar_fn(key: &str, spec: &FnSpec) -> Result<ScalarFn, (String, String)> {
    Ok(match spec {
        FnSpec::Zero => ScalarFn::Zero,
        FnSpec::Linear { slope } => ScalarFn::Linear { slope: rational(&format!("{key}.slope"), slope)? },
        FnSpec::Saturating { a } => ScalarFn::Saturating { a: rational(&format!("{key}.a"), a)? },
        FnSpec::Polynomial { coeffs } => {
            let c = rationals(&format!("{key}.coeffs"), coeffs)?;
            ScalarFn::polynomial(c).map_err(|_| (format!("{key}.coeffs"), "f must satisfy f(0) = 0".to_string()))?
        }
    })
}

/// Re-checks a scenario after programmatic changes such as command-line overrides.
pub fn validate_scenario(s: &Scenario) -> Result<(), Diagnostics> {
    let problems = validate(s);
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Diagnostics(problems.into_iter().map(|(key, reason)| Diagnostic { line: None, key, reason }).collect()))
    }
}

fn validate(s: &Scenario) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut push = |key: &str, reason: String| out.push((key.to_string(), reason));
    if s.checks.is_empty() {
        push("checks", "at least one check is required".into());
    }
    for c in &s.checks {
        match (s.mode, c.exact()) {
            (Mode::Exact, false) => push("checks", format!("`{}` needs mode = \"mc\"", c.name())),
            (Mode::Mc, true) => push("checks", format!("`{}` needs mode = \"exact\"", c.name())),
            _ => {}
        }
    }
    if s.output.formats.is_empty() {
        push("output.formats", "at least one format is required".into());
    }
    match s.mode {
        Mode::Exact => validate_exact(s, &mut push),
        Mode::Mc => validate_mc(s, &mut push),
    }
    out
}

fn validate_exact(s: &Scenario, push: &mut impl FnMut(&str, String)) {
    let (Some(base), Some(model)) = (&s.base, &s.model) else {
        if s.base.is_none() {
            push("base", "exact mode needs a [base] block".into());
        }
        if s.model.is_none() {
            push("model", "exact mode needs a [model] block".into());
        }
        return;
    };
    if s.mc.is_some() || s.replication.is_some() {
        push("mc", "simulation blocks are only allowed in mc mode".into());
    }
    if base.branches.is_empty() || base.branches.contains(&0) {
        push("base.branches", "need at least one step and positive branching".into());
        return;
    }
    let n = base.steps();
    let atoms = base.branches.iter().try_fold(1usize, |acc, &b| acc.checked_mul(b));
    match atoms.and_then(|a| a.checked_mul(n + 2)) {
        Some(product) if product <= s.cap => {}
        _ => push("cap", format!("the product space exceeds the atom cap {}", s.cap)),
    }
    let atoms = atoms.unwrap_or(usize::MAX);
    let mut check = |r: Result<(), (String, String)>| {
        if let Err((k, why)) = r {
            push(&k, why);
        }
    };
    let len = |key: &str, xs: usize, want: usize| -> Result<(), (String, String)> {
        if xs == want {
            Ok(())
        } else {
            Err((key.to_string(), format!("expected {want} entries, found {xs}")))
        }
    };
    match model {
        ModelSpec::Cox { survival } => check(len("model.survival", survival.len(), n + 1).and(rationals("model.survival", survival).map(drop))),
        ModelSpec::Density { mu, alpha } => {
            check(len("model.mu", mu.len(), n + 2).and(rationals("model.mu", mu).map(drop)));
            if let Some(alpha) = alpha {
                check(len("model.alpha", alpha.len(), n + 2));
                for (theta, row) in alpha.iter().enumerate() {
                    let key = format!("model.alpha[{theta}]");
                    check(len(&key, row.len(), atoms).and(rationals(&key, row).map(drop)));
                }
            }
        }
        ModelSpec::Honest { rule, times } => match (rule, times) {
            (HonestRuleSpec::Custom, Some(t)) => {
                check(len("model.times", t.len(), atoms));
                if t.iter().any(|&x| x > n + 1) {
                    check(Err(("model.times".into(), format!("times must lie in 0..={}", n + 1))));
                }
            }
            (HonestRuleSpec::Custom, None) => check(Err(("model.times".into(), "a custom rule needs times".into()))),
            (_, Some(_)) => check(Err(("model.times".into(), "times are only used by the custom rule".into()))),
            (_, None) => {}
        },
        ModelSpec::Natural { survival, n_slope, f } => {
            check(len("model.survival", survival.len(), n + 1).and(rationals("model.survival", survival).map(drop)));
            check(rational("model.n_slope", n_slope).map(drop));
            check(scalar_fn("model.f", f).map(drop));
        }
        ModelSpec::Kernel { rows } => {
            check(len("model.rows", rows.len(), atoms));
            for (i, row) in rows.iter().enumerate() {
                let key = format!("model.rows[{i}]");
                check(len(&key, row.len(), n + 2).and(rationals(&key, row).map(drop)));
            }
        }
        ModelSpec::Fixed { time } => {
            if *time > n + 1 {
                check(Err(("model.time".into(), format!("time must lie in 0..={}", n + 1))));
            }
        }
    }
}

fn validate_mc(s: &Scenario, push: &mut impl FnMut(&str, String)) {
    if s.base.is_some() || s.model.is_some() {
        push("model", "[base] and [model] are only allowed in exact mode".into());
    }
    if s.checks.contains(&CheckKind::Projection) {
        match &s.mc {
            None => push("mc", "the projection check needs an [mc] block".into()),
            Some(mc) => match mc_config(mc) {
                Err((k, why)) => push(&k, why),
                Ok(cfg) => {
                    if let Err(e) = cfg.validate() {
                        push("mc", e.to_string());
                    }
                    for &t in &mc.test_times {
                        if t != 0.0 && !mc.u_grid.contains(&t) {
                            push("mc.test_times", format!("test time {t} is not on the u-grid"));
                        }
                    }
                    if !(0.0..=1.0).contains(&mc.max_flagged_fraction) {
                        push("mc.max_flagged_fraction", "must lie in [0, 1]".into());
                    }
                }
            },
        }
    }
    if let Some(r) = &s.replication {
        if r.claims.is_empty() {
            push("replication.claims", "at least one claim is required".into());
        }
        if !(r.max_ratio > 0.0) {
            push("replication.max_ratio", "must be positive".into());
        }
    }
}

pub(crate) fn mc_config(mc: &McSpec) -> Result<McConfig, (String, String)> {
    Ok(McConfig {
        dt: mc.dt,
        horizon: mc.horizon,
        paths: mc.paths,
        seed: mc.seed,
        u_grid: mc.u_grid.clone(),
        n_volatility: mc.n_volatility,
        intensity: mc.intensity.clone(),
        y: mc.y,
        f: scalar_fn("mc.f", &mc.f)?,
        singular_floor: mc.singular_floor,
        monotonicity_tolerance: mc.monotonicity_tolerance,
    })
}

pub(crate) fn replication_config(r: &ReplicationSpec, claim: Claim) -> ReplicationConfig {
    ReplicationConfig {
        rate: r.rate,
        horizon: r.horizon,
        base_dt: r.base_dt,
        levels: r.levels,
        paths: r.paths,
        seed: r.seed,
        claim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "cox"
mode = "exact"
checks = ["mrp"]

[base]
branches = [2, 2]

[model]
kind = "cox"
survival = ["1", "1/2", "1/4"]
"#;

    #[test]
    fn minimal_cox_gets_defaults() {
        let s = parse_scenario_str(MINIMAL).unwrap();
        assert_eq!(s.cap, DEFAULT_CAP);
        assert_eq!(s.options.appendix_pairs, 50);
        assert_eq!(s.output.formats, vec![Format::Json, Format::Csv, Format::Text]);
        let canonical = to_canonical_toml(&s);
        assert_eq!(parse_scenario_str(&canonical).unwrap(), s);
        assert_eq!(to_canonical_toml(&parse_scenario_str(&canonical).unwrap()), canonical);
    }

    #[test]
    fn unknown_keys_are_errors_with_a_line() {
        let src = MINIMAL.replace("survival =", "surviving =");
        let d = parse_scenario_str(&src).unwrap_err();
        assert_eq!(d.0.len(), 1);
        assert_eq!(d.0[0].key, "surviving");
        assert!(d.0[0].line.is_some());
        let src = format!("{MINIMAL}\nextra = 1\n");
        assert!(parse_scenario_str(&src).is_err());
    }

    #[test]
    fn f_with_a_constant_term_is_rejected() {
        let src = r#"
name = "natural"
mode = "exact"
checks = ["drift-after-default"]
[base]
branches = [2, 2, 2]
[model]
kind = "natural"
survival = ["1", "3/4", "1/2", "1/4"]
n_slope = "1/8"
f = { kind = "polynomial", coeffs = ["1/4", "1"] }
"#;
        let d = parse_scenario_str(src).unwrap_err();
        assert_eq!(d.0[0].key, "model.f.coeffs");
        assert!(d.0[0].reason.contains("f(0) = 0"));
        assert_eq!(d.0[0].line, Some(11));
    }

    #[test]
    fn missing_blocks_and_cap_violations() {
        let d = parse_scenario_str("name = \"x\"\nmode = \"exact\"\nchecks = [\"mrp\"]\n").unwrap_err();
        let keys: Vec<&str> = d.0.iter().map(|d| d.key.as_str()).collect();
        assert_eq!(keys, ["base", "model"]);
        let src = MINIMAL.replace("mode = \"exact\"", "mode = \"exact\"\ncap = 8");
        let d = parse_scenario_str(&src).unwrap_err();
        assert_eq!(d.0[0].key, "cap");
        assert_eq!(d.0[0].line, Some(4));
    }

    #[test]
    fn mode_and_check_must_agree() {
        let src = MINIMAL.replace("[\"mrp\"]", "[\"projection\"]");
        assert!(parse_scenario_str(&src).is_err());
    }

    #[test]
    fn wrong_lengths_and_bad_rationals() {
        let src = MINIMAL.replace("[\"1\", \"1/2\", \"1/4\"]", "[\"1\", \"x\"]");
        let d = parse_scenario_str(&src).unwrap_err();
        assert_eq!(d.0[0].key, "model.survival");
    }
}
