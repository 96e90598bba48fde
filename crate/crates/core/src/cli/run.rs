use num::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::report::{process_json, rational_json, CheckResult, Report, Table};
use super::scenario::{
    mc_config, rationals, replication_config, scalar_fn, CheckKind, DriverKind, HonestRuleSpec, Mode, ModelSpec,
    MutationSpec, Scenario,
};
use crate::calculus::{
    build_sh_measure_honest_with, default_martingale_l, density_sh_measure, drift_after_honest_signed,
    drift_before_formula, drift_exact, first_drift_mismatch, natural_drift_report, resolve_after_default_sign,
    sh_measure_check, AfterDefaultSign, DriftRegion, HonestShMutation, MeasureChange, SignResolution,
};
use crate::enlargement::{
    check_appendix_identities_with, gtau_equality, random_stopping_time, AppendixMutation, DefaultKernel, EnlargedSpace,
};
use crate::error::{Error, Result};
use crate::finite_prob::{format_rational, int, ProcessTable, Rational, StoppingTime};
use crate::models::{
    coordinate_drivers, cox_model, density_model, fixed_time_model, honest_time_model, honesty_defect, kernel_model,
    natural_model_discrete, walk_driver, BaseTree, CoxParams, DensityParams, HonestRule, NaturalModel, NaturalParams,
};
use crate::montecarlo::{natural_experiment, replication_backtest};
use crate::representation::{
    fragment_mrp_check, immersion_check, mrp_check, theorem_harness, CoveringStatus, MrpCertificate,
};

/// An exact-mode model with its drivers lifted to the product space.
pub struct BuiltModel {
    pub tree: BaseTree,
    pub space: EnlargedSpace,
    pub drivers: Vec<ProcessTable>,
    pub natural: Option<NaturalModel>,
    pub density: Option<DensityParams>,
}

fn parameters(r: std::result::Result<Vec<Rational>, (String, String)>) -> Result<Vec<Rational>> {
    r.map_err(|(k, why)| Error::Scenario(format!("{k}: {why}")))
}

pub fn build_model(s: &Scenario) -> Result<BuiltModel> {
    let (Some(base), Some(model)) = (&s.base, &s.model) else {
        return Err(Error::Scenario("exact mode needs [base] and [model]".into()));
    };
    let tree = BaseTree::uniform(&base.branches)?;
    let (bs, bf) = (&tree.space, &tree.filtration);
    let atoms = tree.atoms();
    let mut natural = None;
    let mut density = None;
    let space = match model {
        ModelSpec::Cox { survival } => {
            let survival = parameters(rationals("model.survival", survival))?;
            cox_model(bs, bf, &CoxParams::deterministic(&survival, atoms))?
        }
        ModelSpec::Density { mu, alpha } => {
            let mu = parameters(rationals("model.mu", mu))?;
            let params = match alpha {
                None => DensityParams::independent(bf, mu),
                Some(rows) => {
                    let terminal = rows
                        .iter()
                        .enumerate()
                        .map(|(theta, r)| parameters(rationals(&format!("model.alpha[{theta}]"), r)))
                        .collect::<Result<Vec<_>>>()?;
                    DensityParams::from_terminal(bs, bf, mu, terminal)?
                }
            };
            let space = density_model(bs, bf, &params)?;
            density = Some(params);
            space
        }
        ModelSpec::Honest { rule, times } => {
            let rule = match rule {
                HonestRuleSpec::LastMaximum => HonestRule::LastMaximum(walk_driver(bs, bf)?),
                HonestRuleSpec::LastZero => HonestRule::LastZero(walk_driver(bs, bf)?),
                HonestRuleSpec::Custom => HonestRule::Custom(times.clone().unwrap_or_default()),
            };
            honest_time_model(bs, bf, &rule)?
        }
        ModelSpec::Natural { survival, n_slope, f } => {
            let survival = parameters(rationals("model.survival", survival))?;
            let slope = parameters(rationals("model.n_slope", std::slice::from_ref(n_slope)))?.remove(0);
            let f = scalar_fn("model.f", f).map_err(|(k, why)| Error::Scenario(format!("{k}: {why}")))?;
            let walk = walk_driver(bs, bf)?;
            let n = walk.map(|k, i, w| int(1) + (w - walk.at(k.min(1), i)) * &slope);
            let survival = CoxParams::deterministic(&survival, atoms).survival;
            let model = natural_model_discrete(bs, bf, &NaturalParams { n, survival, y: walk, f })?;
            let space = model.space.clone();
            natural = Some(model);
            space
        }
        ModelSpec::Kernel { rows } => {
            let rows = rows
                .iter()
                .enumerate()
                .map(|(i, r)| parameters(rationals(&format!("model.rows[{i}]"), r)))
                .collect::<Result<Vec<_>>>()?;
            kernel_model(bs, bf, DefaultKernel::new(rows)?)?
        }
        ModelSpec::Fixed { time } => fixed_time_model(bs, bf, *time)?,
    };
    if space.atoms() > s.cap {
        return Err(Error::Scenario(format!("product space has {} atoms, above the cap {}", space.atoms(), s.cap)));
    }
    let base_drivers = match s.drivers {
        DriverKind::Walk => vec![walk_driver(bs, bf)?],
        DriverKind::Coordinate => coordinate_drivers(bs, bf),
    };
    let drivers = base_drivers.iter().map(|d| space.lift_process(d)).collect();
    Ok(BuiltModel { tree, space, drivers, natural, density })
}

/// Runs every requested check. Engine failures are errors; failed checks
/// are recorded in the report.
pub fn run_scenario(s: &Scenario) -> Result<Report> {
    let mut checks = Vec::with_capacity(s.checks.len());
    match s.mode {
        Mode::Exact => {
            let model = build_model(s)?;
            for &c in &s.checks {
                checks.push(run_exact_check(s, &model, c)?);
            }
        }
        Mode::Mc => {
            for &c in &s.checks {
                checks.push(run_mc_check(s, c)?);
            }
        }
    }
    Ok(Report::new(&s.name, mode_name(s.mode), checks))
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Mc => "mc",
    }
}

fn result(kind: CheckKind, passed: bool, summary: String, details: Value, tables: Vec<Table>) -> CheckResult {
    CheckResult { check: kind.name().into(), label: kind.label().into(), passed, summary, details, tables }
}

fn run_exact_check(s: &Scenario, m: &BuiltModel, kind: CheckKind) -> Result<CheckResult> {
    match kind {
        CheckKind::Mrp => check_mrp(m),
        CheckKind::DriftBeforeDefault => check_drift_before(m),
        CheckKind::DriftAfterDefault => check_drift_after(s, m),
        CheckKind::Appendix => check_appendix(s, m),
        CheckKind::Harness => check_harness(m),
        CheckKind::ShMeasure => check_sh(s, m),
        CheckKind::Projection | CheckKind::Replication => {
            Err(Error::Scenario(format!("`{}` is a Monte Carlo check", kind.name())))
        }
    }
}

fn certificate_json(c: &MrpCertificate) -> Value {
    let dims: Vec<Value> = c
        .dimensions
        .iter()
        .map(|d| json!({"step": d.step, "martingale_dim": d.martingale_dim, "span_dim": d.span_dim}))
        .collect();
    let witness = c.witness.as_ref().map_or(Value::Null, |w| {
        json!({"step": w.step, "block": w.block, "martingale": process_json(&w.martingale)})
    });
    json!({"spanning": c.is_spanning(), "dimensions": dims, "witness": witness})
}

fn check_mrp(m: &BuiltModel) -> Result<CheckResult> {
    let space = &m.space;
    let mut g_drivers =
        m.drivers.iter().map(|d| Ok(drift_exact(d, space)?.martingale_part)).collect::<Result<Vec<_>>>()?;
    g_drivers.push(default_martingale_l(space)?);
    let enlarged = mrp_check(space.weights(), space.g(), &g_drivers)?;
    let base = mrp_check(space.weights(), space.lifted(), &m.drivers)?;
    let mut table = Table::new("dimensions", &["step", "martingale_dim", "span_dim"]);
    for d in &enlarged.dimensions {
        table.push(vec![d.step.to_string(), d.martingale_dim.to_string(), d.span_dim.to_string()]);
    }
    let summary = match &enlarged.witness {
        None => "compensated drivers and the default martingale span every node".to_string(),
        Some(w) => format!("gap at step {} in block {}", w.step, w.block),
    };
    let details = json!({"enlarged": certificate_json(&enlarged), "base": certificate_json(&base)});
    Ok(result(CheckKind::Mrp, enlarged.is_spanning(), summary, details, vec![table]))
}

fn max_abs_in_region(x: &ProcessTable, space: &EnlargedSpace, k: usize, region: DriftRegion) -> Rational {
    let tau = space.tau().values();
    (0..space.atoms())
        .filter(|&i| region.contains(tau[i], k))
        .map(|i| x.at(k, i).abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

fn mismatch_json(basis: usize, k: usize, atom: usize, formula: &ProcessTable, exact: &ProcessTable) -> Value {
    json!({
        "basis": basis,
        "step": k,
        "atom": atom,
        "formula": rational_json(formula.at(k, atom)),
        "exact": rational_json(exact.at(k, atom)),
    })
}

fn drift_table(space: &EnlargedSpace, rows: &[(usize, ProcessTable, ProcessTable)], region: DriftRegion) -> Table {
    let mut table = Table::new("drift", &["basis", "step", "max_abs_formula", "max_abs_difference"]);
    for (b, formula, exact) in rows {
        let diff = formula.sub(exact).expect("same shape");
        for k in 1..space.columns() {
            table.push(vec![
                b.to_string(),
                k.to_string(),
                format_rational(&max_abs_in_region(formula, space, k, region)),
                format_rational(&max_abs_in_region(&diff, space, k, region)),
            ]);
        }
    }
    table
}

fn check_drift_before(m: &BuiltModel) -> Result<CheckResult> {
    let space = &m.space;
    let mut witness = Value::Null;
    let mut rows = Vec::new();
    for (b, x) in space.f_martingale_basis()?.iter().enumerate() {
        let formula = drift_before_formula(x, space)?;
        let exact = drift_exact(x, space)?.drift;
        if witness.is_null() {
            if let Some((k, i)) = first_drift_mismatch(&formula, &exact, space, DriftRegion::BeforeDefault) {
                witness = mismatch_json(b, k, i, &formula, &exact);
            }
        }
        rows.push((b, formula, exact));
    }
    let passed = witness.is_null();
    let summary = if passed {
        format!("formula equals the exact drift on {{τ ≥ k}} for {} basis martingales", rows.len())
    } else {
        "formula differs from the exact drift before default".to_string()
    };
    let table = drift_table(space, &rows, DriftRegion::BeforeDefault);
    Ok(result(CheckKind::DriftBeforeDefault, passed, summary, json!({"basis_size": rows.len(), "witness": witness}), vec![table]))
}

fn resolution_name(r: SignResolution) -> &'static str {
    match r {
        SignResolution::Minus => "minus",
        SignResolution::Plus => "plus",
        SignResolution::Both => "both",
        SignResolution::Neither => "neither",
    }
}

fn check_drift_after(s: &Scenario, m: &BuiltModel) -> Result<CheckResult> {
    let space = &m.space;
    let basis = space.f_martingale_basis()?;
    if let Some(model) = &m.natural {
        let mut table = Table::new("deviation", &["basis", "step", "max_abs_deviation", "max_abs_defect"]);
        let mut explained = true;
        let mut largest = Rational::zero();
        for (b, x) in basis.iter().enumerate() {
            let r = natural_drift_report(x, model)?;
            explained &= r.deviation_is_defect();
            largest = largest.max(r.max_abs_deviation());
            for k in 1..space.columns() {
                table.push(vec![
                    b.to_string(),
                    k.to_string(),
                    format_rational(&max_abs_in_region(&r.deviation, space, k, DriftRegion::All)),
                    format_rational(&max_abs_in_region(&r.defect, space, k, DriftRegion::All)),
                ]);
            }
        }
        let summary = format!("deviation from the exact drift is the recorded defect; largest {}", format_rational(&largest));
        let details = json!({"deviation_is_defect": explained, "max_abs_deviation": rational_json(&largest)});
        return Ok(result(CheckKind::DriftAfterDefault, explained, summary, details, vec![table]));
    }
    if let Some(k) = honesty_defect(space.tau().values(), space.lifted()) {
        return Err(Error::NotHonest(format!("default time is not determined by stage {k} on {{τ ≤ {k}}}")));
    }
    let sign = if s.options.mutation == Some(MutationSpec::AfterDefaultSignFlip) {
        AfterDefaultSign::Plus
    } else {
        AfterDefaultSign::Minus
    };
    let mut witness = Value::Null;
    let mut resolutions = Vec::new();
    let mut rows = Vec::new();
    for (b, x) in basis.iter().enumerate() {
        let exact = drift_exact(x, space)?.drift;
        let formula = drift_after_honest_signed(x, space, sign)?;
        resolutions.push(resolution_name(resolve_after_default_sign(x, space)?));
        if witness.is_null() {
            if let Some((k, i)) = first_drift_mismatch(&formula, &exact, space, DriftRegion::AfterDefault) {
                witness = mismatch_json(b, k, i, &formula, &exact);
            }
        }
        rows.push((b, formula, exact));
    }
    let stable = resolutions.iter().all(|r| matches!(*r, "minus" | "both"));
    let passed = witness.is_null() && stable;
    let summary = if passed {
        "formula equals the exact drift on {τ < k}; the sign resolves to minus".to_string()
    } else {
        "formula differs from the exact drift after default".to_string()
    };
    let details = json!({"sign_resolutions": resolutions, "witness": witness});
    let table = drift_table(space, &rows, DriftRegion::AfterDefault);
    Ok(result(CheckKind::DriftAfterDefault, passed, summary, details, vec![table]))
}

fn check_appendix(s: &Scenario, m: &BuiltModel) -> Result<CheckResult> {
    let space = &m.space;
    let mutation = match s.options.mutation {
        Some(MutationSpec::DropTauInMiddlePiece) => Some(AppendixMutation::DropTauInMiddlePiece),
        Some(MutationSpec::BaseInformationInFragment) => Some(AppendixMutation::BaseInformationInFragment),
        _ => None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(s.options.seed);
    let mut counts: Map<String, Value> = Map::new();
    let mut table = Table::new("pairs", &["pair", "identity", "passed"]);
    let mut witness = Value::Null;
    for pair in 0..s.options.appendix_pairs {
        let sv = random_stopping_time(space.g(), &mut rng, 0.3);
        let tv = random_stopping_time(space.g(), &mut rng, 0.3);
        let report = check_appendix_identities_with(space, &sv, &tv, mutation)?;
        for c in &report.checks {
            let entry = counts.entry(c.name.to_string()).or_insert_with(|| json!({"passed": 0, "failed": 0}));
            let key = if c.passed { "passed" } else { "failed" };
            entry[key] = json!(entry[key].as_u64().unwrap_or(0) + 1);
            table.push(vec![pair.to_string(), c.name.to_string(), c.passed.to_string()]);
            if let (Some(w), true) = (&c.witness, witness.is_null()) {
                witness = json!({
                    "pair": pair,
                    "identity": c.name,
                    "atoms": w.atoms,
                    "detail": w.detail,
                    "s": sv.values(),
                    "t": tv.values(),
                });
            }
        }
    }
    let passed = witness.is_null();
    let summary = if passed {
        format!("all identities hold on {} random pairs", s.options.appendix_pairs)
    } else {
        format!("identity `{}` fails", witness["identity"].as_str().unwrap_or("?"))
    };
    let details = json!({"pairs": s.options.appendix_pairs, "identities": counts, "witness": witness});
    Ok(result(CheckKind::Appendix, passed, summary, details, vec![table]))
}

fn covering_json(c: &CoveringStatus) -> Value {
    match c {
        CoveringStatus::Verified => json!({"status": "verified"}),
        CoveringStatus::Failed(why) => json!({"status": "failed", "reason": why}),
        CoveringStatus::Missing(why) => json!({"status": "missing", "reason": why}),
    }
}

fn check_harness(m: &BuiltModel) -> Result<CheckResult> {
    let r = theorem_harness(&m.space, &m.drivers)?;
    let mut table = Table::new("equivalences", &["name", "lhs", "rhs", "applicable", "holds"]);
    for e in &r.equivalences {
        table.push(vec![
            e.name.to_string(),
            e.lhs.to_string(),
            e.rhs.to_string(),
            e.applicable.to_string(),
            e.holds().to_string(),
        ]);
    }
    let equivalences: Vec<Value> = r
        .equivalences
        .iter()
        .map(|e| json!({"name": e.name, "lhs": e.lhs, "rhs": e.rhs, "applicable": e.applicable, "holds": e.holds()}))
        .collect();
    let details = json!({
        "stopped_representation": r.stopped_representation,
        "driver_predictable_at_default": r.driver_predictable_at_default,
        "no_jump_information": r.no_jump_information,
        "immersion": r.immersion,
        "global_representation": r.global_representation,
        "raw_representation": r.raw_representation,
        "covering": covering_json(&r.covering),
        "equivalences": equivalences,
    });
    let held = r.equivalences.iter().filter(|e| e.holds()).count();
    let summary = format!("{held} of {} equivalences hold", r.equivalences.len());
    Ok(result(CheckKind::Harness, r.all_hold(), summary, details, vec![table]))
}

fn check_sh(s: &Scenario, m: &BuiltModel) -> Result<CheckResult> {
    let space = &m.space;
    let g = space.g();
    let (measure, start, end, construction): (MeasureChange, StoppingTime, StoppingTime, &str) =
        match (s.model.as_ref().map(ModelSpec::kind), &m.density) {
            (Some("density"), Some(params)) => {
                let n = s.options.sh_level;
                let qp = density_sh_measure(space, params, n)?;
                (qp, StoppingTime::constant(0, g), space.g_stopping_time(vec![n; space.atoms()])?, "inverse-density")
            }
            (Some("honest"), _) => {
                let mutation =
                    (s.options.mutation == Some(MutationSpec::DropShDenominator)).then_some(HonestShMutation::DropDenominator);
                let level = int(s.options.sh_level as i64);
                let built = build_sh_measure_honest_with(space, s.options.sh_start, &level, mutation)?;
                (built.measure, built.s, built.t, "honest-window")
            }
            _ => (MeasureChange::identity(space.atoms()), StoppingTime::constant(0, g), StoppingTime::infinite(g), "reference"),
        };
    let basis = space.f_martingale_basis()?;
    let sh = sh_measure_check(space, &measure, &start, &end, &basis)?;
    let window = json!({"s": start.values(), "t": end.values()});
    let (passed, summary, fragment) = match sh.witness {
        Some(w) => (
            false,
            format!("basis martingale {} drifts at step {} under the measure", w.basis_index, w.step),
            json!({"basis_index": w.basis_index, "step": w.step}),
        ),
        None => {
            let cert = fragment_mrp_check(space, &measure, &start, &end, &m.drivers)?;
            let summary = if cert.is_spanning() {
                "fragments are martingales and the drivers span the fragment".to_string()
            } else {
                "fragments are martingales but the drivers leave a gap".to_string()
            };
            (cert.is_spanning(), summary, certificate_json(&cert))
        }
    };
    let density: Vec<Value> = measure.density().iter().map(rational_json).collect();
    let details = json!({"construction": construction, "window": window, "density": density, "result": fragment});
    Ok(result(CheckKind::ShMeasure, passed, summary, details, Vec::new()))
}

fn run_mc_check(s: &Scenario, kind: CheckKind) -> Result<CheckResult> {
    match kind {
        CheckKind::Projection => {
            let spec = s.mc.as_ref().ok_or_else(|| Error::Scenario("missing [mc] block".into()))?;
            let cfg = mc_config(spec).map_err(|(k, why)| Error::Scenario(format!("{k}: {why}")))?;
            let e = natural_experiment(&cfg, &spec.test_times)?;
            let mut rows = Table::new("projection", &["t", "survival", "projected", "standard_error", "passed"]);
            for r in &e.projection.rows {
                rows.push(vec![
                    r.t.to_string(),
                    r.survival.to_string(),
                    r.projected.to_string(),
                    r.standard_error.to_string(),
                    r.passed.to_string(),
                ]);
            }
            let mut cdf = Table::new("cdf-martingale", &["u", "mean_start", "mean_terminal", "standard_error", "passed"]);
            for r in &e.cdf_martingale {
                cdf.push(vec![
                    r.u.to_string(),
                    r.mean_start.to_string(),
                    r.mean_terminal.to_string(),
                    r.standard_error.to_string(),
                    r.passed.to_string(),
                ]);
            }
            let passed = e.projection.passed && e.flagged_fraction < spec.max_flagged_fraction;
            let summary = format!(
                "{} of {} times within 3 standard errors; flagged fraction {}",
                e.projection.rows.iter().filter(|r| r.passed).count(),
                e.projection.rows.len(),
                e.flagged_fraction
            );
            let details = json!({
                "paths_used": e.projection.paths_used,
                "flagged_fraction": e.flagged_fraction,
                "projection_passed": e.projection.passed,
                "cdf_martingale_passed": e.cdf_martingale.iter().all(|r| r.passed),
            });
            Ok(result(kind, passed, summary, details, vec![rows, cdf]))
        }
        CheckKind::Replication => {
            let spec = s.replication.clone().unwrap_or_default();
            let mut table = Table::new("levels", &["claim", "dt", "rms_error", "ratio"]);
            let mut passed = true;
            let mut claims = Vec::new();
            for &claim in &spec.claims {
                let r = replication_backtest(&replication_config(&spec, claim))?;
                passed &= r.converges(spec.max_ratio);
                let name = serde_json::to_value(claim).expect("claim name");
                for (j, l) in r.levels.iter().enumerate() {
                    let ratio = if j == 0 { String::new() } else { r.ratios[j - 1].to_string() };
                    table.push(vec![name.as_str().unwrap_or("").into(), l.dt.to_string(), l.rms_error.to_string(), ratio]);
                }
                claims.push(json!({"claim": name, "ratios": r.ratios, "converges": r.converges(spec.max_ratio)}));
            }
            let summary = format!("error ratio per halving at most {} for every claim: {passed}", spec.max_ratio);
            Ok(result(kind, passed, summary, json!({"claims": claims}), vec![table]))
        }
        other => Err(Error::Scenario(format!("`{}` is an exact-mode check", other.name()))),
    }
}

/// Shape, default law and structural flags of an exact-mode model.
pub fn model_summary(s: &Scenario) -> Result<Report> {
    let m = build_model(s)?;
    let space = &m.space;
    let mut law = Table::new("default-law", &["time", "probability"]);
    let mut probabilities = Vec::new();
    for k in 0..space.columns() {
        let p: Rational = (0..space.atoms()).filter(|&i| space.tau().value(i) == k).map(|i| space.weights()[i].clone()).sum();
        let label = if k == space.terminal() { "never".to_string() } else { k.to_string() };
        law.push(vec![label, format_rational(&p)]);
        probabilities.push(rational_json(&p));
    }
    let honest = honesty_defect(space.tau().values(), space.lifted()).is_none();
    let details = json!({
        "model": s.model.as_ref().map(ModelSpec::kind),
        "steps": m.tree.steps(),
        "base_atoms": m.tree.atoms(),
        "product_atoms": space.atoms(),
        "drivers": m.drivers.len(),
        "default_law": probabilities,
        "honest": honest,
        "immersion": immersion_check(space)?,
        "no_jump_information": gtau_equality(space),
    });
    let summary = format!("{} product atoms over {} steps", space.atoms(), m.tree.steps());
    let check = CheckResult {
        check: "model".into(),
        label: "model-summary".into(),
        passed: true,
        summary,
        details,
        tables: vec![law],
    };
    Ok(Report::new(&s.name, "model", vec![check]))
}
