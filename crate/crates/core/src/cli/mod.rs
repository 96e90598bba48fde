//! Scenario files, the experiment runner and report artifacts behind the
//! `enlargement` binary.
//!
//! A scenario is a TOML file naming a model (exact mode) or simulation
//! settings (mc mode) and a list of checks. Running it yields a versioned JSON
//! report, CSV tables and a text summary. Exit codes: 0 when every check
//! passes, 1 when a check fails, 2 on invalid input or engine errors.

mod report;
mod run;
mod scenario;

use std::path::PathBuf;

pub use report::{process_json, rational_json, write_atomic, CheckResult, Report, Table, REPORT_SCHEMA};
pub use run::{build_model, model_summary, run_scenario, BuiltModel};
pub use scenario::{
    parse_scenario, parse_scenario_str, to_canonical_toml, validate_scenario, BaseSpec, CheckKind, CheckOptions,
    Diagnostic, Diagnostics, DriverKind, FnSpec, Format, HonestRuleSpec, McSpec, Mode, ModelSpec, MutationSpec,
    OutputSpec, ReplicationSpec, Scenario, DEFAULT_CAP,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ENGINE_ERROR: i32 = 2;

/// Command-line settings that take precedence over the scenario file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub dt: Option<f64>,
    pub cap: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn apply_overrides(s: &mut Scenario, o: &Overrides) {
    if let Some(seed) = o.seed {
        s.options.seed = seed;
        if let Some(mc) = &mut s.mc {
            mc.seed = seed;
        }
        if let Some(r) = &mut s.replication {
            r.seed = seed;
        }
    }
    if let Some(paths) = o.paths {
        if let Some(mc) = &mut s.mc {
            mc.paths = paths;
        }
        if let Some(r) = &mut s.replication {
            r.paths = paths;
        }
    }
    if let (Some(dt), Some(mc)) = (o.dt, &mut s.mc) {
        mc.dt = dt;
    }
    if let Some(cap) = o.cap {
        s.cap = cap;
    }
    if let Some(out) = &o.out {
        s.output.dir = out.display().to_string();
    }
    if let Some(format) = o.format {
        s.output.formats = vec![format];
    }
}

pub fn exit_code(report: &Report) -> i32 {
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_CHECK_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_reach_every_block() {
        let mut s = parse_scenario_str(
            "name = \"m\"\nmode = \"mc\"\nchecks = [\"projection\", \"replication\"]\n[mc]\n[replication]\n",
        )
        .unwrap();
        let o = Overrides { seed: Some(9), paths: Some(100), dt: Some(0.125), cap: Some(64), format: Some(Format::Csv), ..Default::default() };
        apply_overrides(&mut s, &o);
        let mc = s.mc.as_ref().unwrap();
        assert_eq!((mc.seed, mc.paths, mc.dt), (9, 100, 0.125));
        assert_eq!(s.replication.as_ref().unwrap().paths, 100);
        assert_eq!(s.cap, 64);
        assert_eq!(s.output.formats, vec![Format::Csv]);
        assert!(validate_scenario(&s).is_ok());
    }
}
