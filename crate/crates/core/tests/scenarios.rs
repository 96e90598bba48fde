use std::path::{Path, PathBuf};
use std::process::Command;

use enlargement::cli::{parse_scenario, parse_scenario_str, run_scenario, to_canonical_toml, Mode, Report};

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn scenario_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    files
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_enlargement"))
}

/// Scenarios that are expected to fail a check.
const FAILING: [&str; 2] = ["mutation-appendix", "mutation-sign-flip"];

#[test]
fn golden_files_are_canonical() {
    let files = scenario_files();
    assert!(files.len() >= 20);
    for path in files {
        let text = std::fs::read_to_string(&path).unwrap();
        let scenario = parse_scenario(&path).unwrap_or_else(|d| panic!("{}: {d}", path.display()));
        let canonical = to_canonical_toml(&scenario);
        if std::env::var_os("ENLARGEMENT_REWRITE_GOLDEN").is_some() {
            std::fs::write(&path, &canonical).unwrap();
            continue;
        }
        assert_eq!(canonical, text, "{} is not in canonical form", path.display());
        assert_eq!(parse_scenario_str(&canonical).unwrap(), scenario);
    }
}

#[test]
fn exact_scenarios_exit_with_their_verdict() {
    for path in scenario_files() {
        let scenario = parse_scenario(&path).unwrap();
        if scenario.mode != Mode::Exact {
            continue;
        }
        let out = tempfile::tempdir().unwrap();
        let status = bin().arg("check").arg(&path).arg("--out").arg(out.path()).output().unwrap();
        let expected = if FAILING.contains(&scenario.name.as_str()) { 1 } else { 0 };
        assert_eq!(status.status.code(), Some(expected), "{}: {}", path.display(), String::from_utf8_lossy(&status.stdout));
        assert!(out.path().join(format!("{}.json", scenario.name)).exists());
    }
}

#[test]
fn exact_reruns_are_byte_identical() {
    for name in ["cox-full", "honest-walk", "natural-linear"] {
        let path = scenario_dir().join(format!("{name}.toml"));
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        for dir in [&a, &b] {
            let st = bin().arg("check").arg(&path).arg("--out").arg(dir.path()).status().unwrap();
            assert_eq!(st.code(), Some(0));
        }
        let mut names: Vec<_> = std::fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            let x = std::fs::read(a.path().join(&n)).unwrap();
            let y = std::fs::read(b.path().join(&n)).unwrap();
            assert_eq!(x, y, "{name}: {n:?} differs");
        }
    }
}

#[test]
fn parse_errors_exit_with_two_and_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "name = \"bad\"\nmode = \"exact\"\nchecks = [\"mrp\"]\nunknown_key = 3\n").unwrap();
    let out = bin().arg("check").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown_key"), "{err}");

    let missing = bin().arg("check").arg(dir.path().join("absent.toml")).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn report_subcommand_reads_back_artifacts() {
    let out = tempfile::tempdir().unwrap();
    let path = scenario_dir().join("mutation-sign-flip.toml");
    let st = bin().arg("check").arg(&path).arg("--out").arg(out.path()).status().unwrap();
    assert_eq!(st.code(), Some(1));
    let json = out.path().join("mutation-sign-flip.json");
    let report = Report::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(!report.passed);
    let again = bin().arg("report").arg(&json).arg("--out").arg(out.path()).arg("--format").arg("text").output().unwrap();
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&again.stdout), report.to_text());
}

#[test]
fn model_subcommand_summarizes() {
    let out = tempfile::tempdir().unwrap();
    let path = scenario_dir().join("cox-basic.toml");
    let o = bin().arg("model").arg(&path).arg("--out").arg(out.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn library_and_binary_agree() {
    let path = scenario_dir().join("honest-walk.toml");
    let scenario = parse_scenario(&path).unwrap();
    let report = run_scenario(&scenario).unwrap();
    let out = tempfile::tempdir().unwrap();
    bin().arg("check").arg(&path).arg("--out").arg(out.path()).status().unwrap();
    let written = std::fs::read_to_string(out.path().join("honest-walk.json")).unwrap();
    assert_eq!(written, report.to_json());
}
