use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use enlargement::cli::{
    apply_overrides, exit_code, model_summary, parse_scenario, run_scenario, validate_scenario, Format, Mode, Overrides,
    Report, Scenario, EXIT_ENGINE_ERROR,
};

#[derive(Parser)]
#[command(name = "enlargement", version, about = "Checks and simulations for progressively enlarged filtrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an exact-mode model and summarize it.
    Model(ScenarioArgs),
    /// Run the checks of a scenario.
    Check(ScenarioArgs),
    /// Run the Monte Carlo checks of an mc-mode scenario.
    Mc(ScenarioArgs),
    /// Re-render a JSON report.
    Report {
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    scenario: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    /// Largest product-space atom count in exact mode.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
            FormatArg::Text => Format::Text,
        }
    }
}

fn fail(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {message}");
    EXIT_ENGINE_ERROR
}

fn load(args: &ScenarioArgs) -> Result<Scenario, i32> {
    let mut s = parse_scenario(&args.scenario).map_err(fail)?;
    let overrides = Overrides {
        seed: args.seed,
        paths: args.paths,
        dt: args.dt,
        cap: args.cap,
        out: args.out.clone(),
        format: args.format.map(Format::from),
    };
    apply_overrides(&mut s, &overrides);
    validate_scenario(&s).map_err(fail)?;
    Ok(s)
}

fn emit(report: &Report, dir: &Path, formats: &[Format]) -> i32 {
    if let Err(e) = report.write_artifacts(dir, formats) {
        return fail(e);
    }
    print!("{}", report.to_text());
    exit_code(report)
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Model(args) => {
            let s = match load(&args) {
                Ok(s) => s,
                Err(code) => return code,
            };
            if s.mode != Mode::Exact {
                return fail("`model` needs an exact-mode scenario");
            }
            match model_summary(&s) {
                Ok(r) => emit(&r, Path::new(&s.output.dir), &s.output.formats),
                Err(e) => fail(e),
            }
        }
        Command::Check(args) => scenario_command(&args, None),
        Command::Mc(args) => scenario_command(&args, Some(Mode::Mc)),
        Command::Report { report, out, format } => {
            let text = match std::fs::read_to_string(&report) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", report.display())),
            };
            let parsed = match Report::from_json(&text) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let formats = format.map_or_else(|| vec![Format::Json, Format::Csv, Format::Text], |f| vec![f.into()]);
            emit(&parsed, &out.unwrap_or_else(|| PathBuf::from(".")), &formats)
        }
    }
}

fn scenario_command(args: &ScenarioArgs, required: Option<Mode>) -> i32 {
    let s = match load(args) {
        Ok(s) => s,
        Err(code) => return code,
    };
    if required.is_some_and(|m| m != s.mode) {
        return fail("`mc` needs an mc-mode scenario");
    }
    match run_scenario(&s) {
        Ok(r) => emit(&r, Path::new(&s.output.dir), &s.output.formats),
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let code = run(Cli::parse());
    ExitCode::from(code as u8)
}
