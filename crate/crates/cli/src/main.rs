//! `flapsim`: run flapping-wing transmission scenarios from config files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use flapsim_cli::config::{ConfigErrors, ConfigIssue, Mode, ScenarioConfig};
use flapsim_cli::run::{self, RunError};
use flapsim_cli::scenarios;

#[derive(Parser, Debug)]
#[command(name = "flapsim", version, about = "Flapping-wing transmission simulator")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,

    /// Print the resolved configuration in canonical form and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    /// Reserved. Every computation is deterministic, so there is no seed to
    /// disable; passing this flag is an error.
    #[arg(long, global = true, hide = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one model and write its trajectory and summary.
    Simulate { scenario: String },
    /// Steady amplitude over a set of drive frequencies.
    Sweep { scenario: String },
    /// Search pivot radius and stiffness for a target amplitude.
    Design { scenario: String },
    /// Stiffness and stress of beam-pivot layouts.
    Pivot { scenario: String },
    /// Run a scenario in whatever mode it declares.
    Run { scenario: String },
    /// List built-in scenarios.
    ListScenarios,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'static str,
    message: String,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    issues: &'a [ConfigIssue],
}

fn report(kind: &'static str, message: String, issues: &[ConfigIssue]) {
    let r = ErrorReport {
        error: kind,
        message,
        issues,
    };
    eprintln!("{}", serde_json::to_string_pretty(&r).expect("error report serializes"));
}

fn load(scenario: &str) -> Result<String, ConfigErrors> {
    if let Some(b) = scenarios::find(scenario) {
        return Ok(b.text.to_string());
    }
    std::fs::read_to_string(scenario).map_err(|e| {
        ConfigErrors(vec![ConfigIssue {
            line: None,
            key: scenario.to_string(),
            message: format!("not a built-in scenario and cannot be read: {e}"),
        }])
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seedless {
        report(
            "usage",
            "--seedless is reserved: flapsim uses no random numbers".into(),
            &[],
        );
        return ExitCode::from(1);
    }

    let (scenario, mode) = match &cli.command {
        Command::ListScenarios => {
            for b in scenarios::BUILT_INS {
                println!("{:<24} {}", b.name, b.description());
            }
            return ExitCode::SUCCESS;
        }
        Command::Simulate { scenario } => (scenario, Some(Mode::Simulate)),
        Command::Sweep { scenario } => (scenario, Some(Mode::Sweep)),
        Command::Design { scenario } => (scenario, Some(Mode::Design)),
        Command::Pivot { scenario } => (scenario, Some(Mode::Pivot)),
        Command::Run { scenario } => (scenario, None),
    };

    let cfg = match load(scenario).and_then(|text| ScenarioConfig::parse(&text, mode)) {
        Ok(cfg) => cfg,
        Err(ConfigErrors(issues)) => {
            report("config", format!("{} problem(s) in {scenario}", issues.len()), &issues);
            return ExitCode::from(1);
        }
    };

    if cli.dump_config {
        print!("{}", cfg.to_text());
        return ExitCode::SUCCESS;
    }

    match run::execute(&cfg, &cli.output_dir) {
        Ok(r) => {
            println!("{}: {}", cfg.name, r.headline);
            for p in &r.written {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let (kind, issues) = match &e {
                RunError::Invalid(issues) => ("config", issues.as_slice()),
                RunError::BlowUp { .. } => ("blow-up", &[][..]),
                RunError::Failed(_) => ("failed", &[][..]),
                RunError::Io { .. } => ("io", &[][..]),
            };
            report(kind, e.to_string(), issues);
            ExitCode::from(e.exit_code())
        }
    }
}
