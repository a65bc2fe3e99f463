use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use towerforce::report::{check_text, CheckError, Report};
use towerforce::scenario::{self, Scenario, DEMOS};
use towerforce::{suite, Error};

/// Exact simulation of tower-killing forcing conditions.
#[derive(Parser)]
#[command(name = "towerforce", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its report.
    Run {
        scenario: PathBuf,
        #[command(flatten)]
        out: Out,
        #[command(flatten)]
        caps: CapsArgs,
    },
    /// Re-verify a report from its own contents.
    Check { report: PathBuf },
    /// Run a bundled scenario.
    Demo {
        /// One of: tower16, medini, empty.
        name: String,
        #[command(flatten)]
        out: Out,
        #[command(flatten)]
        caps: CapsArgs,
    },
    /// Run a randomized property battery.
    Suite {
        selector: String,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct Out {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Overrides for the scenario's `caps` table.
#[derive(Args)]
struct CapsArgs {
    #[arg(long)]
    search_cap: Option<usize>,
    #[arg(long)]
    level_cap: Option<usize>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    reserve: Option<usize>,
}

const PASS: u8 = 0;
const FAIL: u8 = 1;
const INVALID: u8 = 2;

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Validation(_) | Error::Parse(_) => INVALID,
        _ => FAIL,
    }
}

fn read(path: &Path) -> Result<String, u8> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        INVALID
    })
}

fn run_text(text: &str, out: &Out, caps: &CapsArgs) -> Result<u8, u8> {
    let mut sc = Scenario::from_toml(text).map_err(|e| {
        eprintln!("error: {e}");
        exit_for(&e)
    })?;
    let c = &mut sc.caps;
    c.search_cap = caps.search_cap.unwrap_or(c.search_cap);
    c.level_cap = caps.level_cap.unwrap_or(c.level_cap);
    c.horizon = caps.horizon.unwrap_or(c.horizon);
    c.reserve = caps.reserve.unwrap_or(c.reserve);
    let report = scenario::run(&sc).map_err(|e| {
        eprintln!("error: {e}");
        exit_for(&e)
    })?;
    emit(&report, out)?;
    Ok(if report.pass { PASS } else { FAIL })
}

fn emit(report: &Report, out: &Out) -> Result<(), u8> {
    for row in &report.checks {
        let mark = if row.pass { "pass" } else { "FAIL" };
        match &row.detail {
            Some(d) => eprintln!("{mark} {}: {d}", row.name),
            None => eprintln!("{mark} {}", row.name),
        }
    }
    let json = report.to_json();
    match &out.out {
        Some(path) => std::fs::write(path, json).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", path.display());
            FAIL
        }),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn check(path: &Path) -> Result<u8, u8> {
    let text = read(path)?;
    match check_text(&text) {
        Ok(outcome) if outcome.pass() => {
            println!("pass: {} certificates re-verified", outcome.certificates);
            Ok(PASS)
        }
        Ok(outcome) => {
            for f in &outcome.failures {
                println!("fail: {f}");
            }
            Ok(FAIL)
        }
        Err(e @ CheckError::Malformed(_)) => {
            eprintln!("error: {e}");
            Err(INVALID)
        }
        Err(e @ CheckError::Data(_)) => {
            println!("fail: {e}");
            Ok(FAIL)
        }
    }
}

fn run_suite(selector: &str, trials: Option<usize>, seed: u64) -> Result<u8, u8> {
    let summary = suite::run_suite(selector, trials, seed).map_err(|e| {
        eprintln!("error: {e}");
        INVALID
    })?;
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(if summary.pass() { PASS } else { FAIL })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { scenario, out, caps } => read(&scenario).and_then(|text| run_text(&text, &out, &caps)),
        Command::Check { report } => check(&report),
        Command::Demo { name, out, caps } => match scenario::demo(&name) {
            Some(text) => run_text(text, &out, &caps),
            None => {
                let names: Vec<&str> = DEMOS.iter().map(|(n, _)| *n).collect();
                eprintln!("error: unknown demo {name:?}; available: {}", names.join(", "));
                Err(INVALID)
            }
        },
        Command::Suite { selector, trials, seed } => run_suite(&selector, trials, seed),
    };
    ExitCode::from(code.unwrap_or_else(|c| c))
}
