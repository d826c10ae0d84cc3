//! `bstone`: load instances, run the verification pipelines and print a JSON
//! report. Exit codes: 0 verified, 1 refuted, 2 invalid input.

mod commands;
mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use crate::commands::Command;
use crate::report::{RunReport, Status};

#[derive(Debug, Parser)]
#[command(name = "bstone", version, about = "Exact reconstruction and decomposition checks on finite instances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    json_out: Option<PathBuf>,
    /// Include wall-clock milliseconds in the report.
    #[arg(long, global = true)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let start = Instant::now();
    let report = match cli.command.run() {
        Ok(out) => RunReport {
            command: cli.command.name().into(),
            status: out.status(),
            witnesses: out.witnesses,
            artifacts: out.artifacts,
            timing: None,
        },
        Err(e) => {
            eprintln!("error: {}", e.0);
            RunReport {
                command: cli.command.name().into(),
                status: Status::Error,
                witnesses: Vec::new(),
                artifacts: serde_json::json!({ "error": e.0 }),
                timing: None,
            }
        }
    };
    let report = RunReport {
        timing: cli.timing.then(|| start.elapsed().as_millis() as u64),
        ..report
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    // a closed pipe must not turn a finished run into a panic
    let _ = writeln!(std::io::stdout(), "{text}");
    if let Some(path) = &cli.json_out {
        if let Err(e) = std::fs::write(path, format!("{text}\n")) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.status.exit_code())
}
