use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rcesc_core::batch::map_batch;
use rcesc_core::report::{joint_summary, run_controller, write_result, RunResult};
use rcesc_core::scenario::{builtin, load_scenario, Scenario, BUILTINS};
use rcesc_core::{ControllerKind, Error};

#[derive(Parser)]
#[command(name = "rcesc", version, about = "Run extremum-seeking scenarios and write CSV traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or a built-in scenario.
    Run {
        /// Path to a scenario file, or the name of a built-in.
        target: String,
        /// Output directory for CSV traces and summaries.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run both ESC and RC/ESC on the same plant.
        #[arg(long)]
        compare: bool,
    },
    /// List built-in scenarios.
    List,
    /// Parse and validate a scenario file.
    Validate { file: PathBuf },
}

const EXIT_VALIDATION: u8 = 1;
const EXIT_DIVERGED: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Parse { .. } => EXIT_VALIDATION,
        Error::Diverged { .. } | Error::Contract { .. } => EXIT_DIVERGED,
        Error::Io { .. } => EXIT_IO,
    }
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit_code(e))
}

fn resolve(target: &str) -> Result<Scenario, Error> {
    let path = Path::new(target);
    if !path.exists() {
        if let Some(s) = builtin(target) {
            return Ok(s);
        }
    }
    load_scenario(path)
}

fn describe(name: &str) -> &'static str {
    match name {
        "example1" => "SISO quadratic map, reference 1 then 5 after 500 s, RCAC/I",
        "example2" => "two-input quadratic map, reference (1, 2) then (-1, -2) after 500 s",
        "example3" => "Van der Pol gain tuning, amplitude-detector cost",
        _ => "",
    }
}

fn run(target: &str, out: Option<PathBuf>, compare: bool) -> ExitCode {
    let scenario = match resolve(target) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let kinds = if compare { vec![ControllerKind::Esc, ControllerKind::RcEsc] } else { vec![scenario.controller] };
    let results: Result<Vec<RunResult>, Error> =
        map_batch(&kinds, |k| run_controller(&scenario, *k)).into_iter().collect();
    let results = match results {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let dir = out.or_else(|| scenario.out_dir.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    for r in &results {
        match write_result(r, &dir) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => return fail(&e),
        }
    }
    if compare {
        let path = dir.join(format!("{}_compare_summary.txt", scenario.name));
        if let Err(source) = std::fs::write(&path, joint_summary(&results)) {
            return fail(&Error::Io { path, source });
        }
    }
    print!("{}", joint_summary(&results));
    match results.iter().find_map(|r| r.error.as_ref()) {
        Some(e) => fail(e),
        None => ExitCode::SUCCESS,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { target, out, compare } => run(&target, out, compare),
        Command::List => {
            for name in BUILTINS {
                println!("{name}\t{}", describe(name));
            }
            ExitCode::SUCCESS
        }
        Command::Validate { file } => match load_scenario(&file) {
            Ok(s) => {
                println!("{}: ok ({})", file.display(), s.name);
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
    }
}
