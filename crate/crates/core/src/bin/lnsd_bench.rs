//! Benchmark CLI.
//!
//! Exit status: 0 on success, 1 on invalid input or a replay mismatch,
//! 2 when a run aborted on non-finite values.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lanczos_descent::harness::{
    load_labeled_traces, parse_config_file, parse_overrides, render_convergence_plot, replay, run_matrix,
    ComparisonReport,
};

#[derive(Parser)]
#[command(name = "lnsd-bench", version, about = "Lanczos subspace descent benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configuration in an experiment file.
    Run {
        config: PathBuf,
        /// Config overrides such as `--run.q=3`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
        /// Do not echo the resolved configuration.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Re-execute a persisted run and compare its trace.
    Replay { manifest: PathBuf },
    /// Plot one or more traces.
    Plot {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, short, default_value = "convergence.svg")]
        output: PathBuf,
        #[arg(long)]
        log: bool,
    },
    /// Compare one or more traces.
    Report {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
    },
}

const INVALID: u8 = 1;
const ABORTED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { INVALID } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INVALID)
        }
    }
}

fn execute(command: Command) -> lanczos_descent::Result<u8> {
    match command {
        Command::Run { config, overrides, quiet } => {
            let exp = parse_config_file(&config, &parse_overrides(&overrides)?)?;
            if !quiet {
                println!("# resolved configuration");
                print!("{}", exp.render());
                println!();
            }
            let result = run_matrix(&exp)?;
            for r in &result.runs {
                println!("{}: {}", r.label, r.manifest_path.display());
            }
            println!();
            print!("{}", result.report);
            println!("plot: {}", result.plot_path.display());
            println!("report: {}", result.report_path.display());
            Ok(if result.report.any_aborted() { ABORTED } else { 0 })
        }
        Command::Replay { manifest } => {
            let r = replay(&manifest)?;
            if let Some(msg) = &r.outcome.aborted {
                eprintln!("replayed run aborted: {msg}");
            }
            match r.first_mismatch {
                None => {
                    println!("replay of {} matches ({} records)", r.manifest.run_id, r.outcome.trace.len());
                    Ok(if r.outcome.aborted.is_some() { ABORTED } else { 0 })
                }
                Some(line) => {
                    println!("replay of {} differs from the stored trace at line {line}", r.manifest.run_id);
                    Ok(INVALID)
                }
            }
        }
        Command::Plot { traces, output, log } => {
            let traces = load_labeled_traces(&traces)?;
            render_convergence_plot(&traces, &output, log)?;
            println!("plot: {}", output.display());
            Ok(0)
        }
        Command::Report { traces } => {
            let traces = load_labeled_traces(&traces)?;
            print!("{}", ComparisonReport::from_traces(&traces)?);
            Ok(0)
        }
    }
}
