use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thinlab::{run, RunOptions};

#[derive(Parser)]
#[command(
    name = "thinlab",
    version,
    about = "Thin crescent-domain Schauder laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config
    Run {
        config: PathBuf,
        /// output directory (beats the config's `output`)
        #[arg(long, env = "THINLAB_OUT")]
        out: Option<PathBuf>,
        /// worker threads for the per-sigma sub-runs
        #[arg(long)]
        jobs: Option<usize>,
        /// treat validation warnings as failures
        #[arg(long)]
        strict: bool,
    },
}

fn num(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e6) {
        format!("{v:.4e}")
    } else {
        format!("{v:.6}")
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let Command::Run {
        config,
        out,
        jobs,
        strict,
    } = cli.command;
    match run(&config, &RunOptions { out, jobs, strict }) {
        Ok(o) => {
            for c in &o.checks {
                let tag = if c.pass { "ok  " } else { "FAIL" };
                println!(
                    "{tag} {} = {} ({} {})",
                    c.name,
                    num(c.value),
                    c.relation,
                    num(c.threshold)
                );
            }
            for w in &o.warnings {
                eprintln!("warning: {w}");
            }
            println!("artifacts in {}", o.out_dir.display());
            ExitCode::from(o.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
