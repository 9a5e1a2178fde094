//! Batch experiment runner for the thin-domain laboratory.
//!
//! A run reads one JSON config, executes one sub-run per `sigma` (in
//! parallel), and writes `runs/NN_sigma_S.json`, `aggregate.csv` and
//! `summary.json` into the output directory.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use config::{ExperimentConfig, ExperimentKind, FunctionSpec};
pub use error::CliError;
pub use experiments::{Check, Row, SubRun};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_THRESHOLD: i32 = 1;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// overrides the config's `output`
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// validation warnings count as failures
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub exit_code: i32,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.exit_code == EXIT_PASS
    }
}

/// Reads, validates and runs a config file. A relative `output` in the
/// config is taken relative to the config's directory.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let out_dir = match (&opts.out, &cfg.output) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) if o.is_relative() => {
            config_path.parent().unwrap_or(Path::new(".")).join(o)
        }
        (None, Some(o)) => o.clone(),
        (None, None) => PathBuf::from("thinlab-out"),
    };
    run_config(&cfg, &out_dir, opts)
}

pub fn run_config(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    opts: &RunOptions,
) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let work = || -> Result<Outcome, CliError> {
        let setup = experiments::Setup::new(cfg)?;
        // collect every result first so the reported error does not depend on scheduling
        let results: Vec<Result<SubRun, CliError>> = cfg
            .problem
            .sigmas
            .par_iter()
            .enumerate()
            .map(|(i, &s)| setup.run_one(i, s))
            .collect();
        let mut runs = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        let checks = experiments::family_checks(cfg, &mut runs);
        let mut warnings = setup.warnings.clone();
        warnings.extend(runs.iter().flat_map(|r| r.warnings.iter().cloned()));
        let failed = checks.iter().any(|c| !c.pass) || (opts.strict && !warnings.is_empty());
        let outcome = Outcome {
            out_dir: out_dir.to_path_buf(),
            rows: runs.iter().flat_map(|r| r.rows.iter().cloned()).collect(),
            checks,
            warnings,
            exit_code: if failed { EXIT_THRESHOLD } else { EXIT_PASS },
        };
        output::write_all(cfg, &runs, &outcome, opts.strict)?;
        Ok(outcome)
    };
    match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Config {
                key: "--jobs".into(),
                msg: e.to_string(),
            })?
            .install(work),
        None => work(),
    }
}
