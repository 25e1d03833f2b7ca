//! Command-line front end.

use std::path::PathBuf;

use clap::Parser;

use crate::config::Config;
use crate::error::{LabError, Result};
use crate::experiments::{run_all, RunOptions, Subcommand};
use crate::io::{write_results, write_summary};
use crate::report::Summary;

/// Every criterion passed.
pub const EXIT_PASS: i32 = 0;
/// At least one criterion failed.
pub const EXIT_FAIL: i32 = 1;
/// Bad config, IO failure or solver error.
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dtn-lab", version, about = "Dirichlet-to-Neumann commutator experiments")]
pub struct Args {
    pub subcommand: Subcommand,
    /// TOML scenario file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for results.csv and summary.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Write stiffness, DtN and commutator matrices under `<out>/matrices`.
    #[arg(long)]
    pub dump_matrices: bool,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides the seed of every scenario.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs one invocation and returns the summary; `log` receives the report lines.
pub fn execute(args: &Args, mut log: impl FnMut(&str)) -> Result<Summary> {
    let mut config = Config::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.override_seed(seed);
    }
    std::fs::create_dir_all(&args.out).map_err(|e| LabError::io(&args.out, e))?;
    let dump_dir = args.dump_matrices.then(|| args.out.join("matrices"));
    if let Some(d) = &dump_dir {
        std::fs::create_dir_all(d).map_err(|e| LabError::io(d, e))?;
    }
    let options = RunOptions { dump_dir, base_dir: config.base_dir.clone() };

    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads.unwrap_or(0)).build()?;
    let reports = pool.install(|| run_all(args.subcommand, &config.scenario, &config.thresholds, &options))?;

    let records: Vec<_> = reports.iter().flat_map(|r| r.records.iter().cloned()).collect();
    write_results(&args.out.join("results.csv"), &records)?;
    for r in &reports {
        for w in &r.warnings {
            log(&format!("warning [{}] {w}", r.id));
        }
        for c in &r.criteria {
            log(&format!("[{}] {}", r.id, c.line()));
        }
        if r.criteria.is_empty() {
            log(&format!("[{}] no criteria apply; results written only", r.id));
        }
    }
    let summary = Summary::new(args.subcommand.name(), reports);
    write_summary(&args.out.join("summary.json"), &summary)?;
    Ok(summary)
}

/// Parses `argv`, runs, and maps the outcome to an exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match execute(&args, |line| println!("{line}")) {
        Ok(s) if s.passed => EXIT_PASS,
        Ok(_) => EXIT_FAIL,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
