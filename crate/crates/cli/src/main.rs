//! `mqslab` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical invariant
//! failure, 4 I/O error.

mod config;
mod output;
mod run;
mod validate;

use std::path::Path;
use std::process::ExitCode;

use clap::Parser;

use config::{Args, Command, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Failure {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Failure::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io { .. } => 4,
        }
    }
}

impl From<mqslab::Error> for Failure {
    fn from(e: mqslab::Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mqslab: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn execute(args: &Args) -> Result<(), Failure> {
    let cfg = RunConfig::from_args(args)?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }

    if cfg.command == Command::Validate {
        let report = validate::run_validate(&cfg);
        let path = validate::write_report(&cfg, &args.out, &report)?;
        eprintln!("[mqslab] wrote {}", path.display());
        let failed = report
            .checks
            .iter()
            .filter(|c| c.status == validate::Status::Fail)
            .count();
        return if failed == 0 {
            Ok(())
        } else {
            Err(Failure::Numerical(format!("{failed} invariant check(s) failed")))
        };
    }

    let run = run::run_figures(&cfg)?;
    for path in output::emit(&cfg, &args.out, &run.tables, &run.timing)? {
        eprintln!("[mqslab] wrote {}", path.display());
    }
    run::check_origin(&run.tables)
}
