//! Command-line sweep over temperature and q.

pub mod config;
pub mod emit;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, Args, OutputFormat, SweepConfig, TScale, QUAD_ORDER_ENV};
pub use emit::{emit, format_value, render, render_csv, render_json};
pub use sweep::{run_sweep, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("computation failed at {at}: {source}")]
    Pipeline {
        at: String,
        #[source]
        source: crate::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("nothing to write: the sweep produced no rows")]
    EmptyArtifact,
}

impl CliError {
    pub fn config(field: &str, reason: impl ToString) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.to_string(),
        }
    }

    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }
}

/// Parses, sweeps, writes. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let env = std::env::var(QUAD_ORDER_ENV).ok();
    match execute(&args, env.as_deref()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qubit-entropy: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(args: &Args, quad_order_env: Option<&str>) -> Result<(), CliError> {
    let cfg = parse_config(args, quad_order_env)?;
    let rows = run_sweep(&cfg)?;
    emit(
        &rows,
        cfg.output_format,
        cfg.output_path.as_deref(),
        &cfg.provenance(),
    )
}
