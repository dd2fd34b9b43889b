//! Command-line front end: config ingestion, experiment orchestration and CSV output.
//!
//! Every run ends with a `status=<ok|invalid|degenerate>` line on stdout and exits
//! with 0, 1 or 2 respectively.

mod commands;
pub mod config;
pub mod selftest;

use std::io::Write;

use clap::Parser;
use sigvol::hedging::HedgeError;
use sigvol::models::ModelError;
use sigvol::riccati::RiccatiError;
use sigvol::sde::SdeError;
use sigvol::tensor::TensorError;

pub use config::{Cli, Command, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments, configuration or model; exit 1.
    Invalid(String),
    /// Explosion, singular Gram matrix or a failed identity; exit 2.
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Degenerate(_) => 2,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            CliError::Invalid(_) => "invalid",
            CliError::Degenerate(_) => "degenerate",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Degenerate(m) => m,
        }
    }
}

impl From<HedgeError> for CliError {
    fn from(e: HedgeError) -> Self {
        match e {
            HedgeError::Degenerate { .. } | HedgeError::NonFinite(_) => CliError::Degenerate(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<RiccatiError> for CliError {
    fn from(e: RiccatiError) -> Self {
        match e {
            RiccatiError::Exploded { .. } => CliError::Degenerate(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

macro_rules! invalid_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Invalid(e.to_string())
            }
        }
    )*};
}
invalid_from!(SdeError, ModelError, TensorError, std::io::Error);

/// Output of one subcommand: the CSV body and `key=value` summary lines.
#[derive(Default)]
pub struct Report {
    pub csv: Vec<u8>,
    pub summary: Vec<String>,
}

/// Runs `argv` (program name first), writing stdout output to `out`; returns the exit code.
pub fn execute<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                let _ = writeln!(out, "status=ok");
                return 0;
            }
            eprintln!("{e}");
            let _ = writeln!(out, "status=invalid");
            return 1;
        }
    };
    let name = cli.command.name();
    let mut report = Report::default();
    let result = RunConfig::merge(cli.command.common()).and_then(|cfg| {
        let r = commands::run(&cli.command, &cfg, &mut report);
        flush(name, &cfg, &report, out)?;
        r
    });
    match result {
        Ok(()) => {
            let _ = writeln!(out, "status=ok");
            0
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            let _ = writeln!(out, "status={}", e.status());
            e.exit_code()
        }
    }
}

fn flush(name: &str, cfg: &RunConfig, report: &Report, out: &mut dyn Write) -> Result<(), CliError> {
    if !report.csv.is_empty() {
        match &cfg.out {
            Some(dir) => {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("{name}.csv")), &report.csv)?;
            }
            None => out.write_all(&report.csv)?,
        }
    }
    for line in &report.summary {
        writeln!(out, "{line}")?;
    }
    Ok(())
}
