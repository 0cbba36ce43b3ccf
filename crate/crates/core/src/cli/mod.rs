//! Config-driven command line: `trispin <subcommand> --config <path>`.
//!
//! Every subcommand writes CSV tables whose `#` header records the config
//! hash, master seed, version, convention and profile. Exit codes are 0 on
//! success, 2 for invalid input and 3 for failed numerical checks; failures
//! are also emitted as JSON records.

mod commands;
mod config;
mod output;

pub use commands::spectral_activity;
pub use config::{
    load_config, EnsembleConfig, OutputConfig, Profile, RunConfig, ScanConfig, StopMode,
};
pub use output::Table;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "trispin", version, about = "Counting statistics of three collectively damped spins")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Master seed; overrides `ensemble.master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// θ(s) and k(s) scan with kink report.
    Spectrum(Common),
    /// Trajectory ensemble: activities, histogram, event logs, blinking.
    Trajectories(Common),
    /// Dark subspace basis, energies and checks.
    Dark(Common),
    /// Windowed fluctuation-theorem table.
    Ft(Common),
    /// Spectral k(0) against ensemble means over the n̄ sweep.
    Compare(Common),
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Spectrum(c)
            | Command::Trajectories(c)
            | Command::Dark(c)
            | Command::Ft(c)
            | Command::Compare(c) => c,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Trajectories(_) => "trajectories",
            Command::Dark(_) => "dark",
            Command::Ft(_) => "ft",
            Command::Compare(_) => "compare",
        }
    }
}

/// Load the config and apply command-line overrides.
pub fn resolve(common: &Common) -> Result<RunConfig> {
    let mut cfg = load_config(&common.config)?;
    if let Some(p) = common.profile {
        cfg.profile = p;
    }
    if let Some(s) = common.seed {
        cfg.ensemble.master_seed = Some(s);
    }
    if let Some(dir) = &common.out {
        cfg.output.dir = dir.clone();
    }
    Ok(cfg)
}

/// Run one subcommand and return the files written.
pub fn run(command: &Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let seed = cfg.master_seed()?;
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    match command {
        Command::Spectrum(_) => commands::spectrum(cfg, seed, dir),
        Command::Trajectories(_) => commands::trajectories(cfg, seed, dir),
        Command::Dark(_) => commands::dark(cfg, seed, dir),
        Command::Ft(_) => commands::ft(cfg, seed, dir),
        Command::Compare(_) => commands::compare(cfg, seed, dir),
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(Error::InvalidParameter {
            name: "workers",
            reason: "must be >= 1".into(),
        }),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(f),
    }
}

fn error_record(command: &str, err: &Error) -> String {
    serde_json::json!({
        "command": command,
        "kind": err.kind(),
        "exit_code": err.exit_code(),
        "message": err.to_string(),
    })
    .to_string()
}

fn report(command: &str, err: &Error, dir: Option<&Path>) -> i32 {
    let record = error_record(command, err);
    eprintln!("{record}");
    if let Some(dir) = dir {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(dir.join("error.json"), format!("{record}\n"));
        }
    }
    err.exit_code()
}

/// Parse arguments and run; returns the exit code and the files written.
pub fn execute<I, T>(args: I) -> (i32, Vec<PathBuf>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return (code, Vec::new());
        }
    };
    let command = cli.command;
    let name = command.name();
    let cfg = match resolve(command.common()) {
        Ok(cfg) => cfg,
        Err(e) => return (report(name, &e, command.common().out.as_deref()), Vec::new()),
    };
    match with_workers(command.common().workers, || run(&command, &cfg)) {
        Ok(paths) => (0, paths),
        Err(e) => (report(name, &e, Some(&cfg.output.dir)), Vec::new()),
    }
}

/// [`execute`], listing the written files on stdout.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (code, paths) = execute(args);
    for p in paths {
        println!("{}", p.display());
    }
    code
}
