// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: parse flags, resolve the configuration, run one
//! subcommand on a worker pool and write CSV tables plus `manifest.json`.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::model::FractionGrid;
use commands::Outcome;
use config::{FileConfig, Overrides, RunConfig};
use output::{write_manifest, write_tables, RunManifest, Stopwatch};

#[derive(Debug, Parser)]
#[command(name = "qdarwin", version, about = "Oscillator-bath simulator for redundancy and memory effects")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed for every sampled quantity.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Coupling of the resonant bath mode in units of gamma.
    #[arg(long, global = true, value_name = "R")]
    pub gamma_bar_ratio: Option<f64>,
    /// Fraction axis: every fragment size or about 90 log-spaced sizes.
    #[arg(long, global = true, value_name = "full|coarse", value_parser = parse_grid)]
    pub fractions: Option<FractionGrid>,
    /// Fragments sampled per size.
    #[arg(long, global = true, value_name = "N")]
    pub samples: Option<usize>,
    /// End of the time grid in units of the inverse decay rate.
    #[arg(long, global = true, value_name = "X")]
    pub t_max_gamma: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// System and bath excitation numbers over time.
    Dynamics,
    /// Averaged mutual information per time and environment fraction.
    Pip,
    /// f_delta, R_delta, I(S:E) and R_r over time.
    Redundancy,
    /// Non-Markovianity degree for each gamma_bar ratio.
    Nonmarkov,
    /// Non-Markovianity, f_delta non-monotonicity and averaged R_r per ratio.
    Sweep,
    /// Fragment distinguishability and cross terms.
    Bph,
    /// Fragment excitation statistics for box and simulated profiles.
    Concentration,
    /// Cross-check of the branch formulas against a truncated Fock solver.
    Oracle,
    /// Re-run the command recorded in a manifest.
    Replay {
        /// Path to a manifest.json written by an earlier run.
        manifest: PathBuf,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dynamics => "dynamics",
            Command::Pip => "pip",
            Command::Redundancy => "redundancy",
            Command::Nonmarkov => "nonmarkov",
            Command::Sweep => "sweep",
            Command::Bph => "bph",
            Command::Concentration => "concentration",
            Command::Oracle => "oracle",
            Command::Replay { .. } => "replay",
        }
    }

    fn from_name(name: &str) -> Result<Self> {
        Ok(match name {
            "dynamics" => Command::Dynamics,
            "pip" => Command::Pip,
            "redundancy" => Command::Redundancy,
            "nonmarkov" => Command::Nonmarkov,
            "sweep" => Command::Sweep,
            "bph" => Command::Bph,
            "concentration" => Command::Concentration,
            "oracle" => Command::Oracle,
            other => return Err(Error::Config(format!("unknown command {other:?} in manifest"))),
        })
    }
}

fn parse_grid(s: &str) -> std::result::Result<FractionGrid, String> {
    match s {
        "full" => Ok(FractionGrid::Full),
        "coarse" => Ok(FractionGrid::Coarse),
        _ => Err(format!("expected full or coarse, got {s:?}")),
    }
}

impl GlobalArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            gamma_bar_ratio: self.gamma_bar_ratio,
            fractions: self.fractions,
            samples: self.samples,
            t_max_gamma: self.t_max_gamma,
        }
    }

    fn touches_config(&self) -> bool {
        self.config.is_some()
            || self.seed.is_some()
            || self.gamma_bar_ratio.is_some()
            || self.fractions.is_some()
            || self.samples.is_some()
            || self.t_max_gamma.is_some()
    }
}

/// Runs `command` with a resolved configuration and writes its outputs.
pub fn execute(command: &Command, cfg: &RunConfig, out: &Path, threads: Option<usize>) -> Result<RunManifest> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let mut clock = Stopwatch::start();
    let outcome: Outcome = pool.install(|| {
        let clock = &mut clock;
        match command {
            Command::Dynamics => commands::dynamics(cfg, clock),
            Command::Pip => commands::pip(cfg, clock),
            Command::Redundancy => commands::redundancy(cfg, clock),
            Command::Nonmarkov => commands::nonmarkov(cfg, clock),
            Command::Sweep => commands::sweep(cfg, clock),
            Command::Bph => commands::bph(cfg, clock),
            Command::Concentration => commands::concentration(cfg, clock),
            Command::Oracle => commands::oracle(cfg, clock),
            Command::Replay { .. } => Err(Error::InvalidArgument("replay cannot be nested".into())),
        }
    })?;
    let outputs = write_tables(out, &outcome.tables)?;
    clock.lap("write");
    let total_seconds = clock.total();
    let manifest = RunManifest {
        command: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.model.master_seed,
        config_hash: cfg.model.content_hash(),
        threads: pool.current_num_threads(),
        recurrence_warning: cfg.model.recurrence_warning(),
        outputs,
        timings: clock.into_steps(),
        total_seconds,
        config: cfg.clone(),
    };
    write_manifest(out, &manifest)?;
    match outcome.failure {
        Some(msg) => Err(Error::Numerical(msg)),
        None => Ok(manifest),
    }
}

pub fn run(cli: Cli) -> Result<RunManifest> {
    let g = &cli.global;
    let (command, cfg) = match &cli.command {
        Command::Replay { manifest } => {
            if g.touches_config() {
                return Err(Error::Config(
                    "replay takes its configuration from the manifest; only --out and --threads apply".into(),
                ));
            }
            let m = RunManifest::load(manifest)?;
            m.config.validate()?;
            (Command::from_name(&m.command)?, m.config)
        }
        other => {
            let file = match &g.config {
                Some(path) => FileConfig::load(path)?,
                None => FileConfig::default(),
            };
            (other.clone(), RunConfig::resolve(file, &g.overrides())?)
        }
    };
    if cfg.model.recurrence_warning() {
        eprintln!(
            "warning: time grid passes half the recurrence time {:.1}; finite-bath revivals may appear",
            cfg.model.recurrence_time()
        );
    }
    execute(&command, &cfg, &g.out, g.threads)
}

/// Process entry point; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = cli.global.out.clone();
    match run(cli) {
        Ok(m) => {
            for o in &m.outputs {
                eprintln!("wrote {} ({} rows)", out.join(&o.path).display(), o.rows);
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
