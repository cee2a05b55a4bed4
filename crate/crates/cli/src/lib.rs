//! `gmc-lab`: runs the field, chaos and comparison experiments from a config
//! file and writes CSV tables, JSON sidecars and a digest manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use config::{ExperimentConfig, Overrides};
pub use error::CliError;
use output::{write_atomic, FileEntry, OutputDir};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GMC_LAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "gmc-lab-out";

#[derive(Debug, Parser)]
#[command(name = "gmc-lab", version, about = "Balanced GMC ratio experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    KernelTable,
    Sample,
    Moments,
    Scaling,
    Tail,
    Laplace,
    SmallBall,
    GradMoments,
    Cascade,
    Kahane,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::KernelTable => "kernel-table",
            Kind::Sample => "sample",
            Kind::Moments => "moments",
            Kind::Scaling => "scaling",
            Kind::Tail => "tail",
            Kind::Laplace => "laplace",
            Kind::SmallBall => "small-ball",
            Kind::GradMoments => "grad-moments",
            Kind::Cascade => "cascade",
            Kind::Kahane => "kahane",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Worker threads; 0 uses every core. Never changes results.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Turn the acceptance checks of the subcommand into a pass/fail gate.
    #[arg(long = "assert")]
    pub assert: bool,
    /// Output directory; defaults to $GMC_LAB_OUT_DIR, then ./gmc-lab-out.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Grid points per side (0 = coarsest grid resolving each scale).
    #[arg(long)]
    pub n: Option<usize>,
    /// Statistical tolerance in standard errors.
    #[arg(long)]
    pub sigmas: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Seed kernel, K0, g0 and layer covariance tables.
    KernelTable(CommonArgs),
    /// Binary field snapshots.
    Sample(CommonArgs),
    /// Moments of Q across the t grid.
    Moments(CommonArgs),
    /// Scaling slopes of mixed chaos moments over shrunken squares.
    Scaling(CommonArgs),
    /// Tail curve and stretched-exponential fit of Q.
    Tail(CommonArgs),
    /// Empirical Laplace transform of Q and its monotonicity in t.
    Laplace(CommonArgs),
    /// Small-ball probabilities of the field.
    SmallBall(CommonArgs),
    /// Moments of the rescaled gradient supremum.
    GradMoments(CommonArgs),
    /// One-step cascade inequality.
    Cascade(CommonArgs),
    /// Finite-dimensional interpolation and comparison checks.
    Kahane(CommonArgs),
    /// Check a config without sampling.
    Validate {
        /// Subcommand whose preconditions are checked.
        #[arg(long = "for", default_value = "tail")]
        target: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            replicas: self.replicas,
            alpha: self.alpha,
            gamma: self.gamma,
            t: self.t,
            n: self.n,
            sigmas: self.sigmas,
        }
    }

    pub fn resolve_config(&self) -> Result<ExperimentConfig, CliError> {
        let mut c = ExperimentConfig::load(self.config.as_deref())?;
        c.apply(&self.overrides());
        Ok(c)
    }

    fn out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    fn pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", self.workers)))
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    started: String,
    finished: String,
    config: &'a ExperimentConfig,
    seed_schedule: String,
    assertions: Option<&'a commands::Outcome>,
    files: &'a [FileEntry],
}

/// Runs the parsed command line; returns the process exit status.
pub fn run(cli: Cli) -> u8 {
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("gmc-lab: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (kind, common) = match cli.command {
        Command::Validate { target, common } => {
            let config = common.resolve_config()?;
            let report = common.pool()?.install(|| config.validate(&target))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            return Ok(());
        }
        Command::KernelTable(c) => (Kind::KernelTable, c),
        Command::Sample(c) => (Kind::Sample, c),
        Command::Moments(c) => (Kind::Moments, c),
        Command::Scaling(c) => (Kind::Scaling, c),
        Command::Tail(c) => (Kind::Tail, c),
        Command::Laplace(c) => (Kind::Laplace, c),
        Command::SmallBall(c) => (Kind::SmallBall, c),
        Command::GradMoments(c) => (Kind::GradMoments, c),
        Command::Cascade(c) => (Kind::Cascade, c),
        Command::Kahane(c) => (Kind::Kahane, c),
    };
    run_experiment(kind, &common)
}

fn run_experiment(kind: Kind, common: &CommonArgs) -> Result<(), CliError> {
    let config = common.resolve_config()?;
    let pool = common.pool()?;
    pool.install(|| config.validate(kind.name()))?;
    let started = chrono::Utc::now();
    let clock = Instant::now();
    let mut out = OutputDir::create(&common.out_dir())?;
    out.write_bytes("config.toml", config.to_toml().as_bytes())?;
    let outcome = pool.install(|| commands::execute(kind, &config, &mut out))?;
    let sidecar = commands::Sidecar {
        command: kind.name(),
        config_sha256: output::sha256_hex(config.to_toml().as_bytes()),
        seed: config.seed,
        replicas: config.experiment.replicas,
        wall_seconds: clock.elapsed().as_secs_f64(),
        report: &outcome.report,
        checks: &outcome.checks,
    };
    out.write_json(&format!("{}.json", kind.name()), &sidecar)?;
    let manifest = Manifest {
        tool: "gmc-lab",
        version: env!("CARGO_PKG_VERSION"),
        command: kind.name(),
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        config: &config,
        seed_schedule: format!(
            "ChaCha8 stream per (seed {}, replica, layer); replica pairs share one transform",
            config.seed
        ),
        assertions: common.assert.then_some(&outcome),
        files: out.files(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&out.path("manifest.json"), &bytes)?;
    for c in &outcome.checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if common.assert {
        let failed: Vec<&str> = outcome
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        if !failed.is_empty() {
            return Err(CliError::Assertion(failed.join(", ")));
        }
    }
    Ok(())
}
