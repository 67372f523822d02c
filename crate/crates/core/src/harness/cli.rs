//! Command-line front end: one subcommand per experiment, shared flags that
//! override values from an optional JSON configuration file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{KgzError, Result};
use crate::harness::config::{Experiment, PartialConfig, RunConfig, Solver};
use crate::harness::experiments;
use crate::harness::output::write_output;
use crate::problems::{GammaRule, ProblemId};

#[derive(Debug, Parser)]
#[command(name = "kgz", version, about = "Klein-Gordon-Zakharov solvers and convergence experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Temporal error of a solver against a fine exponential-integrator reference
    AccuracyTime(CommonArgs),
    /// Spatial error at a fixed small step against a finer grid
    AccuracySpace(CommonArgs),
    /// Distances between the KGZ solution and its NLS / OP limit models
    LimitRates(CommonArgs),
    /// Energy drift over time
    Energy(CommonArgs),
    /// Both integrators at steps far larger than eps^2
    SuperResolution(CommonArgs),
    /// Single run with profile snapshots and a probe time series
    Solve(CommonArgs),
    /// Closed-form coefficients next to their quadrature oracles
    CoeffsDump(CommonArgs),
}

impl Command {
    pub fn split(&self) -> (Experiment, &CommonArgs) {
        match self {
            Command::AccuracyTime(a) => (Experiment::AccuracyTime, a),
            Command::AccuracySpace(a) => (Experiment::AccuracySpace, a),
            Command::LimitRates(a) => (Experiment::LimitRates, a),
            Command::Energy(a) => (Experiment::Energy, a),
            Command::SuperResolution(a) => (Experiment::SuperResolution, a),
            Command::Solve(a) => (Experiment::Solve, a),
            Command::CoeffsDump(a) => (Experiment::CoeffsDump, a),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Problem: ex1, ex2, ex3 or sec1
    #[arg(long)]
    pub problem: Option<ProblemId>,
    /// Comma-separated exponents m0 with eps = 2^-m0
    #[arg(long, value_delimiter = ',')]
    pub m0: Option<Vec<u32>>,
    /// gamma as a function of eps: 2eps, e*eps or explicit:<value>
    #[arg(long)]
    pub gamma_rule: Option<GammaRule>,
    /// Comma-separated time steps
    #[arg(long, value_delimiter = ',')]
    pub tau: Option<Vec<f64>>,
    /// Comma-separated mode counts
    #[arg(long = "N", value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Final time
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Integrator: mti or ei
    #[arg(long)]
    pub solver: Option<Solver>,
    /// Reference step (capped at eps^2/20)
    #[arg(long)]
    pub ref_tau: Option<f64>,
    /// Output directory (default: $KGZ_OUT_DIR, else ./kgz-out)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON configuration file; flags override its values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the resolved configuration to this file before running
    #[arg(long)]
    pub emit_config: Option<PathBuf>,
    /// Comma-separated output or sample times
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Probe position for the solve time series
    #[arg(long)]
    pub probe_x: Option<f64>,
    /// Apply the 2/3 filter to products
    #[arg(long)]
    pub dealias: bool,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
}

impl CommonArgs {
    fn overrides(&self) -> PartialConfig {
        PartialConfig {
            experiment: None,
            problem: self.problem,
            m0: self.m0.clone(),
            gamma_rule: self.gamma_rule,
            tau: self.tau.clone(),
            n: self.n.clone(),
            t_end: self.t_end,
            solver: self.solver,
            ref_tau: self.ref_tau,
            out: self.out.clone(),
            snapshots: self.snapshots.clone(),
            probe_x: self.probe_x,
            dealias: self.dealias.then_some(true),
            threads: self.threads,
        }
    }
}

/// Defaults of the subcommand, then the configuration file, then flags.
pub fn resolve_config(experiment: Experiment, args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::defaults(experiment);
    if let Some(path) = &args.config {
        let file = PartialConfig::from_json_file(path)?;
        if let Some(e) = file.experiment {
            if e != experiment {
                log::warn!("configuration file is for `{e}`; running `{experiment}`");
            }
        }
        cfg.overlay(&file);
    }
    cfg.overlay(&args.overrides());
    cfg.experiment = experiment;
    cfg.validate()?;
    Ok(cfg)
}

/// Resolves the configuration, runs the experiment and writes its files.
pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let (experiment, args) = cli.command.split();
    let cfg = resolve_config(experiment, args)?;
    if let Some(path) = &args.emit_config {
        cfg.write_json(path)?;
    }
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| KgzError::Config(format!("cannot size thread pool: {e}")))?;
    }
    let out = experiments::run(&cfg)?;
    let dir = cfg.out_dir();
    let written = write_output(&out, &cfg, &dir)?;
    for t in &out.tables {
        if t.any_unreliable() {
            log::warn!("{}: some rows are flagged UNRELIABLE (see sidecar)", t.name);
        }
    }
    Ok(written)
}

/// Process exit code for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(e: &KgzError) -> u8 {
    match e {
        KgzError::Config(_) | KgzError::InvalidHorizon(_) | KgzError::ReferenceTooCoarse { .. } | KgzError::Json(_) => 2,
        _ => 1,
    }
}
