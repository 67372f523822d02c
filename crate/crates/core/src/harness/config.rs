//! Run configuration: experiment kind, problem sweep, solver and reference
//! settings. Stored as JSON; every field may be omitted from a file, in
//! which case the experiment's default applies.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KgzError, Result};
use crate::problems::{GammaRule, ProblemId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    AccuracyTime,
    AccuracySpace,
    LimitRates,
    Energy,
    SuperResolution,
    Solve,
    CoeffsDump,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::AccuracyTime => "accuracy-time",
            Experiment::AccuracySpace => "accuracy-space",
            Experiment::LimitRates => "limit-rates",
            Experiment::Energy => "energy",
            Experiment::SuperResolution => "super-resolution",
            Experiment::Solve => "solve",
            Experiment::CoeffsDump => "coeffs-dump",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    Mti,
    Ei,
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Mti => "mti",
            Solver::Ei => "ei",
        })
    }
}

impl FromStr for Solver {
    type Err = KgzError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mti" => Ok(Solver::Mti),
            "ei" => Ok(Solver::Ei),
            _ => Err(KgzError::Config(format!("unknown solver `{s}` (expected mti or ei)"))),
        }
    }
}

/// Default reference step before the `eps^2/20` cap.
pub const DEFAULT_TAU_REF: f64 = 1e-6;

/// Fully resolved configuration of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub problem: ProblemId,
    pub m0: Vec<u32>,
    /// `None` selects the problem's own rule.
    pub gamma_rule: Option<GammaRule>,
    pub tau: Vec<f64>,
    /// Mode counts; empty selects the problem's default grid.
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    #[serde(rename = "T")]
    pub t_end: f64,
    pub solver: Solver,
    /// Reference step; `None` means `1e-6`. Always capped at `eps^2/20`.
    pub ref_tau: Option<f64>,
    pub out: Option<PathBuf>,
    /// Output times (`solve`) or sample times (`energy`, `limit-rates`);
    /// empty selects evenly spaced samples.
    pub snapshots: Vec<f64>,
    pub probe_x: f64,
    pub dealias: bool,
    pub threads: Option<usize>,
}

/// A configuration file or set of command-line overrides: every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<Experiment>,
    pub problem: Option<ProblemId>,
    pub m0: Option<Vec<u32>>,
    pub gamma_rule: Option<GammaRule>,
    pub tau: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: Option<Vec<usize>>,
    #[serde(rename = "T")]
    pub t_end: Option<f64>,
    pub solver: Option<Solver>,
    pub ref_tau: Option<f64>,
    pub out: Option<PathBuf>,
    pub snapshots: Option<Vec<f64>>,
    pub probe_x: Option<f64>,
    pub dealias: Option<bool>,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Desk-scale defaults of each experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = RunConfig {
            experiment,
            problem: ProblemId::Ex2Torus,
            m0: vec![1, 3, 5, 7],
            gamma_rule: None,
            tau: vec![4e-3, 2e-3, 1e-3],
            n: vec![],
            t_end: 0.5,
            solver: Solver::Mti,
            ref_tau: None,
            out: None,
            snapshots: vec![],
            probe_x: 0.0,
            dealias: false,
            threads: None,
        };
        match experiment {
            Experiment::AccuracyTime => base,
            Experiment::AccuracySpace => RunConfig {
                m0: vec![3],
                tau: vec![1e-5],
                n: vec![16, 32, 64, 128],
                ..base
            },
            Experiment::LimitRates => RunConfig {
                problem: ProblemId::Ex3Incompatible,
                m0: vec![3, 4, 5],
                tau: vec![1e-3],
                t_end: 1.0,
                ..base
            },
            Experiment::Energy => RunConfig {
                problem: ProblemId::Ex3Incompatible,
                m0: vec![2, 4],
                tau: vec![2e-3, 1e-3],
                t_end: 1.0,
                ..base
            },
            Experiment::SuperResolution => RunConfig {
                m0: vec![6],
                gamma_rule: Some(GammaRule::TwoEps),
                tau: vec![0.1],
                ..base
            },
            Experiment::Solve => RunConfig {
                problem: ProblemId::Ex3Incompatible,
                m0: vec![3],
                tau: vec![1e-3],
                t_end: 1.0,
                ..base
            },
            Experiment::CoeffsDump => RunConfig {
                m0: vec![2],
                tau: vec![0.01],
                n: vec![64],
                t_end: 0.0,
                ..base
            },
        }
    }

    /// Applies every field present in `p`.
    pub fn overlay(&mut self, p: &PartialConfig) {
        macro_rules! take {
            ($($f:ident),*) => {
                $(if let Some(v) = &p.$f { self.$f = v.clone(); })*
            };
        }
        take!(experiment, problem, m0, tau, n, t_end, solver, snapshots, probe_x, dealias);
        if p.gamma_rule.is_some() {
            self.gamma_rule = p.gamma_rule;
        }
        if p.ref_tau.is_some() {
            self.ref_tau = p.ref_tau;
        }
        if p.out.is_some() {
            self.out = p.out.clone();
        }
        if p.threads.is_some() {
            self.threads = p.threads;
        }
    }

    pub fn gamma_rule(&self) -> GammaRule {
        self.gamma_rule.unwrap_or_else(|| self.problem.default_gamma_rule())
    }

    /// Checks the invariants shared by all experiments.
    pub fn validate(&self) -> Result<()> {
        if self.m0.is_empty() {
            return Err(KgzError::Config("m0 list is empty".into()));
        }
        if self.tau.is_empty() {
            return Err(KgzError::Config("tau list is empty".into()));
        }
        if let Some(t) = self.tau.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(KgzError::Config(format!("tau must be positive, got {t}")));
        }
        if let Some(n) = self.n.iter().find(|n| **n < 4 || **n % 2 != 0) {
            return Err(KgzError::Config(format!("N must be even and >= 4, got {n}")));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(KgzError::Config(format!("T must be non-negative, got {}", self.t_end)));
        }
        if self.experiment != Experiment::CoeffsDump {
            for &tau in &self.tau {
                crate::stepping::step_count(self.t_end, tau)
                    .map_err(|_| KgzError::Config(format!("tau = {tau} does not divide T = {}", self.t_end)))?;
            }
        }
        if let Some(r) = self.ref_tau {
            if !(r.is_finite() && r > 0.0) {
                return Err(KgzError::Config(format!("ref-tau must be positive, got {r}")));
            }
        }
        if self.threads == Some(0) {
            return Err(KgzError::Config("threads must be at least 1".into()));
        }
        if self.experiment == Experiment::AccuracySpace {
            let mut ns = self.n.clone();
            ns.sort_unstable();
            if ns.iter().any(|n| !n.is_power_of_two()) {
                return Err(KgzError::Config("accuracy-space needs nested power-of-two N values".into()));
            }
        }
        Ok(())
    }

    /// Output directory: the configured path, else `$KGZ_OUT_DIR`, else `kgz-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("KGZ_OUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("kgz-out"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

impl PartialConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}
