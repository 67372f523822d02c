//! Initial-data families and their domain conventions.
//!
//! | id                | domain                              | gamma      |
//! |-------------------|-------------------------------------|------------|
//! | `ex1_whole_space` | `L = 2^(m0+3)`, `dx = 1/16`         | `2 eps`    |
//! | `ex2_torus`       | `L = pi`, `N = 256`                 | `e eps`    |
//! | `ex3_incompatible`| `L = max(64, 2^(m0+3))`, `dx = 1/16`| `2 eps`    |
//! | `sec1_compatible` | as `ex3_incompatible`               | `2 eps`    |
//!
//! with `eps = 2^-m0`. `sech(x^2)` means `1/cosh(x^2)`.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KgzError, Result};
use crate::limits::dzdt_nls0;
use crate::spectral::{Field, SpectralGrid};
use crate::{Complex64, KgzInitialData, KgzParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemId {
    #[serde(rename = "ex1_whole_space")]
    Ex1WholeSpace,
    #[serde(rename = "ex2_torus")]
    Ex2Torus,
    #[serde(rename = "ex3_incompatible")]
    Ex3Incompatible,
    #[serde(rename = "sec1_compatible")]
    Sec1Compatible,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [
        ProblemId::Ex1WholeSpace,
        ProblemId::Ex2Torus,
        ProblemId::Ex3Incompatible,
        ProblemId::Sec1Compatible,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemId::Ex1WholeSpace => "ex1_whole_space",
            ProblemId::Ex2Torus => "ex2_torus",
            ProblemId::Ex3Incompatible => "ex3_incompatible",
            ProblemId::Sec1Compatible => "sec1_compatible",
        }
    }

    fn short(self) -> &'static str {
        match self {
            ProblemId::Ex1WholeSpace => "ex1",
            ProblemId::Ex2Torus => "ex2",
            ProblemId::Ex3Incompatible => "ex3",
            ProblemId::Sec1Compatible => "sec1",
        }
    }

    pub fn default_gamma_rule(self) -> GammaRule {
        match self {
            ProblemId::Ex2Torus => GammaRule::EEps,
            _ => GammaRule::TwoEps,
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemId {
    type Err = KgzError;
    /// Accepts the full id or its short form (`ex1`, `ex2`, `ex3`, `sec1`).
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.as_str() == s || p.short() == s)
            .ok_or_else(|| KgzError::Config(format!("unknown problem `{s}`")))
    }
}

/// How `gamma` follows from `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GammaRule {
    TwoEps,
    EEps,
    Explicit(f64),
}

impl GammaRule {
    pub fn gamma(self, eps: f64) -> f64 {
        match self {
            GammaRule::TwoEps => 2.0 * eps,
            GammaRule::EEps => E * eps,
            GammaRule::Explicit(g) => g,
        }
    }
}

impl fmt::Display for GammaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaRule::TwoEps => f.write_str("2eps"),
            GammaRule::EEps => f.write_str("e*eps"),
            GammaRule::Explicit(g) => write!(f, "explicit:{g}"),
        }
    }
}

impl FromStr for GammaRule {
    type Err = KgzError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "2eps" => Ok(GammaRule::TwoEps),
            "e*eps" | "eeps" => Ok(GammaRule::EEps),
            _ => {
                let v = s
                    .strip_prefix("explicit:")
                    .ok_or_else(|| KgzError::Config(format!("unknown gamma rule `{s}`")))?;
                let g: f64 = v
                    .parse()
                    .map_err(|_| KgzError::Config(format!("invalid explicit gamma `{v}`")))?;
                if !(g.is_finite() && g > 0.0) {
                    return Err(KgzError::Config(format!("explicit gamma must be positive, got {g}")));
                }
                Ok(GammaRule::Explicit(g))
            }
        }
    }
}

impl TryFrom<String> for GammaRule {
    type Error = KgzError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GammaRule> for String {
    fn from(g: GammaRule) -> String {
        g.to_string()
    }
}

/// A fully instantiated problem: data sampled on its grid plus parameters.
#[derive(Debug, Clone)]
pub struct Problem {
    pub id: ProblemId,
    pub m0: u32,
    pub params: KgzParams,
    pub grid: SpectralGrid,
    pub data: KgzInitialData,
}

/// `eps = 2^-m0`.
pub fn epsilon_of(m0: u32) -> f64 {
    2f64.powi(-(m0 as i32))
}

/// Half-length `L` and default mode count `N` of a problem.
pub fn domain_for(id: ProblemId, m0: u32) -> (f64, usize) {
    match id {
        ProblemId::Ex2Torus => (PI, 256),
        ProblemId::Ex1WholeSpace => {
            let l = 1usize << (m0 + 3);
            (l as f64, 32 * l)
        }
        ProblemId::Ex3Incompatible | ProblemId::Sec1Compatible => {
            let l = (1usize << (m0 + 3)).max(64);
            (l as f64, 32 * l)
        }
    }
}

/// [`make_problem_with`] using the problem's default gamma rule.
pub fn make_problem(id: ProblemId, m0: u32, n_override: Option<usize>) -> Result<Problem> {
    make_problem_with(id, m0, id.default_gamma_rule(), n_override)
}

pub fn make_problem_with(id: ProblemId, m0: u32, rule: GammaRule, n_override: Option<usize>) -> Result<Problem> {
    if id != ProblemId::Ex2Torus && m0 < 1 {
        return Err(KgzError::Config(format!("{id} requires m0 >= 1")));
    }
    if m0 > 30 {
        return Err(KgzError::Config(format!("m0 = {m0} is out of range")));
    }
    let eps = epsilon_of(m0);
    let gamma = rule.gamma(eps);
    if gamma > 1.0 {
        log::warn!("gamma = {gamma} exceeds 1 for {id} at m0 = {m0}");
    }
    let params = KgzParams::new(eps, gamma)?;
    let (l, n_default) = domain_for(id, m0);
    let grid = SpectralGrid::new(l, n_override.unwrap_or(n_default))?;
    let data = sample_data(id, &params, &grid)?;
    Ok(Problem {
        id,
        m0,
        params,
        grid,
        data,
    })
}

/// `e^{-1/x}` for `x > 0`, zero otherwise.
pub fn bump_f(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step `g(x) = f(x) / (f(x) + f(1 - x))`: 0 for `x <= 0`, 1 for `x >= 1`.
pub fn bump_g(x: f64) -> f64 {
    let (a, b) = (bump_f(x), bump_f(1.0 - x));
    a / (a + b)
}

/// Incompatibility profile `g((x+18)/10) g((18-x)/9) cos(2x + pi/4)`,
/// supported in `(-18, 18)`.
pub fn rho(x: f64) -> f64 {
    bump_g((x + 18.0) / 10.0) * bump_g((18.0 - x) / 9.0) * (2.0 * x + PI / 4.0).cos()
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

fn sample_data(id: ProblemId, params: &KgzParams, grid: &SpectralGrid) -> Result<KgzInitialData> {
    let data = match id {
        ProblemId::Ex1WholeSpace => KgzInitialData {
            psi0: grid.sample(|x| sech(x * x)),
            psi1: grid.sample(|x| 0.5 * (-x * x).exp()),
            phi0: grid.sample(|x| x.sin() * (-x * x).exp()),
            phi1: grid.sample(|x| sech(x * x) / PI.sqrt()),
        },
        ProblemId::Ex2Torus => KgzInitialData {
            psi0: grid.sample(|x| 2.0 * x.sin() / (2.0 - x.cos())),
            psi1: grid.sample(|x| x.cos() * x.cos()),
            phi0: grid.sample(|x| x.cos() / (2.0 - x.sin())),
            phi1: grid.sample(|x| x.sin() * (2.0 * x).cos() / (2.0 - x.cos())),
        },
        ProblemId::Ex3Incompatible | ProblemId::Sec1Compatible => {
            let psi0 = grid.sample(|x| sech(x * x));
            let psi1 = grid.sample(|x| 0.5 * (-x * x).exp());
            let incompatible = id == ProblemId::Ex3Incompatible;
            let phi0 = grid.sample(|x| {
                let (a, b) = (sech(x * x), 0.5 * (-x * x).exp());
                -0.5 * (a * a + b * b) + if incompatible { rho(x) } else { 0.0 }
            });
            let z0 = Field::new(
                psi0.iter()
                    .zip(psi1.iter())
                    .map(|(a, b)| Complex64::new(0.5 * a.re, -0.5 * b.re))
                    .collect(),
            );
            let zt = dzdt_nls0(&z0, grid)?;
            let phi1 = Field::from_real(
                z0.iter()
                    .zip(zt.iter())
                    .map(|(z, w)| -4.0 * params.gamma * (z * w.conj()).re),
            );
            KgzInitialData {
                psi0,
                psi1,
                phi0,
                phi1,
            }
        }
    };
    data.validate(grid)?;
    Ok(data)
}
