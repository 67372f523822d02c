//! Spectral solvers for the one-dimensional Klein-Gordon-Zakharov (KGZ) system
//!
//! ```text
//! eps^2 psi_tt - psi_xx + psi/eps^2 + psi phi = 0
//! gamma^2 phi_tt - phi_xx - (psi^2)_xx = 0
//! ```
//!
//! on a periodic interval `[-L, L]`. The crate provides
//!
//! * [`mti`]: the uniformly accurate multiscale time integrator, built on the
//!   decomposition `psi = e^{it/eps^2} z + c.c. + r`, `phi = -2|z|^2 + I + q`;
//! * [`ei`]: a Deuflhard-type exponential integrator used for reference
//!   solutions and as a non-uniform baseline;
//! * [`freewave`]: exact propagation of the initial-layer free wave `I`;
//! * [`limits`]: the cubic Schrodinger limit models, the convergence metrics
//!   and the conserved energy;
//! * [`problems`]: the standard initial-data families;
//! * [`harness`]: experiment drivers and CSV output used by the `kgz` binary.

pub mod coeffs;
pub mod ei;
pub mod error;
pub mod freewave;
pub mod harness;
pub mod limits;
pub mod mti;
pub mod problems;
pub mod quadrature;
pub mod spectral;
pub mod stepping;

pub use error::{KgzError, Result};
pub use num_complex::Complex64;

/// Physical parameters `(eps, gamma)` of the KGZ system.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KgzParams {
    pub epsilon: f64,
    pub gamma: f64,
}

impl KgzParams {
    pub fn new(epsilon: f64, gamma: f64) -> Result<Self> {
        let p = Self { epsilon, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Rejects non-positive or non-finite parameters. The scheme targets
    /// `0 < eps < gamma`; other orderings run but log a warning.
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(KgzError::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(KgzError::Config(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.epsilon >= self.gamma {
            log::warn!(
                "epsilon = {} >= gamma = {}: outside the regime eps < gamma the integrator is not uniformly accurate",
                self.epsilon,
                self.gamma
            );
        }
        Ok(())
    }
}

/// Real initial data `psi(0) = psi0`, `psi_t(0) = psi1/eps^2`,
/// `phi(0) = phi0`, `phi_t(0) = phi1/gamma`, sampled on a grid.
#[derive(Debug, Clone)]
pub struct KgzInitialData {
    pub psi0: spectral::Field,
    pub psi1: spectral::Field,
    pub phi0: spectral::Field,
    pub phi1: spectral::Field,
}

impl KgzInitialData {
    pub fn zeros(n: usize) -> Self {
        Self {
            psi0: spectral::Field::zeros(n),
            psi1: spectral::Field::zeros(n),
            phi0: spectral::Field::zeros(n),
            phi1: spectral::Field::zeros(n),
        }
    }

    /// Checks lengths against the grid and that every field is real-valued.
    pub fn validate(&self, grid: &spectral::SpectralGrid) -> Result<()> {
        for (name, f) in [
            ("psi0", &self.psi0),
            ("psi1", &self.psi1),
            ("phi0", &self.phi0),
            ("phi1", &self.phi1),
        ] {
            grid.check_len(f.len())?;
            f.ensure_real(name, spectral::REAL_TOL)?;
        }
        Ok(())
    }
}
