//! Exact propagation of the initial-layer free wave `gamma^2 I_tt = I_xx`.
//!
//! Every mode evolves as `I_l(t) = cos(theta_l t) I_l(0) + sin(theta_l t)/theta_l I'_l(0)`
//! with `theta_l = mu_l / gamma`. Evaluation is always from the initial
//! slices at absolute time, never step-recursed.

use num_complex::Complex64;

use crate::error::{KgzError, Result};
use crate::spectral::{self, Field, SpectralGrid, Spectrum};
use crate::KgzParams;

/// `sin(x)/x`, equal to 1 at the origin.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[derive(Debug, Clone)]
pub struct FreeWaveData {
    grid: SpectralGrid,
    gamma: f64,
    theta: Vec<f64>,
    i0: Vec<Complex64>,
    idot0: Vec<Complex64>,
}

/// Free wave seeded by the incompatibility of the data:
/// `I(0) = phi0 + 2|z0|^2`, `I_t(0) = phi1/gamma + 2 Im(conj(z0) z0_xx)`.
pub fn freewave_init(
    z0: &Field,
    phi0: &Field,
    phi1: &Field,
    params: &KgzParams,
    grid: &SpectralGrid,
) -> Result<FreeWaveData> {
    params.validate()?;
    for f in [z0, phi0, phi1] {
        grid.check_len(f.len())?;
    }
    let lap = spectral::d2x(z0, grid)?;
    let i0 = Field::from_real(
        phi0.iter()
            .zip(z0.iter())
            .map(|(p, z)| p.re + 2.0 * z.norm_sqr()),
    );
    let idot0 = Field::from_real(
        phi1.iter()
            .zip(z0.iter().zip(lap.iter()))
            .map(|(p, (z, d))| p.re / params.gamma + 2.0 * (z.conj() * d).im),
    );
    FreeWaveData::from_slices(&i0, &idot0, params.gamma, grid)
}

impl FreeWaveData {
    /// Free wave with prescribed initial slices `I(0)` and `I_t(0)`.
    pub fn from_slices(i0: &Field, idot0: &Field, gamma: f64, grid: &SpectralGrid) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(KgzError::Config(format!("gamma must be positive, got {gamma}")));
        }
        let i0 = spectral::to_spectrum(i0, grid)?.coeffs().to_vec();
        let idot0 = spectral::to_spectrum(idot0, grid)?.coeffs().to_vec();
        let theta = grid.mu().iter().map(|mu| mu / gamma).collect();
        Ok(Self {
            grid: grid.clone(),
            gamma,
            theta,
            i0,
            idot0,
        })
    }

    pub fn zeros(gamma: f64, grid: &SpectralGrid) -> Result<Self> {
        let z = Field::zeros(grid.n());
        Self::from_slices(&z, &z, gamma, grid)
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Acoustic frequencies `theta_l = mu_l / gamma`, FFT slot order.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn initial_spectrum(&self) -> Spectrum {
        Spectrum::new(self.i0.clone())
    }

    pub fn initial_rate_spectrum(&self) -> Spectrum {
        Spectrum::new(self.idot0.clone())
    }

    /// Writes the spectrum of `I(t)` into `out`.
    pub fn spectrum_into(&self, t: f64, out: &mut [Complex64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let th = self.theta[k];
            *o = self.i0[k] * (th * t).cos() + self.idot0[k] * (t * sinc(th * t));
        }
    }

    /// Writes the spectrum of `I_t(t)` into `out`.
    pub fn rate_spectrum_into(&self, t: f64, out: &mut [Complex64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let th = self.theta[k];
            *o = -self.i0[k] * (th * (th * t).sin()) + self.idot0[k] * (th * t).cos();
        }
    }

    /// Writes the spectrum of `J = int_0^tau I(t_n + s) ds` into `out`.
    pub fn window_spectrum_into(&self, t_n: f64, tau: f64, out: &mut [Complex64]) {
        let mid = t_n + 0.5 * tau;
        for (k, o) in out.iter_mut().enumerate() {
            let th = self.theta[k];
            // sin(th t_{n+1}) - sin(th t_n) = 2 cos(th mid) sin(th tau/2), and
            // cos(th t_n) - cos(th t_{n+1}) = 2 sin(th mid) sin(th tau/2).
            let half = tau * sinc(0.5 * th * tau);
            *o = self.i0[k] * ((th * mid).cos() * half)
                + self.idot0[k] * (mid * sinc(th * mid) * half);
        }
    }

    pub fn spectrum_at(&self, t: f64) -> Spectrum {
        let mut out = vec![Complex64::new(0.0, 0.0); self.i0.len()];
        self.spectrum_into(t, &mut out);
        Spectrum::new(out)
    }

    /// `I(., t)` on the grid.
    pub fn at(&self, t: f64) -> Field {
        self.to_real_field(self.spectrum_at(t))
    }

    /// `I_t(., t)` on the grid.
    pub fn rate_at(&self, t: f64) -> Field {
        let mut out = vec![Complex64::new(0.0, 0.0); self.i0.len()];
        self.rate_spectrum_into(t, &mut out);
        self.to_real_field(Spectrum::new(out))
    }

    /// `J^n = int_0^tau I(., t_n + s) ds` on the grid.
    pub fn window_integral(&self, t_n: f64, tau: f64) -> Field {
        let mut out = vec![Complex64::new(0.0, 0.0); self.i0.len()];
        self.window_spectrum_into(t_n, tau, &mut out);
        self.to_real_field(Spectrum::new(out))
    }

    fn to_real_field(&self, spec: Spectrum) -> Field {
        let mut f = spectral::from_spectrum(&spec, &self.grid).expect("spectrum built on own grid");
        f.make_real();
        f
    }
}

/// `I(., t)` for the given free wave.
pub fn freewave_at(fw: &FreeWaveData, t: f64) -> Field {
    fw.at(t)
}

/// `J^n` for the window `[t_n, t_n + tau]`.
pub fn window_integral_j(fw: &FreeWaveData, t_n: f64, tau: f64) -> Field {
    fw.window_integral(t_n, tau)
}
