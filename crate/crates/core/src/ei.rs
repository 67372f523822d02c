//! Deuflhard-type exponential integrator for the KGZ system.
//!
//! Each Fourier mode is advanced by the exact linear propagators
//! (`omega_l` for `psi`, `theta_l` for `phi`) with the Duhamel integrals of
//! the nonlinearities `psi phi` and `psi^2` approximated by the trapezoidal
//! rule. The scheme is second order for fixed `eps` but needs
//! `tau = O(eps^2)`; it serves as the reference generator.

use num_complex::Complex64;

use crate::coeffs::omega;
use crate::error::Result;
use crate::freewave::sinc;
use crate::spectral::{Field, SpectralGrid};
use crate::stepping::{snapshot_steps, step_count, time_of};
use crate::{KgzInitialData, KgzParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Physical unknowns `(psi, psi_t, phi, phi_t)` at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct EiState {
    pub t: f64,
    pub psi: Field,
    pub psidot: Field,
    pub phi: Field,
    pub phidot: Field,
}

impl EiState {
    /// `psi_t(0) = psi1/eps^2`, `phi_t(0) = phi1/gamma`.
    pub fn initial(data: &KgzInitialData, params: &KgzParams, grid: &SpectralGrid) -> Result<Self> {
        params.validate()?;
        data.validate(grid)?;
        let eps2 = params.epsilon * params.epsilon;
        Ok(Self {
            t: 0.0,
            psi: Field::from_real(data.psi0.iter().map(|v| v.re)),
            psidot: Field::from_real(data.psi1.iter().map(|v| v.re / eps2)),
            phi: Field::from_real(data.phi0.iter().map(|v| v.re)),
            phidot: Field::from_real(data.phi1.iter().map(|v| v.re / params.gamma)),
        })
    }
}

/// Per-mode propagator factors for fixed `(grid, eps, gamma, tau)`.
#[derive(Debug, Clone)]
struct Propagators {
    cos_w: Vec<f64>,
    sin_w_over_w: Vec<f64>,
    w_sin_w: Vec<f64>,
    /// `tau sin(omega tau) / (2 eps^2 omega)`
    src_psi: Vec<f64>,
    cos_t: Vec<f64>,
    sin_t_over_t: Vec<f64>,
    t_sin_t: Vec<f64>,
    /// `tau theta sin(theta tau) / 2`
    src_phi: Vec<f64>,
    /// `theta^2 tau / 2`
    half_tau_t2: Vec<f64>,
}

impl Propagators {
    fn new(grid: &SpectralGrid, params: &KgzParams, tau: f64) -> Self {
        let eps2 = params.epsilon * params.epsilon;
        let w: Vec<f64> = grid.mu().iter().map(|&m| omega(m, params.epsilon)).collect();
        let th: Vec<f64> = grid.mu().iter().map(|&m| m / params.gamma).collect();
        Self {
            cos_w: w.iter().map(|w| (w * tau).cos()).collect(),
            sin_w_over_w: w.iter().map(|w| (w * tau).sin() / w).collect(),
            w_sin_w: w.iter().map(|w| w * (w * tau).sin()).collect(),
            src_psi: w.iter().map(|w| tau * (w * tau).sin() / (2.0 * eps2 * w)).collect(),
            cos_t: th.iter().map(|t| (t * tau).cos()).collect(),
            sin_t_over_t: th.iter().map(|t| tau * sinc(t * tau)).collect(),
            t_sin_t: th.iter().map(|t| t * (t * tau).sin()).collect(),
            src_phi: th.iter().map(|t| 0.5 * tau * t * (t * tau).sin()).collect(),
            half_tau_t2: th.iter().map(|t| 0.5 * tau * t * t).collect(),
        }
    }
}

/// Stepper that keeps the unknowns in Fourier space between steps and
/// reuses the nonlinear spectra of the previous level, so one step costs
/// four FFTs.
pub struct EiStepper {
    grid: SpectralGrid,
    params: KgzParams,
    tau: f64,
    prop: Propagators,
    scratch: Vec<Complex64>,
    psi_h: Vec<Complex64>,
    psidot_h: Vec<Complex64>,
    phi_h: Vec<Complex64>,
    phidot_h: Vec<Complex64>,
    /// Spectra of `psi phi` and `psi^2` at the current level.
    pp_h: Vec<Complex64>,
    ss_h: Vec<Complex64>,
    psi: Vec<Complex64>,
    phi: Vec<Complex64>,
    t: f64,
}

impl EiStepper {
    pub fn new(grid: &SpectralGrid, params: &KgzParams, tau: f64) -> Result<Self> {
        params.validate()?;
        step_count(tau, tau)?;
        let n = grid.n();
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            tau,
            prop: Propagators::new(grid, params, tau),
            scratch: vec![ZERO; grid.scratch_len()],
            psi_h: vec![ZERO; n],
            psidot_h: vec![ZERO; n],
            phi_h: vec![ZERO; n],
            phidot_h: vec![ZERO; n],
            pp_h: vec![ZERO; n],
            ss_h: vec![ZERO; n],
            psi: vec![ZERO; n],
            phi: vec![ZERO; n],
            t: 0.0,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Loads a physical state.
    pub fn load(&mut self, st: &EiState) -> Result<()> {
        for f in [&st.psi, &st.psidot, &st.phi, &st.phidot] {
            self.grid.check_len(f.len())?;
        }
        let g = &self.grid;
        for (src, dst) in [
            (&st.psi, &mut self.psi_h),
            (&st.psidot, &mut self.psidot_h),
            (&st.phi, &mut self.phi_h),
            (&st.phidot, &mut self.phidot_h),
        ] {
            dst.copy_from_slice(src);
            g.forward_in_place(dst, &mut self.scratch);
        }
        self.psi.copy_from_slice(&st.psi);
        self.phi.copy_from_slice(&st.phi);
        self.t = st.t;
        self.refresh_products();
        Ok(())
    }

    fn refresh_products(&mut self) {
        for k in 0..self.psi.len() {
            let (a, b) = (self.psi[k].re, self.phi[k].re);
            self.pp_h[k] = Complex64::new(a * b, 0.0);
            self.ss_h[k] = Complex64::new(a * a, 0.0);
        }
        self.grid.forward_in_place(&mut self.pp_h, &mut self.scratch);
        self.grid.filter(&mut self.pp_h);
        self.grid.forward_in_place(&mut self.ss_h, &mut self.scratch);
        self.grid.filter(&mut self.ss_h);
    }

    /// Current physical state.
    pub fn state(&mut self) -> EiState {
        let mut out = |h: &[Complex64]| {
            let mut v = h.to_vec();
            self.grid.inverse_in_place(&mut v, &mut self.scratch);
            let mut f = Field::new(v);
            f.make_real();
            f
        };
        let psidot = out(&self.psidot_h);
        let phidot = out(&self.phidot_h);
        EiState {
            t: self.t,
            psi: Field::from_real(self.psi.iter().map(|v| v.re)),
            psidot,
            phi: Field::from_real(self.phi.iter().map(|v| v.re)),
            phidot,
        }
    }

    /// `psi` and `phi` at the current level without touching the rates.
    pub fn fields(&self) -> (Field, Field) {
        (
            Field::from_real(self.psi.iter().map(|v| v.re)),
            Field::from_real(self.phi.iter().map(|v| v.re)),
        )
    }

    pub fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub fn step(&mut self) {
        let p = &self.prop;
        let n = self.psi.len();
        let eps2 = self.params.epsilon * self.params.epsilon;
        let tau = self.tau;
        // psi^{n+1}, phi^{n+1}.
        for k in 0..n {
            let (ps, pd, ph, hd) = (self.psi_h[k], self.psidot_h[k], self.phi_h[k], self.phidot_h[k]);
            self.psi[k] = p.cos_w[k] * ps + p.sin_w_over_w[k] * pd - p.src_psi[k] * self.pp_h[k];
            self.phi[k] = p.cos_t[k] * ph + p.sin_t_over_t[k] * hd - p.src_phi[k] * self.ss_h[k];
        }
        // Old-level contributions to the rate updates.
        for k in 0..n {
            let (ps, pd, ph, hd) = (self.psi_h[k], self.psidot_h[k], self.phi_h[k], self.phidot_h[k]);
            self.psidot_h[k] =
                -p.w_sin_w[k] * ps + p.cos_w[k] * pd - (0.5 * tau / eps2) * p.cos_w[k] * self.pp_h[k];
            self.phidot_h[k] = -p.t_sin_t[k] * ph + p.cos_t[k] * hd - p.half_tau_t2[k] * p.cos_t[k] * self.ss_h[k];
            self.psi_h[k] = self.psi[k];
            self.phi_h[k] = self.phi[k];
        }
        self.grid.inverse_in_place(&mut self.psi, &mut self.scratch);
        self.grid.inverse_in_place(&mut self.phi, &mut self.scratch);
        for k in 0..n {
            self.psi[k].im = 0.0;
            self.phi[k].im = 0.0;
        }
        self.refresh_products();
        for k in 0..n {
            self.psidot_h[k] -= (0.5 * tau / eps2) * self.pp_h[k];
            self.phidot_h[k] -= self.prop.half_tau_t2[k] * self.ss_h[k];
        }
        self.t += tau;
    }
}

/// One step from `state`.
pub fn ei_step(state: &EiState, params: &KgzParams, tau: f64, grid: &SpectralGrid) -> Result<EiState> {
    let mut s = EiStepper::new(grid, params, tau)?;
    s.load(state)?;
    s.step();
    Ok(s.state())
}

#[derive(Debug, Clone)]
pub struct EiSnapshot {
    pub t: f64,
    pub psi: Field,
    pub phi: Field,
    pub state: EiState,
}

#[derive(Debug, Clone)]
pub struct EiTrajectory {
    pub tau: f64,
    pub steps: usize,
    pub snapshots: Vec<EiSnapshot>,
}

impl EiTrajectory {
    pub fn last(&self) -> &EiSnapshot {
        self.snapshots.last().expect("trajectory always holds the final state")
    }
}

/// Runs from `t = 0` to `t_end`, calling `observer(k, stepper)` at every
/// step index `k = 0..=n`; the stepper exposes the current level.
pub fn solve_ei_observed(
    data: &KgzInitialData,
    params: &KgzParams,
    tau: f64,
    t_end: f64,
    grid: &SpectralGrid,
    mut observer: impl FnMut(usize, &mut EiStepper),
) -> Result<EiState> {
    let (n_steps, tau) = step_count(t_end, tau)?;
    let mut stepper = EiStepper::new(grid, params, tau)?;
    stepper.load(&EiState::initial(data, params, grid)?)?;
    observer(0, &mut stepper);
    for k in 0..n_steps {
        stepper.step();
        stepper.set_time(time_of(k + 1, tau));
        observer(k + 1, &mut stepper);
    }
    Ok(stepper.state())
}

/// Runs to `t_end`, recording snapshots at `snapshot_times` and at `t_end`.
pub fn solve_ei(
    data: &KgzInitialData,
    params: &KgzParams,
    tau: f64,
    t_end: f64,
    grid: &SpectralGrid,
    snapshot_times: &[f64],
) -> Result<EiTrajectory> {
    let (n_steps, snapped) = step_count(t_end, tau)?;
    let mut wanted = snapshot_steps(snapshot_times, snapped, n_steps)?;
    wanted.push(n_steps);
    wanted.sort_unstable();
    wanted.dedup();
    let mut snapshots = Vec::with_capacity(wanted.len());
    solve_ei_observed(data, params, snapped, t_end, grid, |k, s| {
        if wanted.binary_search(&k).is_ok() {
            let state = s.state();
            snapshots.push(EiSnapshot {
                t: state.t,
                psi: state.psi.clone(),
                phi: state.phi.clone(),
                state,
            });
        }
    })?;
    Ok(EiTrajectory {
        tau: snapped,
        steps: n_steps,
        snapshots,
    })
}
