//! Limit models of the KGZ system for `eps < gamma -> 0`, the distances
//! between KGZ and limit solutions, and the conserved energy.
//!
//! * `nls`: the cubic Schrodinger equation `2i z_t - z_xx - 2|z|^2 z = 0`
//!   with `phi ~ -2|z|^2 + I_nls`, where `I_nls` is the free wave seeded by
//!   `phi0 + (psi0^2 + psi1^2)/2` and `phi1/gamma`;
//! * `op`: the same equation with the oscillatory potential `I` of the
//!   multiscale decomposition, `2i z_t - z_xx - 2|z|^2 z + I z = 0`.
//!
//! Both are advanced by Lie-Trotter splitting: the potential phase first,
//! then the free Schrodinger flow `e^{i mu^2 tau / 2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KgzError, Result};
use crate::freewave::{freewave_init, FreeWaveData};
use crate::spectral::{self, Field, SpectralGrid};
use crate::stepping::{step_count, time_of};
use crate::{KgzInitialData, KgzParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NlsVariant {
    Nls,
    Op,
}

#[derive(Debug, Clone)]
pub struct NlsState {
    pub t: f64,
    pub params: KgzParams,
    pub variant: NlsVariant,
    pub z: Field,
    /// `I_nls` for the `nls` variant, the decomposition's `I` for `op`.
    pub fw: FreeWaveData,
}

impl NlsState {
    pub fn grid(&self) -> &SpectralGrid {
        self.fw.grid()
    }

    /// Discrete `L^2` norm of `z`.
    pub fn mass(&self) -> f64 {
        self.grid().l2_norm(&self.z)
    }
}

/// `z_t(0) = -(i/2)(z0_xx + 2|z0|^2 z0)` of the cubic Schrodinger limit.
pub fn dzdt_nls0(z0: &Field, grid: &SpectralGrid) -> Result<Field> {
    let lap = spectral::d2x(z0, grid)?;
    Ok(Field::new(
        z0.iter()
            .zip(lap.iter())
            .map(|(z, d)| Complex64::new(0.0, -0.5) * (d + 2.0 * z.norm_sqr() * z))
            .collect(),
    ))
}

/// `z(0) = (psi0 - i psi1)/2` and the free wave of the chosen variant.
pub fn nls_init(
    data: &KgzInitialData,
    params: &KgzParams,
    variant: NlsVariant,
    grid: &SpectralGrid,
) -> Result<NlsState> {
    params.validate()?;
    data.validate(grid)?;
    let z = Field::new(
        data.psi0
            .iter()
            .zip(data.psi1.iter())
            .map(|(a, b)| Complex64::new(0.5 * a.re, -0.5 * b.re))
            .collect(),
    );
    let fw = match variant {
        NlsVariant::Nls => {
            let i0 = Field::from_real(
                data.phi0
                    .iter()
                    .zip(data.psi0.iter().zip(data.psi1.iter()))
                    .map(|(p, (a, b))| p.re + 0.5 * (a.re * a.re + b.re * b.re)),
            );
            let idot0 = Field::from_real(data.phi1.iter().map(|p| p.re / params.gamma));
            FreeWaveData::from_slices(&i0, &idot0, params.gamma, grid)?
        }
        NlsVariant::Op => freewave_init(&z, &data.phi0, &data.phi1, params, grid)?,
    };
    Ok(NlsState {
        t: 0.0,
        params: *params,
        variant,
        z,
        fw,
    })
}

/// Splitting stepper with preallocated buffers.
pub struct NlsStepper {
    grid: SpectralGrid,
    tau: f64,
    kinetic: Vec<Complex64>,
    j: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl NlsStepper {
    pub fn new(grid: &SpectralGrid, tau: f64) -> Result<Self> {
        step_count(tau, tau)?;
        Ok(Self {
            grid: grid.clone(),
            tau,
            kinetic: grid
                .mu()
                .iter()
                .map(|m| Complex64::from_polar(1.0, 0.5 * m * m * tau))
                .collect(),
            j: vec![ZERO; grid.n()],
            scratch: vec![ZERO; grid.scratch_len()],
        })
    }

    pub fn step(&mut self, st: &mut NlsState) -> Result<()> {
        if *st.grid() != self.grid {
            return Err(KgzError::GridMismatch(format!(
                "state lives on {:?}, stepper on {:?}",
                st.grid(),
                self.grid
            )));
        }
        let t_n = st.t;
        self.step_unchecked(st);
        st.t = t_n + self.tau;
        Ok(())
    }

    fn step_unchecked(&mut self, st: &mut NlsState) {
        let tau = self.tau;
        let op = st.variant == NlsVariant::Op;
        if op {
            st.fw.window_spectrum_into(st.t, tau, &mut self.j);
            self.grid.inverse_in_place(&mut self.j, &mut self.scratch);
        }
        for k in 0..st.z.len() {
            let z = st.z[k];
            let mut v = -2.0 * tau * z.norm_sqr();
            if op {
                v += self.j[k].re;
            }
            st.z[k] = z * Complex64::from_polar(1.0, 0.5 * v);
        }
        self.grid.forward_in_place(&mut st.z, &mut self.scratch);
        for (c, k) in st.z.iter_mut().zip(&self.kinetic) {
            *c *= k;
        }
        self.grid.inverse_in_place(&mut st.z, &mut self.scratch);
    }
}

/// One splitting step from `state`.
pub fn nls_step(state: &NlsState, tau: f64) -> Result<NlsState> {
    let mut next = state.clone();
    NlsStepper::new(state.grid(), tau)?.step(&mut next)?;
    Ok(next)
}

/// Runs the limit model to `t_end`, calling `observer(k, state)` at every
/// step index `k = 0..=n`.
pub fn solve_nls_observed(
    data: &KgzInitialData,
    params: &KgzParams,
    variant: NlsVariant,
    tau: f64,
    t_end: f64,
    grid: &SpectralGrid,
    mut observer: impl FnMut(usize, &NlsState),
) -> Result<NlsState> {
    let (n_steps, tau) = step_count(t_end, tau)?;
    let mut st = nls_init(data, params, variant, grid)?;
    observer(0, &st);
    let mut stepper = NlsStepper::new(grid, tau)?;
    for k in 0..n_steps {
        stepper.step_unchecked(&mut st);
        st.t = time_of(k + 1, tau);
        observer(k + 1, &st);
    }
    Ok(st)
}

/// `psi ~ e^{it/eps^2} z + c.c.`, `phi ~ -2|z|^2 + I` at the state's time.
pub fn limit_reconstruct(state: &NlsState) -> (Field, Field) {
    let eps2 = state.params.epsilon * state.params.epsilon;
    let phase = Complex64::from_polar(1.0, state.t / eps2);
    let psi = Field::from_real(state.z.iter().map(|z| 2.0 * (phase * z).re));
    let i = state.fw.at(state.t);
    let phi = Field::from_real(
        state
            .z
            .iter()
            .zip(i.iter())
            .map(|(z, i)| -2.0 * z.norm_sqr() + i.re),
    );
    (psi, phi)
}

/// Discrete `L^2` distances `(|psi - psi_lim|, |phi - phi_lim|)`.
pub fn eta_metrics(kgz: (&Field, &Field), limit: (&Field, &Field), grid: &SpectralGrid) -> Result<(f64, f64)> {
    let dist = |a: &Field, b: &Field| -> Result<f64> {
        grid.check_len(a.len())?;
        grid.check_len(b.len())?;
        let d: Vec<Complex64> = a.iter().zip(b.iter()).map(|(x, y)| x - y).collect();
        Ok(grid.l2_norm(&d))
    };
    Ok((dist(kgz.0, limit.0)?, dist(kgz.1, limit.1)?))
}

/// Energy
/// `int eps^2 psi_t^2 + psi_x^2 + psi^2/eps^2 + (gamma^2/2) vphi_x^2 + phi^2/2 + phi psi^2`
/// with `vphi_xx = phi_t`. The mean of `phi_t` has no periodic inverse
/// Laplacian and is dropped; the result is conserved whenever that mean
/// vanishes.
pub fn kgz_energy(
    psi: &Field,
    psidot: &Field,
    phi: &Field,
    phidot: &Field,
    params: &KgzParams,
    grid: &SpectralGrid,
) -> Result<f64> {
    for f in [psi, psidot, phi, phidot] {
        grid.check_len(f.len())?;
    }
    let eps2 = params.epsilon * params.epsilon;
    let g2 = params.gamma * params.gamma;
    let local: Vec<f64> = (0..grid.n())
        .map(|k| {
            let (p, pd, h) = (psi[k].re, psidot[k].re, phi[k].re);
            eps2 * pd * pd + p * p / eps2 + 0.5 * h * h + h * p * p
        })
        .collect();
    let psi_h = spectral::to_spectrum(psi, grid)?;
    let phidot_h = spectral::to_spectrum(phidot, grid)?;
    let two_l = 2.0 * grid.half_length();
    let mut grad = 0.0;
    for (k, &mu) in grid.mu().iter().enumerate() {
        grad += mu * mu * psi_h.coeffs()[k].norm_sqr();
        if mu != 0.0 {
            grad += 0.5 * g2 * phidot_h.coeffs()[k].norm_sqr() / (mu * mu);
        }
    }
    Ok(grid.integrate(&local) + two_l * grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_problem, ProblemId};
    use std::f64::consts::PI;

    fn torus(n: usize) -> SpectralGrid {
        SpectralGrid::new(PI, n).unwrap()
    }

    #[test]
    fn constant_data_is_reproduced_exactly() {
        let g = torus(16);
        let p = KgzParams::new(0.1, 0.5).unwrap();
        let mut data = KgzInitialData::zeros(16);
        data.psi0 = Field::from_real(vec![1.2; 16]);
        data.psi1 = Field::from_real(vec![-0.4; 16]);
        let c = Complex64::new(0.6, 0.2);
        let tau = 1e-2;
        let mut worst: f64 = 0.0;
        solve_nls_observed(&data, &p, NlsVariant::Nls, tau, 10.0, &g, |k, st| {
            let exact = c * Complex64::from_polar(1.0, -c.norm_sqr() * time_of(k, tau));
            for z in st.z.iter() {
                worst = worst.max((z - exact).norm());
            }
        })
        .unwrap();
        assert!(worst < 1e-12, "{worst:e}");
    }

    #[test]
    fn zero_data_gives_zero() {
        let g = torus(16);
        let p = KgzParams::new(0.1, 0.5).unwrap();
        for v in [NlsVariant::Nls, NlsVariant::Op] {
            let st = solve_nls_observed(&KgzInitialData::zeros(16), &p, v, 0.1, 1.0, &g, |_, _| {}).unwrap();
            let (psi, phi) = limit_reconstruct(&st);
            assert_eq!(psi.max_abs() + phi.max_abs() + st.z.max_abs(), 0.0);
        }
    }

    #[test]
    fn init_slices() {
        let g = torus(16);
        let p = KgzParams::new(0.1, 0.5).unwrap();
        let mut data = KgzInitialData::zeros(16);
        data.psi0 = Field::from_real(vec![2.0; 16]);
        data.phi0 = g.sample(|x| x.cos());
        let st = nls_init(&data, &p, NlsVariant::Nls, &g).unwrap();
        let i0 = st.fw.at(0.0);
        for k in 0..16 {
            assert!((st.z[k].re - 1.0).abs() < 1e-15);
            assert!((i0[k].re - (data.phi0[k].re + 2.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn compatible_data_has_no_initial_layer() {
        let prob = make_problem(ProblemId::Sec1Compatible, 2, Some(2048)).unwrap();
        let st = nls_init(&prob.data, &prob.params, NlsVariant::Nls, &prob.grid).unwrap();
        assert!(st.fw.at(0.0).max_abs() < 1e-14);
    }

    #[test]
    fn reconstruction_at_zero_returns_psi0() {
        let prob = make_problem(ProblemId::Ex2Torus, 2, Some(64)).unwrap();
        for v in [NlsVariant::Nls, NlsVariant::Op] {
            let st = nls_init(&prob.data, &prob.params, v, &prob.grid).unwrap();
            let (psi, phi) = limit_reconstruct(&st);
            assert_eq!(psi, prob.data.psi0);
            assert!(psi.real_residue() < 1e-9 && phi.real_residue() < 1e-9);
        }
    }

    #[test]
    fn mass_is_conserved() {
        let prob = make_problem(ProblemId::Ex2Torus, 2, Some(64)).unwrap();
        for v in [NlsVariant::Nls, NlsVariant::Op] {
            let st0 = nls_init(&prob.data, &prob.params, v, &prob.grid).unwrap();
            let m0 = st0.mass();
            let mut worst: f64 = 0.0;
            solve_nls_observed(&prob.data, &prob.params, v, 1e-3, 1.0, &prob.grid, |_, st| {
                worst = worst.max((st.mass() - m0).abs() / m0);
            })
            .unwrap();
            assert!(worst < 1e-10, "{v:?}: {worst:e}");
        }
    }

    #[test]
    fn splitting_converges_at_first_order() {
        let prob = make_problem(ProblemId::Ex2Torus, 1, Some(64)).unwrap();
        for v in [NlsVariant::Nls, NlsVariant::Op] {
            let run = |tau: f64| {
                solve_nls_observed(&prob.data, &prob.params, v, tau, 0.5, &prob.grid, |_, _| {})
                    .unwrap()
                    .z
            };
            let (a, b, c) = (run(4e-3), run(2e-3), run(1e-3));
            let order = (a.max_abs_diff(&b) / b.max_abs_diff(&c)).log2();
            assert!((0.8..=1.2).contains(&order), "{v:?}: order {order}");
        }
    }

    #[test]
    fn eta_of_constant_field() {
        let g = torus(10);
        let one = Field::from_real(vec![1.0; 10]);
        let zero = Field::zeros(10);
        let (a, b) = eta_metrics((&zero, &one), (&zero, &zero), &g).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert_eq!(eta_metrics((&one, &one), (&one, &one), &g).unwrap(), (0.0, 0.0));
        assert!(eta_metrics((&one, &one), (&Field::zeros(4), &one), &g).is_err());
    }

    #[test]
    fn energy_of_constant_fields() {
        let g = SpectralGrid::new(3.0, 12).unwrap();
        let p = KgzParams::new(0.5, 0.8).unwrap();
        let z = Field::zeros(12);
        assert_eq!(kgz_energy(&z, &z, &z, &z, &p, &g).unwrap(), 0.0);
        let (a, b) = (0.7, -1.3);
        let e = kgz_energy(
            &Field::from_real(vec![a; 12]),
            &z,
            &Field::from_real(vec![b; 12]),
            &z,
            &p,
            &g,
        )
        .unwrap();
        let expect = 6.0 * (a * a / 0.25 + b * b / 2.0 + a * a * b);
        assert!((e - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn energy_gradient_terms_match_closed_form() {
        let g = torus(32);
        let p = KgzParams::new(0.5, 0.8).unwrap();
        // psi = cos(2x): int psi_x^2 = 4 pi. phi_t = cos(3x): vphi = -cos(3x)/9,
        // int vphi_x^2 = pi/9.
        let psi = g.sample(|x| (2.0 * x).cos());
        let phidot = g.sample(|x| (3.0 * x).cos());
        let z = Field::zeros(32);
        let e = kgz_energy(&psi, &z, &z, &phidot, &p, &g).unwrap();
        let expect = 4.0 * PI + PI / 0.25 + 0.5 * 0.64 * PI / 9.0;
        assert!((e - expect).abs() < 1e-12 * expect, "{e} vs {expect}");
    }
}
