//! Multiscale time integrator.
//!
//! The solution is decomposed as `psi = e^{it/eps^2} z + c.c. + r` and
//! `phi = -2|z|^2 + I + q`, where `z` solves a Schrodinger equation with a
//! slowly varying potential, `I` is the exactly propagated initial-layer free
//! wave, and the remainders `r = O(eps^2)`, `q = O(gamma)` are advanced by
//! Gautschi-type exponential integrators whose oscillatory weights live in
//! [`MtiCoefficients`]. Every step costs a fixed number of FFTs.

use num_complex::Complex64;

use crate::coeffs::{build_coefficients, MtiCoefficients};
use crate::error::{KgzError, Result};
use crate::freewave::{freewave_init, FreeWaveData};
use crate::spectral::{self, Field, SpectralGrid};
use crate::stepping::{snapshot_steps, step_count, time_of};
use crate::{KgzInitialData, KgzParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

/// Decomposed unknowns at one time level.
#[derive(Debug, Clone)]
pub struct MtiState {
    pub t: f64,
    pub params: KgzParams,
    pub z: Field,
    /// Cached `z_t` at this level, as given by the `z` equation.
    pub zdot: Field,
    pub r: Field,
    pub rdot: Field,
    pub q: Field,
    pub qdot: Field,
    pub fw: FreeWaveData,
}

impl MtiState {
    pub fn grid(&self) -> &SpectralGrid {
        self.fw.grid()
    }

    /// Largest relative imaginary residue among the real unknowns.
    pub fn realness_residue(&self) -> f64 {
        [&self.r, &self.rdot, &self.q, &self.qdot]
            .iter()
            .map(|f| f.real_residue())
            .fold(0.0, f64::max)
    }
}

/// `z_t = (i/2) [-z_xx + (-2|z|^2 + q + I) z]` evaluated pointwise, with the
/// Laplacian supplied.
fn zdot_from(z: &[Complex64], lap: &[Complex64], q: &[Complex64], i: &[Complex64], out: &mut [Complex64]) {
    for k in 0..z.len() {
        let v = -2.0 * z[k].norm_sqr() + q[k].re + i[k].re;
        out[k] = HALF_I * (-lap[k] + z[k] * v);
    }
}

/// Initial decomposition `z0 = (psi0 - i psi1)/2`, `r = q = q_t = 0`,
/// `r_t = -2 Re z_t(0)` and the free wave seeded from `(z0, phi0, phi1)`.
pub fn decompose_initial(data: &KgzInitialData, params: &KgzParams, grid: &SpectralGrid) -> Result<MtiState> {
    params.validate()?;
    data.validate(grid)?;
    let z = Field::new(
        data.psi0
            .iter()
            .zip(data.psi1.iter())
            .map(|(a, b)| Complex64::new(0.5 * a.re, -0.5 * b.re))
            .collect(),
    );
    let lap = spectral::d2x(&z, grid)?;
    let zdot = Field::new(
        z.iter()
            .zip(lap.iter().zip(data.phi0.iter()))
            .map(|(z, (d, p))| HALF_I * (-d + z * p.re))
            .collect(),
    );
    let rdot = Field::from_real(zdot.iter().map(|w| -2.0 * w.re));
    let fw = freewave_init(&z, &data.phi0, &data.phi1, params, grid)?;
    let n = grid.n();
    Ok(MtiState {
        t: 0.0,
        params: *params,
        z,
        zdot,
        r: Field::zeros(n),
        rdot,
        q: Field::zeros(n),
        qdot: Field::zeros(n),
        fw,
    })
}

/// Physical fields and their time derivatives.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub psi: Field,
    pub psidot: Field,
    pub phi: Field,
    pub phidot: Field,
}

/// `psi = e^{it/eps^2} z + c.c. + r`, `phi = -2|z|^2 + I + q`.
pub fn reconstruct(state: &MtiState) -> (Field, Field) {
    let eps2 = state.params.epsilon * state.params.epsilon;
    let phase = Complex64::from_polar(1.0, state.t / eps2);
    let psi = Field::from_real(
        state
            .z
            .iter()
            .zip(state.r.iter())
            .map(|(z, r)| 2.0 * (phase * z).re + r.re),
    );
    let i = state.fw.at(state.t);
    let phi = Field::from_real(
        state
            .z
            .iter()
            .zip(i.iter().zip(state.q.iter()))
            .map(|(z, (i, q))| -2.0 * z.norm_sqr() + i.re + q.re),
    );
    (psi, phi)
}

/// [`reconstruct`] together with `psi_t` and `phi_t`, obtained by
/// differentiating the decomposition with the cached `z_t`.
pub fn reconstruct_with_rates(state: &MtiState) -> Reconstruction {
    let eps2 = state.params.epsilon * state.params.epsilon;
    let phase = Complex64::from_polar(1.0, state.t / eps2);
    let (psi, phi) = reconstruct(state);
    let psidot = Field::from_real(
        state
            .z
            .iter()
            .zip(state.zdot.iter().zip(state.rdot.iter()))
            .map(|(z, (zd, rd))| 2.0 * (phase * (Complex64::new(0.0, 1.0 / eps2) * z + zd)).re + rd.re),
    );
    let idot = state.fw.rate_at(state.t);
    let phidot = Field::from_real(
        state
            .z
            .iter()
            .zip(state.zdot.iter())
            .zip(idot.iter().zip(state.qdot.iter()))
            .map(|((z, zd), (id, qd))| -4.0 * (z.conj() * zd).re + id.re + qd.re),
    );
    Reconstruction {
        psi,
        psidot,
        phi,
        phidot,
    }
}

/// Reusable stepper holding the coefficient table and work buffers.
pub struct MtiStepper {
    coeffs: MtiCoefficients,
    scratch: Vec<Complex64>,
    j: Vec<Complex64>,
    i1: Vec<Complex64>,
    z1: Field,
    lap: Vec<Complex64>,
    zdot1: Field,
    rh: Vec<Complex64>,
    rdh: Vec<Complex64>,
    qh: Vec<Complex64>,
    qdh: Vec<Complex64>,
    rp: Vec<Complex64>,
    p: [Vec<Complex64>; 4],
    xa: Vec<Complex64>,
    xb: Vec<Complex64>,
    d: Vec<Complex64>,
    g: Vec<Complex64>,
    rr: Vec<Complex64>,
    f: Vec<Complex64>,
    r1: Field,
    rdot1: Field,
    q1: Field,
    qdot1: Field,
}

impl MtiStepper {
    pub fn new(coeffs: MtiCoefficients) -> Self {
        let n = coeffs.grid().n();
        let v = || vec![ZERO; n];
        Self {
            scratch: vec![ZERO; coeffs.grid().scratch_len()],
            j: v(),
            i1: v(),
            z1: Field::zeros(n),
            lap: v(),
            zdot1: Field::zeros(n),
            rh: v(),
            rdh: v(),
            qh: v(),
            qdh: v(),
            rp: v(),
            p: [v(), v(), v(), v()],
            xa: v(),
            xb: v(),
            d: v(),
            g: v(),
            rr: v(),
            f: v(),
            r1: Field::zeros(n),
            rdot1: Field::zeros(n),
            q1: Field::zeros(n),
            qdot1: Field::zeros(n),
            coeffs,
        }
    }

    pub fn for_params(grid: &SpectralGrid, params: &KgzParams, tau: f64) -> Result<Self> {
        Ok(Self::new(build_coefficients(grid, params, tau)?))
    }

    pub fn coefficients(&self) -> &MtiCoefficients {
        &self.coeffs
    }

    fn check(&self, st: &MtiState) -> Result<()> {
        let c = &self.coeffs;
        if *st.grid() != *c.grid() {
            return Err(KgzError::GridMismatch(format!(
                "state lives on {:?}, coefficients on {:?}",
                st.grid(),
                c.grid()
            )));
        }
        if st.params != *c.params() || st.fw.gamma() != c.params().gamma {
            return Err(KgzError::GridMismatch(format!(
                "state parameters {:?} differ from coefficient parameters {:?}",
                st.params,
                c.params()
            )));
        }
        for f in [&st.z, &st.zdot, &st.r, &st.rdot, &st.q, &st.qdot] {
            c.grid().check_len(f.len())?;
        }
        Ok(())
    }

    /// Advances `state` from `t_n = state.t` to `t_n + tau`.
    pub fn step(&mut self, st: &mut MtiState) -> Result<()> {
        self.check(st)?;
        let t_n = st.t;
        self.step_unchecked(st);
        st.t = t_n + self.coeffs.tau();
        Ok(())
    }

    fn step_unchecked(&mut self, st: &mut MtiState) {
        let c = &self.coeffs;
        let grid = c.grid();
        let n = grid.n();
        let tau = c.tau();
        let eps2 = st.params.epsilon * st.params.epsilon;
        let t_n = st.t;
        let e1 = Complex64::from_polar(1.0, t_n / eps2);
        let e2 = Complex64::from_polar(1.0, 2.0 * t_n / eps2);
        let sc = &mut self.scratch;
        let fwd = |b: &mut [Complex64], sc: &mut [Complex64]| {
            grid.forward_in_place(b, sc);
            grid.filter(b);
        };
        let inv = |b: &mut [Complex64], sc: &mut [Complex64]| grid.inverse_in_place(b, sc);
        let real = |b: &mut [Complex64]| b.iter_mut().for_each(|v| v.im = 0.0);

        // Free wave: window integral J^n and I^{n+1}.
        st.fw.window_spectrum_into(t_n, tau, &mut self.j);
        inv(&mut self.j, sc);
        st.fw.spectrum_into(t_n + tau, &mut self.i1);
        inv(&mut self.i1, sc);

        // z: potential phase, then free Schrodinger flow.
        for k in 0..n {
            let z = st.z[k];
            let v = -2.0 * tau * z.norm_sqr() + tau * st.q[k].re + self.j[k].re;
            self.z1[k] = z * Complex64::from_polar(1.0, 0.5 * v);
        }
        fwd(&mut self.z1, sc);
        for k in 0..n {
            self.z1[k] *= c.kinetic[k];
            let mu = grid.mu()[k];
            self.lap[k] = self.z1[k] * (-mu * mu);
        }
        inv(&mut self.z1, sc);
        inv(&mut self.lap, sc);

        // Spectra of the real remainders and the r_p companion.
        for (src, dst) in [
            (&st.r, &mut self.rh),
            (&st.rdot, &mut self.rdh),
            (&st.q, &mut self.qh),
            (&st.qdot, &mut self.qdh),
        ] {
            dst.copy_from_slice(src);
            grid.forward_in_place(dst, sc);
        }
        for k in 0..n {
            self.rp[k] = self.rdh[k] * c.inv_omega[k];
        }
        inv(&mut self.rp, sc);
        real(&mut self.rp);

        // Products (z^{n+1})^2, z^n zdot^n, z^n r^n, z^n r_p^n.
        for k in 0..n {
            let z = st.z[k];
            self.p[0][k] = self.z1[k] * self.z1[k];
            self.p[1][k] = z * st.zdot[k];
            self.p[2][k] = z * st.r[k].re;
            self.p[3][k] = z * self.rp[k].re;
        }
        for p in self.p.iter_mut() {
            fwd(p, sc);
        }
        for k in 0..n {
            let m = &c.modes[k];
            let p = |i: usize| self.p[i][k];
            self.xa[k] = e2 * (m.alpha_tau * p(0) - m.kappa * p(1)) + e1 * (m.chi1 * p(2) + m.chi2 * p(3));
            self.xb[k] = e2 * (m.beta_tau * p(0) - m.rho * p(1)) + e1 * (m.chidot1 * p(2) + m.chidot2 * p(3));
        }

        // q^{n+1}; the weights are even in l, so each conjugate-mirrored
        // term is the conjugate spectrum of its partner.
        for k in 0..n {
            let a = self.xa[k] + self.xa[(n - k) % n].conj();
            self.q1[k] = c.cos_theta[k] * self.qh[k] + c.sin_theta_over_theta[k] * self.qdh[k] - a;
        }
        inv(&mut self.q1, sc);
        real(&mut self.q1);

        // zdot^{n+1}.
        zdot_from(&self.z1, &self.lap, &self.q1, &self.i1, &mut self.zdot1);

        // r^{n+1}.
        for k in 0..n {
            self.d[k] = self.zdot1[k] - st.zdot[k];
        }
        fwd(&mut self.d, sc);
        for k in 0..n {
            let m = &c.modes[k];
            let y = |kk: usize| e1 * c.modes[kk].sigma * self.d[kk];
            let corr = y(k) + y((n - k) % n).conj();
            self.r1[k] = c.cos_omega[k] * self.rh[k] + c.sin_omega_over_omega[k] * self.rdh[k] - corr;
            // Reuse `xa` for the sigmadot-weighted difference.
            self.xa[k] = e1 * m.sigmadot * self.d[k];
        }

        // qdot^{n+1}.
        for k in 0..n {
            let g = 4.0 * ((self.z1[k].conj() * self.zdot1[k]).re - (st.z[k].conj() * st.zdot[k]).re);
            self.g[k] = Complex64::new(g, 0.0);
            let r = st.r[k].re;
            self.rr[k] = Complex64::new(r * r, 0.0);
        }
        fwd(&mut self.g, sc);
        fwd(&mut self.rr, sc);
        for k in 0..n {
            let b = self.xb[k] + self.xb[(n - k) % n].conj();
            self.qdot1[k] = -c.theta_sin_theta[k] * self.qh[k] + c.cos_theta[k] * self.qdh[k] + self.g[k]
                - c.tau_theta2_cos_theta[k] * self.rr[k]
                - b;
        }

        // rdot^{n+1} from f^{n+1} = (-2|z|^2 + q + I) r at the new level.
        inv(&mut self.r1, sc);
        real(&mut self.r1);
        for k in 0..n {
            let v = -2.0 * self.z1[k].norm_sqr() + self.q1[k].re + self.i1[k].re;
            self.f[k] = Complex64::new(v * self.r1[k].re, 0.0);
        }
        fwd(&mut self.f, sc);
        for k in 0..n {
            let corr = self.xa[k] + self.xa[(n - k) % n].conj();
            self.rdot1[k] = -c.omega_sin_omega[k] * self.rh[k] + c.cos_omega[k] * self.rdh[k]
                - (tau / eps2) * self.f[k]
                - corr;
        }
        inv(&mut self.rdot1, sc);
        real(&mut self.rdot1);
        inv(&mut self.qdot1, sc);
        real(&mut self.qdot1);

        std::mem::swap(&mut st.z, &mut self.z1);
        std::mem::swap(&mut st.zdot, &mut self.zdot1);
        std::mem::swap(&mut st.r, &mut self.r1);
        std::mem::swap(&mut st.rdot, &mut self.rdot1);
        std::mem::swap(&mut st.q, &mut self.q1);
        std::mem::swap(&mut st.qdot, &mut self.qdot1);
    }
}

/// One step from `state`; builds a fresh coefficient table. Loops should
/// use an [`MtiStepper`] instead.
pub fn mti_step(state: &MtiState, coeffs: &MtiCoefficients) -> Result<MtiState> {
    let mut next = state.clone();
    MtiStepper::new(coeffs.clone()).step(&mut next)?;
    Ok(next)
}

/// Output of a driver run: the requested snapshots in time order.
#[derive(Debug, Clone)]
pub struct MtiTrajectory {
    pub tau: f64,
    pub steps: usize,
    pub snapshots: Vec<MtiSnapshot>,
}

#[derive(Debug, Clone)]
pub struct MtiSnapshot {
    pub t: f64,
    pub psi: Field,
    pub phi: Field,
    pub state: MtiState,
}

impl MtiTrajectory {
    /// The snapshot at the final time.
    pub fn last(&self) -> &MtiSnapshot {
        self.snapshots.last().expect("trajectory always holds the final state")
    }
}

/// Runs the integrator from `t = 0` to `t_end`, calling `observer(k, state)`
/// at every step index `k = 0..=n`. `tau` is snapped to `t_end / n`.
pub fn solve_mti_observed(
    data: &KgzInitialData,
    params: &KgzParams,
    tau: f64,
    t_end: f64,
    grid: &SpectralGrid,
    mut observer: impl FnMut(usize, &MtiState),
) -> Result<MtiState> {
    let (n_steps, tau) = step_count(t_end, tau)?;
    let mut state = decompose_initial(data, params, grid)?;
    observer(0, &state);
    if n_steps == 0 {
        return Ok(state);
    }
    let mut stepper = MtiStepper::for_params(grid, params, tau)?;
    stepper.check(&state)?;
    for k in 0..n_steps {
        stepper.step_unchecked(&mut state);
        state.t = time_of(k + 1, tau);
        observer(k + 1, &state);
    }
    Ok(state)
}

/// Runs to `t_end` and returns `(psi, phi)` plus the raw state at each of
/// `snapshot_times` (which must be multiples of `tau`) and at `t_end`.
pub fn solve_mti(
    data: &KgzInitialData,
    params: &KgzParams,
    tau: f64,
    t_end: f64,
    grid: &SpectralGrid,
    snapshot_times: &[f64],
) -> Result<MtiTrajectory> {
    let (n_steps, snapped) = step_count(t_end, tau)?;
    let mut wanted = snapshot_steps(snapshot_times, snapped, n_steps)?;
    wanted.push(n_steps);
    wanted.sort_unstable();
    wanted.dedup();
    let mut snapshots = Vec::with_capacity(wanted.len());
    solve_mti_observed(data, params, snapped, t_end, grid, |k, st| {
        if wanted.binary_search(&k).is_ok() {
            let (psi, phi) = reconstruct(st);
            snapshots.push(MtiSnapshot {
                t: st.t,
                psi,
                phi,
                state: st.clone(),
            });
        }
    })?;
    Ok(MtiTrajectory {
        tau: snapped,
        steps: n_steps,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ei;
    use crate::problems::{make_problem, ProblemId};
    use std::f64::consts::PI;

    fn torus(n: usize) -> SpectralGrid {
        SpectralGrid::new(PI, n).unwrap()
    }

    fn ex2(eps: f64, gamma: f64, n: usize) -> (KgzInitialData, KgzParams, SpectralGrid) {
        let grid = torus(n);
        let p = crate::problems::make_problem(ProblemId::Ex2Torus, 1, Some(n)).unwrap();
        (p.data, KgzParams::new(eps, gamma).unwrap(), grid)
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = torus(32);
        let p = KgzParams::new(0.3, 0.6).unwrap();
        let tr = solve_mti(&KgzInitialData::zeros(32), &p, 0.01, 0.2, &g, &[0.1]).unwrap();
        assert_eq!(tr.snapshots.len(), 2);
        for s in &tr.snapshots {
            assert_eq!(s.psi.max_abs(), 0.0);
            assert_eq!(s.phi.max_abs(), 0.0);
            assert_eq!(s.state.z.max_abs(), 0.0);
        }
    }

    #[test]
    fn zero_horizon_returns_initial_reconstruction() {
        let (data, p, g) = ex2(0.5, 1.0, 64);
        let tr = solve_mti(&data, &p, 0.1, 0.0, &g, &[]).unwrap();
        assert_eq!(tr.steps, 0);
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.last().psi, data.psi0);
    }

    #[test]
    fn constant_field_decomposition() {
        let g = torus(16);
        let mut data = KgzInitialData::zeros(16);
        data.psi0 = Field::from_real(vec![2.0; 16]);
        let st = decompose_initial(&data, &KgzParams::new(0.5, 1.0).unwrap(), &g).unwrap();
        for k in 0..16 {
            assert!((st.z[k] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
            assert!(st.zdot[k].norm() < 1e-14);
            assert!(st.rdot[k].norm() < 1e-14);
        }
    }

    #[test]
    fn initial_zdot_matches_finite_difference_formula() {
        // Smooth localized data on a large box; central-difference Laplacian.
        let errs: Vec<f64> = [512usize, 1024]
            .iter()
            .map(|&n| {
                let g = SpectralGrid::new(16.0, n).unwrap();
                let mut data = KgzInitialData::zeros(n);
                data.psi0 = g.sample(|x| (-x * x).exp() * (1.0 + x));
                data.psi1 = g.sample(|x| 0.5 * (-x * x / 2.0).exp());
                data.phi0 = g.sample(|x| x.sin() * (-x * x).exp());
                let st = decompose_initial(&data, &KgzParams::new(0.5, 1.0).unwrap(), &g).unwrap();
                let h = g.dx();
                let mut err: f64 = 0.0;
                for j in 0..n {
                    let z = |k: usize| st.z[(k + n) % n];
                    let lap = (z(j + 1) - 2.0 * z(j) + z(j + n - 1)) / (h * h);
                    let expect = HALF_I * (-lap + z(j) * data.phi0[j].re);
                    err = err.max((st.zdot[j] - expect).norm());
                }
                err
            })
            .collect();
        assert!(errs[0] < 1e-2, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn initial_reconstruction_reproduces_data() {
        let (data, p, g) = ex2(0.25, 0.7, 128);
        let st = decompose_initial(&data, &p, &g).unwrap();
        let rec = reconstruct_with_rates(&st);
        assert_eq!(rec.psi, data.psi0);
        let scale = data.phi0.max_abs();
        assert!(rec.phi.max_abs_diff(&data.phi0) <= 1e-14 * scale);
        let eps2 = p.epsilon * p.epsilon;
        for k in 0..128 {
            assert!((rec.psidot[k].re - data.psi1[k].re / eps2).abs() < 1e-12 / eps2);
            assert!((rec.phidot[k].re - data.phi1[k].re / p.gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_coefficients() {
        let (data, p, g) = ex2(0.5, 1.0, 32);
        let st = decompose_initial(&data, &p, &g).unwrap();
        let other = build_coefficients(&torus(64), &p, 0.01).unwrap();
        assert!(matches!(mti_step(&st, &other), Err(KgzError::GridMismatch(_))));
        let other = build_coefficients(&g, &KgzParams::new(0.4, 1.0).unwrap(), 0.01).unwrap();
        assert!(mti_step(&st, &other).is_err());
    }

    #[test]
    fn remainders_stay_real_and_decomposition_is_definitional() {
        let (data, p, g) = ex2(2f64.powi(-3), std::f64::consts::E * 2f64.powi(-3), 64);
        let mut worst: f64 = 0.0;
        let last = solve_mti_observed(&data, &p, 1e-3, 0.5, &g, |_, st| {
            worst = worst.max(st.realness_residue());
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst:e}");
        let (psi, phi) = reconstruct(&last);
        assert!(psi.real_residue() < 1e-9 && phi.real_residue() < 1e-9);
        let eps2 = p.epsilon * p.epsilon;
        let i = last.fw.at(last.t);
        for k in 0..64 {
            let z = last.z[k];
            let ps = Complex64::from_polar(1.0, last.t / eps2) * z;
            let expect_psi = ps + ps.conj() + last.r[k];
            let expect_phi = -2.0 * z.norm_sqr() + i[k] + last.q[k];
            assert!((expect_psi - psi[k]).norm() < 1e-14);
            assert!((expect_phi - phi[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn one_step_local_error_is_second_order() {
        let (data, p, g) = ex2(0.5, 1.0, 128);
        let reference = |tau: f64| {
            let tr = ei::solve_ei(&data, &p, tau / 1e4, tau, &g, &[]).unwrap();
            let s = tr.last();
            (s.psi.clone(), s.phi.clone())
        };
        let errs: Vec<f64> = [4e-3, 2e-3, 1e-3]
            .iter()
            .map(|&tau| {
                let tr = solve_mti(&data, &p, tau, tau, &g, &[]).unwrap();
                let (psi, phi) = reference(tau);
                tr.last().psi.max_abs_diff(&psi) + tr.last().phi.max_abs_diff(&phi)
            })
            .collect();
        assert!(errs[2] < 50.0 * 1e-3 * 1e-3, "{errs:?}");
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        assert!(o1 >= 1.8 && o2 >= 1.8, "local orders {o1} {o2} from {errs:?}");
    }

    #[test]
    fn global_error_decays_at_first_order() {
        let eps = 2f64.powi(-3);
        let (data, p, g) = ex2(eps, std::f64::consts::E * eps, 256);
        let rf = ei::solve_ei(&data, &p, 1e-6, 0.5, &g, &[]).unwrap();
        let r = rf.last();
        let err = |tau: f64| {
            let tr = solve_mti(&data, &p, tau, 0.5, &g, &[]).unwrap();
            tr.last().psi.max_abs_diff(&r.psi) + tr.last().phi.max_abs_diff(&r.phi)
        };
        let (e2, e1) = (err(2e-3), err(1e-3));
        assert!(e1 <= e2 / 1.7, "{e2:e} -> {e1:e}");
    }

    #[test]
    fn problem_helper_builds_torus() {
        let p = make_problem(ProblemId::Ex2Torus, 3, None).unwrap();
        assert_eq!(p.grid.n(), 256);
    }
}
