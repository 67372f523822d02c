//! Periodic Fourier collocation on `[-L, L]`.
//!
//! Samples live at `x_j = -L + j 2L/N`, `j = 0..N`, and are interpolated by
//! `f(x) = sum_l c_l exp(i mu_l (x + L))` with `mu_l = pi l / L` for
//! `l = -N/2..N/2-1`. Spectra are stored in FFT slot order: slot `k` holds
//! mode `l = k` for `k < N/2` and `l = k - N` otherwise, so the unpaired
//! Nyquist mode `l = -N/2` sits in slot `N/2`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{KgzError, Result};

/// Relative imaginary residue below which a field counts as real.
pub const REAL_TOL: f64 = 1e-9;

#[derive(Clone)]
pub struct SpectralGrid {
    half_length: f64,
    n: usize,
    dealias: bool,
    mu: Arc<[f64]>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("half_length", &self.half_length)
            .field("n", &self.n)
            .field("dealias", &self.dealias)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.half_length == other.half_length && self.dealias == other.dealias
    }
}

impl SpectralGrid {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(KgzError::Config(format!(
                "half-length L must be positive, got {half_length}"
            )));
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(KgzError::Config(format!(
                "mode count N must be even and >= 4, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mu: Arc<[f64]> = (0..n)
            .map(|k| PI * slot_to_mode(k, n) as f64 / half_length)
            .collect();
        Ok(Self {
            half_length,
            n,
            dealias: false,
            mu,
            forward,
            inverse,
        })
    }

    /// Enables the 2/3-rule filter applied by [`SpectralGrid::filter`].
    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Wavenumbers in FFT slot order.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Wavenumber of mode `l`.
    pub fn mu_of(&self, l: isize) -> f64 {
        PI * l as f64 / self.half_length
    }

    /// Mode index `l` stored in FFT slot `k`.
    pub fn mode_of_slot(&self, k: usize) -> isize {
        slot_to_mode(k, self.n)
    }

    /// FFT slot holding mode `l`, for `l` in `-N/2..N/2`.
    pub fn slot_of_mode(&self, l: isize) -> usize {
        let n = self.n as isize;
        debug_assert!(l >= -n / 2 && l < n / 2, "mode {l} out of range");
        l.rem_euclid(n) as usize
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(KgzError::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        Ok(())
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// Samples to interpolation coefficients, in place.
    pub fn forward_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        let scale = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    /// Interpolation coefficients to samples, in place.
    pub fn inverse_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }

    /// Zeroes modes with `|l| > N/3` when dealiasing is enabled; no-op otherwise.
    pub fn filter(&self, spec: &mut [Complex64]) {
        if !self.dealias {
            return;
        }
        let cutoff = (self.n / 3) as isize;
        for (k, c) in spec.iter_mut().enumerate() {
            if slot_to_mode(k, self.n).abs() > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Discrete L2 norm with trapezoid weight `2L/N`.
    pub fn l2_norm(&self, values: &[Complex64]) -> f64 {
        (values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx()).sqrt()
    }

    /// Trapezoid (spectrally exact) integral of real samples.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_real((0..self.n).map(|j| f(self.node(j))))
    }

    pub fn sample_complex(&self, f: impl Fn(f64) -> Complex64) -> Field {
        Field::new((0..self.n).map(|j| f(self.node(j))).collect())
    }
}

fn slot_to_mode(k: usize, n: usize) -> isize {
    if k < n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// Writes the spectrum of `conj(f)` given the spectrum of `f`:
/// `out_l = conj(spec_{-l})`.
pub fn conj_spectrum(spec: &[Complex64], out: &mut [Complex64]) {
    let n = spec.len();
    for k in 0..n {
        out[k] = spec[(n - k) % n].conj();
    }
}

/// Grid samples of a (possibly complex) field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn constant(n: usize, c: Complex64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn from_real(values: impl IntoIterator<Item = f64>) -> Self {
        Self {
            values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn im(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.im).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `max |Im f| / max |f|`, zero for the zero field.
    pub fn real_residue(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.im.abs())) / scale
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.real_residue() < tol
    }

    pub fn ensure_real(&self, name: &str, tol: f64) -> Result<()> {
        let residue = self.real_residue();
        if residue >= tol {
            return Err(KgzError::NotReal {
                name: name.to_string(),
                residue,
            });
        }
        Ok(())
    }

    /// Drops the imaginary part of every sample.
    pub fn make_real(&mut self) {
        for v in &mut self.values {
            v.im = 0.0;
        }
    }

    pub fn conj(&self) -> Field {
        Field::new(self.values.iter().map(|v| v.conj()).collect())
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }
}

impl Deref for Field {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.values
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
}

/// Interpolation coefficients in FFT slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    /// Coefficient of mode `l`, `-N/2 <= l < N/2`.
    pub fn get(&self, l: isize) -> Complex64 {
        let n = self.coeffs.len() as isize;
        self.coeffs[l.rem_euclid(n) as usize]
    }

    pub fn set(&mut self, l: isize, c: Complex64) {
        let n = self.coeffs.len() as isize;
        self.coeffs[l.rem_euclid(n) as usize] = c;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

pub fn to_spectrum(f: &Field, grid: &SpectralGrid) -> Result<Spectrum> {
    grid.check_len(f.len())?;
    let mut buf = f.values.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.scratch_len()];
    grid.forward_in_place(&mut buf, &mut scratch);
    Ok(Spectrum::new(buf))
}

pub fn from_spectrum(spec: &Spectrum, grid: &SpectralGrid) -> Result<Field> {
    grid.check_len(spec.len())?;
    let mut buf = spec.coeffs.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); grid.scratch_len()];
    grid.inverse_in_place(&mut buf, &mut scratch);
    Ok(Field::new(buf))
}

/// Spectral second derivative: mode `l` is multiplied by `-mu_l^2`.
pub fn d2x(f: &Field, grid: &SpectralGrid) -> Result<Field> {
    let mut spec = to_spectrum(f, grid)?;
    for (c, mu) in spec.coeffs.iter_mut().zip(grid.mu()) {
        *c *= -mu * mu;
    }
    from_spectrum(&spec, grid)
}

pub fn pointwise_product(f: &Field, h: &Field) -> Result<Field> {
    if f.len() != h.len() {
        return Err(KgzError::LengthMismatch {
            expected: f.len(),
            got: h.len(),
        });
    }
    Ok(Field::new(
        f.values.iter().zip(&h.values).map(|(a, b)| a * b).collect(),
    ))
}
