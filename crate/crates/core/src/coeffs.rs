//! Oscillatory quadrature weights of the multiscale time integrator.
//!
//! Each weight is an integral of a trigonometric kernel against a carrier
//! `e^{i nu s}` with `nu = 1/eps^2` (the `sigma` family) or `nu = 2/eps^2`
//! (the `theta` family). Writing the kernels through
//!
//! ```text
//! E0(a) = int_0^tau        e^{i a (tau - s)} e^{i nu s} ds = tau   e^{i a tau} phi1((nu - a) tau)
//! E1(a) = int_0^tau (tau-s) e^{i a (tau - s)} e^{i nu s} ds = tau^2 e^{i a tau} phi2((nu - a) tau)
//! ```
//!
//! with `phi1(x) = (e^{ix} - 1)/(ix)` and `phi2(x) = (1 + ix - e^{ix})/x^2`
//! gives closed forms without the removable singularities at `mu_l = 0`
//! and at the resonance `eps^2 theta_l = 2`. The defining integrals are also
//! available through [`coefficient_oracle`] for testing.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{KgzError, Result};
use crate::freewave::sinc;
use crate::quadrature::{self, Node};
use crate::spectral::SpectralGrid;
use crate::KgzParams;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CoefficientName {
    Sigma,
    SigmaDot,
    AlphaTau,
    Kappa,
    Chi1,
    Chi2,
    BetaTau,
    Rho,
    ChiDot1,
    ChiDot2,
}

impl CoefficientName {
    pub const ALL: [CoefficientName; 10] = [
        CoefficientName::Sigma,
        CoefficientName::SigmaDot,
        CoefficientName::AlphaTau,
        CoefficientName::Kappa,
        CoefficientName::Chi1,
        CoefficientName::Chi2,
        CoefficientName::BetaTau,
        CoefficientName::Rho,
        CoefficientName::ChiDot1,
        CoefficientName::ChiDot2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CoefficientName::Sigma => "sigma",
            CoefficientName::SigmaDot => "sigmadot",
            CoefficientName::AlphaTau => "alpha_tau",
            CoefficientName::Kappa => "kappa",
            CoefficientName::Chi1 => "chi1",
            CoefficientName::Chi2 => "chi2",
            CoefficientName::BetaTau => "beta_tau",
            CoefficientName::Rho => "rho",
            CoefficientName::ChiDot1 => "chidot1",
            CoefficientName::ChiDot2 => "chidot2",
        }
    }

    /// True for the weights whose carrier is `e^{is/eps^2}` against an
    /// `omega_l` kernel.
    pub fn is_sigma_family(self) -> bool {
        matches!(self, CoefficientName::Sigma | CoefficientName::SigmaDot)
    }
}

impl fmt::Display for CoefficientName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CoefficientName {
    type Err = KgzError;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| KgzError::UnknownCoefficient(s.to_string()))
    }
}

/// The ten weights of one Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub sigma: Complex64,
    pub sigmadot: Complex64,
    pub alpha_tau: Complex64,
    pub kappa: Complex64,
    pub chi1: Complex64,
    pub chi2: Complex64,
    pub beta_tau: Complex64,
    pub rho: Complex64,
    pub chidot1: Complex64,
    pub chidot2: Complex64,
}

impl ModeCoefficients {
    pub fn get(&self, name: CoefficientName) -> Complex64 {
        match name {
            CoefficientName::Sigma => self.sigma,
            CoefficientName::SigmaDot => self.sigmadot,
            CoefficientName::AlphaTau => self.alpha_tau,
            CoefficientName::Kappa => self.kappa,
            CoefficientName::Chi1 => self.chi1,
            CoefficientName::Chi2 => self.chi2,
            CoefficientName::BetaTau => self.beta_tau,
            CoefficientName::Rho => self.rho,
            CoefficientName::ChiDot1 => self.chidot1,
            CoefficientName::ChiDot2 => self.chidot2,
        }
    }
}

/// `omega_l = sqrt(1 + eps^2 mu^2) / eps^2`.
pub fn omega(mu: f64, eps: f64) -> f64 {
    (1.0 + eps * eps * mu * mu).sqrt() / (eps * eps)
}

/// A detuning `hi + lo` held exactly: the difference of two doubles.
#[derive(Debug, Clone, Copy)]
struct Detuning {
    hi: f64,
    lo: f64,
}

impl Detuning {
    fn between(nu: f64, a: f64) -> Self {
        let hi = nu - a;
        let v = hi - nu;
        let lo = (nu - (hi - v)) + (-a - v);
        Detuning { hi, lo }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Kernel integrals against one carrier, `int_0^tau e^{ia(tau - s)} e^{i nu s} ds`
/// and its `(tau - s)`-weighted companion, parametrised by `a` and the
/// detuning `nu - a`. Every phase is reduced from exact products, so the
/// weights stay accurate when `tau/eps^2` is large.
struct Carrier {
    tau: f64,
}

impl Carrier {
    /// `d tau / 2` reduced to `[-pi, pi]`, and `d tau` itself.
    fn angles(&self, d: Detuning) -> (f64, f64, f64) {
        let t = Node::exact(self.tau);
        let half = t.angle(0.5 * d.hi) + 0.5 * d.lo * self.tau;
        let full = t.angle(d.hi) + d.lo * self.tau;
        (half, full, d.value() * self.tau)
    }

    /// `tau e^{ia tau} (e^{ix} - 1)/(ix)` with `x = (nu - a) tau`.
    fn e0(&self, a: f64, d: Detuning) -> Complex64 {
        let (half, _, x) = self.angles(d);
        let amp = if (0.5 * x).abs() < 1.0 { sinc(0.5 * x) } else { half.sin() / (0.5 * x) };
        Complex64::from_polar(self.tau * amp, Node::exact(self.tau).angle(a) + half)
    }

    /// `tau^2 e^{ia tau} (1 + ix - e^{ix})/x^2` with `x = (nu - a) tau`.
    fn e1(&self, a: f64, d: Detuning) -> Complex64 {
        let (_, full, x) = self.angles(d);
        let shape = if x.abs() < 1.0 {
            phi2_series(x)
        } else {
            (Complex64::new(1.0, x) - Complex64::from_polar(1.0, full)) / (x * x)
        };
        Complex64::from_polar(self.tau * self.tau, Node::exact(self.tau).angle(a)) * shape
    }
}

/// `int_0^1 (1-u) e^{ixu} du = sum_k (ix)^k / (k+2)!` for `|x| < 1`.
fn phi2_series(x: f64) -> Complex64 {
    let z = I * x;
    let mut term = Complex64::new(0.5, 0.0);
    let mut sum = term;
    for k in 1..30 {
        term = term * z / (k as f64 + 2.0);
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    sum
}

/// `int_0^1 w(a (1 - u)) (e^{ibu} - 1) du` with `e^{ix} - 1` written as
/// `2i sin(x/2) e^{ix/2}`, so nothing cancels for small `b`. The integrand
/// is smooth for `|b| < 1`; panels follow the oscillation of `w`.
fn detuned_moment(a: f64, b: f64, w: fn(f64) -> f64) -> Complex64 {
    let panels = (a.abs() / 2.0).ceil().max(1.0) as usize;
    let f = |u: f64| {
        let half = 0.5 * b * u;
        Complex64::from_polar(2.0 * half.sin() * w(a * (1.0 - u)), half + FRAC_PI_2)
    };
    quadrature::composite(&f, 0.0, 1.0, panels)
}

/// Closed-form weights for a mode of wavenumber `mu`.
pub fn mode_coefficients(mu: f64, params: &KgzParams, tau: f64) -> ModeCoefficients {
    let eps2 = params.epsilon * params.epsilon;
    let theta = mu / params.gamma;
    let k = Carrier { tau };

    // sigma family: kernel frequency omega against nu = 1/eps^2.
    let om = omega(mu, params.epsilon);
    let nu1 = 1.0 / eps2;
    let plus = k.e0(om, Detuning::between(nu1, om));
    let minus = k.e0(-om, Detuning::between(nu1, -om));
    let sin_int = (plus - minus) / (2.0 * I);
    let cos_int = (plus + minus) * 0.5;
    let sigma = sin_int / (tau * om);
    let sigmadot = cos_int / tau;

    // theta family: kernel frequency theta against nu = 2/eps^2.
    let nu2 = 2.0 / eps2;
    let dp = Detuning::between(nu2, theta);
    let dm = Detuning::between(nu2, -theta);
    let p0 = k.e0(theta, dp);
    let m0 = k.e0(-theta, dm);
    let p1 = k.e1(theta, dp);
    let m1 = k.e1(-theta, dm);
    let alpha_tau = theta * (p0 - m0) / (2.0 * I);
    let beta_tau = theta * theta * (p0 + m0) * 0.5;
    let kappa = theta * (p1 - m1) / I;
    let rho = theta * theta * (p1 + m1);

    // int_0^tau 2 theta sin(theta (tau - s)) ds and its cosine companion.
    let theta_tau = Node::exact(tau).angle(theta);
    let half = (0.5 * theta_tau).sin();
    let one_minus_cos = 2.0 * half * half;
    let theta_sin = theta * theta_tau.sin();
    let chi1 = alpha_tau + one_minus_cos;
    let chidot1 = beta_tau + theta_sin;
    let (chi2, chidot2) = if (nu2 * tau).abs() < 1.0 {
        // The differences below cancel to O(tau nu2) relative accuracy;
        // integrate the difference itself instead.
        let (a, b) = (theta * tau, nu2 * tau);
        (
            -I * theta * tau * detuned_moment(a, b, f64::sin),
            -I * theta * theta * tau * detuned_moment(a, b, f64::cos),
        )
    } else {
        (-I * (alpha_tau - one_minus_cos), -I * (beta_tau - theta_sin))
    };

    ModeCoefficients {
        sigma,
        sigmadot,
        alpha_tau,
        kappa,
        chi1,
        chi2,
        beta_tau,
        rho,
        chidot1,
        chidot2,
    }
}

/// Magnitudes of the two denominators of the textbook closed forms,
/// `eps^2 mu^2` and `|4 - eps^4 theta^2|`; they vanish at `mu = 0` and at
/// the acoustic resonance respectively.
pub fn denominator_margins(mu: f64, params: &KgzParams) -> (f64, f64) {
    let eps2 = params.epsilon * params.epsilon;
    let theta = mu / params.gamma;
    (eps2 * mu * mu, (4.0 - eps2 * eps2 * theta * theta).abs())
}

/// Per-mode tables for fixed `(grid, eps, gamma, tau)`, FFT slot order.
#[derive(Debug, Clone)]
pub struct MtiCoefficients {
    grid: SpectralGrid,
    params: KgzParams,
    tau: f64,
    pub omega: Vec<f64>,
    pub theta: Vec<f64>,
    pub modes: Vec<ModeCoefficients>,
    pub cos_omega: Vec<f64>,
    pub sin_omega_over_omega: Vec<f64>,
    pub omega_sin_omega: Vec<f64>,
    pub inv_omega: Vec<f64>,
    pub cos_theta: Vec<f64>,
    pub sin_theta_over_theta: Vec<f64>,
    pub theta_sin_theta: Vec<f64>,
    pub tau_theta2_cos_theta: Vec<f64>,
    /// Free Schrodinger flow over one step, `e^{i mu^2 tau / 2}`.
    pub kinetic: Vec<Complex64>,
}

impl MtiCoefficients {
    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn params(&self) -> &KgzParams {
        &self.params
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Weights of mode `l`.
    pub fn mode(&self, l: isize) -> &ModeCoefficients {
        &self.modes[self.grid.slot_of_mode(l)]
    }

    /// True when the table was built for exactly this configuration.
    pub fn matches(&self, grid: &SpectralGrid, params: &KgzParams, tau: f64) -> bool {
        self.grid == *grid && self.params == *params && self.tau == tau
    }
}

pub fn build_coefficients(grid: &SpectralGrid, params: &KgzParams, tau: f64) -> Result<MtiCoefficients> {
    params.validate()?;
    if !(tau.is_finite() && tau > 0.0) {
        return Err(KgzError::Config(format!("time step must be positive, got {tau}")));
    }
    let eps = params.epsilon;
    let mu = grid.mu();
    let omega: Vec<f64> = mu.iter().map(|&m| self::omega(m, eps)).collect();
    let theta: Vec<f64> = mu.iter().map(|&m| m / params.gamma).collect();
    Ok(MtiCoefficients {
        modes: mu.iter().map(|&m| mode_coefficients(m, params, tau)).collect(),
        cos_omega: omega.iter().map(|w| (w * tau).cos()).collect(),
        sin_omega_over_omega: omega.iter().map(|w| (w * tau).sin() / w).collect(),
        omega_sin_omega: omega.iter().map(|w| w * (w * tau).sin()).collect(),
        inv_omega: omega.iter().map(|w| 1.0 / w).collect(),
        cos_theta: theta.iter().map(|t| (t * tau).cos()).collect(),
        sin_theta_over_theta: theta.iter().map(|t| tau * sinc(t * tau)).collect(),
        theta_sin_theta: theta.iter().map(|t| t * (t * tau).sin()).collect(),
        tau_theta2_cos_theta: theta.iter().map(|t| tau * t * t * (t * tau).cos()).collect(),
        kinetic: mu
            .iter()
            .map(|m| Complex64::from_polar(1.0, 0.5 * m * m * tau))
            .collect(),
        omega,
        theta,
        grid: grid.clone(),
        params: *params,
        tau,
    })
}

/// Relative accuracy requested from the oracle quadrature, measured
/// against the sup-norm bound of each defining integral.
pub const ORACLE_TOL: f64 = 1e-13;

/// Evaluates a weight of mode `l` directly from its defining integral by
/// composite Gauss-Legendre quadrature with panels no wider than half of
/// the fastest period in the integrand.
pub fn coefficient_oracle(
    name: CoefficientName,
    l: isize,
    params: &KgzParams,
    tau: f64,
    grid: &SpectralGrid,
) -> Result<Complex64> {
    params.validate()?;
    if tau.is_nan() || tau <= 0.0 {
        return Err(KgzError::Config(format!("time step must be positive, got {tau}")));
    }
    let n = grid.n() as isize;
    if l < -n / 2 || l >= n / 2 {
        return Err(KgzError::Config(format!("mode {l} outside -N/2..N/2")));
    }
    Ok(oracle_for_mu(name, grid.mu_of(l), params, tau))
}

/// [`coefficient_oracle`] for an explicit wavenumber.
///
/// Every phase is reduced from the extended-precision quadrature node, so
/// the oracle stays accurate when `tau/eps^2` is large and the weight is
/// much smaller than its integrand.
pub fn oracle_for_mu(name: CoefficientName, mu: f64, params: &KgzParams, tau: f64) -> Complex64 {
    let eps2 = params.epsilon * params.epsilon;
    let om = omega(mu, params.epsilon);
    let th = mu / params.gamma;
    let k1 = 1.0 / eps2;
    let k2 = 2.0 / eps2;
    let end = Node::exact(tau);
    // Angles of e^{i s/eps^2}, omega (tau - s) and theta (tau - s).
    let fast1 = |s: Node| s.angle(k1);
    let wave = |s: Node| end.angle(om) - s.angle(om);
    let slow = |s: Node| end.angle(th) - s.angle(th);
    let carrier1 = |s: Node| Complex64::from_polar(1.0, s.angle(k1));
    let carrier2 = |s: Node| Complex64::from_polar(1.0, s.angle(k2));
    let rest = |s: Node| tau - s.value();
    let freq1 = om + k1;
    let freq2 = th.abs() + k2;
    let q = |f: &dyn Fn(Node) -> Complex64, freq: f64, bound: f64| {
        quadrature::oscillatory_at(&f, 0.0, tau, freq, ORACLE_TOL * bound.max(f64::MIN_POSITIVE))
    };
    match name {
        CoefficientName::Sigma => q(&|s| carrier1(s) * (wave(s).sin() / (tau * om)), freq1, 1.0 / om),
        CoefficientName::SigmaDot => q(&|s| carrier1(s) * (wave(s).cos() / tau), freq1, 1.0),
        CoefficientName::AlphaTau => alpha_oracle(tau, mu, params, tau),
        CoefficientName::Kappa => q(
            &|s| carrier2(s) * (2.0 * rest(s) * th * slow(s).sin()),
            freq2,
            th.abs() * tau * tau,
        ),
        CoefficientName::Chi1 => q(
            &|s| carrier1(s) * (2.0 * th * slow(s).sin() * fast1(s).cos()),
            freq2,
            th.abs() * tau,
        ),
        CoefficientName::Chi2 => q(
            &|s| carrier1(s) * (2.0 * th * slow(s).sin() * fast1(s).sin()),
            freq2,
            th.abs() * tau,
        ),
        CoefficientName::BetaTau => beta_oracle(tau, mu, params, tau),
        CoefficientName::Rho => q(
            &|s| carrier2(s) * (2.0 * rest(s) * th * th * slow(s).cos()),
            freq2,
            th * th * tau * tau,
        ),
        CoefficientName::ChiDot1 => q(
            &|s| carrier1(s) * (2.0 * th * th * slow(s).cos() * fast1(s).cos()),
            freq2,
            th * th * tau,
        ),
        CoefficientName::ChiDot2 => q(
            &|s| carrier1(s) * (2.0 * th * th * slow(s).cos() * fast1(s).sin()),
            freq2,
            th * th * tau,
        ),
    }
}

/// `alpha_l(s) = int_0^s theta sin(theta (tau - x)) e^{2ix/eps^2} dx` by quadrature.
pub fn alpha_oracle(s: f64, mu: f64, params: &KgzParams, tau: f64) -> Complex64 {
    let eps2 = params.epsilon * params.epsilon;
    let th = mu / params.gamma;
    let end = Node::exact(tau).angle(th);
    let f = |x: Node| Complex64::from_polar(th * (end - x.angle(th)).sin(), x.angle(2.0 / eps2));
    quadrature::oscillatory_at(&f, 0.0, s, th.abs() + 2.0 / eps2, ORACLE_TOL * (th.abs() * tau).max(f64::MIN_POSITIVE))
}

/// `beta_l(s) = int_0^s theta^2 cos(theta (tau - x)) e^{2ix/eps^2} dx` by quadrature.
pub fn beta_oracle(s: f64, mu: f64, params: &KgzParams, tau: f64) -> Complex64 {
    let eps2 = params.epsilon * params.epsilon;
    let th = mu / params.gamma;
    let end = Node::exact(tau).angle(th);
    let f = |x: Node| Complex64::from_polar(th * th * (end - x.angle(th)).cos(), x.angle(2.0 / eps2));
    quadrature::oscillatory_at(&f, 0.0, s, th.abs() + 2.0 / eps2, ORACLE_TOL * (th * th * tau).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(eps: f64, gamma: f64) -> KgzParams {
        KgzParams { epsilon: eps, gamma }
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        let d = (a - b).norm();
        if d == 0.0 {
            0.0
        } else {
            d / b.norm().max(a.norm())
        }
    }

    /// Textbook forms with explicit `eps^4 omega^2 - 1` and `4 - eps^4 theta^2`
    /// denominators; valid away from the singular modes.
    mod textbook {
        use super::*;

        pub fn sigma(mu: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let w = omega(mu, eps);
            let e1 = Complex64::from_polar(1.0, tau / e2);
            e2 / (tau * w * (e2 * e2 * w * w - 1.0))
                * (e2 * w * (e1 - (w * tau).cos()) - I * (w * tau).sin())
        }

        pub fn sigmadot(mu: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let w = omega(mu, eps);
            let e1 = Complex64::from_polar(1.0, tau / e2);
            e2 / (tau * (e2 * e2 * w * w - 1.0)) * (I * e1 - I * (w * tau).cos() + e2 * w * (w * tau).sin())
        }

        pub fn alpha(s: f64, th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let d = 4.0 - e2 * e2 * th * th;
            e2 * th / d
                * (e2 * th * (th * tau).cos() + 2.0 * I * (th * tau).sin()
                    - Complex64::from_polar(1.0, 2.0 * s / e2)
                        * (e2 * th * (th * (tau - s)).cos() + 2.0 * I * (th * (tau - s)).sin()))
        }

        pub fn kappa(th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let e4 = e2 * e2;
            let d = 4.0 - e4 * th * th;
            let e2t = Complex64::from_polar(1.0, 2.0 * tau / e2);
            2.0 * e4 * th / (d * d)
                * (4.0 * I * e2 * th * e2t - 4.0 * I * e2 * th * (th * tau).cos()
                    + (4.0 + e4 * th * th) * (th * tau).sin())
                + 2.0 * tau * e2 * th / d * (e2 * th * (th * tau).cos() + 2.0 * I * (th * tau).sin())
        }

        pub fn chi1(th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let d = 4.0 - e2 * e2 * th * th;
            let e2t = Complex64::from_polar(1.0, 2.0 * tau / e2);
            1.0 - (th * tau).cos()
                + e2 * th / d * (2.0 * I * (th * tau).sin() + e2 * th * (th * tau).cos() - e2 * th * e2t)
        }

        pub fn chi2(th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let e4 = e2 * e2;
            let d = 4.0 - e4 * th * th;
            let e2t = Complex64::from_polar(1.0, 2.0 * tau / e2);
            (2.0 * e2 * th * (th * tau).sin() - 4.0 * I * (th * tau).cos()
                + I * (4.0 + e4 * th * th * (e2t - 1.0)))
                / d
        }

        pub fn beta(s: f64, th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let d = 4.0 - e2 * e2 * th * th;
            e2 * th * th / d
                * (2.0 * I * (th * tau).cos() - e2 * th * (th * tau).sin()
                    - Complex64::from_polar(1.0, 2.0 * s / e2)
                        * (2.0 * I * (th * (tau - s)).cos() - e2 * th * (th * (tau - s)).sin()))
        }

        pub fn rho(th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let e4 = e2 * e2;
            let d = 4.0 - e4 * th * th;
            let e2t = Complex64::from_polar(1.0, 2.0 * tau / e2);
            2.0 * tau * e2 * th * th / d * (2.0 * I * (th * tau).cos() - e2 * th * (th * tau).sin())
                + 2.0 * e4 * th * th / (d * d)
                    * ((4.0 + e4 * th * th) * (th * tau).cos() - (4.0 + e4 * th * th) * e2t
                        + 4.0 * I * e2 * th * (th * tau).sin())
        }

        pub fn chidot1(th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let d = 4.0 - e2 * e2 * th * th;
            let e2t = Complex64::from_polar(1.0, 2.0 * tau / e2);
            th * (th * tau).sin()
                - e2 * th * th / d * (2.0 * I * e2t - 2.0 * I * (th * tau).cos() + e2 * th * (th * tau).sin())
        }

        pub fn chidot2(th: f64, eps: f64, tau: f64) -> Complex64 {
            let e2 = eps * eps;
            let d = 4.0 - e2 * e2 * th * th;
            let e2t = Complex64::from_polar(1.0, 2.0 * tau / e2);
            2.0 * th / d * (2.0 * I * (th * tau).sin() + e2 * th * (th * tau).cos() - e2 * th * e2t)
        }
    }

    #[test]
    fn names_round_trip() {
        for n in CoefficientName::ALL {
            assert_eq!(n.as_str().parse::<CoefficientName>().unwrap(), n);
        }
        assert!("gamma".parse::<CoefficientName>().is_err());
    }

    #[test]
    fn theta_family_vanishes_at_zero_mode() {
        let c = mode_coefficients(0.0, &p(0.3, 0.6), 0.05);
        for name in CoefficientName::ALL {
            if !name.is_sigma_family() {
                assert_eq!(c.get(name), Complex64::new(0.0, 0.0), "{name}");
            }
        }
    }

    #[test]
    fn empty_integrals_vanish() {
        let prm = p(0.25, 0.5);
        for mu in [0.0, 1.0, 7.0, 40.0] {
            assert_eq!(textbook::alpha(0.0, mu / 0.5, 0.25, 0.01).norm(), 0.0);
            assert!(alpha_oracle(0.0, mu, &prm, 0.01).norm() == 0.0);
            assert!(beta_oracle(0.0, mu, &prm, 0.01).norm() == 0.0);
        }
    }

    #[test]
    fn agrees_with_textbook_forms_away_from_singular_modes() {
        for &(eps, gamma, tau) in &[(0.25, 0.5, 0.01), (0.5, 0.9, 0.1), (1.0, 1.0, 0.003), (0.1, 0.3, 0.02)] {
            let prm = p(eps, gamma);
            for l in [1.0, 3.0, 10.0, 31.0] {
                let mu = l;
                let th = mu / gamma;
                let (m1, m2) = denominator_margins(mu, &prm);
                if m1 < 1e-2 || m2 < 1e-2 {
                    continue;
                }
                let c = mode_coefficients(mu, &prm, tau);
                let literal = [
                    textbook::sigma(mu, eps, tau),
                    textbook::sigmadot(mu, eps, tau),
                    textbook::alpha(tau, th, eps, tau),
                    textbook::kappa(th, eps, tau),
                    textbook::chi1(th, eps, tau),
                    textbook::chi2(th, eps, tau),
                    textbook::beta(tau, th, eps, tau),
                    textbook::rho(th, eps, tau),
                    textbook::chidot1(th, eps, tau),
                    textbook::chidot2(th, eps, tau),
                ];
                // The literal forms cancel O(1) terms when theta tau is small,
                // hence the absolute round-off floor.
                for (name, lit) in CoefficientName::ALL.into_iter().zip(literal) {
                    let r = rel(c.get(name), lit);
                    assert!(r < 1e-9 || (c.get(name) - lit).norm() < 1e-13, "{name} eps={eps} gamma={gamma} tau={tau} mu={mu}: {} vs {lit} ({r:e})", c.get(name));
                }
            }
        }
    }

    #[test]
    fn matches_oracle_on_reference_configuration() {
        let prm = p(0.25, 0.5);
        let tau = 0.01;
        let g = SpectralGrid::new(PI, 64).unwrap();
        let table = build_coefficients(&g, &prm, tau).unwrap();
        for l in -32..32isize {
            let c = table.mode(l);
            for name in CoefficientName::ALL {
                let o = coefficient_oracle(name, l, &prm, tau, &g).unwrap();
                let r = rel(c.get(name), o);
                assert!(r < 1e-10, "l={l} {name}: {} vs {o} (rel {r:e})", c.get(name));
            }
        }
    }

    #[test]
    fn resonant_mode_is_regular() {
        // Place the acoustic resonance eps^2 theta = 2 exactly on mode 5.
        let (eps, gamma, tau) = (0.2, 0.5, 0.05);
        let prm = p(eps, gamma);
        let mu_res = 2.0 * gamma / (eps * eps);
        let g = SpectralGrid::new(PI * 5.0 / mu_res, 32).unwrap();
        assert!(denominator_margins(g.mu_of(5), &prm).1 < 1e-12);
        let c = mode_coefficients(g.mu_of(5), &prm, tau);
        for name in CoefficientName::ALL {
            let o = coefficient_oracle(name, 5, &prm, tau, &g).unwrap();
            assert!(rel(c.get(name), o) < 1e-10, "{name}");
        }
    }

    #[test]
    fn sigma_small_step_limit() {
        // Resonant zero mode at eps = 1: sigma ~ tau/2 (1 + O(tau)).
        let prm = p(1.0, 1.0);
        let s1 = oracle_for_mu(CoefficientName::Sigma, 0.0, &prm, 1e-4);
        let s2 = oracle_for_mu(CoefficientName::Sigma, 0.0, &prm, 2e-4);
        assert!((s1 / 0.5e-4 - 1.0).norm() < 1e-3);
        assert!((s2 / 1e-4 - 1.0).norm() < 2e-3);
        let c = mode_coefficients(0.0, &prm, 1e-4);
        assert!(rel(c.sigma, s1) < 1e-10);
    }

    #[test]
    fn nested_quadrature_of_alpha_reproduces_kappa() {
        let prm = p(0.5, 0.8);
        let tau = 0.05;
        for mu in [1.0, 4.0, 9.0] {
            let outer = |s: f64| 2.0 * alpha_oracle(s, mu, &prm, tau);
            let kappa = quadrature::composite(&outer, 0.0, tau, 8);
            let c = mode_coefficients(mu, &prm, tau);
            assert!(rel(c.kappa, kappa) < 1e-9, "mu={mu}");
            let outer = |s: f64| 2.0 * beta_oracle(s, mu, &prm, tau);
            let rho = quadrature::composite(&outer, 0.0, tau, 8);
            assert!(rel(c.rho, rho) < 1e-9, "mu={mu}");
        }
    }

    #[test]
    fn euler_identities_and_kernel_bounds() {
        for &(eps, gamma, tau) in &[(2f64.powi(-8), 0.01, 1e-4), (0.25, 0.5, 0.2), (1.0, 1.0, 0.01)] {
            let prm = p(eps, gamma);
            for mu in [0.0, 1.0, 5.0, 50.0, 300.0] {
                let c = mode_coefficients(mu, &prm, tau);
                let th = (mu / gamma).abs();
                let scale = c.chi1.norm() + c.chi2.norm();
                assert!((c.chi1 + I * c.chi2 - 2.0 * c.alpha_tau).norm() <= 1e-12 * scale.max(1e-300));
                let scale = c.chidot1.norm() + c.chidot2.norm();
                assert!((c.chidot1 + I * c.chidot2 - 2.0 * c.beta_tau).norm() <= 1e-12 * scale.max(1e-300));
                let slack = 1.0 + 1e-12;
                assert!(c.sigma.norm() <= eps * eps * slack);
                assert!(c.sigmadot.norm() <= slack);
                assert!(c.alpha_tau.norm() <= th * tau * slack);
                assert!(c.kappa.norm() <= 2.0 * th * tau * tau * slack);
                assert!(c.beta_tau.norm() <= th * th * tau * slack);
                assert!(c.rho.norm() <= 2.0 * th * th * tau * tau * slack);
            }
        }
    }

    #[test]
    fn weights_are_even_in_mode_index() {
        let g = SpectralGrid::new(PI, 64).unwrap();
        let t = build_coefficients(&g, &p(0.1, 0.3), 0.01).unwrap();
        for l in 1..32isize {
            for name in CoefficientName::ALL {
                let (a, b) = (t.mode(l).get(name), t.mode(-l).get(name));
                assert!((a - b).norm() <= 1e-14 * a.norm().max(1e-300), "{name} l={l}");
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = SpectralGrid::new(PI, 8).unwrap();
        assert!(build_coefficients(&g, &p(0.0, 0.5), 0.1).is_err());
        assert!(build_coefficients(&g, &p(0.1, 0.5), -0.1).is_err());
        assert!(coefficient_oracle(CoefficientName::Rho, 4, &p(0.1, 0.5), 0.1, &g).is_err());
    }
}
