//! Composite Gauss-Legendre quadrature for smooth oscillatory integrands.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

/// Points per panel.
pub const GL_POINTS: usize = 20;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_POINTS))
}

/// Neumaier-compensated running sum; the oracles add up to millions of
/// oscillating terms whose total can be far smaller than the terms.
#[derive(Default)]
struct CompensatedSum {
    sum: Complex64,
    carry: Complex64,
}

impl CompensatedSum {
    fn add(&mut self, v: Complex64) {
        let (s, c) = two_sum(self.sum.re, v.re);
        let (t, d) = two_sum(self.sum.im, v.im);
        self.sum = Complex64::new(s, t);
        self.carry += Complex64::new(c, d);
    }

    fn value(&self) -> Complex64 {
        self.sum + self.carry
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let err = if a.abs() >= b.abs() { (a - s) + b } else { (b - s) + a };
    (s, err)
}

/// A quadrature node carried as an unevaluated sum `hi + lo`, so that fast
/// phases `k x` can be formed without the node's own rounding error, which
/// `k` would otherwise amplify.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub hi: f64,
    pub lo: f64,
}

impl Node {
    pub fn exact(x: f64) -> Self {
        Node { hi: x, lo: 0.0 }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    /// `k x` reduced to `[-pi, pi]`, with absolute error near one ulp of
    /// `pi` as long as `|k x| < 2^20 * 2 pi`.
    pub fn angle(self, k: f64) -> f64 {
        let p = k * self.hi;
        let e = k.mul_add(self.hi, -p) + k * self.lo;
        let n = (p / TAU).round();
        let (c1, c2, c3) = two_pi_parts();
        ((p - n * c1) - n * c2) - n * c3 + e
    }
}

/// `2 pi = c1 + c2 + c3` with `c1` short enough that `n c1` is exact.
fn two_pi_parts() -> (f64, f64, f64) {
    let c1 = (TAU * 1073741824.0).floor() / 1073741824.0;
    let c2 = TAU - c1;
    // 2 pi - TAU, the rounding error of the constant.
    let c3 = 2.449_293_598_294_706_4e-16;
    (c1, c2, c3)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Integral of `f` over `[a, b]` with `panels` equal Gauss-Legendre panels.
pub fn composite<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    composite_at(&|n: Node| f(n.value()), a, b, panels)
}

/// [`composite`] for integrands that take the node in extended precision.
/// Node `j` of panel `p` is exactly `a + h (p + (1 + xi_j)/2)`.
pub fn composite_at<F: Fn(Node) -> Complex64>(f: &F, a: f64, b: f64, panels: usize) -> Complex64 {
    let (nodes, weights) = rule();
    let h = (b - a) / panels as f64;
    let mut total = CompensatedSum::default();
    for p in 0..panels {
        let mut acc = CompensatedSum::default();
        for (xi, w) in nodes.iter().zip(weights) {
            let (c, c_lo) = two_sum(p as f64 + 0.5, 0.5 * xi);
            let (x, x_lo) = two_prod(h, c);
            let (x, a_lo) = two_sum(a, x);
            let node = Node {
                hi: x,
                lo: x_lo + h * c_lo + a_lo,
            };
            acc.add(f(node) * *w);
        }
        total.add(acc.value() * (0.5 * h));
    }
    total.value()
}

/// Integral of `f` over `[a, b]`, where `max_freq` bounds the angular
/// frequency of the integrand. Panels start at half the shortest period,
/// where the 20-point rule is already exact to round-off, and are doubled until two successive estimates differ by less than `tol`.
pub fn oscillatory<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, max_freq: f64, tol: f64) -> Complex64 {
    oscillatory_at(&|n: Node| f(n.value()), a, b, max_freq, tol)
}

/// [`oscillatory`] for integrands that take the node in extended precision.
pub fn oscillatory_at<F: Fn(Node) -> Complex64>(f: &F, a: f64, b: f64, max_freq: f64, tol: f64) -> Complex64 {
    let span = (b - a).abs();
    let periods = span * max_freq.abs() / (2.0 * PI);
    let mut panels = ((2.0 * periods).ceil() as usize).max(4);
    let mut prev = composite_at(f, a, b, panels);
    for _ in 0..6 {
        panels *= 2;
        let next = composite_at(f, a, b, panels);
        if (next - prev).norm() <= tol {
            return next;
        }
        prev = next;
    }
    prev
}
