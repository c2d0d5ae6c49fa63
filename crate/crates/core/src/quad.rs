//! One-dimensional quadrature: Gauss–Legendre rules, adaptive Gauss–Kronrod
//! integration with an interval budget, and cumulative integrals of sampled
//! data against a weight.

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Legendre rule mapped onto [a, b].
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 4000,
        }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive G7/K15 integration of `f` over the finite interval [a, b].
///
/// The interval with the largest error estimate is bisected until the summed
/// estimate meets the tolerance or the interval budget runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|s| s.2).sum();
        let err: f64 = intervals.iter().map(|s| s.3).sum();
        if !total.is_finite() {
            return Err(Error::QuadratureFailure {
                budget: opts.max_intervals,
                estimate: f64::INFINITY,
            });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= opts.max_intervals {
            return Err(Error::QuadratureFailure {
                budget: opts.max_intervals,
                estimate: err,
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, s)| if s.3 > best.1 { (i, s.3) } else { best });
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval cannot be split further in floating point.
            return Err(Error::QuadratureFailure {
                budget: opts.max_intervals,
                estimate: err,
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Value at `x` of the Lagrange polynomial through `(xs[i], ys[i])`.
pub fn lagrange_eval(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut l = 1.0;
        for j in 0..xs.len() {
            if i != j {
                l *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += l * ys[i];
    }
    acc
}

/// Start of the four-point stencil used to interpolate inside panel `i`.
pub(crate) fn cubic_stencil_start(panel: usize, len: usize) -> usize {
    if len < 4 {
        return 0;
    }
    panel.saturating_sub(1).min(len - 4)
}

/// Cubic (four-point Lagrange) interpolation of sampled data at `x`.
/// The abscissae must be strictly increasing; `x` is clamped to their range.
pub fn cubic_interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    assert!(n >= 2 && n == ys.len());
    let x = x.clamp(xs[0], xs[n - 1]);
    let panel = match xs.partition_point(|&v| v <= x) {
        0 => 0,
        p => (p - 1).min(n - 2),
    };
    if n < 4 {
        return lagrange_eval(xs, ys, x);
    }
    let s = cubic_stencil_start(panel, n);
    lagrange_eval(&xs[s..s + 4], &ys[s..s + 4], x)
}

/// Cumulative integrals `I[i] = ∫_{x[0]}^{x[i]} w(t) g(t) dt` of sampled `g`
/// against a known weight `w`.
///
/// On each panel `g` is replaced by its local cubic interpolant and the
/// product integrated by a 6-point Gauss rule, so the result is exact for
/// cubic `g` whenever `w` is a polynomial of degree at most 8.
pub fn cumulative_weighted<W: Fn(f64) -> f64>(x: &[f64], g: &[f64], w: W) -> Vec<f64> {
    assert_eq!(x.len(), g.len());
    let n = x.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    let (tn, tw) = gauss_legendre(6);
    for i in 0..n - 1 {
        let (a, b) = (x[i], x[i + 1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s = cubic_stencil_start(i, n);
        let m = (n - s).min(4);
        let xs = &x[s..s + m];
        let ys = &g[s..s + m];
        let panel: f64 = tn
            .iter()
            .zip(&tw)
            .map(|(&t, &wt)| {
                let p = mid + half * t;
                wt * w(p) * lagrange_eval(xs, ys, p)
            })
            .sum();
        out[i + 1] = out[i] + panel * half;
    }
    out
}

/// Composite trapezoid weights for possibly non-uniform abscissae.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let d = 0.5 * (x[i + 1] - x[i]);
        w[i] += d;
        w[i + 1] += d;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 8, 13] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, AdaptiveOptions::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
        let e = integrate(|x: f64| (-x).exp(), 0.0, 50.0, AdaptiveOptions::default()).unwrap();
        assert!((e - (1.0 - (-50.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_budget_exhaustion() {
        let opts = AdaptiveOptions {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_intervals: 3,
        };
        let r = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, opts);
        assert!(matches!(r, Err(Error::QuadratureFailure { budget: 3, .. })));
    }

    #[test]
    fn cumulative_is_exact_for_cubics_against_polynomial_weight() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.3).collect();
        let g: Vec<f64> = x.iter().map(|t| 1.0 - t + 0.5 * t * t * t).collect();
        let out = cumulative_weighted(&x, &g, |t| t * t);
        for (xi, oi) in x.iter().zip(&out) {
            let exact = xi.powi(3) / 3.0 - xi.powi(4) / 4.0 + 0.5 * xi.powi(6) / 6.0;
            assert!((oi - exact).abs() < 1e-11 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let x: Vec<f64> = (0..9).map(|i| (i as f64 * 0.25).exp()).collect();
        let y: Vec<f64> = x.iter().map(|t| 2.0 - t * t + t * t * t).collect();
        for t in [1.0, 1.1, 3.3, 7.0, x[8]] {
            assert!((cubic_interpolate(&x, &y, t) - (2.0 - t * t + t * t * t)).abs() < 1e-10);
        }
    }
}
