//! Fourier-side checks on periodized boxes.
//!
//! A grid with `m` points per axis is read as one period of `m - 1` nodes,
//! `P = 2L`; the last node of every axis repeats the first.

use crate::error::{Error, Result};
use crate::fft::{fft_nd, signed_frequency};
use crate::field::{CartesianField, Grid};
use crate::kernels::riesz_fourier_constant;
use crate::quad::{cubic_interpolate, integrate, AdaptiveOptions};
use num_complex::Complex64;
use rustfft::FftDirection;
use std::f64::consts::PI;

fn period_shape(grid: &Grid) -> Vec<usize> {
    vec![grid.points() - 1; grid.dim()]
}

fn period_values(u: &CartesianField) -> Vec<Complex64> {
    let g = u.grid();
    let shape = period_shape(g);
    let total: usize = shape.iter().product();
    let period = Grid::new(g.dim(), g.half_width(), shape[0]).expect("period grid");
    let mut multi = vec![0; g.dim()];
    (0..total)
        .map(|i| {
            period.unravel(i, &mut multi);
            Complex64::new(u.values()[g.flat_index(&multi)], 0.0)
        })
        .collect()
}

fn from_period(grid: &Grid, vals: &[Complex64]) -> CartesianField {
    let n = grid.dim();
    let len = grid.points() - 1;
    let period = Grid::new(n, grid.half_width(), len).expect("period grid");
    let mut multi = vec![0; n];
    let values = (0..grid.len())
        .map(|i| {
            grid.unravel(i, &mut multi);
            multi.iter_mut().for_each(|v| *v %= len);
            vals[period.flat_index(&multi)].re
        })
        .collect();
    CartesianField::new(*grid, values).expect("same grid")
}

/// `|ξ|` for every DFT index of the period, with `ξ_d = 2π s_d / P`.
fn frequencies(grid: &Grid) -> (Vec<f64>, Vec<i64>) {
    let n = grid.dim();
    let len = grid.points() - 1;
    let total = len.pow(n as u32);
    let base = 2.0 * PI / (len as f64 * grid.spacing());
    let period = Grid::new(n, grid.half_width(), len).expect("period grid");
    let mut multi = vec![0; n];
    let mut mags = Vec::with_capacity(total);
    let mut parity = Vec::with_capacity(total);
    for i in 0..total {
        period.unravel(i, &mut multi);
        let mut sq = 0.0;
        let mut sum = 0i64;
        for &k in multi.iter() {
            let s = signed_frequency(k, len);
            sq += (base * s as f64).powi(2);
            sum += s;
        }
        mags.push(sq.sqrt());
        parity.push(sum);
    }
    (mags, parity)
}

/// Smooth cut-off: 1 where every `|x_d| <= (1 - fraction) L`, falling to 0
/// at the faces through the `C^∞` blend `S(1-t)/(S(1-t)+S(t))`,
/// `S(s) = e^{-1/s}`.
pub fn roll_off(grid: &Grid, fraction: f64) -> Vec<f64> {
    let l = grid.half_width();
    let inner = l * (1.0 - fraction);
    let blend = |x: f64| {
        let t = ((x.abs() - inner) / (l - inner)).clamp(0.0, 1.0);
        let s = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
        s(1.0 - t) / (s(1.0 - t) + s(t))
    };
    let mut x = vec![0.0; grid.dim()];
    (0..grid.len())
        .map(|i| {
            grid.position(i, &mut x);
            x.iter().map(|&c| blend(c)).product()
        })
        .collect()
}

/// `u` times the roll-off, which vanishes on the box faces.
pub fn periodize(u: &CartesianField, fraction: f64) -> CartesianField {
    let chi = roll_off(u.grid(), fraction);
    let values = u.values().iter().zip(&chi).map(|(a, b)| a * b).collect();
    u.with_values(values).expect("same grid")
}

/// Multiplies the Fourier coefficients of the periodic field by `|ξ|^α`;
/// the zero mode goes to 0.
pub fn spectral_fractional(u: &CartesianField, alpha: f64) -> CartesianField {
    let g = u.grid();
    let shape = period_shape(g);
    let mut data = period_values(u);
    fft_nd(&mut data, &shape, FftDirection::Forward);
    let (xi, _) = frequencies(g);
    for (v, &k) in data.iter_mut().zip(&xi) {
        *v *= if k > 0.0 { k.powf(alpha) } else { 0.0 };
    }
    fft_nd(&mut data, &shape, FftDirection::Inverse);
    from_period(g, &data)
}

/// `⟨(-Δ)^{α/4} u, (-Δ)^{α/4} φ⟩` over one period, by Parseval.
pub fn fractional_pairing(u: &CartesianField, phi: &CartesianField, alpha: f64) -> Result<f64> {
    u.check_same_grid(phi)?;
    let g = u.grid();
    let shape = period_shape(g);
    let mut a = period_values(u);
    let mut b = period_values(phi);
    fft_nd(&mut a, &shape, FftDirection::Forward);
    fft_nd(&mut b, &shape, FftDirection::Forward);
    let (xi, _) = frequencies(g);
    let total = a.len() as f64;
    let sum: f64 = a
        .iter()
        .zip(&b)
        .zip(&xi)
        .filter(|(_, &k)| k > 0.0)
        .map(|((x, y), &k)| k.powf(alpha) * (x * y.conj()).re)
        .sum();
    Ok(g.spacing().powi(g.dim() as i32) * sum / total)
}

/// The Riesz potential `∫ |x-y|^{α-n} G_σ(y) dy` of the unit-mass Gaussian
/// of variance `σ²`, as a function of `r = |x|`.
pub fn smoothed_riesz_profile(n: usize, alpha: f64, sigma: f64, r: f64) -> Result<f64> {
    let a = (n as f64 - alpha) / 2.0;
    let s2 = 2.0 * sigma * sigma;
    let log_f = |s: f64| {
        let t = s.exp();
        let d = 1.0 + s2 * t;
        a * s - 0.5 * n as f64 * d.ln() - t * r * r / d
    };
    let lo = -80.0 / a;
    let hi = (-s2.ln()).max(0.0) + 160.0 / alpha;
    let opts = AdaptiveOptions {
        rel_tol: 1e-12,
        ..AdaptiveOptions::default()
    };
    Ok(integrate(|s| log_f(s).exp(), lo, hi, opts)? / libm::tgamma(a))
}

#[derive(Debug, Clone)]
pub struct FourierOptions {
    /// Roll-off shell as a fraction of the half-width; `None` for fields
    /// that are periodic already.
    pub roll_off: Option<f64>,
    /// Subtract the seam error of the far-field monopole.
    pub compensate: bool,
    /// Width of the Gaussian carrying the monopole; `L/16` by default.
    pub sigma: Option<f64>,
    /// Modes with `|f̂| < retain · max|f̂|` are dropped.
    pub retain: f64,
    pub tol: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self {
            roll_off: Some(0.1),
            compensate: true,
            sigma: None,
            retain: 1e-12,
            tol: 0.05,
        }
    }
}

impl FourierOptions {
    /// For inputs that are exactly periodic on the box.
    pub fn periodic() -> Self {
        Self {
            roll_off: None,
            compensate: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct FourierReport {
    /// `c` in `û = c |ξ|^{-α} f̂`.
    pub fitted_c: f64,
    /// The same constant in the normalisation `u = c ∫ f(y)|x-y|^{α-n} dy`.
    pub integral_c: f64,
    /// Relative ℓ² error over the retained modes.
    pub residual: f64,
    pub retained_modes: usize,
    /// Relative sup error of `spectral_fractional(c |ξ|^{-α} f̂) - c f`
    /// (mean removed).
    pub reconstruction_error: f64,
    pub passes: bool,
}

pub fn fourier_equivalence_check(u: &CartesianField, f: &CartesianField, alpha: f64) -> Result<FourierReport> {
    fourier_equivalence_check_with(u, f, alpha, &FourierOptions::default())
}

pub fn fourier_equivalence_check_with(
    u: &CartesianField,
    f: &CartesianField,
    alpha: f64,
    opts: &FourierOptions,
) -> Result<FourierReport> {
    u.check_same_grid(f)?;
    let g = *u.grid();
    let n = g.dim();
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(Error::InvalidParams(format!("alpha={alpha} must lie in (0, {n})")));
    }
    let h_n = g.spacing().powi(n as i32);
    let shape = period_shape(&g);
    let (xi, parity) = frequencies(&g);
    let chi = match opts.roll_off {
        Some(frac) => roll_off(&g, frac),
        None => vec![1.0; g.len()],
    };
    let cut = |v: &CartesianField| {
        v.with_values(v.values().iter().zip(&chi).map(|(a, b)| a * b).collect())
            .expect("same grid")
    };
    // continuous transform of grid data whose first node sits at -L
    let transform = |v: &CartesianField| {
        let mut data = period_values(v);
        fft_nd(&mut data, &shape, FftDirection::Forward);
        for (d, &p) in data.iter_mut().zip(&parity) {
            *d *= if p % 2 == 0 { h_n } else { -h_n };
        }
        data
    };
    let f_cut = cut(f);
    let u_hat = transform(&cut(u));
    let f_hat = transform(&f_cut);
    let peak = f_hat
        .iter()
        .zip(&xi)
        .filter(|(_, &k)| k > 0.0)
        .fold(0.0f64, |m, (v, _)| m.max(v.norm()));
    let retained: Vec<usize> = (0..xi.len())
        .filter(|&i| xi[i] > 0.0 && peak > 0.0 && f_hat[i].norm() >= opts.retain * peak)
        .collect();
    if retained.is_empty() {
        return Err(Error::SpectrumDegenerate);
    }
    let mut model: Vec<Complex64> = retained.iter().map(|&i| f_hat[i] / xi[i].powf(alpha)).collect();
    let constant = riesz_fourier_constant(n, alpha);
    if opts.compensate {
        let sigma = opts.sigma.unwrap_or(g.half_width() / 16.0);
        let mass = f_cut.values().iter().sum::<f64>() * h_n;
        let reach = g.half_width() * (n as f64).sqrt();
        let table_r: Vec<f64> = (0..=2048).map(|i| reach * i as f64 / 2048.0).collect();
        let table_v = table_r
            .iter()
            .map(|&r| smoothed_riesz_profile(n, alpha, sigma, r))
            .collect::<Result<Vec<_>>>()?;
        let monopole = CartesianField::from_fn(g, |x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            cubic_interpolate(&table_r, &table_v, r)
        })?;
        let seam = transform(&cut(&monopole));
        for (m, &i) in model.iter_mut().zip(&retained) {
            let k = xi[i];
            let exact = constant * k.powf(-alpha) * (-0.5 * sigma * sigma * k * k).exp();
            *m -= (exact - seam[i]) * (mass / constant);
        }
    }
    let target: Vec<Complex64> = retained.iter().map(|&i| u_hat[i]).collect();
    let dot: f64 = model.iter().zip(&target).map(|(a, b)| (a.conj() * b).re).sum();
    let norm: f64 = model.iter().map(|a| a.norm_sqr()).sum();
    let fitted_c = dot / norm;
    let err: f64 = model.iter().zip(&target).map(|(a, b)| (b - a * fitted_c).norm_sqr()).sum();
    let scale: f64 = target.iter().map(|b| b.norm_sqr()).sum();
    let residual = (err / scale).sqrt();

    let mut coeffs = period_values(&f_cut);
    fft_nd(&mut coeffs, &shape, FftDirection::Forward);
    for (c, &k) in coeffs.iter_mut().zip(&xi) {
        *c = if k > 0.0 { *c * (fitted_c / k.powf(alpha)) } else { Complex64::new(0.0, 0.0) };
    }
    fft_nd(&mut coeffs, &shape, FftDirection::Inverse);
    let back = spectral_fractional(&from_period(&g, &coeffs), alpha);
    let period_mean = {
        let p = period_values(&f_cut);
        p.iter().map(|c| c.re).sum::<f64>() / p.len() as f64
    };
    let f_scale = f_cut.max_abs().max(f64::MIN_POSITIVE) * fitted_c.abs();
    let reconstruction_error = back
        .values()
        .iter()
        .zip(f_cut.values())
        .map(|(b, v)| (b - fitted_c * (v - period_mean)).abs())
        .fold(0.0, f64::max)
        / f_scale;
    Ok(FourierReport {
        fitted_c,
        integral_c: fitted_c / constant,
        residual,
        retained_modes: retained.len(),
        reconstruction_error,
        passes: residual <= opts.tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::bubble_constant;

    fn wave(grid: Grid, k: [f64; 3]) -> CartesianField {
        let base = PI / grid.half_width();
        CartesianField::from_fn(grid, |x| (base * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2])).cos()).unwrap()
    }

    #[test]
    fn single_mode_is_an_eigenfunction() {
        let grid = Grid::new(3, 2.0, 17).unwrap();
        let u = wave(grid, [1.0, -2.0, 3.0]);
        let mag = PI / 2.0 * 14f64.sqrt();
        for alpha in [0.7, 2.0, 2.5] {
            let v = spectral_fractional(&u, alpha);
            for (a, b) in v.values().iter().zip(u.values()) {
                assert!((a - mag.powf(alpha) * b).abs() < 1e-11, "{alpha}");
            }
        }
    }

    #[test]
    fn alpha_two_is_minus_laplacian_on_trig_polynomials() {
        let grid = Grid::new(2, PI, 33).unwrap();
        let u = CartesianField::from_fn(grid, |x| x[0].sin() * (2.0 * x[1]).cos() + 0.5 * (3.0 * x[0]).cos()).unwrap();
        let v = spectral_fractional(&u, 2.0);
        let exact = CartesianField::from_fn(grid, |x| 5.0 * x[0].sin() * (2.0 * x[1]).cos() + 4.5 * (3.0 * x[0]).cos()).unwrap();
        for (a, b) in v.values().iter().zip(exact.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constants_are_annihilated_and_pairing_matches() {
        let grid = Grid::new(2, 3.0, 25).unwrap();
        let u = periodize(&CartesianField::from_fn(grid, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp()).unwrap(), 0.1);
        let phi = periodize(&CartesianField::from_fn(grid, |x| (1.0 + x[0] - x[1] * x[1]).cos()).unwrap(), 0.1);
        let a = spectral_fractional(&u, 1.3);
        let b = spectral_fractional(&u.map(|v| v + 7.5).unwrap(), 1.3);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
        let h2 = grid.spacing().powi(2);
        let period = period_values(&a)
            .iter()
            .zip(period_values(&phi))
            .map(|(p, q)| p.re * q.re)
            .sum::<f64>()
            * h2;
        let parseval = fractional_pairing(&u, &phi, 1.3).unwrap();
        assert!((period - parseval).abs() < 1e-12 * parseval.abs().max(1.0));
    }

    #[test]
    fn newtonian_smoothed_profile() {
        for r in [0.0, 0.3, 1.0, 4.0, 12.0] {
            let got = smoothed_riesz_profile(3, 2.0, 1.0, r).unwrap();
            let exact = if r == 0.0 {
                (2.0 / PI).sqrt()
            } else {
                libm::erf(r / 2f64.sqrt()) / r
            };
            assert!((got - exact).abs() < 1e-10 * exact, "r={r}: {got} vs {exact}");
        }
    }

    #[test]
    fn exact_fit_for_one_mode() {
        let grid = Grid::new(3, 2.0, 17).unwrap();
        let f = wave(grid, [1.0, 1.0, 0.0]);
        let mag2 = 2.0 * (PI / 2.0).powi(2);
        let u = f.map(|v| 3.0 * v / mag2).unwrap();
        let rep = fourier_equivalence_check_with(&u, &f, 2.0, &FourierOptions::periodic()).unwrap();
        assert!((rep.fitted_c - 3.0).abs() < 1e-10);
        assert!(rep.residual < 1e-10 && rep.passes);
        assert!(rep.reconstruction_error < 1e-10);
        let zero = CartesianField::zeros(grid);
        assert!(matches!(
            fourier_equivalence_check_with(&u, &zero, 2.0, &FourierOptions::periodic()),
            Err(Error::SpectrumDegenerate)
        ));
    }

    #[test]
    fn bubble_pair_in_three_dimensions() {
        let c0 = bubble_constant(3, 2.0).unwrap();
        let grid = Grid::new(3, 16.0, 65).unwrap();
        let u = CartesianField::from_fn(grid, |x| c0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()).unwrap();
        let f = u.map(|v| v.powi(5)).unwrap();
        let rep = fourier_equivalence_check(&u, &f, 2.0).unwrap();
        assert!(rep.residual < 0.05, "{rep:?}");
        assert!((rep.fitted_c - 1.0).abs() < 0.02, "{rep:?}");
        assert!((rep.integral_c * 4.0 * PI - 1.0).abs() < 0.02);
    }
}
