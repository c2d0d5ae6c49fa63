//! Riesz potentials `I_α f(x) = ∫ f(y) |x-y|^{α-n} dy` on box grids and on
//! radial profiles.
//!
//! On a grid the integral becomes a node sum with weight `h^n |x-y|^{α-n}`,
//! except at `y = x` where the weight is the exact integral of `|y|^{α-n}`
//! over the cell, `h^α C(n, α)`.

use super::RieszSpec;
use crate::error::{Error, Result};
use crate::fft::fft_nd;
use crate::field::CartesianField;
use crate::quad::{cubic_interpolate, gauss_legendre_on, integrate, trapezoid_weights, AdaptiveOptions};
use crate::radial::RadialProfile;
use crate::sphere::unit_sphere_area;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RieszMethod {
    /// Zero-padded FFT convolution.
    Fft,
    /// Explicit O(N^2) node sum.
    Direct,
}

#[derive(Debug, Clone, Copy)]
pub struct RieszOptions {
    pub method: RieszMethod,
    /// Fail with `NonPositiveInput` unless every node of `f` is positive.
    pub require_positive: bool,
    /// Relative thickness of the boundary shell used by the tail diagnostic.
    pub shell_width: f64,
    /// Shell mass fraction above which `tail_warning` is raised.
    pub tail_threshold: f64,
}

impl Default for RieszOptions {
    fn default() -> Self {
        Self {
            method: RieszMethod::Fft,
            require_positive: false,
            shell_width: 0.1,
            tail_threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RieszPotential {
    pub field: CartesianField,
    /// Share of `Σ|f|` carried by the outer shell of the box.
    pub shell_mass_fraction: f64,
    pub tail_warning: bool,
}

/// `∫_{[-1/2,1/2]^n} |y|^{α-n} dy`.
///
/// The cube splits into 2n congruent pyramids over its faces; in each the
/// radial direction integrates in closed form, leaving a smooth integral
/// over a face evaluated by a tensor Gauss rule.
pub fn self_cell_constant(n: usize, alpha: f64) -> f64 {
    let face_dim = n - 1;
    let nodes = match face_dim {
        0 => 1,
        1 | 2 => 32,
        3 => 20,
        4 => 14,
        5 => 10,
        _ => 7,
    };
    let (x, w) = gauss_legendre_on(0.0, 0.5, nodes);
    let expo = (alpha - n as f64) / 2.0;
    let mut idx = vec![0usize; face_dim];
    let mut acc = 0.0;
    loop {
        let mut weight = 1.0;
        let mut r2 = 0.25;
        for &i in &idx {
            weight *= w[i];
            r2 += x[i] * x[i];
        }
        acc += weight * r2.powf(expo);
        let mut d = face_dim;
        loop {
            if d == 0 {
                let face = acc * 2f64.powi(face_dim as i32);
                return n as f64 / alpha * face;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < nodes {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Constant `c` with `(-Δ)^{α/2} (c I_α f) = f`.
pub fn riesz_inverse_constant(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    libm::tgamma((nf - alpha) / 2.0)
        / (2f64.powf(alpha) * PI.powf(nf / 2.0) * libm::tgamma(alpha / 2.0))
}

/// Constant `C` in the Fourier transform `|x|^{α-n} -> C |ξ|^{-α}`.
pub fn riesz_fourier_constant(n: usize, alpha: f64) -> f64 {
    let nf = n as f64;
    PI.powf(nf / 2.0) * 2f64.powf(alpha) * libm::tgamma(alpha / 2.0)
        / libm::tgamma((nf - alpha) / 2.0)
}

/// Share of `Σ|f|` on nodes with some coordinate beyond `(1 - width) L`.
pub fn shell_mass_fraction(f: &CartesianField, width: f64) -> f64 {
    let g = f.grid();
    let limit = (1.0 - width) * g.half_width();
    let mut x = vec![0.0; g.dim()];
    let (mut shell, mut total) = (0.0, 0.0);
    for (i, v) in f.values().iter().enumerate() {
        g.position(i, &mut x);
        total += v.abs();
        if x.iter().any(|c| c.abs() > limit) {
            shell += v.abs();
        }
    }
    if total > 0.0 {
        shell / total
    } else {
        0.0
    }
}

pub fn riesz_potential(f: &CartesianField, spec: &RieszSpec) -> Result<RieszPotential> {
    riesz_potential_with(f, spec, &RieszOptions::default())
}

pub fn riesz_potential_with(
    f: &CartesianField,
    spec: &RieszSpec,
    opts: &RieszOptions,
) -> Result<RieszPotential> {
    check_dims(f, spec)?;
    if opts.require_positive {
        f.require_positive()?;
    }
    let values = match opts.method {
        RieszMethod::Fft => convolve_fft(f, spec),
        RieszMethod::Direct => {
            let weights = KernelWeights::new(f, spec);
            (0..f.grid().len())
                .into_par_iter()
                .map(|i| weights.sum_at(f, i))
                .collect()
        }
    };
    let shell = shell_mass_fraction(f, opts.shell_width);
    Ok(RieszPotential {
        field: f.with_values(values)?,
        shell_mass_fraction: shell,
        tail_warning: shell > opts.tail_threshold,
    })
}

/// Potential at the single node `index`, by the direct sum.
pub fn riesz_potential_at(f: &CartesianField, spec: &RieszSpec, index: usize) -> Result<f64> {
    check_dims(f, spec)?;
    if index >= f.grid().len() {
        return Err(Error::InvalidParams(format!("node {index} outside the grid")));
    }
    Ok(KernelWeights::new(f, spec).sum_at(f, index))
}

fn check_dims(f: &CartesianField, spec: &RieszSpec) -> Result<()> {
    if f.dim() != spec.n() {
        return Err(Error::InvalidKernel(format!(
            "kernel for n={} applied to a {}-dimensional field",
            spec.n(),
            f.dim()
        )));
    }
    Ok(())
}

struct KernelWeights {
    cell: f64,
    self_weight: f64,
    expo: f64,
    h: f64,
}

impl KernelWeights {
    fn new(f: &CartesianField, spec: &RieszSpec) -> Self {
        let h = f.grid().spacing();
        let n = spec.n() as f64;
        Self {
            cell: h.powf(n),
            self_weight: h.powf(spec.alpha()) * self_cell_constant(spec.n(), spec.alpha()),
            expo: (spec.alpha() - n) / 2.0,
            h,
        }
    }

    /// Weight for an offset of `d2` squared grid steps.
    fn weight(&self, d2: f64) -> f64 {
        if d2 == 0.0 {
            self.self_weight
        } else {
            self.cell * (d2 * self.h * self.h).powf(self.expo)
        }
    }

    fn sum_at(&self, f: &CartesianField, i: usize) -> f64 {
        let g = f.grid();
        let n = g.dim();
        let mut a = vec![0usize; n];
        let mut b = vec![0usize; n];
        g.unravel(i, &mut a);
        f.values()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| {
                g.unravel(j, &mut b);
                let d2: f64 = a
                    .iter()
                    .zip(&b)
                    .map(|(&p, &q)| {
                        let d = p as f64 - q as f64;
                        d * d
                    })
                    .sum();
                v * self.weight(d2)
            })
            .sum()
    }
}

fn convolve_fft(f: &CartesianField, spec: &RieszSpec) -> Vec<f64> {
    let g = f.grid();
    let n = g.dim();
    let m = g.points();
    let p = 2 * m;
    let shape = vec![p; n];
    let total = p.pow(n as u32);
    let weights = KernelWeights::new(f, spec);
    let zero = Complex64::new(0.0, 0.0);

    let mut kernel = vec![zero; total];
    kernel.par_iter_mut().enumerate().for_each(|(flat, slot)| {
        let mut rem = flat;
        let mut d2 = 0.0;
        for _ in 0..n {
            let k = rem % p;
            rem /= p;
            let offset = if k < m {
                k as f64
            } else if k > p - m {
                k as f64 - p as f64
            } else {
                return;
            };
            d2 += offset * offset;
        }
        *slot = Complex64::new(weights.weight(d2), 0.0);
    });

    let mut data = vec![zero; total];
    let mut multi = vec![0usize; n];
    for (i, &v) in f.values().iter().enumerate() {
        g.unravel(i, &mut multi);
        let idx = multi.iter().fold(0, |acc, &c| acc * p + c);
        data[idx] = Complex64::new(v, 0.0);
    }
    fft_nd(&mut kernel, &shape, FftDirection::Forward);
    fft_nd(&mut data, &shape, FftDirection::Forward);
    data.par_iter_mut().zip(&kernel).for_each(|(d, k)| *d *= k);
    fft_nd(&mut data, &shape, FftDirection::Inverse);

    (0..g.len())
        .map(|i| {
            let mut multi = vec![0usize; n];
            g.unravel(i, &mut multi);
            let idx = multi.iter().fold(0, |acc, &c| acc * p + c);
            data[idx].re
        })
        .collect()
}

/// Spherical mean of the kernel, `k(t) = ∫_{S^{n-1}} |e - tω|^{α-n} dω`
/// for `0 <= t <= 1`, tabulated on a grid clustered at `t = 1`.
struct SphereMeanKernel {
    u: Vec<f64>,
    k: Vec<f64>,
}

impl SphereMeanKernel {
    const NODES: usize = 2001;

    fn new(n: usize, alpha: f64) -> Result<Self> {
        let area = unit_sphere_area(n - 1);
        let expo = (alpha - n as f64) / 2.0;
        let opts = AdaptiveOptions {
            rel_tol: 1e-11,
            abs_tol: 0.0,
            max_intervals: 4000,
        };
        let u: Vec<f64> = (0..Self::NODES)
            .map(|j| j as f64 / (Self::NODES - 1) as f64)
            .collect();
        let k = u
            .par_iter()
            .map(|&u| {
                let t = 1.0 - (1.0 - u) * (1.0 - u);
                let inner = integrate(
                    |th: f64| {
                        (1.0 + t * t - 2.0 * t * th.cos()).powf(expo) * th.sin().powi(n as i32 - 2)
                    },
                    0.0,
                    PI,
                    opts,
                )?;
                Ok(area * inner)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { u, k })
    }

    fn eval(&self, t: f64) -> f64 {
        let u = 1.0 - (1.0 - t).max(0.0).sqrt();
        cubic_interpolate(&self.u, &self.k, u)
    }
}

/// Riesz potential of a radial profile, evaluated at the profile's nodes.
///
/// Integrating the kernel over spheres reduces the potential to
/// `∫_0^R s^{n-1} f(s) K(ρ, s) ds` with `K(ρ,s) = M^{α-n} k(min/M)`,
/// `M = max(ρ, s)`. The radial integral is a trapezoid sum with the kink
/// at `s = ρ` on a node. Requires `α > 1`, where `k(1)` is finite.
pub fn riesz_potential_radial(f: &RadialProfile, spec: &RieszSpec) -> Result<RadialProfile> {
    if f.dim() != spec.n() {
        return Err(Error::InvalidKernel(format!(
            "kernel for n={} applied to a profile in {} dimensions",
            spec.n(),
            f.dim()
        )));
    }
    if spec.alpha() <= 1.0 {
        return Err(Error::InvalidKernel(format!(
            "radial Riesz route needs alpha > 1, got {}",
            spec.alpha()
        )));
    }
    let table = SphereMeanKernel::new(spec.n(), spec.alpha())?;
    let r = f.radii();
    let w = trapezoid_weights(r);
    let n = spec.n() as i32;
    let expo = spec.alpha() - spec.n() as f64;
    let mass: Vec<f64> = (0..r.len())
        .map(|j| w[j] * r[j].powi(n - 1) * f.values()[j])
        .collect();
    let values = r
        .par_iter()
        .map(|&rho| {
            mass.iter()
                .zip(r)
                .skip(1)
                .map(|(&mj, &s)| {
                    let (lo, hi) = if rho < s { (rho, s) } else { (s, rho) };
                    mj * hi.powf(expo) * table.eval(lo / hi)
                })
                .sum()
        })
        .collect();
    f.with_values(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    #[test]
    fn self_cell_constant_golden() {
        assert!((self_cell_constant(3, 2.0) - 2.380_077_363_979_553_5).abs() < 1e-13);
        assert!((self_cell_constant(2, 1.0) - 3.525_494_348_078_172).abs() < 1e-12);
        // alpha = n gives the cube volume
        assert!((self_cell_constant(4, 4.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalisation_constants() {
        assert!((riesz_inverse_constant(3, 2.0) - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((riesz_fourier_constant(3, 2.0) - 4.0 * PI).abs() < 1e-13);
        for (n, a) in [(3, 1.3), (6, 4.0), (5, 2.0)] {
            let prod = riesz_inverse_constant(n, a) * riesz_fourier_constant(n, a);
            assert!((prod - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn fft_matches_direct_sum() {
        let grid = Grid::new(3, 1.0, 9).unwrap();
        let f = CartesianField::from_fn(grid, |x| (1.0 + x[0] - 0.5 * x[1] * x[2]).exp()).unwrap();
        let spec = RieszSpec::new(3, 1.5).unwrap();
        let fft = riesz_potential(&f, &spec).unwrap().field;
        let opts = RieszOptions {
            method: RieszMethod::Direct,
            ..Default::default()
        };
        let direct = riesz_potential_with(&f, &spec, &opts).unwrap().field;
        for (a, b) in fft.values().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-12 * b.abs());
        }
        assert!((riesz_potential_at(&f, &spec, 17).unwrap() - direct.values()[17]).abs() < 1e-13);
    }

    #[test]
    fn zero_field_and_positive_contract() {
        let grid = Grid::new(2, 1.0, 7).unwrap();
        let spec = RieszSpec::new(2, 1.0).unwrap();
        let z = riesz_potential(&CartesianField::zeros(grid), &spec).unwrap();
        assert!(z.field.max_abs() < 1e-15);
        let opts = RieszOptions {
            require_positive: true,
            ..Default::default()
        };
        let r = riesz_potential_with(&CartesianField::zeros(grid), &spec, &opts);
        assert!(matches!(r, Err(Error::NonPositiveInput { .. })));
    }

    #[test]
    fn tail_warning_tracks_shell_mass() {
        let grid = Grid::new(2, 1.0, 21).unwrap();
        let spec = RieszSpec::new(2, 1.0).unwrap();
        let flat = CartesianField::from_fn(grid, |_| 1.0).unwrap();
        assert!(riesz_potential(&flat, &spec).unwrap().tail_warning);
        let peaked = CartesianField::from_fn(grid, |x| (-40.0 * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        assert!(!riesz_potential(&peaked, &spec).unwrap().tail_warning);
    }

    #[test]
    fn sphere_mean_kernel_is_constant_for_newton() {
        let t = SphereMeanKernel::new(3, 2.0).unwrap();
        for v in [0.0, 0.3, 0.9, 0.999, 1.0] {
            assert!((t.eval(v) - 4.0 * PI).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn radial_route_reproduces_newton_potential_of_ball() {
        // Newton potential of the unit-ball indicator: 2π(1 - ρ²/3) inside
        let spec = RieszSpec::new(3, 2.0).unwrap();
        let f = RadialProfile::from_fn(3, 2.0, 401, |r| if r <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let g = riesz_potential_radial(&f, &spec).unwrap();
        for (&rho, &v) in g.radii().iter().zip(g.values()) {
            let exact = if rho <= 1.0 {
                2.0 * PI * (1.0 - rho * rho / 3.0)
            } else {
                4.0 * PI / (3.0 * rho)
            };
            assert!((v - exact).abs() < 2e-2 * exact, "rho={rho}: {v} vs {exact}");
        }
        assert!(matches!(
            riesz_potential_radial(&f, &RieszSpec::new(3, 0.5).unwrap()),
            Err(Error::InvalidKernel(_))
        ));
    }
}
