//! Wolff potentials
//! `W(f)(x) = ∫_0^T [μ_x(t) / t^{n-βγ}]^{1/(γ-1)} dt/t`, `μ_x(t) = ∫_{B_t(x)} f`.
//!
//! On a grid each node carries the mass `f h^n`. The node at `x` itself is
//! spread over the ball of equal volume, and every other node enters
//! `B_t(x)` through a linear ramp of width `h` centred on its distance, so
//! `μ_x` is continuous and nondecreasing in `t`.

use super::riesz::shell_mass_fraction;
use super::{unit_ball_volume, WolffSpec};
use crate::error::{Error, Result};
use crate::field::CartesianField;
use crate::quad::{gauss_legendre, integrate, AdaptiveOptions};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy)]
pub struct WolffOptions {
    /// Log-spaced panels per decade of `t`, each with a 4-point Gauss rule.
    pub panels_per_decade: usize,
    /// Raise `truncation_dominant` when `[T/10, T]` carries more than this
    /// share of the total.
    pub last_decade_fraction: f64,
    /// Shell thickness and mass share beyond which an infinite `T` is refused.
    pub shell_width: f64,
    pub shell_threshold: f64,
}

impl Default for WolffOptions {
    fn default() -> Self {
        Self {
            panels_per_decade: 32,
            last_decade_fraction: 0.75,
            shell_width: 0.1,
            shell_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone)]
pub struct WolffPotential {
    pub field: CartesianField,
    pub truncation_dominant: bool,
    /// Largest last-decade share over all nodes (0 for an infinite `T`).
    pub last_decade_fraction: f64,
}

/// The outer t-integral for a known mass function `μ(t)`, by adaptive
/// quadrature in `log t`. Used as an independent check of the grid route.
pub fn wolff_outer_integral<F: Fn(f64) -> f64>(mass: F, spec: &WolffSpec, t_max: f64) -> Result<f64> {
    let b = spec.outer_power();
    let decay = spec.n() as f64 - spec.beta() * spec.gamma();
    let integrand = |s: f64| {
        let t = s.exp();
        let m = mass(t);
        if m <= 0.0 {
            0.0
        } else {
            (m * (-decay * s).exp()).powf(b)
        }
    };
    // below t_max e^{-span} the integrand is O(e^{-45}) of its scale
    let span = 45.0 / (spec.beta() * spec.gamma() * b);
    let top = t_max.ln();
    let opts = AdaptiveOptions {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_intervals: 4000,
    };
    let mut total = 0.0;
    let mut s = top - span;
    while s < top {
        let next = (s + 1.0).min(top);
        total += integrate(integrand, s, next, opts)?;
        s = next;
    }
    Ok(total)
}

pub fn wolff_potential(f: &CartesianField, spec: &WolffSpec, t_max: f64) -> Result<WolffPotential> {
    wolff_potential_with(f, spec, t_max, &WolffOptions::default())
}

pub fn wolff_potential_with(
    f: &CartesianField,
    spec: &WolffSpec,
    t_max: f64,
    opts: &WolffOptions,
) -> Result<WolffPotential> {
    let ctx = Context::new(f, spec, t_max, opts)?;
    let results: Vec<(f64, f64)> = (0..f.grid().len())
        .into_par_iter()
        .map(|i| ctx.eval(f, i))
        .collect();
    let values = results.iter().map(|r| r.0).collect();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(WolffPotential {
        field: f.with_values(values)?,
        truncation_dominant: worst > opts.last_decade_fraction,
        last_decade_fraction: worst,
    })
}

/// Potential at a single node together with its last-decade share.
pub fn wolff_potential_at(
    f: &CartesianField,
    spec: &WolffSpec,
    t_max: f64,
    index: usize,
    opts: &WolffOptions,
) -> Result<(f64, f64)> {
    if index >= f.grid().len() {
        return Err(Error::InvalidParams(format!("node {index} outside the grid")));
    }
    let ctx = Context::new(f, spec, t_max, opts)?;
    Ok(ctx.eval(f, index))
}

struct Context {
    b: f64,
    decay: f64,
    cell: f64,
    ball: f64,
    self_radius: f64,
    h: f64,
    t_min: f64,
    t_max: f64,
    panels_per_decade: usize,
    gauss: (Vec<f64>, Vec<f64>),
}

impl Context {
    fn new(f: &CartesianField, spec: &WolffSpec, t_max: f64, opts: &WolffOptions) -> Result<Self> {
        if f.dim() != spec.n() {
            return Err(Error::InvalidKernel(format!(
                "kernel for n={} applied to a {}-dimensional field",
                spec.n(),
                f.dim()
            )));
        }
        if !(t_max > 0.0) {
            return Err(Error::InvalidParams(format!("t_max must be positive, got {t_max}")));
        }
        f.require_nonnegative()?;
        if t_max.is_infinite() {
            let shell = shell_mass_fraction(f, opts.shell_width);
            if shell > opts.shell_threshold {
                return Err(Error::TruncationDominant(format!(
                    "outer shell carries {:.3} of the mass; the integral to infinity is not controlled by the box",
                    shell
                )));
            }
        }
        let n = spec.n();
        let h = f.grid().spacing();
        let ball = unit_ball_volume(n);
        let self_radius = h * ball.powf(-1.0 / n as f64);
        Ok(Self {
            b: spec.outer_power(),
            decay: n as f64 - spec.beta() * spec.gamma(),
            cell: h.powi(n as i32),
            ball,
            self_radius,
            h,
            t_min: self_radius.min(0.5 * h),
            t_max,
            panels_per_decade: opts.panels_per_decade.max(1),
            gauss: gauss_legendre(4),
        })
    }

    /// Returns the potential and the share of its last decade.
    fn eval(&self, f: &CartesianField, i: usize) -> (f64, f64) {
        let g = f.grid();
        let n = g.dim();
        let mut a = vec![0usize; n];
        let mut c = vec![0usize; n];
        g.unravel(i, &mut a);
        let own = f.values()[i];
        let mut others: Vec<(f64, f64)> = f
            .values()
            .iter()
            .enumerate()
            .filter(|&(j, v)| j != i && *v != 0.0)
            .map(|(j, &v)| {
                g.unravel(j, &mut c);
                let d2: f64 = a
                    .iter()
                    .zip(&c)
                    .map(|(&p, &q)| (p as f64 - q as f64).powi(2))
                    .sum();
                (d2.sqrt() * self.h, v * self.cell)
            })
            .collect();
        others.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut prefix = Vec::with_capacity(others.len() + 1);
        prefix.push(0.0);
        for o in &others {
            prefix.push(prefix[prefix.len() - 1] + o.1);
        }
        let total_mass = prefix[others.len()] + own * self.cell;

        let mass = |t: f64| {
            let own_part = own * self.cell * (t / self.self_radius).powi(n as i32).min(1.0);
            let lo = others.partition_point(|o| o.0 <= t - 0.5 * self.h);
            let hi = others.partition_point(|o| o.0 < t + 0.5 * self.h);
            let ramp: f64 = others[lo..hi]
                .iter()
                .map(|o| o.1 * ((t - o.0) / self.h + 0.5).clamp(0.0, 1.0))
                .sum();
            own_part + prefix[lo] + ramp
        };
        let integrand = |s: f64| {
            let m = mass(s.exp());
            if m <= 0.0 {
                0.0
            } else {
                (m * (-self.decay * s).exp()).powf(self.b)
            }
        };

        let bg = self.b * (n as f64 - self.decay);
        let top = if self.t_max.is_finite() {
            self.t_max
        } else {
            let far = others.last().map_or(0.0, |o| o.0);
            far + self.h + self.self_radius
        };
        let head_end = self.t_min.min(top);
        let head = (own * self.ball).powf(self.b) * head_end.powf(bg) / bg;

        let per = std::f64::consts::LN_10 / self.panels_per_decade as f64;
        let (lo_s, hi_s) = (head_end.ln(), top.ln());
        let decade_start = if self.t_max.is_finite() {
            hi_s - std::f64::consts::LN_10
        } else {
            f64::INFINITY
        };
        // panel edges on a fixed lattice anchored at the head, so raising
        // t_max only appends panels
        let mut edges = vec![lo_s];
        while edges[edges.len() - 1] + per < hi_s {
            edges.push(edges[edges.len() - 1] + per);
        }
        if hi_s > lo_s {
            edges.push(hi_s);
        }
        let (gx, gw) = &self.gauss;
        let (mut body, mut last) = (0.0, 0.0);
        for pair in edges.windows(2) {
            let (s0, s1) = (pair[0], pair[1]);
            // split the panel at the start of the last decade
            let cuts = if decade_start > s0 && decade_start < s1 {
                vec![(s0, decade_start), (decade_start, s1)]
            } else {
                vec![(s0, s1)]
            };
            for (u0, u1) in cuts {
                let half = 0.5 * (u1 - u0);
                let mid = 0.5 * (u0 + u1);
                let v: f64 = gx
                    .iter()
                    .zip(gw)
                    .map(|(x, w)| w * integrand(mid + half * x))
                    .sum::<f64>()
                    * half;
                body += v;
                if u0 >= decade_start {
                    last += v;
                }
            }
        }
        let tail = if self.t_max.is_finite() {
            0.0
        } else {
            let q = self.decay * self.b;
            total_mass.powf(self.b) * top.powf(-q) / q
        };
        let total = head + body + tail;
        let share = if total > 0.0 { last / total } else { 0.0 };
        (total, share)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;
    use std::f64::consts::PI;

    fn spec() -> WolffSpec {
        WolffSpec::new(3, 1.0, 2.0).unwrap()
    }

    #[test]
    fn ball_indicator_golden_from_exact_mass() {
        let ball = 4.0 * PI / 3.0;
        let v = wolff_outer_integral(|t| ball * t.min(1.0).powi(3), &spec(), 10.0).unwrap();
        assert!((v - 5.864_306_286_700_947_4).abs() < 1e-10);
    }

    #[test]
    fn grid_route_approaches_the_golden() {
        let grid = Grid::new(3, 1.3, 27).unwrap();
        let f = CartesianField::from_fn(grid, |x| {
            if x.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let origin = grid.origin_index().unwrap();
        let (v, share) = wolff_potential_at(&f, &spec(), 10.0, origin, &WolffOptions::default()).unwrap();
        assert!((v / 5.864_306_286_700_947_4 - 1.0).abs() < 0.03, "{v}");
        assert!(share < 0.75);
    }

    #[test]
    fn zero_field_and_constant_field() {
        let grid = Grid::new(3, 1.0, 7).unwrap();
        let z = wolff_potential(&CartesianField::zeros(grid), &spec(), 5.0).unwrap();
        assert!(z.field.values().iter().all(|&v| v == 0.0));
        let c = CartesianField::from_fn(grid, |_| 2.0).unwrap();
        assert!(matches!(
            wolff_potential(&c, &spec(), f64::INFINITY),
            Err(Error::TruncationDominant(_))
        ));
        // finite truncation inside the growth regime is flagged
        let grown = wolff_potential(&c, &spec(), 0.3).unwrap();
        assert!(grown.truncation_dominant);
    }

    #[test]
    fn homogeneity_and_infinite_tail() {
        let grid = Grid::new(2, 2.0, 15).unwrap();
        let s = WolffSpec::new(2, 0.5, 3.0).unwrap();
        let f = CartesianField::from_fn(grid, |x| (-2.0 * (x[0] * x[0] + x[1] * x[1])).exp()).unwrap();
        let w1 = wolff_potential(&f, &s, f64::INFINITY).unwrap().field;
        let w2 = wolff_potential(&f.map(|v| 5.0 * v).unwrap(), &s, f64::INFINITY)
            .unwrap()
            .field;
        let scale = 5f64.powf(0.5);
        for (a, b) in w1.values().iter().zip(w2.values()) {
            assert!((b - scale * a).abs() <= 1e-13 * b.abs());
        }
        let finite = wolff_potential(&f, &s, 20.0).unwrap().field;
        for (a, b) in finite.values().iter().zip(w1.values()) {
            assert!(a <= b);
        }
    }
}
