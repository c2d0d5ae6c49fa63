//! Deterministic quadrature on the unit sphere S^{n-1}.
//!
//! Circles use equispaced nodes, S^2 uses Lebedev rules, and higher spheres
//! use products of Gauss–Legendre rules in the polar angles with an
//! equispaced azimuth. Weights are normalised to sum to one, so a rule
//! computes spherical averages directly.

use crate::error::{Error, Result};
use crate::field::PointSampler;
use crate::quad::gauss_legendre_on;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LebedevOrder {
    /// 6 points, exact through degree 3.
    Points6,
    /// 14 points, degree 5.
    Points14,
    /// 26 points, degree 7.
    Points26,
    /// 38 points, degree 9.
    Points38,
    /// 50 points, degree 11.
    Points50,
}

impl LebedevOrder {
    pub fn degree(self) -> usize {
        match self {
            LebedevOrder::Points6 => 3,
            LebedevOrder::Points14 => 5,
            LebedevOrder::Points26 => 7,
            LebedevOrder::Points38 => 9,
            LebedevOrder::Points50 => 11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SphereRule {
    pub fn circle(points: usize) -> Self {
        let mut nodes = Vec::with_capacity(2 * points);
        for i in 0..points {
            let t = 2.0 * PI * (i as f64 + 0.5) / points as f64;
            nodes.push(t.cos());
            nodes.push(t.sin());
        }
        Self {
            dim: 2,
            nodes,
            weights: vec![1.0 / points as f64; points],
        }
    }

    pub fn lebedev(order: LebedevOrder) -> Self {
        let mut rule = Self {
            dim: 3,
            nodes: Vec::new(),
            weights: Vec::new(),
        };
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let s3 = 1.0 / 3f64.sqrt();
        match order {
            LebedevOrder::Points6 => rule.push_a1(1.0 / 6.0),
            LebedevOrder::Points14 => {
                rule.push_a1(1.0 / 15.0);
                rule.push_a3(s3, 3.0 / 40.0);
            }
            LebedevOrder::Points26 => {
                rule.push_a1(1.0 / 21.0);
                rule.push_a2(s2, 4.0 / 105.0);
                rule.push_a3(s3, 9.0 / 280.0);
            }
            LebedevOrder::Points38 => {
                rule.push_a1(1.0 / 105.0);
                rule.push_a3(s3, 9.0 / 280.0);
                rule.push_c(0.459_700_843_380_983_1, 0.888_073_833_977_115_3, 1.0 / 35.0);
            }
            LebedevOrder::Points50 => {
                rule.push_a1(4.0 / 315.0);
                rule.push_a2(s2, 64.0 / 2835.0);
                rule.push_a3(s3, 27.0 / 1280.0);
                rule.push_b(
                    0.301_511_344_577_763_6,
                    0.904_534_033_733_290_9,
                    0.020_173_335_537_918_87,
                );
            }
        }
        rule
    }

    /// Product rule on S^{dim-1}: `polar` Gauss nodes per polar angle and
    /// `2 * polar` equispaced azimuthal nodes.
    pub fn product_gauss(dim: usize, polar: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParams(format!(
                "sphere rules need dimension >= 2, got {dim}"
            )));
        }
        if dim == 2 {
            return Ok(Self::circle(2 * polar));
        }
        let azimuth = 2 * polar;
        let polar_count = dim - 2;
        // Polar angle j carries the weight sin^{dim-2-j}(theta). Odd powers
        // become polynomial weights in cos(theta), handled by Gauss rules;
        // even powers are trigonometric polynomials, integrated exactly by
        // the midpoint rule in theta.
        let rules: Vec<(Vec<f64>, Vec<f64>)> = (0..polar_count)
            .map(|j| polar_rule(dim - 2 - j, polar))
            .collect();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; polar_count];
        loop {
            let mut w = 1.0;
            for (j, &i) in idx.iter().enumerate() {
                w *= rules[j].1[i];
            }
            for a in 0..azimuth {
                let phi = 2.0 * PI * (a as f64 + 0.5) / azimuth as f64;
                let mut prefix = 1.0;
                for (j, &i) in idx.iter().enumerate() {
                    let theta = rules[j].0[i];
                    nodes.push(prefix * theta.cos());
                    prefix *= theta.sin();
                }
                nodes.push(prefix * phi.cos());
                nodes.push(prefix * phi.sin());
                weights.push(w);
            }
            // odometer over polar indices
            let mut d = polar_count;
            loop {
                if d == 0 {
                    let total: f64 = weights.iter().sum();
                    weights.iter_mut().for_each(|v| *v /= total);
                    return Ok(Self {
                        dim,
                        nodes,
                        weights,
                    });
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < polar {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    /// Default rule per dimension: a 64-point circle, the 50-point Lebedev
    /// rule on S^2, and a 10-node product rule above that.
    pub fn default_for(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::circle(64)),
            3 => Ok(Self::lebedev(LebedevOrder::Points50)),
            _ => Self::product_gauss(dim, 10),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Average of `f` over the sphere of `radius` about `center`.
    pub fn average<F: FnMut(&[f64]) -> f64>(&self, center: &[f64], radius: f64, mut f: F) -> f64 {
        let mut x = vec![0.0; self.dim];
        let mut acc = 0.0;
        for i in 0..self.len() {
            let u = self.node(i);
            for d in 0..self.dim {
                x[d] = center[d] + radius * u[d];
            }
            acc += self.weights[i] * f(&x);
        }
        acc
    }

    /// Average of a sampled field, failing if any node falls outside it.
    pub fn average_sampler<S: PointSampler + ?Sized>(
        &self,
        field: &S,
        center: &[f64],
        radius: f64,
    ) -> Result<f64> {
        self.average_mapped(field, center, radius, |v| v)
    }

    /// Average of `g(field)` over the sphere.
    pub fn average_mapped<S: PointSampler + ?Sized, G: Fn(f64) -> f64>(
        &self,
        field: &S,
        center: &[f64],
        radius: f64,
        g: G,
    ) -> Result<f64> {
        if field.dim() != self.dim {
            return Err(Error::InvalidParams(format!(
                "{}-dimensional field with a rule on S^{}",
                field.dim(),
                self.dim - 1
            )));
        }
        let max_radius = field.max_radius(center);
        if radius > max_radius * (1.0 + 1e-12) {
            return Err(Error::SphereEscapesBox { radius, max_radius });
        }
        let mut missing = false;
        let avg = self.average(center, radius, |x| match field.sample(x) {
            Some(v) => g(v),
            None => {
                missing = true;
                0.0
            }
        });
        if missing {
            return Err(Error::SphereEscapesBox { radius, max_radius });
        }
        Ok(avg)
    }

    fn push(&mut self, p: [f64; 3], w: f64) {
        self.nodes.extend_from_slice(&p);
        self.weights.push(w);
    }

    fn push_a1(&mut self, w: f64) {
        for axis in 0..3 {
            for s in [1.0, -1.0] {
                let mut p = [0.0; 3];
                p[axis] = s;
                self.push(p, w);
            }
        }
    }

    fn push_a2(&mut self, a: f64, w: f64) {
        for zero in 0..3 {
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let mut p = [a * s1, a * s2, a];
                    p[2] = p[zero];
                    p[zero] = 0.0;
                    self.push(p, w);
                }
            }
        }
    }

    fn push_a3(&mut self, a: f64, w: f64) {
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                for sz in [1.0, -1.0] {
                    self.push([a * sx, a * sy, a * sz], w);
                }
            }
        }
    }

    /// (l, l, m) and permutations with all sign choices.
    fn push_b(&mut self, l: f64, m: f64, w: f64) {
        for odd in 0..3 {
            for sx in [1.0, -1.0] {
                for sy in [1.0, -1.0] {
                    for sz in [1.0, -1.0] {
                        let mut p = [l, l, l];
                        p[odd] = m;
                        self.push([p[0] * sx, p[1] * sy, p[2] * sz], w);
                    }
                }
            }
        }
    }

    /// (p, q, 0) and all ordered placements with sign choices.
    fn push_c(&mut self, p: f64, q: f64, w: f64) {
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                for s1 in [1.0, -1.0] {
                    for s2 in [1.0, -1.0] {
                        let mut v = [0.0; 3];
                        v[i] = p * s1;
                        v[j] = q * s2;
                        self.push(v, w);
                    }
                }
            }
        }
    }
}

/// Nodes in theta and weights for `∫_0^π f(θ) sin^power(θ) dθ`.
fn polar_rule(power: usize, count: usize) -> (Vec<f64>, Vec<f64>) {
    if power % 2 == 1 {
        let (x, w) = gauss_legendre_on(-1.0, 1.0, count);
        let half = (power - 1) / 2;
        x.iter()
            .zip(&w)
            .map(|(&x, &w)| (x.acos(), w * (1.0 - x * x).powi(half as i32)))
            .unzip()
    } else {
        let step = PI / count as f64;
        (0..count)
            .map(|i| {
                let t = (i as f64 + 0.5) * step;
                (t, step * t.sin().powi(power as i32))
            })
            .unzip()
    }
}

/// Surface area |S^{d-1}| of the unit sphere in R^d.
pub fn unit_sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / libm::tgamma(d as f64 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Exact average of x^a y^b z^c over S^2.
    fn monomial_average(a: u32, b: u32, c: u32) -> f64 {
        if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
            return 0.0;
        }
        let g = |k: u32| libm::tgamma((k as f64 + 1.0) / 2.0);
        let total = a + b + c;
        2.0 * g(a) * g(b) * g(c) / libm::tgamma((total as f64 + 3.0) / 2.0)
            / unit_sphere_area(3)
    }

    #[test]
    fn lebedev_rules_hit_their_degree() {
        for order in [
            LebedevOrder::Points6,
            LebedevOrder::Points14,
            LebedevOrder::Points26,
            LebedevOrder::Points38,
            LebedevOrder::Points50,
        ] {
            let rule = SphereRule::lebedev(order);
            for i in 0..rule.len() {
                let p = rule.node(i);
                assert!((p.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-14);
            }
            let deg = order.degree() as u32;
            for a in 0..=deg {
                for b in 0..=(deg - a) {
                    for c in 0..=(deg - a - b) {
                        let q = rule.average(&[0.0; 3], 1.0, |x| {
                            x[0].powi(a as i32) * x[1].powi(b as i32) * x[2].powi(c as i32)
                        });
                        let exact = monomial_average(a, b, c);
                        assert!((q - exact).abs() < 1e-13, "{order:?} {a}{b}{c}: {q} vs {exact}");
                    }
                }
            }
        }
    }

    #[test]
    fn product_rule_integrates_low_moments() {
        for dim in 2..=6 {
            let rule = SphereRule::product_gauss(dim, 8).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-13);
            // <x_i^2> = 1/d, <x_i^4> = 3/(d(d+2)), odd moments vanish
            for axis in 0..dim {
                let m2 = rule.average(&vec![0.0; dim], 1.0, |x| x[axis] * x[axis]);
                let m4 = rule.average(&vec![0.0; dim], 1.0, |x| x[axis].powi(4));
                let m1 = rule.average(&vec![0.0; dim], 1.0, |x| x[axis]);
                assert!((m2 - 1.0 / dim as f64).abs() < 1e-10, "dim {dim} axis {axis} {m2}");
                assert!((m4 - 3.0 / (dim * (dim + 2)) as f64).abs() < 1e-10);
                assert!(m1.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sphere_area_values() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_area(6) - PI.powi(3)).abs() < 1e-12);
    }
}
