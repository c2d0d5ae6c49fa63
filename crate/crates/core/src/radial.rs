//! Radial calculus on profiles `u(r)`, `r >= 0`.
//!
//! Profiles live on a uniform grid starting at the origin. The origin is
//! treated through the regular limit of the radial Laplacian and is never
//! divided by.

use crate::error::{Error, Result};
use crate::field::{CartesianField, PointSampler};
use crate::quad::{cubic_interpolate, cumulative_weighted};
use crate::sphere::SphereRule;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    dim: usize,
    r: Vec<f64>,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(dim: usize, r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidGrid(format!(
                "radial profiles need dimension >= 2, got {dim}"
            )));
        }
        if r.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} radii for {} values",
                r.len(),
                values.len()
            )));
        }
        if r.len() < 2 || r[0] != 0.0 {
            return Err(Error::InvalidGrid(
                "radius grid must start at 0 and hold at least 2 nodes".into(),
            ));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) || !r[r.len() - 1].is_finite() {
            return Err(Error::InvalidGrid("radii must increase strictly".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at node {i}")));
        }
        Ok(Self { dim, r, values })
    }

    /// Uniform grid `r_i = i * r_max / (points - 1)`.
    pub fn uniform_radii(r_max: f64, points: usize) -> Vec<f64> {
        let h = r_max / (points - 1) as f64;
        (0..points).map(|i| i as f64 * h).collect()
    }

    pub fn from_fn<F: Fn(f64) -> f64>(dim: usize, r_max: f64, points: usize, f: F) -> Result<Self> {
        if points < 2 || !(r_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "need r_max > 0 and at least 2 nodes, got {r_max} and {points}"
            )));
        }
        let r = Self::uniform_radii(r_max, points);
        let values = r.iter().map(|&t| f(t)).collect();
        Self::new(dim, r, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.dim, self.r.clone(), values)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    /// Profile restricted to its first `len` nodes.
    pub fn truncate(&self, len: usize) -> Result<Self> {
        Self::new(self.dim, self.r[..len].to_vec(), self.values[..len].to_vec())
    }

    /// Cubic interpolation, clamped to the grid.
    pub fn interpolate(&self, r: f64) -> f64 {
        cubic_interpolate(&self.r, &self.values, r)
    }

    pub fn spacing(&self) -> f64 {
        self.r[1] - self.r[0]
    }

    fn require_uniform(&self) -> Result<f64> {
        let h = self.spacing();
        let uniform = self
            .r
            .iter()
            .enumerate()
            .all(|(i, &r)| (r - i as f64 * h).abs() <= 1e-9 * self.r_max());
        if uniform {
            Ok(h)
        } else {
            Err(Error::InvalidGrid(
                "finite differences need a uniform radius grid".into(),
            ))
        }
    }
}

/// Spherical averages of `field` about `center` at the given radii, using
/// the default sphere rule for the dimension.
pub fn spherical_average<S: PointSampler + ?Sized>(
    field: &S,
    center: &[f64],
    radii: &[f64],
) -> Result<RadialProfile> {
    let rule = SphereRule::default_for(field.dim())?;
    spherical_average_with(field, center, radii, &rule)
}

pub fn spherical_average_with<S: PointSampler + ?Sized>(
    field: &S,
    center: &[f64],
    radii: &[f64],
    rule: &SphereRule,
) -> Result<RadialProfile> {
    let values = radii
        .iter()
        .map(|&r| {
            if r == 0.0 {
                field.sample(center).ok_or(Error::SphereEscapesBox {
                    radius: 0.0,
                    max_radius: field.max_radius(center),
                })
            } else {
                rule.average_sampler(field, center, r)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    RadialProfile::new(field.dim(), radii.to_vec(), values)
}

/// `-Δu` for a radial profile by centred differences. The last node has no
/// right neighbour and is dropped from the result.
pub fn radial_laplacian(u: &RadialProfile) -> Result<RadialProfile> {
    if u.len() < 5 {
        return Err(Error::GridTooCoarse(format!(
            "radial Laplacian needs at least 5 nodes, got {}",
            u.len()
        )));
    }
    let h = u.require_uniform()?;
    let v = &u.values;
    let n = u.dim as f64;
    let mut out = Vec::with_capacity(u.len() - 1);
    out.push(-n * 2.0 * (v[1] - v[0]) / (h * h));
    for i in 1..u.len() - 1 {
        let d2 = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
        let d1 = (v[i + 1] - v[i - 1]) / (2.0 * h);
        out.push(-(d2 + (n - 1.0) * d1 / u.r[i]));
    }
    RadialProfile::new(u.dim, u.r[..u.len() - 1].to_vec(), out)
}

/// Radial solution of `-Δv = g` with `v(0) = v0` and `v'(0) = 0`.
///
/// Exchanging the order of the double integral gives
/// `v(r) = v0 - (∫_0^r τ g - r^{2-n} ∫_0^r τ^{n-1} g) / (n - 2)`
/// (with the logarithmic analogue in the plane), and both inner integrals
/// are computed cumulatively with panel-wise cubic interpolation of `g`.
pub fn solve_radial_poisson(g: &RadialProfile, v0: f64) -> Result<RadialProfile> {
    let n = g.dim;
    let r = &g.r;
    let values = if n == 2 {
        // v = v0 - ∫_0^r A(s)/s ds with A(s) = ∫_0^s τ g, and A(s)/s is smooth
        let a = cumulative_weighted(r, &g.values, |t| t);
        let ratio: Vec<f64> = a
            .iter()
            .zip(r)
            .map(|(&ai, &ri)| if ri > 0.0 { ai / ri } else { 0.0 })
            .collect();
        let outer = cumulative_weighted(r, &ratio, |_| 1.0);
        outer.iter().map(|o| v0 - o).collect()
    } else {
        let a = cumulative_weighted(r, &g.values, |t| t);
        let b = cumulative_weighted(r, &g.values, |t| t.powi(n as i32 - 1));
        r.iter()
            .enumerate()
            .map(|(i, &ri)| {
                if i == 0 {
                    v0
                } else {
                    v0 - (a[i] - ri.powi(2 - n as i32) * b[i]) / (n as f64 - 2.0)
                }
            })
            .collect()
    };
    g.with_values(values)
}

/// Types carrying a discrete `-Δ` whose domain shrinks with each use.
pub trait NegLaplacian: Sized {
    fn neg_laplacian_once(&self) -> Result<Self>;
}

impl NegLaplacian for CartesianField {
    fn neg_laplacian_once(&self) -> Result<Self> {
        self.neg_laplacian()
    }
}

impl NegLaplacian for RadialProfile {
    fn neg_laplacian_once(&self) -> Result<Self> {
        radial_laplacian(self)
    }
}

/// Result of `j` stencil applications: the field on its shrunken domain
/// and the number of boundary layers lost.
#[derive(Debug, Clone)]
pub struct Iterated<T> {
    pub field: T,
    pub layers_removed: usize,
}

/// `(-Δ)^j f` by `j` applications of the second-order stencil.
pub fn iterated_laplacian<T: NegLaplacian>(f: &T, j: usize) -> Result<Iterated<T>> {
    if j == 0 {
        return Err(Error::InvalidParams("iteration count must be >= 1".into()));
    }
    let mut field = f.neg_laplacian_once()?;
    for _ in 1..j {
        field = field.neg_laplacian_once()?;
    }
    Ok(Iterated {
        field,
        layers_removed: j,
    })
}

#[derive(Debug, Clone)]
pub struct JensenReport {
    pub holds: bool,
    /// Radii where the margin is below the round-off floor.
    pub ties: usize,
    pub tolerance: f64,
    /// `avg(f^q) - avg(f)^q` per radius.
    pub margin: RadialProfile,
}

/// Checks `avg(f)^q <= avg(f^q)` on spheres about `center`.
pub fn verify_jensen<S: PointSampler + ?Sized>(
    f: &S,
    q: f64,
    center: &[f64],
    radii: &[f64],
) -> Result<JensenReport> {
    if !(q > 1.0) {
        return Err(Error::InvalidParams(format!("Jensen exponent must exceed 1, got {q}")));
    }
    let rule = SphereRule::default_for(f.dim())?;
    let mut peak = 0.0f64;
    let mut margin = Vec::with_capacity(radii.len());
    for &r in radii {
        let (mean, mean_q) = if r == 0.0 {
            let v = f.sample(center).ok_or(Error::SphereEscapesBox {
                radius: 0.0,
                max_radius: f.max_radius(center),
            })?;
            peak = peak.max(v.abs());
            (v, v.powf(q))
        } else {
            let mean = rule.average_mapped(f, center, r, |v| v)?;
            let mean_q = rule.average_mapped(f, center, r, |v| v.powf(q))?;
            for i in 0..rule.len() {
                let x: Vec<f64> = center
                    .iter()
                    .zip(rule.node(i))
                    .map(|(c, u)| c + r * u)
                    .collect();
                if let Some(v) = f.sample(&x) {
                    peak = peak.max(v.abs());
                }
            }
            (mean, mean_q)
        };
        if !(mean > 0.0) {
            return Err(Error::NonPositiveInput { count: 1, min: mean });
        }
        margin.push(mean_q - mean.powf(q));
    }
    let tolerance = 1e-12 * (1.0 + peak.powf(q));
    let holds = margin.iter().all(|&m| m >= -tolerance);
    let ties = margin.iter().filter(|m| m.abs() < tolerance).count();
    Ok(JensenReport {
        holds,
        ties,
        tolerance,
        margin: RadialProfile::new(f.dim(), radii.to_vec(), margin)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Analytic, Grid};

    #[test]
    fn averages_of_simple_fields() {
        let radii = RadialProfile::uniform_radii(1.0, 6);
        let c = Analytic::new(3, |_: &[f64]| 2.5);
        let odd = Analytic::new(3, |x: &[f64]| x[0]);
        let sq = Analytic::new(3, |x: &[f64]| x[0] * x[0]);
        let a = spherical_average(&c, &[0.0; 3], &radii).unwrap();
        let b = spherical_average(&odd, &[0.0; 3], &radii).unwrap();
        let s = spherical_average(&sq, &[0.0; 3], &radii).unwrap();
        for i in 0..radii.len() {
            assert!((a.values()[i] - 2.5).abs() < 1e-14);
            assert!(b.values()[i].abs() < 1e-14);
            assert!((s.values()[i] - radii[i] * radii[i] / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_leaving_the_box_is_reported() {
        let grid = Grid::new(3, 1.0, 11).unwrap();
        let f = CartesianField::from_fn(grid, |_| 1.0).unwrap();
        let r = spherical_average(&f, &[0.5, 0.0, 0.0], &[0.0, 0.4, 0.8]);
        assert!(matches!(r, Err(Error::SphereEscapesBox { .. })));
    }

    #[test]
    fn laplacian_of_quadratic_and_constant() {
        let u = RadialProfile::from_fn(4, 2.0, 21, |r| r * r).unwrap();
        let lap = radial_laplacian(&u).unwrap();
        assert_eq!(lap.len(), 20);
        assert!(lap.values().iter().all(|v| (v + 8.0).abs() < 1e-10));
        let c = RadialProfile::from_fn(4, 2.0, 21, |_| 3.0).unwrap();
        assert!(radial_laplacian(&c).unwrap().values().iter().all(|v| v.abs() < 1e-12));
        let tiny = RadialProfile::from_fn(4, 2.0, 4, |_| 3.0).unwrap();
        assert!(matches!(radial_laplacian(&tiny), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn laplacian_of_n5_profile_is_second_order() {
        // -Δ(1+r^2)^{-3/2} = 15 (1+r^2)^{-7/2} in five dimensions
        let exact = |r: f64| 15.0 * (1.0 + r * r).powf(-3.5);
        let err = |points: usize| {
            let u = RadialProfile::from_fn(5, 3.0, points, |r| (1.0 + r * r).powf(-1.5)).unwrap();
            let lap = radial_laplacian(&u).unwrap();
            lap.radii()
                .iter()
                .zip(lap.values())
                .map(|(&r, v)| ((v - exact(r)) / exact(r)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(61), err(121));
        assert!(e1 < 0.01);
        let order = (e1 / e2).log2();
        assert!(order > 1.8, "observed order {order}");
    }

    #[test]
    fn poisson_closed_forms() {
        let c = 1.5;
        let g = RadialProfile::from_fn(3, 2.0, 41, |_| -c).unwrap();
        let v = solve_radial_poisson(&g, 0.7).unwrap();
        for (&r, &val) in v.radii().iter().zip(v.values()) {
            assert!((val - (0.7 + c * r * r / 6.0)).abs() < 1e-12);
        }
        let z = solve_radial_poisson(&g.map(|_| 0.0).unwrap(), -2.0).unwrap();
        assert!(z.values().iter().all(|&v| v == -2.0));
        // g = -a^q r^{σq} integrates to v0 - a^q r^{σq+2}/((σq+2)(σq+n))
        let (a, q, sigma, n) = (1.3f64, 2.0, 1.5, 5usize);
        let e = sigma * q;
        let g = RadialProfile::from_fn(n, 1.0, 201, |r| -a.powf(q) * r.powf(e)).unwrap();
        let v = solve_radial_poisson(&g, 0.0).unwrap();
        for (&r, &val) in v.radii().iter().zip(v.values()) {
            let exact = a.powf(q) * r.powf(e + 2.0) / ((e + 2.0) * (e + n as f64));
            assert!((val - exact).abs() < 1e-10, "r={r}");
        }
    }

    #[test]
    fn planar_poisson() {
        let g = RadialProfile::from_fn(2, 1.0, 51, |_| -1.0).unwrap();
        let v = solve_radial_poisson(&g, 0.0).unwrap();
        for (&r, &val) in v.radii().iter().zip(v.values()) {
            assert!((val - r * r / 4.0).abs() < 1e-12, "{}", val - r * r / 4.0);
        }
    }

    #[test]
    fn iterated_laplacian_of_quadratic_vanishes() {
        let grid = Grid::new(3, 1.0, 9).unwrap();
        let f = CartesianField::from_fn(grid, |x| x[0] * x[0] - 2.0 * x[1] * x[2] + x[2]).unwrap();
        let it = iterated_laplacian(&f, 2).unwrap();
        assert_eq!(it.layers_removed, 2);
        assert_eq!(it.field.grid().points(), 5);
        assert!(it.field.max_abs() < 1e-9);
        let once = iterated_laplacian(&f, 1).unwrap().field;
        assert_eq!(once, f.neg_laplacian().unwrap());
    }

    #[test]
    fn jensen_examples() {
        let radii = RadialProfile::uniform_radii(1.0, 5);
        let radial = Analytic::new(3, |x: &[f64]| 1.0 + x.iter().map(|v| v * v).sum::<f64>());
        let rep = verify_jensen(&radial, 2.0, &[0.0; 3], &radii).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.ties, radii.len());
        let bumpy = Analytic::new(3, |x: &[f64]| 1.0 + x[0] * x[0]);
        let rep = verify_jensen(&bumpy, 2.0, &[0.0; 3], &radii).unwrap();
        assert!(rep.holds);
        // avg((1+x^2)^2) - avg(1+x^2)^2 = r^4 (1/5 - 1/9) on S^2
        for (&r, &m) in radii.iter().zip(rep.margin.values()) {
            assert!((m - r.powi(4) * (0.2 - 1.0 / 9.0)).abs() < 1e-13);
            if r > 0.0 {
                assert!(m > rep.tolerance);
            }
        }
    }
}
