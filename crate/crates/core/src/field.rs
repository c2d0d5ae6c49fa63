//! Uniform box grids in R^n and scalar fields sampled at their nodes.
//!
//! Nodes sit at `-L + i*h` for `i = 0..m` along every axis, so both faces of
//! the box carry samples and `h = 2L/(m-1)`. Flat storage is row-major with
//! the last axis fastest.

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {dim} outside 1..={MAX_DIM}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 points per axis, got {points}"
            )));
        }
        let total = (points as f64).powi(dim as i32);
        if total > 4.0e8 {
            return Err(Error::InvalidGrid(format!(
                "{points}^{dim} nodes exceed the supported size"
            )));
        }
        Ok(Self {
            dim,
            half_width,
            points,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        // Symmetric evaluation keeps mirrored nodes exactly opposite.
        let c = (self.points - 1) as f64 / 2.0;
        (i as f64 - c) * self.spacing()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - 1 - axis) as u32)
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().fold(0, |acc, &i| acc * self.points + i)
    }

    pub fn unravel(&self, mut flat: usize, multi: &mut [usize]) {
        for d in (0..self.dim).rev() {
            multi[d] = flat % self.points;
            flat /= self.points;
        }
    }

    pub fn position(&self, flat: usize, x: &mut [f64]) {
        let mut rest = flat;
        for d in (0..self.dim).rev() {
            x[d] = self.coordinate(rest % self.points);
            rest /= self.points;
        }
    }

    /// Index of the node at the origin, when the grid has one.
    pub fn origin_index(&self) -> Option<usize> {
        if self.points % 2 == 1 {
            let mid = self.points / 2;
            Some(self.flat_index(&vec![mid; self.dim]))
        } else {
            None
        }
    }

    /// Largest radius of a sphere about `center` that stays inside the box.
    pub fn inscribed_radius(&self, center: &[f64]) -> f64 {
        center
            .iter()
            .map(|c| self.half_width - c.abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// The grid with `layers` node layers stripped from every face.
    pub fn shrink(&self, layers: usize) -> Result<Grid> {
        if self.points <= 2 * layers + 1 {
            return Err(Error::GridTooCoarse(format!(
                "{} points per axis cannot lose {} layers",
                self.points, layers
            )));
        }
        Grid::new(
            self.dim,
            self.half_width - layers as f64 * self.spacing(),
            self.points - 2 * layers,
        )
    }

    pub fn scaled(&self, factor: f64) -> Result<Grid> {
        Grid::new(self.dim, self.half_width * factor, self.points)
    }
}

/// Scalar samples at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianField {
    grid: Grid,
    values: Vec<f64>,
}

impl CartesianField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite sample at node {i}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|i| {
                grid.position(i, &mut x);
                f(&x)
            })
            .collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.grid, values)
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Result<Self> {
        self.check_same_grid(other)?;
        self.with_values(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Errors with [`Error::NonPositiveInput`] unless every node is > 0.
    pub fn require_positive(&self) -> Result<()> {
        let count = self.values.iter().filter(|&&v| v <= 0.0).count();
        if count > 0 {
            return Err(Error::NonPositiveInput {
                count,
                min: self.min(),
            });
        }
        Ok(())
    }

    pub fn require_nonnegative(&self) -> Result<()> {
        let count = self.values.iter().filter(|&&v| v < 0.0).count();
        if count > 0 {
            return Err(Error::NonPositiveInput {
                count,
                min: self.min(),
            });
        }
        Ok(())
    }

    /// Multilinear interpolation; `None` outside the box.
    pub fn interpolate(&self, x: &[f64]) -> Option<f64> {
        let g = &self.grid;
        let n = g.dim();
        let h = g.spacing();
        let m = g.points();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for d in 0..n {
            let s = (x[d] + g.half_width()) / h;
            if !(-1e-9..=(m - 1) as f64 + 1e-9).contains(&s) {
                return None;
            }
            let i = (s.floor().max(0.0) as usize).min(m - 2);
            base[d] = i;
            frac[d] = (s - i as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for d in 0..n {
                let bit = (corner >> (n - 1 - d)) & 1;
                w *= if bit == 1 { frac[d] } else { 1.0 - frac[d] };
                idx = idx * m + base[d] + bit;
            }
            if w != 0.0 {
                acc += w * self.values[idx];
            }
        }
        Some(acc)
    }

    /// Nodes whose coordinates all satisfy `|x_d| <= fraction * L`.
    pub fn inner_nodes(&self, fraction: f64) -> Vec<usize> {
        let limit = fraction * self.grid.half_width() * (1.0 + 1e-12);
        let mut x = vec![0.0; self.dim()];
        (0..self.grid.len())
            .filter(|&i| {
                self.grid.position(i, &mut x);
                x.iter().all(|c| c.abs() <= limit)
            })
            .collect()
    }

    /// Sub-field on the grid with `layers` faces removed.
    pub fn restrict(&self, layers: usize) -> Result<Self> {
        let inner = self.grid.shrink(layers)?;
        let mut multi = vec![0; self.dim()];
        let values = (0..inner.len())
            .map(|i| {
                inner.unravel(i, &mut multi);
                multi.iter_mut().for_each(|v| *v += layers);
                self.values[self.grid.flat_index(&multi)]
            })
            .collect();
        Self::new(inner, values)
    }

    /// Value at the grid origin (requires an odd number of points per axis).
    pub fn value_at_origin(&self) -> Option<f64> {
        self.grid.origin_index().map(|i| self.values[i])
    }

    /// `-Δ` by the second-order centred stencil. The result lives on the grid
    /// shrunk by one layer.
    pub fn neg_laplacian(&self) -> Result<Self> {
        let g = self.grid;
        let inner = g.shrink(1).map_err(|_| {
            Error::GridTooCoarse(format!(
                "{} points per axis leave no interior for the Laplacian stencil",
                g.points()
            ))
        })?;
        let inv_h2 = 1.0 / (g.spacing() * g.spacing());
        let n = g.dim();
        let strides: Vec<usize> = (0..n).map(|d| g.stride(d)).collect();
        let mut multi = vec![0; n];
        let values = (0..inner.len())
            .map(|i| {
                inner.unravel(i, &mut multi);
                multi.iter_mut().for_each(|v| *v += 1);
                let c = g.flat_index(&multi);
                let centre = self.values[c];
                let sum: f64 = strides
                    .iter()
                    .map(|&s| self.values[c + s] - 2.0 * centre + self.values[c - s])
                    .sum();
                -sum * inv_h2
            })
            .collect();
        Self::new(inner, values)
    }
}

/// Anything that can be evaluated at an arbitrary point of R^n.
pub trait PointSampler: Sync {
    fn dim(&self) -> usize;

    fn sample(&self, x: &[f64]) -> Option<f64>;

    /// Largest admissible sphere radius about `center`.
    fn max_radius(&self, _center: &[f64]) -> f64 {
        f64::INFINITY
    }
}

impl PointSampler for CartesianField {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn sample(&self, x: &[f64]) -> Option<f64> {
        self.interpolate(x)
    }

    fn max_radius(&self, center: &[f64]) -> f64 {
        self.grid.inscribed_radius(center)
    }
}

/// A closed-form field, used where both sides of a check should be exact.
pub struct Analytic<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> Analytic<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> PointSampler for Analytic<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, x: &[f64]) -> Option<f64> {
        Some((self.f)(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm2(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(3, 2.0, 5).unwrap();
        assert_eq!(g.len(), 125);
        assert_eq!(g.spacing(), 1.0);
        assert_eq!(g.coordinate(0), -2.0);
        assert_eq!(g.coordinate(4), 2.0);
        let o = g.origin_index().unwrap();
        let mut x = [0.0; 3];
        g.position(o, &mut x);
        assert_eq!(x, [0.0, 0.0, 0.0]);
        let mut multi = [0; 3];
        g.unravel(g.flat_index(&[1, 2, 3]), &mut multi);
        assert_eq!(multi, [1, 2, 3]);
        assert!(Grid::new(0, 1.0, 3).is_err());
        assert!(Grid::new(2, -1.0, 3).is_err());
        assert!(Grid::new(2, 1.0, 1).is_err());
    }

    #[test]
    fn interpolation_reproduces_multilinear_functions() {
        let g = Grid::new(3, 1.0, 7).unwrap();
        let f = |x: &[f64]| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1] * x[2];
        let field = CartesianField::from_fn(g, f).unwrap();
        for p in [[0.13, -0.71, 0.4], [0.99, 0.99, -0.99], [-1.0, 1.0, 0.0]] {
            assert!((field.interpolate(&p).unwrap() - f(&p)).abs() < 1e-13);
        }
        assert!(field.interpolate(&[1.2, 0.0, 0.0]).is_none());
    }

    #[test]
    fn laplacian_of_quadratic_is_exact() {
        let g = Grid::new(4, 1.0, 7).unwrap();
        let u = CartesianField::from_fn(g, |x| norm2(x) + 3.0 * x[0] * x[1]).unwrap();
        let lap = u.neg_laplacian().unwrap();
        assert_eq!(lap.grid().points(), 5);
        for v in lap.values() {
            assert!((v + 8.0).abs() < 1e-10, "{v}");
        }
        let tiny = CartesianField::zeros(Grid::new(2, 1.0, 3).unwrap());
        assert!(matches!(tiny.neg_laplacian(), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn restrict_keeps_values() {
        let g = Grid::new(2, 2.0, 5).unwrap();
        let f = CartesianField::from_fn(g, |x| x[0] * 10.0 + x[1]).unwrap();
        let r = f.restrict(1).unwrap();
        assert_eq!(r.grid().points(), 3);
        assert_eq!(r.values()[0], -11.0);
        assert_eq!(r.value_at_origin(), Some(0.0));
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1, 1.0, 3).unwrap();
        assert!(CartesianField::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
    }
}
