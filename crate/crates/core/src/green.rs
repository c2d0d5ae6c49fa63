//! Green functions of `(-Δ)^k` on the ball `B_r(0)` with zero Dirichlet data
//! for `φ, Δφ, ..., Δ^{k-1}φ`, built as the cascade
//! `-Δψ_{k-1} = δ`, `-Δψ_j = ψ_{j+1}`, `ψ_j(r) = 0`, with `φ = ψ_0`.
//!
//! Profiles live on a geometric grid `ρ_i = r 10^{-D + i/P}` that excludes
//! the singular origin and scales exactly with `r`. Near the origin each
//! level behaves like `ρ^{2(k-j)-n}`, which supplies analytic heads for
//! every integral that reaches 0.

use crate::error::{Error, Result};
use crate::kernels::riesz_inverse_constant;
use crate::quad::{cubic_interpolate, cumulative_weighted, gauss_legendre};
use crate::sphere::unit_sphere_area;

#[derive(Debug, Clone, Copy)]
pub struct LogGrid {
    /// Decades covered below `r`.
    pub decades: usize,
    pub per_decade: usize,
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            decades: 7,
            per_decade: 400,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GreenCascade {
    n: usize,
    k: usize,
    r: f64,
    rho: Vec<f64>,
    u: Vec<f64>,
    /// `levels[j]` holds ψ_j; `levels[0]` is φ.
    levels: Vec<Vec<f64>>,
    /// `ρ^{n-1} |ψ_j'|` at `r`, from the integrated flux.
    flux: Vec<f64>,
}

pub fn build_cascade(n: usize, k: usize, r: f64) -> Result<GreenCascade> {
    build_cascade_with(n, k, r, LogGrid::default())
}

pub fn build_cascade_with(n: usize, k: usize, r: f64, grid: LogGrid) -> Result<GreenCascade> {
    if k == 0 || 2 * k >= n {
        return Err(Error::InvalidOrder { n, k });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParams(format!("ball radius must be positive, got {r}")));
    }
    if grid.decades == 0 || grid.per_decade < 4 {
        return Err(Error::InvalidGrid("log grid needs >= 1 decade and >= 4 points each".into()));
    }
    let count = grid.decades * grid.per_decade;
    let u: Vec<f64> = (0..=count)
        .map(|i| r.ln() + std::f64::consts::LN_10 * (i as f64 / grid.per_decade as f64 - grid.decades as f64))
        .collect();
    let mut rho: Vec<f64> = u.iter().map(|v| v.exp()).collect();
    rho[count] = r;
    let nf = n as f64;
    let omega = unit_sphere_area(n);

    let top: Vec<f64> = rho
        .iter()
        .map(|&p| (p.powf(2.0 - nf) - r.powf(2.0 - nf)) / ((nf - 2.0) * omega))
        .collect();
    let mut levels = vec![top];
    let mut flux = vec![1.0 / omega];
    for j in (0..k - 1).rev() {
        let above = &levels[0];
        let e_above = leading_exponent(n, k, j + 1);
        // M(ρ) = ∫_0^ρ τ^{n-1} ψ_{j+1}, head from the leading power
        let head = above[0] * rho[0].powf(nf) / (nf + e_above);
        let body: Vec<f64> = above.iter().zip(&rho).map(|(v, p)| v * p.powf(nf)).collect();
        let mass: Vec<f64> = cumulative_weighted(&u, &body, |_| 1.0)
            .iter()
            .map(|c| head + c)
            .collect();
        // ψ_j(ρ) = ∫_ρ^r s^{2-n} M(s) du
        let outer: Vec<f64> = mass.iter().zip(&rho).map(|(m, p)| m * p.powf(2.0 - nf)).collect();
        // accumulated inward from r: the head dominates any forward total
        let flipped: Vec<f64> = u.iter().rev().map(|v| -v).collect();
        let reversed: Vec<f64> = outer.iter().rev().cloned().collect();
        let mut level = cumulative_weighted(&flipped, &reversed, |_| 1.0);
        level.reverse();
        flux.insert(0, mass[count]);
        levels.insert(0, level);
    }
    Ok(GreenCascade {
        n,
        k,
        r,
        rho,
        u,
        levels,
        flux,
    })
}

/// Exponent of the leading power of ψ_j at the origin, `2(k-j) - n`.
pub fn leading_exponent(n: usize, k: usize, j: usize) -> f64 {
    2.0 * (k as f64 - j as f64) - n as f64
}

impl GreenCascade {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn radii(&self) -> &[f64] {
        &self.rho
    }

    pub fn level(&self, j: usize) -> &[f64] {
        &self.levels[j]
    }

    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// ψ_j at an arbitrary radius. Interpolates the smooth `ψ_j ρ^{-e}`,
    /// follows the leading power below the grid and vanishes outside the ball.
    pub fn eval(&self, j: usize, rho: f64) -> f64 {
        if rho >= self.r {
            return 0.0;
        }
        let e = leading_exponent(self.n, self.k, j);
        let psi = &self.levels[j];
        if rho <= self.rho[0] {
            return psi[0] * (rho / self.rho[0]).powf(e);
        }
        let i = self.rho.partition_point(|&v| v <= rho).clamp(1, self.rho.len() - 1) - 1;
        let s = i.saturating_sub(1).min(self.rho.len() - 4);
        let scaled: Vec<f64> = (s..s + 4).map(|t| psi[t] * self.rho[t].powf(-e)).collect();
        cubic_interpolate(&self.rho[s..s + 4], &scaled, rho) * rho.powf(e)
    }

    /// `∂_ν ψ_j` on the sphere of radius `r`, from the integrated flux.
    pub fn boundary_derivative(&self, j: usize) -> f64 {
        -self.flux[j] * self.r.powf(1.0 - self.n as f64)
    }

    /// One-sided second-order difference for `ψ_j'(r)` on the log grid.
    pub fn boundary_derivative_fd(&self, j: usize) -> f64 {
        let psi = &self.levels[j];
        let last = psi.len() - 1;
        let du = self.u[last] - self.u[last - 1];
        let d_du = (3.0 * psi[last] - 4.0 * psi[last - 1] + psi[last - 2]) / (2.0 * du);
        d_du / self.r
    }

    /// Largest relative mismatch of `-Δψ_j` against ψ_{j+1} (or 0 for the
    /// top level) over interior nodes, by centred differences in `log ρ`.
    pub fn cascade_residual(&self, j: usize) -> f64 {
        let psi = &self.levels[j];
        let nf = self.n as f64;
        let mut worst = 0.0f64;
        for i in 1..psi.len() - 1 {
            let du = self.u[i + 1] - self.u[i];
            let d1 = (psi[i + 1] - psi[i - 1]) / (2.0 * du);
            let d2 = (psi[i + 1] - 2.0 * psi[i] + psi[i - 1]) / (du * du);
            let lap = -(d2 + (nf - 2.0) * d1) / (self.rho[i] * self.rho[i]);
            let target = self.levels.get(j + 1).map_or(0.0, |l| l[i]);
            let scale = target.abs() + (d2.abs() + (nf - 2.0) * d1.abs()) / (self.rho[i] * self.rho[i]);
            if scale > 0.0 {
                worst = worst.max((lap - target).abs() / scale);
            }
        }
        worst
    }

    /// `⟨φ, (-Δ)^k b⟩` for the bump `b(x) = (1 - |x|²/a²)^{2k+2}`, whose value
    /// at the origin is 1. Requires `a < r`.
    pub fn pair_with_bump(&self, a: f64) -> Result<f64> {
        if !(a > self.rho[0] && a < self.r) {
            return Err(Error::InvalidParams(format!(
                "bump radius {a} must lie inside the ball of radius {}",
                self.r
            )));
        }
        let poly = bump_polyharmonic(self.n, self.k, a);
        let l_of = |rho: f64| {
            let s = rho * rho;
            poly.iter().rev().fold(0.0, |acc, c| acc * s + c)
        };
        let nf = self.n as f64;
        let omega = unit_sphere_area(self.n);
        let e0 = leading_exponent(self.n, self.k, 0);
        let rho0 = self.rho[0];
        // φ ≈ φ(ρ0)(ρ/ρ0)^{e0} and L ≈ L(0) below the grid
        let head = self.levels[0][0] * rho0.powf(-e0) * l_of(0.0) * rho0.powf(nf + e0) / (nf + e0);
        let (gx, gw) = gauss_legendre(8);
        let (lo, hi) = (self.u[0], a.ln());
        let edges: Vec<f64> = self
            .u
            .iter()
            .cloned()
            .take_while(|&v| v < hi)
            .chain(std::iter::once(hi))
            .collect();
        let mut body = 0.0;
        for w in edges.windows(2) {
            let (s0, s1) = (w[0].max(lo), w[1]);
            let half = 0.5 * (s1 - s0);
            let mid = 0.5 * (s0 + s1);
            for (x, wt) in gx.iter().zip(&gw) {
                let uu = mid + half * x;
                let rho = uu.exp();
                body += wt * half * rho.powf(nf) * self.eval(0, rho) * l_of(rho);
            }
        }
        Ok(omega * (head + body))
    }
}

/// Coefficients in `s = |x|²` of `(-Δ)^k (1 - s/a²)^{2k+2}`, lowest first.
fn bump_polyharmonic(n: usize, k: usize, a: f64) -> Vec<f64> {
    let p = 2 * k + 2;
    let mut coef: Vec<f64> = (0..=p)
        .map(|i| binomial(p, i) * (-1.0 / (a * a)).powi(i as i32))
        .collect();
    for _ in 0..k {
        // -Δ s^i = -2i(2i-2+n) s^{i-1}
        coef = (1..coef.len())
            .map(|i| {
                let fi = i as f64;
                -2.0 * fi * (2.0 * fi - 2.0 + n as f64) * coef[i]
            })
            .collect();
    }
    coef
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone)]
pub struct LevelSign {
    pub j: usize,
    pub derivative: f64,
    pub derivative_fd: f64,
    pub nonpositive: bool,
    pub interior_positive: bool,
    pub decreasing: bool,
}

#[derive(Debug, Clone)]
pub struct SignReport {
    pub levels: Vec<LevelSign>,
    pub holds: bool,
}

/// Boundary derivatives `∂_ν (-Δ)^j φ <= 0` and interior positivity.
pub fn sign_conditions(g: &GreenCascade) -> SignReport {
    let levels: Vec<LevelSign> = (0..g.levels())
        .map(|j| {
            let psi = g.level(j);
            let derivative = g.boundary_derivative(j);
            let derivative_fd = g.boundary_derivative_fd(j);
            let tol = 1e-12 * derivative.abs();
            LevelSign {
                j,
                derivative,
                derivative_fd,
                nonpositive: derivative <= tol && derivative_fd <= tol + 1e-3 * derivative.abs(),
                interior_positive: psi[..psi.len() - 1].iter().all(|&v| v > 0.0),
                decreasing: psi.windows(2).all(|w| w[1] < w[0]),
            }
        })
        .collect();
    let holds = levels
        .iter()
        .all(|l| l.nonpositive && l.interior_positive && l.decreasing);
    SignReport { levels, holds }
}

#[derive(Debug, Clone)]
pub struct LimitReport {
    pub r_sequence: Vec<f64>,
    pub radii: Vec<f64>,
    /// `ratios[j][i][t] = ψ_j(ρ_i) ρ_i^{n-2k+2j}` for ball radius `r_t`.
    pub ratios: Vec<Vec<Vec<f64>>>,
    pub monotone: bool,
    /// Largest relative change between the last two balls.
    pub tail_spread: f64,
    /// Per level, the ratio at the largest ball and smallest radius.
    pub constants: Vec<f64>,
    /// Whole-space constants the ratios approach.
    pub reference: Vec<f64>,
}

pub fn limit_profile(n: usize, k: usize, r_sequence: &[f64], radii: &[f64]) -> Result<LimitReport> {
    if r_sequence.len() < 2 || r_sequence.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("ball radii must increase".into()));
    }
    let cascades = r_sequence
        .iter()
        .map(|&r| build_cascade(n, k, r))
        .collect::<Result<Vec<_>>>()?;
    let mut ratios = vec![vec![vec![0.0; r_sequence.len()]; radii.len()]; k];
    for (t, g) in cascades.iter().enumerate() {
        for (j, per_level) in ratios.iter_mut().enumerate() {
            let e = leading_exponent(n, k, j);
            for (i, &rho) in radii.iter().enumerate() {
                per_level[i][t] = g.eval(j, rho) * rho.powf(-e);
            }
        }
    }
    let monotone = ratios
        .iter()
        .flatten()
        .all(|seq| seq.windows(2).all(|w| w[1] > w[0]));
    let last = r_sequence.len() - 1;
    let tail_spread = ratios
        .iter()
        .flatten()
        .map(|seq| ((seq[last] - seq[last - 1]) / seq[last]).abs())
        .fold(0.0, f64::max);
    let constants = ratios.iter().map(|lvl| lvl[0][last]).collect();
    let reference = (0..k)
        .map(|j| riesz_inverse_constant(n, 2.0 * (k - j) as f64))
        .collect();
    Ok(LimitReport {
        r_sequence: r_sequence.to_vec(),
        radii: radii.to_vec(),
        ratios,
        monotone,
        tail_spread,
        constants,
        reference,
    })
}

#[derive(Debug, Clone)]
pub struct BoundarySlope {
    pub j: usize,
    pub slope: f64,
    pub expected: f64,
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    /// Largest relative violation of `ψ_{j,r}(ρ) = r^{e_j} ψ_{j,1}(ρ/r)`.
    pub identity_error: f64,
    pub slopes: Vec<BoundarySlope>,
    /// `sup φ_r(ρ) ρ^{n-2k}` over all nodes and balls.
    pub envelope: f64,
}

impl ScalingReport {
    pub fn slopes_within(&self, rel: f64) -> bool {
        self.slopes
            .iter()
            .all(|s| ((s.slope - s.expected) / s.expected).abs() <= rel)
    }
}

/// Dilation identity, boundary-derivative slopes and the envelope bound for
/// the unit-ball cascade `g1` against balls of the given radii.
pub fn scaling_identity(g1: &GreenCascade, radii: &[f64]) -> Result<ScalingReport> {
    if (g1.r - 1.0).abs() > 1e-15 {
        return Err(Error::InvalidParams("reference cascade must live on the unit ball".into()));
    }
    let (n, k) = (g1.n, g1.k);
    let mut all = vec![g1.clone()];
    for &r in radii {
        if (r - 1.0).abs() > 1e-15 {
            let rho = g1.rho.len() - 1;
            let per = (rho as f64 / (g1.u[rho] - g1.u[0]) * std::f64::consts::LN_10).round() as usize;
            let grid = LogGrid {
                decades: rho / per,
                per_decade: per,
            };
            all.push(build_cascade_with(n, k, r, grid)?);
        }
    }
    let mut identity_error = 0.0f64;
    for g in &all[1..] {
        for j in 0..k {
            let e = leading_exponent(n, k, j);
            for (i, &rho) in g.rho.iter().enumerate() {
                let expect = g.r.powf(e) * g1.eval(j, rho / g.r);
                let got = g.levels[j][i];
                let scale = got.abs().max(expect.abs());
                if scale > 0.0 && i + 1 < g.rho.len() {
                    identity_error = identity_error.max((got - expect).abs() / scale);
                }
            }
        }
    }
    let slopes = if all.len() >= 2 {
        (0..k)
            .map(|j| {
                let pts: Vec<(f64, f64)> = all
                    .iter()
                    .map(|g| (g.r.ln(), g.boundary_derivative(j).abs().ln()))
                    .collect();
                BoundarySlope {
                    j,
                    slope: fit_slope(&pts),
                    expected: -(n as f64 - 2.0 * k as f64 + 1.0 + 2.0 * j as f64),
                }
            })
            .collect()
    } else {
        Vec::new()
    };
    let power = n as f64 - 2.0 * k as f64;
    let envelope = all
        .iter()
        .flat_map(|g| {
            g.rho
                .iter()
                .zip(&g.levels[0])
                .map(|(r, v)| v * r.powf(power))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max);
    Ok(ScalingReport {
        identity_error,
        slopes,
        envelope,
    })
}

fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Whole-space constant `c` with `φ_r(x) -> c |x|^{2k-n}`.
pub fn limit_constant(n: usize, k: usize) -> f64 {
    riesz_inverse_constant(n, 2.0 * k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn newtonian_closed_form() {
        let g = build_cascade(3, 1, 1.0).unwrap();
        for rho in [0.01, 0.3, 0.77] {
            let exact = (1.0 / rho - 1.0) / (4.0 * PI);
            assert!((g.eval(0, rho) - exact).abs() < 1e-10 * exact);
        }
        assert_eq!(g.level(0)[g.radii().len() - 1], 0.0);
        assert!((g.boundary_derivative(0) + 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((g.boundary_derivative_fd(0) + 1.0 / (4.0 * PI)).abs() < 1e-6);
    }

    #[test]
    fn biharmonic_closed_form() {
        // n=6, k=2: φ = (ρ^{-2}/4 + ρ²/12 - 1/3) / (4π³)
        let g = build_cascade(6, 2, 1.0).unwrap();
        let c = 1.0 / (4.0 * PI.powi(3));
        for (i, &rho) in g.radii().iter().enumerate().step_by(97) {
            let exact = c * (rho.powi(-2) / 4.0 + rho * rho / 12.0 - 1.0 / 3.0);
            assert!((g.level(0)[i] - exact).abs() < 1e-8 * exact, "{rho}");
        }
        assert!((g.eval(0, 0.4321) / (c * (0.4321f64.powi(-2) / 4.0 + 0.4321f64.powi(2) / 12.0 - 1.0 / 3.0)) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn invalid_orders() {
        assert!(matches!(build_cascade(4, 2, 1.0), Err(Error::InvalidOrder { n: 4, k: 2 })));
        assert!(matches!(build_cascade(3, 0, 1.0), Err(Error::InvalidOrder { .. })));
    }

    #[test]
    fn biharmonic_cascade_is_consistent() {
        let g = build_cascade(6, 2, 1.0).unwrap();
        assert_eq!(g.levels(), 2);
        assert!(g.cascade_residual(0) < 1e-4, "{}", g.cascade_residual(0));
        assert!(g.cascade_residual(1) < 1e-4);
        let last = g.radii().len() - 1;
        assert_eq!(g.level(0)[last], 0.0);
        let rep = sign_conditions(&g);
        assert!(rep.holds);
        for l in &rep.levels {
            assert!((l.derivative - l.derivative_fd).abs() < 1e-3 * l.derivative.abs());
        }
    }

    #[test]
    fn bump_laplacian_coefficients() {
        // -Δ(1 - s)^2 in R^3: 1 - 2s + s^2 -> 2*3 - 20 s
        let c = bump_polyharmonic(3, 0, 1.0);
        assert_eq!(c, vec![1.0, -2.0, 1.0]);
        let p = 2;
        let base: Vec<f64> = (0..=p).map(|i| binomial(p, i) * (-1f64).powi(i as i32)).collect();
        let once: Vec<f64> = (1..base.len())
            .map(|i| -2.0 * i as f64 * (2.0 * i as f64 + 1.0) * base[i])
            .collect();
        assert_eq!(once, vec![12.0, -20.0]);
    }

    #[test]
    fn delta_pairing() {
        for (n, k) in [(3, 1), (5, 1), (6, 2), (7, 3)] {
            let g = build_cascade(n, k, 1.0).unwrap();
            for a in [0.3, 0.55, 0.9] {
                let v = g.pair_with_bump(a).unwrap();
                assert!((v - 1.0).abs() < 1e-6, "n={n} k={k} a={a}: {v}");
            }
        }
    }

    #[test]
    fn scaling_and_slopes() {
        let g1 = build_cascade(6, 2, 1.0).unwrap();
        let rep = scaling_identity(&g1, &[2.0, 4.0]).unwrap();
        assert!(rep.identity_error < 1e-10, "{}", rep.identity_error);
        assert!(rep.slopes_within(1e-6));
        assert!(rep.envelope <= limit_constant(6, 2) * (1.0 + 1e-9));
    }

    #[test]
    fn limit_ratios_increase_to_whole_space_constant() {
        let rep = limit_profile(3, 1, &[1.0, 2.0, 4.0, 8.0], &[0.01, 0.02]).unwrap();
        assert!(rep.monotone);
        assert!((rep.constants[0] - 1.0 / (4.0 * PI)).abs() < 0.002 / (4.0 * PI));
    }
}
