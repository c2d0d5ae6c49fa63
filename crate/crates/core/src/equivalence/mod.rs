//! Checks that a positive solution of `(-Δ)^k u_i = f_i(u)` is also a
//! solution of the integral system `u_i = c I_{2k}[f_i(u)]`, and the
//! intermediate estimates the argument goes through.

mod expr;
mod fixture;
mod fourier;

pub use expr::Expr;
pub use fixture::{
    bubble_cartesian, bubble_constant, bubble_radial, critical_exponent, synthetic_cartesian,
    synthetic_radial, FieldData, FixtureKind, Growth, HypothesisReport, SolutionFixture,
};
pub use fourier::{
    fourier_equivalence_check, fourier_equivalence_check_with, fractional_pairing, periodize,
    roll_off, smoothed_riesz_profile, spectral_fractional, FourierOptions, FourierReport,
};

use crate::error::{Error, Result};
use crate::green::{build_cascade, limit_profile};
use crate::kernels::RieszSpec;
use crate::quad::gauss_legendre;
use crate::sphere::unit_sphere_area;
use fixture::SphereProbe;

/// `1e-10 (1 + max|u|)`.
pub fn default_tol_pos(fix: &SolutionFixture) -> f64 {
    let max = fix
        .fields
        .iter()
        .flat_map(|f| f.values().iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    1e-10 * (1.0 + max)
}

pub const DEFAULT_TOL_EQ: f64 = 0.02;

/// Relative quadrature allowance when comparing against `C(n) w(0)`.
pub const FINITENESS_QUADRATURE_TOL: f64 = 1e-3;

fn require_even(fix: &SolutionFixture, k: usize) -> Result<()> {
    if fix.even_order() != Some(k) {
        return Err(Error::PreconditionViolated(format!(
            "order alpha={} is not 2k for k={k}",
            fix.alpha
        )));
    }
    Ok(())
}

/// `levels[j][i] = (-Δ)^j u_i` for `j = 0..=top`.
fn laplacian_levels(fix: &SolutionFixture, top: usize) -> Result<Vec<Vec<FieldData>>> {
    let mut levels = vec![fix.fields.clone()];
    for _ in 0..top {
        let next = levels
            .last()
            .unwrap()
            .iter()
            .map(FieldData::neg_laplacian)
            .collect::<Result<Vec<_>>>()?;
        levels.push(next);
    }
    Ok(levels)
}

#[derive(Debug, Clone)]
pub struct LevelMargin {
    pub j: usize,
    pub field: usize,
    pub min_margin: f64,
    pub failing: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct SuperpolyReport {
    pub k: usize,
    pub tol_pos: f64,
    pub levels: Vec<LevelMargin>,
    pub positive: bool,
}

impl SuperpolyReport {
    /// The lowest level with a node below `-tol_pos`.
    pub fn first_violation(&self) -> Option<&LevelMargin> {
        self.levels.iter().find(|l| l.failing > 0)
    }
}

pub fn superpoly_verify(fix: &SolutionFixture, k: usize) -> Result<SuperpolyReport> {
    superpoly_verify_with(fix, k, default_tol_pos(fix))
}

/// Positivity of `(-Δ)^j u_i` at every node that the stencil reaches, for
/// `j = 1..k-1`.
pub fn superpoly_verify_with(fix: &SolutionFixture, k: usize, tol_pos: f64) -> Result<SuperpolyReport> {
    require_even(fix, k)?;
    let levels = laplacian_levels(fix, k.saturating_sub(1))?;
    let mut out = Vec::new();
    for (j, level) in levels.iter().enumerate().skip(1) {
        for (i, v) in level.iter().enumerate() {
            let vals = v.values();
            out.push(LevelMargin {
                j,
                field: i,
                min_margin: vals.iter().cloned().fold(f64::INFINITY, f64::min),
                failing: vals.iter().filter(|&&x| !(x > -tol_pos)).count(),
                nodes: vals.len(),
            });
        }
    }
    let positive = out.iter().all(|l| l.failing == 0);
    Ok(SuperpolyReport {
        k,
        tol_pos,
        levels: out,
        positive,
    })
}

/// Whole-space constant of the `k`-th order Green function, fitted from
/// cascades on growing balls.
pub fn fitted_green_constant(n: usize, k: usize) -> Result<f64> {
    Ok(limit_profile(n, k, &[1.0, 2.0, 4.0, 8.0], &[0.01])?.constants[0])
}

#[derive(Debug, Clone)]
pub struct WeightedIntegral {
    pub j: usize,
    pub field: usize,
    pub full: f64,
    pub half: f64,
}

impl WeightedIntegral {
    pub fn relative_change(&self) -> f64 {
        ((self.full - self.half) / self.full).abs()
    }
}

#[derive(Debug, Clone)]
pub struct FinitenessReport {
    /// `∫ F(u) |x|^{2k-n}` over the sampled region.
    pub weighted_rhs: f64,
    /// The same on half the extent.
    pub weighted_rhs_half: f64,
    pub green_constant: f64,
    /// `C(n) w(0)` with `C(n)` the reciprocal Green constant.
    pub bound: f64,
    /// `1 - weighted_rhs / bound`; solutions on R^n saturate the bound, so
    /// this is small and may dip below zero by quadrature error.
    pub slack: f64,
    pub holds: bool,
    pub levels: Vec<WeightedIntegral>,
    pub stable: bool,
}

/// Requires a passing [`SuperpolyReport`] for the same fixture and order.
pub fn finiteness_estimates(
    fix: &SolutionFixture,
    k: usize,
    superpoly: &SuperpolyReport,
) -> Result<FinitenessReport> {
    if !superpoly.positive || superpoly.k != k {
        return Err(Error::PositivityMissing);
    }
    require_even(fix, k)?;
    let n = fix.n();
    let s = (n - 2 * k) as f64;
    let total = fix.total_rhs()?;
    let weighted_rhs = total.weighted_integral(s)?;
    let weighted_rhs_half = total.halved()?.weighted_integral(s)?;
    let green_constant = fitted_green_constant(n, k)?;
    let bound = fix.w()?.value_at_origin()? / green_constant;
    let levels_data = laplacian_levels(fix, k - 1)?;
    let mut levels = Vec::new();
    for (j, level) in levels_data.iter().enumerate().skip(1) {
        let s = (n - 2 * j) as f64;
        for (i, v) in level.iter().enumerate() {
            levels.push(WeightedIntegral {
                j,
                field: i,
                full: v.weighted_integral(s)?,
                half: v.halved()?.weighted_integral(s)?,
            });
        }
    }
    let stable = levels.iter().all(|l| l.relative_change() < 0.01);
    Ok(FinitenessReport {
        weighted_rhs,
        weighted_rhs_half,
        green_constant,
        bound,
        slack: 1.0 - weighted_rhs / bound,
        holds: weighted_rhs <= bound * (1.0 + FINITENESS_QUADRATURE_TOL),
        levels,
        stable,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct JensenSplit {
    pub eps: f64,
    pub mean_w: f64,
    /// Mean of `w χ` with `χ` the indicator of `{w >= eps}`.
    pub mean_w_chi: f64,
    /// Share of the sphere where `w >= eps`.
    pub theta: f64,
    pub split_holds: bool,
    pub mean_f: f64,
    /// `c_δ θ (mean(w χ)/θ)^p`, a lower bound for `mean_f` when `eps >= δ`.
    pub jensen_lower: f64,
    pub jensen_holds: bool,
}

#[derive(Debug, Clone)]
pub struct BoundaryDecay {
    /// `(r, Σ_i Σ_j ∫_{∂B_r} v_ij / r^{n-2j-1})`.
    pub trace: Vec<(f64, f64)>,
    /// Subsequence along which the functional strictly decreases, running
    /// back from the largest radius.
    pub certified: Vec<(f64, f64)>,
    pub jensen: Vec<JensenSplit>,
}

impl BoundaryDecay {
    pub fn strictly_decreasing(&self) -> bool {
        self.trace.windows(2).all(|w| w[1].1 < w[0].1)
    }

    /// The second half of the trace strictly decreases.
    pub fn tail_decreasing(&self) -> bool {
        let start = self.trace.len() / 2;
        self.trace[start.saturating_sub(1)..]
            .windows(2)
            .all(|w| w[1].1 < w[0].1)
    }
}

pub fn boundary_decay(fix: &SolutionFixture, k: usize, radii: &[f64]) -> Result<BoundaryDecay> {
    boundary_decay_with(fix, k, radii, fix.growth.delta)
}

pub fn boundary_decay_with(fix: &SolutionFixture, k: usize, radii: &[f64], eps: f64) -> Result<BoundaryDecay> {
    if k == 0 {
        return Err(Error::InvalidParams("order k must be at least 1".into()));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.first().is_some_and(|&r| r <= 0.0) {
        return Err(Error::InvalidParams("radii must be positive and increasing".into()));
    }
    let n = fix.n();
    let omega = unit_sphere_area(n);
    let levels = laplacian_levels(fix, k - 1)?;
    let probes = levels
        .iter()
        .map(|l| SphereProbe::new(l))
        .collect::<Result<Vec<_>>>()?;
    let mut trace = Vec::with_capacity(radii.len());
    let mut jensen = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut value = 0.0;
        for (j, probe) in probes.iter().enumerate() {
            let mean: f64 = probe
                .samples(r)?
                .iter()
                .map(|(w, vals)| w * vals.iter().sum::<f64>())
                .sum();
            value += omega * r.powi(2 * j as i32) * mean;
        }
        trace.push((r, value));
        jensen.push(jensen_split(fix, &probes[0], r, eps)?);
    }
    let mut certified: Vec<(f64, f64)> = Vec::new();
    for &(r, v) in trace.iter().rev() {
        if certified.last().is_none_or(|&(_, last)| v > last) {
            certified.push((r, v));
        }
    }
    certified.reverse();
    Ok(BoundaryDecay {
        trace,
        certified,
        jensen,
    })
}

fn jensen_split(fix: &SolutionFixture, probe: &SphereProbe, r: f64, eps: f64) -> Result<JensenSplit> {
    let (mut mean_w, mut mean_w_chi, mut theta, mut mean_f) = (0.0, 0.0, 0.0, 0.0);
    for (wt, u) in probe.samples(r)? {
        let w: f64 = u.iter().sum();
        let f: f64 = fix.rhs.iter().map(|e| e.eval(&u, &[])).sum();
        mean_w += wt * w;
        mean_f += wt * f;
        if w >= eps {
            mean_w_chi += wt * w;
            theta += wt;
        }
    }
    let g = fix.growth;
    let jensen_lower = if theta > 0.0 {
        g.c_delta * theta * (mean_w_chi / theta).powf(g.p)
    } else {
        0.0
    };
    let slack = 1e-12 * mean_w.abs().max(mean_f.abs());
    Ok(JensenSplit {
        eps,
        mean_w,
        mean_w_chi,
        theta,
        split_holds: mean_w <= eps + mean_w_chi + slack,
        mean_f,
        jensen_lower,
        jensen_holds: eps < g.delta || mean_f + slack >= jensen_lower,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityGap {
    pub r: f64,
    /// `∫_{B_r} F(u) φ_r`.
    pub interior: f64,
    /// `w(0)` minus the interior term, i.e. the boundary contribution.
    pub gap: f64,
}

/// Representation `w(0) = ∫_{B_r} F φ_r + boundary terms` along the given
/// radii, with `φ_r` the Green function of `(-Δ)^k` on `B_r`.
pub fn boundary_identity(fix: &SolutionFixture, k: usize, radii: &[f64]) -> Result<Vec<IdentityGap>> {
    require_even(fix, k)?;
    let n = fix.n();
    let omega = unit_sphere_area(n);
    let w0 = fix.w()?.value_at_origin()?;
    let probe = SphereProbe::new(&fix.fields)?;
    let (gx, gw) = gauss_legendre(8);
    let panels = 64;
    radii
        .iter()
        .map(|&r| {
            let green = build_cascade(n, k, r)?;
            let mut interior = 0.0;
            for p in 0..panels {
                let (a, b) = (r * p as f64 / panels as f64, r * (p + 1) as f64 / panels as f64);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (x, wt) in gx.iter().zip(&gw) {
                    let rho = mid + half * x;
                    let mean_f: f64 = probe
                        .samples(rho)?
                        .iter()
                        .map(|(q, u)| q * fix.rhs.iter().map(|e| e.eval(u, &[])).sum::<f64>())
                        .sum();
                    interior += wt * half * rho.powi(n as i32 - 1) * green.eval(0, rho) * mean_f;
                }
            }
            interior *= omega;
            Ok(IdentityGap {
                r,
                interior,
                gap: w0 - interior,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Failed,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Equivalent => "Equivalent",
            Verdict::Failed => "Failed",
            Verdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub fitted_c: f64,
    /// `max |u_i - c I_i| / max |u_i|` over the inner nodes.
    pub residual: f64,
    pub boundary_trace: Vec<(f64, f64)>,
    pub verdict: Verdict,
    pub tol_eq: f64,
}

#[derive(Debug, Clone)]
pub struct IdentityOptions {
    pub tol_eq: f64,
    /// Share of the extent on which residuals are measured.
    pub inner_fraction: f64,
    /// Radii for the boundary trace; by default four radii spread over the
    /// region the deepest Laplacian level still covers.
    pub radii: Option<Vec<f64>>,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            tol_eq: DEFAULT_TOL_EQ,
            inner_fraction: 0.5,
            radii: None,
        }
    }
}

pub fn verify_integral_identity(fix: &SolutionFixture, k: usize) -> Result<EquivalenceReport> {
    verify_integral_identity_with(fix, k, &IdentityOptions::default())
}

pub fn verify_integral_identity_with(
    fix: &SolutionFixture,
    k: usize,
    opts: &IdentityOptions,
) -> Result<EquivalenceReport> {
    if fix.fields.iter().all(|f| f.values().iter().all(|&v| v == 0.0)) {
        return Err(Error::DegenerateZero);
    }
    require_even(fix, k)?;
    let spec = RieszSpec::new(fix.n(), fix.alpha)?;
    let inner = fix.fields[0].inner_nodes(opts.inner_fraction);
    let mut pairs = Vec::with_capacity(inner.len() * fix.count());
    for i in 0..fix.count() {
        let potential = fix.rhs_field(i)?.riesz(&spec)?;
        let u = fix.fields[i].values();
        pairs.extend(inner.iter().map(|&node| (u[node], potential.values()[node])));
    }
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let (fitted_c, worst) = minimax_scale(&pairs);
    let residual = worst / scale;
    let radii = match &opts.radii {
        Some(r) => r.clone(),
        None => {
            let reach = laplacian_levels(fix, k - 1)?
                .last()
                .unwrap()
                .iter()
                .map(FieldData::max_radius)
                .fold(f64::INFINITY, f64::min);
            (1..=4).map(|i| 0.9 * reach * i as f64 / 4.0).collect()
        }
    };
    let decay = boundary_decay(fix, k, &radii)?;
    let verdict = if residual > opts.tol_eq {
        Verdict::Failed
    } else if decay.tail_decreasing() {
        Verdict::Equivalent
    } else {
        Verdict::Inconclusive
    };
    Ok(EquivalenceReport {
        fitted_c,
        residual,
        boundary_trace: decay.trace,
        verdict,
        tol_eq: opts.tol_eq,
    })
}

/// `c` minimising `max |a - c b|` over the pairs `(a, b)`, and that maximum.
fn minimax_scale(pairs: &[(f64, f64)]) -> (f64, f64) {
    let cost = |c: f64| pairs.iter().fold(0.0f64, |m, &(a, b)| m.max((a - c * b).abs()));
    let ratios = pairs.iter().filter(|p| p.1 != 0.0).map(|p| p.0 / p.1);
    let (mut lo, mut hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), r| (l.min(r), h.max(r)));
    if !lo.is_finite() {
        return (0.0, cost(0.0));
    }
    // cost is convex in c and the optimum lies between the extreme ratios
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if cost(a) <= cost(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let c = 0.5 * (lo + hi);
    (c, cost(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{CartesianField, Grid};
    use crate::radial::RadialProfile;
    use std::f64::consts::PI;

    fn growth() -> Growth {
        Growth {
            p: 1.0,
            delta: 1.0,
            c_delta: 0.0,
            c: Some(1.0),
        }
    }

    fn radial(n: usize, r_max: f64, points: usize, f: impl Fn(f64) -> f64) -> FieldData {
        FieldData::Radial(RadialProfile::from_fn(n, r_max, points, f).unwrap())
    }

    #[test]
    fn superpoly_bubble_and_control() {
        let fix = bubble_radial(6, 4.0, 20.0, 801).unwrap();
        let rep = superpoly_verify(&fix, 2).unwrap();
        assert!(rep.positive);
        assert!(rep.levels[0].min_margin > 0.0);
        let control = SolutionFixture::new(
            vec![radial(6, 5.0, 101, |r| 1.0 + r * r)],
            vec![Expr::field(0)],
            4.0,
            FixtureKind::Synthetic,
            growth(),
        )
        .unwrap();
        let rep = superpoly_verify(&control, 2).unwrap();
        assert!(!rep.positive);
        let l = rep.first_violation().unwrap();
        assert_eq!((l.j, l.failing), (1, l.nodes));
        assert!((l.min_margin + 12.0).abs() < 1e-9);
    }

    #[test]
    fn superpoly_first_order_is_vacuous() {
        let fix = bubble_cartesian(3, 2.0, 2.0, 9).unwrap();
        let rep = superpoly_verify(&fix, 1).unwrap();
        assert!(rep.positive && rep.levels.is_empty());
        assert!(matches!(superpoly_verify(&fix, 2), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn minimax_fit() {
        let (c, worst) = minimax_scale(&[(1.0, 1.0), (2.2, 2.0), (2.9, 3.0)]);
        // optimum balances the two extreme deviations
        assert!((c - 1.02).abs() < 1e-12, "{c}");
        assert!((worst - 0.16).abs() < 1e-12, "{worst}");
    }

    #[test]
    fn boundary_decay_of_fundamental_solution() {
        let n = 5;
        let w = |r: f64| r.powf(2.0 - n as f64);
        let fix = SolutionFixture::new(
            vec![radial(n, 10.0, 2001, |r| w(r.max(1.0)))],
            vec![Expr::field(0)],
            2.0,
            FixtureKind::Synthetic,
            growth(),
        )
        .unwrap();
        let rep = boundary_decay(&fix, 1, &[2.0, 4.0, 6.0, 8.0]).unwrap();
        for &(r, v) in &rep.trace {
            let exact = unit_sphere_area(n) * w(r);
            assert!((v - exact).abs() < 1e-6 * exact);
        }
        assert!(rep.strictly_decreasing());
        assert_eq!(rep.certified.len(), 4);
        assert!(rep.jensen.iter().all(|j| j.split_holds));
    }

    #[test]
    fn boundary_decay_certifies_the_decreasing_tail() {
        let fix = SolutionFixture::new(
            vec![radial(3, 10.0, 201, |r| if r < 3.0 { r } else { 6.0 / r })],
            vec![Expr::field(0)],
            2.0,
            FixtureKind::Synthetic,
            growth(),
        )
        .unwrap();
        let rep = boundary_decay(&fix, 1, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        let radii: Vec<f64> = rep.certified.iter().map(|c| c.0).collect();
        assert_eq!(radii, vec![2.0, 4.0, 8.0]);
        assert!(!rep.strictly_decreasing() && rep.tail_decreasing());
        assert!(matches!(
            boundary_decay(&fix, 1, &[11.0]),
            Err(Error::SphereEscapesBox { .. })
        ));
    }

    #[test]
    fn zero_fixture_is_degenerate() {
        let grid = Grid::new(3, 2.0, 9).unwrap();
        let fix = SolutionFixture::new(
            vec![FieldData::Cartesian(CartesianField::zeros(grid))],
            vec![Expr::field(0).pow(5.0)],
            2.0,
            FixtureKind::Synthetic,
            growth(),
        )
        .unwrap();
        assert!(matches!(verify_integral_identity(&fix, 1), Err(Error::DegenerateZero)));
    }

    #[test]
    fn newtonian_identity_on_a_cartesian_bubble() {
        let fix = bubble_cartesian(3, 2.0, 8.0, 41).unwrap();
        let rep = verify_integral_identity(&fix, 1).unwrap();
        assert_eq!(rep.verdict, Verdict::Equivalent, "{rep:?}");
        assert!(rep.residual < 0.02);
        assert!((rep.fitted_c * 4.0 * PI - 1.0).abs() < 0.03, "{}", rep.fitted_c);
    }

    #[test]
    fn finiteness_requires_positivity() {
        let fix = bubble_radial(6, 4.0, 40.0, 801).unwrap();
        let bad = SuperpolyReport {
            k: 2,
            tol_pos: 0.0,
            levels: vec![],
            positive: false,
        };
        assert!(matches!(finiteness_estimates(&fix, 2, &bad), Err(Error::PositivityMissing)));
        let sp = superpoly_verify(&fix, 2).unwrap();
        let rep = finiteness_estimates(&fix, 2, &sp).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(rep.stable, "{rep:?}");
        // the bubble saturates the bound up to truncation
        assert!(rep.slack.abs() < 1e-4, "{}", rep.slack);
    }

    #[test]
    fn identity_gap_shrinks() {
        let fix = bubble_radial(5, 2.0, 20.0, 801).unwrap();
        let gaps = boundary_identity(&fix, 1, &[1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!(gaps.windows(2).all(|w| w[1].gap.abs() < w[0].gap.abs()), "{gaps:?}");
        assert!(gaps.iter().all(|g| g.gap > 0.0));
    }
}
