use super::expr::Expr;
use crate::error::{Error, Result};
use crate::field::{CartesianField, Grid};
use crate::kernels::{riesz_potential, riesz_potential_at, riesz_potential_radial, RieszSpec};
use crate::quad::cumulative_weighted;
use crate::radial::{radial_laplacian, RadialProfile};
use crate::sphere::{unit_sphere_area, SphereRule};

/// One sampled component: either on a Cartesian box or as a radial profile
/// (for dimensions where a full grid is out of reach).
#[derive(Debug, Clone, PartialEq)]
pub enum FieldData {
    Cartesian(CartesianField),
    Radial(RadialProfile),
}

impl FieldData {
    pub fn dim(&self) -> usize {
        match self {
            FieldData::Cartesian(f) => f.dim(),
            FieldData::Radial(p) => p.dim(),
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            FieldData::Cartesian(f) => f.values(),
            FieldData::Radial(p) => p.values(),
        }
    }

    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Ok(match self {
            FieldData::Cartesian(f) => FieldData::Cartesian(f.with_values(values)?),
            FieldData::Radial(p) => FieldData::Radial(p.with_values(values)?),
        })
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        match (self, other) {
            (FieldData::Cartesian(a), FieldData::Cartesian(b)) => a.grid() == b.grid(),
            (FieldData::Radial(a), FieldData::Radial(b)) => a.dim() == b.dim() && a.radii() == b.radii(),
            _ => false,
        }
    }

    pub fn neg_laplacian(&self) -> Result<Self> {
        Ok(match self {
            FieldData::Cartesian(f) => FieldData::Cartesian(f.neg_laplacian()?),
            FieldData::Radial(p) => FieldData::Radial(radial_laplacian(p)?),
        })
    }

    /// Largest radius about the origin covered by the samples.
    pub fn max_radius(&self) -> f64 {
        match self {
            FieldData::Cartesian(f) => f.grid().half_width(),
            FieldData::Radial(p) => p.r_max(),
        }
    }

    /// Node indices within `fraction` of the extent (a sub-box, or a ball
    /// for profiles).
    pub fn inner_nodes(&self, fraction: f64) -> Vec<usize> {
        match self {
            FieldData::Cartesian(f) => f.inner_nodes(fraction),
            FieldData::Radial(p) => {
                let limit = fraction * p.r_max() * (1.0 + 1e-12);
                (0..p.len()).filter(|&i| p.radii()[i] <= limit).collect()
            }
        }
    }

    pub fn value_at_origin(&self) -> Result<f64> {
        match self {
            FieldData::Cartesian(f) => f
                .value_at_origin()
                .ok_or_else(|| Error::InvalidGrid("grid has no node at the origin".into())),
            FieldData::Radial(p) => Ok(p.values()[0]),
        }
    }

    pub fn riesz(&self, spec: &RieszSpec) -> Result<Self> {
        Ok(match self {
            FieldData::Cartesian(f) => FieldData::Cartesian(riesz_potential(f, spec)?.field),
            FieldData::Radial(p) => FieldData::Radial(riesz_potential_radial(p, spec)?),
        })
    }

    /// `∫ g(x) |x|^{-s} dx` over the sampled region, `0 < s < n`.
    pub fn weighted_integral(&self, s: f64) -> Result<f64> {
        match self {
            FieldData::Cartesian(f) => {
                let spec = RieszSpec::new(f.dim(), f.dim() as f64 - s)?;
                let origin = f
                    .grid()
                    .origin_index()
                    .ok_or_else(|| Error::InvalidGrid("grid has no node at the origin".into()))?;
                riesz_potential_at(f, &spec, origin)
            }
            FieldData::Radial(p) => {
                let n = p.dim() as f64;
                let integrand: Vec<f64> = p
                    .radii()
                    .iter()
                    .zip(p.values())
                    .map(|(r, v)| if *r == 0.0 { 0.0 } else { v * r.powf(n - 1.0 - s) })
                    .collect();
                let cum = cumulative_weighted(p.radii(), &integrand, |_| 1.0);
                Ok(unit_sphere_area(p.dim()) * cum[cum.len() - 1])
            }
        }
    }

    /// The same field on roughly half the extent.
    pub fn halved(&self) -> Result<Self> {
        Ok(match self {
            FieldData::Cartesian(f) => {
                let m = f.grid().points();
                FieldData::Cartesian(f.restrict((m - 1) / 4)?)
            }
            FieldData::Radial(p) => FieldData::Radial(p.truncate(p.len().div_ceil(2))?),
        })
    }
}

/// Evaluates quantities built from several components at points of a sphere
/// about the origin.
pub(crate) struct SphereProbe<'a> {
    fields: &'a [FieldData],
    rule: Option<SphereRule>,
}

impl<'a> SphereProbe<'a> {
    pub(crate) fn new(fields: &'a [FieldData]) -> Result<Self> {
        let rule = match fields.first() {
            Some(FieldData::Cartesian(f)) => Some(SphereRule::default_for(f.dim())?),
            _ => None,
        };
        Ok(Self { fields, rule })
    }

    pub(crate) fn max_radius(&self) -> f64 {
        self.fields
            .iter()
            .map(FieldData::max_radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// Quadrature nodes on the sphere as `(weight, component values)`.
    pub(crate) fn samples(&self, radius: f64) -> Result<Vec<(f64, Vec<f64>)>> {
        let max_radius = self.max_radius();
        if radius > max_radius * (1.0 + 1e-12) {
            return Err(Error::SphereEscapesBox { radius, max_radius });
        }
        match &self.rule {
            None => {
                let vals = self
                    .fields
                    .iter()
                    .map(|f| match f {
                        FieldData::Radial(p) => p.interpolate(radius),
                        FieldData::Cartesian(_) => unreachable!(),
                    })
                    .collect();
                Ok(vec![(1.0, vals)])
            }
            Some(rule) => {
                let dim = rule.dim();
                let mut x = vec![0.0; dim];
                (0..rule.len())
                    .map(|q| {
                        let node = rule.node(q);
                        for d in 0..dim {
                            x[d] = radius * node[d];
                        }
                        let vals = self
                            .fields
                            .iter()
                            .map(|f| match f {
                                FieldData::Cartesian(c) => c.interpolate(&x).ok_or(Error::SphereEscapesBox {
                                    radius,
                                    max_radius,
                                }),
                                FieldData::Radial(_) => unreachable!(),
                            })
                            .collect::<Result<Vec<_>>>()?;
                        Ok((rule.weights()[q], vals))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    ExplicitBubble,
    Synthetic,
    External,
}

impl FixtureKind {
    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::ExplicitBubble => "bubble",
            FixtureKind::Synthetic => "synthetic",
            FixtureKind::External => "external",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "bubble" => Ok(FixtureKind::ExplicitBubble),
            "synthetic" => Ok(FixtureKind::Synthetic),
            "external" => Ok(FixtureKind::External),
            _ => Err(Error::Parse(format!("unknown fixture kind `{s}`"))),
        }
    }
}

/// Growth data `Σ f_i(u) >= c_delta w^p` for `w >= delta`. `c` is carried
/// along for completeness and not used by any check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub p: f64,
    pub delta: f64,
    pub c_delta: f64,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFixture {
    pub fields: Vec<FieldData>,
    pub rhs: Vec<Expr>,
    pub alpha: f64,
    pub kind: FixtureKind,
    pub growth: Growth,
}

#[derive(Debug, Clone, Copy)]
pub struct HypothesisReport {
    pub positive: bool,
    pub rhs_nonnegative: bool,
    /// Growth bound checked at every node with `w >= delta`.
    pub growth_holds: bool,
}

impl SolutionFixture {
    pub fn new(
        fields: Vec<FieldData>,
        rhs: Vec<Expr>,
        alpha: f64,
        kind: FixtureKind,
        growth: Growth,
    ) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::InvalidParams("a fixture needs at least one field".into()))?;
        if fields.iter().any(|f| !f.same_layout(first)) {
            return Err(Error::GridMismatch("fixture fields must share one grid".into()));
        }
        if rhs.len() != fields.len() {
            return Err(Error::InvalidParams(format!(
                "{} fields but {} right-hand sides",
                fields.len(),
                rhs.len()
            )));
        }
        if let Some(e) = rhs.iter().find(|e| e.fields_used() > fields.len() || e.coords_used() > 0) {
            return Err(Error::InvalidParams(format!("right-hand side `{e}` refers to unknown variables")));
        }
        let n = first.dim() as f64;
        if !(alpha > 0.0 && alpha < n) {
            return Err(Error::InvalidParams(format!("order alpha={alpha} must lie in (0, {n})")));
        }
        Ok(Self {
            fields,
            rhs,
            alpha,
            kind,
            growth,
        })
    }

    pub fn n(&self) -> usize {
        self.fields[0].dim()
    }

    pub fn count(&self) -> usize {
        self.fields.len()
    }

    /// `k` with `α = 2k`, if the order is even.
    pub fn even_order(&self) -> Option<usize> {
        let half = self.alpha / 2.0;
        (half.fract() == 0.0 && half >= 1.0).then_some(half as usize)
    }

    /// `f_i(u)` node-wise.
    pub fn rhs_field(&self, i: usize) -> Result<FieldData> {
        let len = self.fields[0].values().len();
        let mut u = vec![0.0; self.count()];
        let values = (0..len)
            .map(|node| {
                for (slot, f) in u.iter_mut().zip(&self.fields) {
                    *slot = f.values()[node];
                }
                self.rhs[i].eval(&u, &[])
            })
            .collect();
        self.fields[0].with_values(values)
    }

    /// `F(u) = Σ f_i(u)`.
    pub fn total_rhs(&self) -> Result<FieldData> {
        let mut acc = vec![0.0; self.fields[0].values().len()];
        for i in 0..self.count() {
            for (a, v) in acc.iter_mut().zip(self.rhs_field(i)?.values()) {
                *a += v;
            }
        }
        self.fields[0].with_values(acc)
    }

    /// `w = Σ u_i`.
    pub fn w(&self) -> Result<FieldData> {
        let mut acc = vec![0.0; self.fields[0].values().len()];
        for f in &self.fields {
            for (a, v) in acc.iter_mut().zip(f.values()) {
                *a += v;
            }
        }
        self.fields[0].with_values(acc)
    }

    pub fn check_hypotheses(&self) -> Result<HypothesisReport> {
        let positive = self.fields.iter().all(|f| f.values().iter().all(|&v| v > 0.0));
        let rhs = (0..self.count())
            .map(|i| self.rhs_field(i))
            .collect::<Result<Vec<_>>>()?;
        let rhs_nonnegative = rhs.iter().all(|f| f.values().iter().all(|&v| v >= 0.0));
        let w = self.w()?;
        let total = self.total_rhs()?;
        let g = self.growth;
        let growth_holds = w
            .values()
            .iter()
            .zip(total.values())
            .filter(|(w, _)| **w >= g.delta)
            .all(|(w, f)| *f >= g.c_delta * w.powf(g.p) * (1.0 - 1e-12));
        Ok(HypothesisReport {
            positive,
            rhs_nonnegative,
            growth_holds,
        })
    }
}

/// `c₀` making `c₀(1+|x|²)^{-(n-α)/2}` solve `(-Δ)^{α/2} u = u^p`,
/// `p = (n+α)/(n-α)`.
pub fn bubble_constant(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return Err(Error::InvalidParams(format!("bubble needs 0 < alpha < n, got alpha={alpha}, n={n}")));
    }
    let p = critical_exponent(n, alpha);
    let lhs = 2f64.powf(alpha) * libm::tgamma((nf + alpha) / 2.0) / libm::tgamma((nf - alpha) / 2.0);
    Ok(lhs.powf(1.0 / (p - 1.0)))
}

pub fn critical_exponent(n: usize, alpha: f64) -> f64 {
    (n as f64 + alpha) / (n as f64 - alpha)
}

fn bubble_growth(n: usize, alpha: f64, min: f64) -> Growth {
    Growth {
        p: critical_exponent(n, alpha),
        delta: min,
        c_delta: 1.0,
        c: None,
    }
}

/// The bubble on a Cartesian box `[-L, L]^n` with `m` points per axis.
pub fn bubble_cartesian(n: usize, alpha: f64, half_width: f64, points: usize) -> Result<SolutionFixture> {
    let c0 = bubble_constant(n, alpha)?;
    let e = -(n as f64 - alpha) / 2.0;
    let grid = Grid::new(n, half_width, points)?;
    let u = CartesianField::from_fn(grid, |x| c0 * (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powf(e))?;
    let min = u.min();
    SolutionFixture::new(
        vec![FieldData::Cartesian(u)],
        vec![Expr::field(0).pow(critical_exponent(n, alpha))],
        alpha,
        FixtureKind::ExplicitBubble,
        bubble_growth(n, alpha, min),
    )
}

/// The bubble as a radial profile on `[0, r_max]`.
pub fn bubble_radial(n: usize, alpha: f64, r_max: f64, points: usize) -> Result<SolutionFixture> {
    let c0 = bubble_constant(n, alpha)?;
    let e = -(n as f64 - alpha) / 2.0;
    let u = RadialProfile::from_fn(n, r_max, points, |r| c0 * (1.0 + r * r).powf(e))?;
    let min = u.values().iter().cloned().fold(f64::INFINITY, f64::min);
    SolutionFixture::new(
        vec![FieldData::Radial(u)],
        vec![Expr::field(0).pow(critical_exponent(n, alpha))],
        alpha,
        FixtureKind::ExplicitBubble,
        bubble_growth(n, alpha, min),
    )
}

/// Fields given as closed-form expressions in `x1..xn` and `r`.
pub fn synthetic_cartesian(
    grid: Grid,
    fields: &[Expr],
    rhs: Vec<Expr>,
    alpha: f64,
    growth: Growth,
) -> Result<SolutionFixture> {
    let data = fields
        .iter()
        .map(|e| {
            check_coordinates(e, grid.dim())?;
            Ok(FieldData::Cartesian(CartesianField::from_fn(grid, |x| e.eval(&[], x))?))
        })
        .collect::<Result<Vec<_>>>()?;
    SolutionFixture::new(data, rhs, alpha, FixtureKind::Synthetic, growth)
}

/// Radial synthetic fields; expressions may use `r` only.
pub fn synthetic_radial(
    n: usize,
    r_max: f64,
    points: usize,
    fields: &[Expr],
    rhs: Vec<Expr>,
    alpha: f64,
    growth: Growth,
) -> Result<SolutionFixture> {
    let data = fields
        .iter()
        .map(|e| {
            if e.fields_used() > 0 || contains_coordinate(e) {
                return Err(Error::InvalidParams(format!("radial field `{e}` may only depend on r")));
            }
            Ok(FieldData::Radial(RadialProfile::from_fn(n, r_max, points, |r| {
                e.eval(&[], &[r])
            })?))
        })
        .collect::<Result<Vec<_>>>()?;
    SolutionFixture::new(data, rhs, alpha, FixtureKind::Synthetic, growth)
}

fn contains_coordinate(e: &Expr) -> bool {
    match e {
        Expr::Coord(_) => true,
        Expr::Add(a, b) | Expr::Mul(a, b) => contains_coordinate(a) || contains_coordinate(b),
        Expr::Pow(a, _) => contains_coordinate(a),
        _ => false,
    }
}

fn check_coordinates(e: &Expr, dim: usize) -> Result<()> {
    if e.fields_used() > 0 {
        return Err(Error::InvalidParams(format!("field expression `{e}` may not refer to u")));
    }
    if e.coords_used() > dim {
        return Err(Error::InvalidParams(format!("field expression `{e}` exceeds dimension {dim}")));
    }
    Ok(())
}
