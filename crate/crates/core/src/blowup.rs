//! The blow-up iteration behind the positivity argument for
//! `(-Δ)^p u >= u^q`, its two-equation analogue, and the ε-combined system.
//!
//! A lower bound `u(r) >= a r^σ` on `[0, 1]` is fed through the equations
//! to produce a new bound with coefficient `a'` and exponent `σ'`. The
//! coefficients overflow any float type within a few steps, so states are
//! held as `(log a, log σ)`.

use crate::error::{Error, Result};
use crate::field::CartesianField;
use crate::radial::{solve_radial_poisson, RadialProfile};
use std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// `(-Δ)^order u >= u^q`.
    Single { order: usize, q: f64 },
    /// `(-Δ)^t u >= v^q`, `(-Δ)^s v >= u^p`.
    TwoSystem { t: usize, s: usize, p: f64, q: f64 },
    /// `(-Δ)^order w >= ε C_δ w^p` for `w = u_1 + ε(u_2 + ...)`.
    EpsCombined {
        order: usize,
        p: f64,
        epsilon: f64,
        c_delta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupParams {
    scenario: Scenario,
    n: usize,
    m: f64,
    l: f64,
}

impl BlowupParams {
    pub fn single(order: usize, q: f64, n: usize) -> Result<Self> {
        check_power("q", q)?;
        check_order(order)?;
        let m = (2 * order + n) as f64;
        Self::with_default_l(Scenario::Single { order, q }, n, m)
    }

    pub fn two_system(t: usize, s: usize, p: f64, q: f64, n: usize) -> Result<Self> {
        check_power("p", p)?;
        check_power("q", q)?;
        check_order(t)?;
        check_order(s)?;
        let m = (n + 2 * t.max(s)) as f64;
        Self::with_default_l(Scenario::TwoSystem { t, s, p, q }, n, m)
    }

    pub fn eps_combined(order: usize, p: f64, n: usize, epsilon: f64, c_delta: f64) -> Result<Self> {
        check_power("p", p)?;
        check_order(order)?;
        if !(epsilon > 0.0 && c_delta > 0.0) {
            return Err(Error::InvalidParams(format!(
                "epsilon and C_delta must be positive, got {epsilon} and {c_delta}"
            )));
        }
        let m = (2 * order + n) as f64;
        Self::with_default_l(
            Scenario::EpsCombined {
                order,
                p,
                epsilon,
                c_delta,
            },
            n,
            m,
        )
    }

    fn with_default_l(scenario: Scenario, n: usize, m: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("dimension must be positive".into()));
        }
        let mut params = Self {
            scenario,
            n,
            m,
            l: 1.0,
        };
        while params.check_l().is_err() {
            params.l += 1.0;
        }
        Ok(params)
    }

    /// Replaces the induction exponent, rejecting values that break the
    /// induction step.
    pub fn with_l(mut self, l: f64) -> Result<Self> {
        self.l = l;
        self.check_l()?;
        Ok(self)
    }

    fn check_l(&self) -> Result<()> {
        let l = self.l;
        let ok = match self.scenario {
            Scenario::TwoSystem { p, .. } => l * (self.h() - 1.0) - self.m * (p + 1.0) >= 1.0,
            _ => l * (self.growth_power() - 1.0) > 2.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "induction exponent l = {l} too small for this scenario"
            )))
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Product power `pq` of the two-equation system (1 otherwise).
    pub fn h(&self) -> f64 {
        match self.scenario {
            Scenario::TwoSystem { p, q, .. } => p * q,
            _ => 1.0,
        }
    }

    /// Power applied to `a` by one step.
    pub fn growth_power(&self) -> f64 {
        match self.scenario {
            Scenario::Single { q, .. } => q,
            Scenario::TwoSystem { .. } => self.h(),
            Scenario::EpsCombined { p, .. } => p,
        }
    }

    /// Power entering the precondition `σ * power >= m`.
    fn first_power(&self) -> f64 {
        match self.scenario {
            Scenario::Single { q, .. } | Scenario::TwoSystem { q, .. } => q,
            Scenario::EpsCombined { p, .. } => p,
        }
    }

    /// `σ_{k+1} / σ_k`.
    pub fn sigma_factor(&self) -> f64 {
        match self.scenario {
            Scenario::TwoSystem { .. } => 4.0 * self.h(),
            _ => 2.0 * self.growth_power(),
        }
    }

    /// `log c` with `c = 2^{m(p+2)} q^{m(p+1)} p^m` for the system, 0 otherwise.
    pub fn log_c(&self) -> f64 {
        match self.scenario {
            Scenario::TwoSystem { p, q, .. } => {
                let m = self.m;
                m * (p + 2.0) * LN_2 + m * (p + 1.0) * q.ln() + m * p.ln()
            }
            _ => 0.0,
        }
    }

    /// `log(ε C_δ)` for the combined system, 0 otherwise.
    pub fn log_kappa(&self) -> f64 {
        match self.scenario {
            Scenario::EpsCombined {
                epsilon, c_delta, ..
            } => (epsilon * c_delta).ln(),
            _ => 0.0,
        }
    }

    /// Smallest `log σ_0` satisfying `σ_0 >= 1`, the step precondition and
    /// the step-ratio bound.
    pub fn min_log_sigma0(&self) -> f64 {
        let l = self.l;
        let m = self.m;
        let ratio = match self.scenario {
            Scenario::TwoSystem { p, .. } => {
                let h = self.h();
                (self.log_c() + (m * (p + 1.0) + l) * (4.0 * h).ln())
                    / (l * (h - 1.0) - m * (p + 1.0))
            }
            _ => {
                let q = self.growth_power();
                (l + q + 1.0) * LN_2 + (2.0 * (l + 1.0) + q) * q.ln()
            }
        };
        ratio.max((m / self.first_power()).ln()).max(0.0)
    }

    /// Rescaling weight `2 order / (power - 1)` of the single inequality.
    pub fn single_weight(&self) -> Option<f64> {
        match self.scenario {
            Scenario::Single { order, q } => Some(2.0 * order as f64 / (q - 1.0)),
            Scenario::EpsCombined { order, p, .. } => Some(2.0 * order as f64 / (p - 1.0)),
            Scenario::TwoSystem { .. } => None,
        }
    }
}

fn check_power(name: &str, v: f64) -> Result<()> {
    if v > 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("power {name} must exceed 1, got {v}")))
    }
}

fn check_order(order: usize) -> Result<()> {
    if order == 0 {
        Err(Error::InvalidParams("orders must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// One bound `a r^σ`, stored by logarithms. `log_a = -inf` encodes `a = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupState {
    pub k: usize,
    pub log_a: f64,
    pub log_sigma: f64,
}

impl BlowupState {
    pub fn new(k: usize, a: f64, sigma: f64) -> Self {
        Self {
            k,
            log_a: a.ln(),
            log_sigma: sigma.ln(),
        }
    }

    pub fn a(&self) -> f64 {
        self.log_a.exp()
    }

    pub fn sigma(&self) -> f64 {
        self.log_sigma.exp()
    }
}

/// `a' = a^q / (2σq)^m`, `σ' = 2σq`, with no precondition check.
pub fn single_recurrence(state: BlowupState, q: f64, m: f64) -> BlowupState {
    let log_next_sigma = LN_2 + state.log_sigma + q.ln();
    BlowupState {
        k: state.k + 1,
        log_a: q * state.log_a - m * log_next_sigma,
        log_sigma: log_next_sigma,
    }
}

/// `a' = a^{pq} / (c σ^{m(p+1)})`, `σ' = 4σpq`, with no precondition check.
pub fn system_recurrence(state: BlowupState, p: f64, q: f64, m: f64) -> BlowupState {
    let h = p * q;
    let log_c = m * (p + 2.0) * LN_2 + m * (p + 1.0) * q.ln() + m * p.ln();
    BlowupState {
        k: state.k + 1,
        log_a: h * state.log_a - log_c - m * (p + 1.0) * state.log_sigma,
        log_sigma: (4.0 * h).ln() + state.log_sigma,
    }
}

fn check_step(state: &BlowupState, params: &BlowupParams) -> Result<()> {
    let lhs = state.log_sigma + params.first_power().ln();
    if lhs < params.m.ln() - 1e-12 {
        return Err(Error::PreconditionViolated(format!(
            "sigma * power = {:.6e} is below m = {}",
            lhs.exp(),
            params.m
        )));
    }
    if state.log_a.is_nan() {
        return Err(Error::PreconditionViolated("coefficient is not a number".into()));
    }
    Ok(())
}

/// Growth step of the single inequality or the ε-combined system.
pub fn grow_step_single(state: BlowupState, params: &BlowupParams) -> Result<BlowupState> {
    if let Scenario::TwoSystem { .. } = params.scenario {
        return Err(Error::InvalidParams(
            "two-equation scenarios step with grow_step_system".into(),
        ));
    }
    check_step(&state, params)?;
    let mut next = single_recurrence(state, params.growth_power(), params.m);
    next.log_a += params.log_kappa();
    Ok(next)
}

pub fn grow_step_system(state: BlowupState, params: &BlowupParams) -> Result<BlowupState> {
    match params.scenario {
        Scenario::TwoSystem { p, q, .. } => {
            check_step(&state, params)?;
            Ok(system_recurrence(state, p, q, params.m))
        }
        _ => Err(Error::InvalidParams(
            "single scenarios step with grow_step_single".into(),
        )),
    }
}

pub fn grow_step(state: BlowupState, params: &BlowupParams) -> Result<BlowupState> {
    match params.scenario {
        Scenario::TwoSystem { .. } => grow_step_system(state, params),
        _ => grow_step_single(state, params),
    }
}

/// Log-space margin of the induction hypothesis; nonnegative when it holds.
///
/// Single: `q log a - m(l+1) log(σq)`. System: `h log a - log c - (m(p+1)+l) log σ`.
/// The combined system applies the single form to `κ^{1/(p-1)} a`.
pub fn predicate_margin(state: &BlowupState, params: &BlowupParams) -> f64 {
    let (m, l) = (params.m, params.l);
    match params.scenario {
        Scenario::TwoSystem { p, .. } => {
            params.h() * state.log_a - params.log_c() - (m * (p + 1.0) + l) * state.log_sigma
        }
        _ => {
            let q = params.growth_power();
            let log_a = state.log_a + params.log_kappa() / (q - 1.0);
            q * log_a - m * (l + 1.0) * (state.log_sigma + q.ln())
        }
    }
}

pub fn induction_predicate(state: &BlowupState, params: &BlowupParams) -> bool {
    let margin = predicate_margin(state, params);
    let scale = params.growth_power() * state.log_a.abs() + params.m * state.log_sigma.abs() + 1.0;
    margin >= -1e-12 * scale
}

/// Logarithm of the factor guaranteeing the induction step from `k` to
/// `k+1`; the step is certified when it is nonnegative.
pub fn step_ratio_log(state: &BlowupState, params: &BlowupParams) -> f64 {
    let (m, l) = (params.m, params.l);
    match params.scenario {
        Scenario::TwoSystem { p, .. } => {
            let h = params.h();
            (l * (h - 1.0) - m * (p + 1.0)) * state.log_sigma
                - params.log_c()
                - (m * (p + 1.0) + l) * (4.0 * h).ln()
        }
        _ => {
            let q = params.growth_power();
            m * (state.log_sigma - (l + q + 1.0) * LN_2 - (2.0 * (l + 1.0) + q) * q.ln())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub log_a0: f64,
    pub log_sigma0: f64,
}

impl Seed {
    pub fn new(a0: f64, sigma0: f64) -> Self {
        Self {
            log_a0: a0.ln(),
            log_sigma0: sigma0.ln(),
        }
    }

    /// Seed on the induction floor, where the predicate holds with equality.
    pub fn at_floor(params: &BlowupParams, log_sigma0: f64) -> Self {
        let probe = BlowupState {
            k: 0,
            log_a: 0.0,
            log_sigma: log_sigma0,
        };
        let deficit = predicate_margin(&probe, params);
        Self {
            log_a0: -deficit / params.growth_power(),
            log_sigma0,
        }
    }

    /// Seed obtained by rescaling a solution bounded below by `c0` on the
    /// unit ball: `u_λ >= λ^weight c0 >= λ^weight c0 r^σ0` for `r <= 1`.
    pub fn from_rescaling(c0: f64, lambda: f64, weight: f64, sigma0: f64) -> Self {
        Self {
            log_a0: c0.ln() + weight * lambda.ln(),
            log_sigma0: sigma0.ln(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Threshold on `log a_k` for the divergence verdict.
    pub log_bound: f64,
    /// Number of trailing steps over which `log a_k` must increase.
    pub monotone_window: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            log_bound: 700.0,
            monotone_window: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlowupVerdict {
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub state: BlowupState,
    pub predicate: bool,
    pub step_ratio_log: f64,
}

#[derive(Debug, Clone)]
pub struct BlowupTrace {
    pub rows: Vec<TraceRow>,
    pub verdict: BlowupVerdict,
}

impl BlowupTrace {
    pub fn predicate_always(&self) -> bool {
        self.rows.iter().all(|r| r.predicate)
    }

    pub fn ratio_bound_always(&self) -> bool {
        self.rows.iter().all(|r| r.step_ratio_log >= 0.0)
    }

    pub fn last(&self) -> &BlowupState {
        &self.rows[self.rows.len() - 1].state
    }
}

pub fn run_blowup(
    params: &BlowupParams,
    seed: Seed,
    k_max: usize,
    opts: &RunOptions,
) -> Result<BlowupTrace> {
    let mut state = BlowupState {
        k: 0,
        log_a: seed.log_a0,
        log_sigma: seed.log_sigma0,
    };
    if !(seed.log_sigma0 >= 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "sigma_0 = {:.6e} must be at least 1",
            seed.log_sigma0.exp()
        )));
    }
    check_step(&state, params)?;
    if !induction_predicate(&state, params) {
        return Err(Error::PreconditionViolated(format!(
            "induction predicate fails at k = 0 (log margin {:.6e})",
            predicate_margin(&state, params)
        )));
    }
    let row = |s: BlowupState| TraceRow {
        state: s,
        predicate: induction_predicate(&s, params),
        step_ratio_log: step_ratio_log(&s, params),
    };
    let mut rows = vec![row(state)];
    for _ in 0..k_max {
        state = grow_step(state, params)?;
        rows.push(row(state));
    }
    let w = opts.monotone_window;
    let verdict = if rows.len() > w
        && state.log_a > opts.log_bound
        && rows[rows.len() - 1 - w..]
            .windows(2)
            .all(|p| p[1].state.log_a > p[0].state.log_a)
    {
        BlowupVerdict::Diverges
    } else {
        BlowupVerdict::Inconclusive
    };
    Ok(BlowupTrace { rows, verdict })
}

/// `(α, β) = (2(t+sq), 2(s+tp)) / (pq-1)`.
pub fn scaling_exponents(t: usize, s: usize, p: f64, q: f64) -> Result<(f64, f64)> {
    let d = p * q - 1.0;
    if d.abs() < 1e-14 {
        return Err(Error::DegenerateScaling);
    }
    let (t, s) = (t as f64, s as f64);
    Ok((2.0 * (t + s * q) / d, 2.0 * (s + t * p) / d))
}

/// `u_λ(x) = λ^weight u(λx)`.
///
/// Implemented by shrinking the grid by `1/λ` and scaling the samples, so
/// node values are exact and compositions multiply the factors.
pub trait Rescale: Sized {
    fn rescale(&self, lambda: f64, weight: f64) -> Result<Self>;
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("lambda must be positive, got {lambda}")))
    }
}

impl Rescale for CartesianField {
    fn rescale(&self, lambda: f64, weight: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let grid = self.grid().scaled(1.0 / lambda)?;
        let factor = lambda.powf(weight);
        CartesianField::new(grid, self.values().iter().map(|v| factor * v).collect())
    }
}

impl Rescale for RadialProfile {
    fn rescale(&self, lambda: f64, weight: f64) -> Result<Self> {
        check_lambda(lambda)?;
        let factor = lambda.powf(weight);
        RadialProfile::new(
            self.dim(),
            self.radii().iter().map(|r| r / lambda).collect(),
            self.values().iter().map(|v| factor * v).collect(),
        )
    }
}

/// `u_λ` resampled onto `target` by multilinear interpolation.
pub fn rescale_onto(
    u: &CartesianField,
    lambda: f64,
    weight: f64,
    target: crate::field::Grid,
) -> Result<CartesianField> {
    check_lambda(lambda)?;
    if lambda * target.half_width() > u.grid().half_width() * (1.0 + 1e-12) {
        return Err(Error::InvalidParams(format!(
            "lambda * {} exceeds the source half-width {}",
            target.half_width(),
            u.grid().half_width()
        )));
    }
    let factor = lambda.powf(weight);
    let mut x = vec![0.0; target.dim()];
    let values = (0..target.len())
        .map(|i| {
            target.position(i, &mut x);
            x.iter_mut().for_each(|c| *c *= lambda);
            u.interpolate(&x).map(|v| factor * v)
        })
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| Error::InvalidParams("rescaled node left the source box".into()))?;
    CartesianField::new(target, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recenter {
    Found { index: usize, radius: f64 },
    NotFound,
}

/// First grid radius where `v > 0`.
pub fn recenter(v: &RadialProfile) -> Recenter {
    match v.values().iter().position(|&x| x > 0.0) {
        Some(index) => Recenter::Found {
            index,
            radius: v.radii()[index],
        },
        None => Recenter::NotFound,
    }
}

/// `w_ε = u_1 + ε (u_2 + ... + u_m)`.
pub fn eps_combine(fields: &[CartesianField], epsilon: f64) -> Result<CartesianField> {
    let first = fields
        .first()
        .ok_or_else(|| Error::InvalidParams("eps_combine needs at least one field".into()))?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParams(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let mut values = first.values().to_vec();
    for f in &fields[1..] {
        first.check_same_grid(f)?;
        for (w, v) in values.iter_mut().zip(f.values()) {
            *w += epsilon * v;
        }
    }
    for f in fields {
        f.require_positive()?;
    }
    CartesianField::new(*first.grid(), values)
}

/// Radial model of the re-centering argument for `(-Δ)^order u = g`.
#[derive(Debug, Clone)]
pub struct SignChain {
    /// Profiles `v_{order-1}, v_{order-2}, ..., v_0 = u`, after re-centering.
    pub levels: Vec<RadialProfile>,
    /// Re-centering radius used for each level (none for the top one).
    pub centers: Vec<Option<f64>>,
    /// Every level `i` (counted from the top, starting at 1) has sign `(-1)^i`
    /// at every node.
    pub alternating: bool,
    pub bottom_sign: i32,
    pub bottom_min: f64,
    pub bottom_max: f64,
}

impl SignChain {
    /// True when the bottom profile, which models `u`, is negative somewhere.
    pub fn contradicts_positive_solution(&self) -> bool {
        self.bottom_min < 0.0
    }
}

/// Builds the chain for the case `v_{order-1}(0) = top_value < 0` with a
/// positive source `g`. Each lower level is first solved from a start value
/// of the wrong sign, re-centred at the first radius where it has the sign
/// forced by the level above, and solved again from that value.
pub fn sign_chain(order: usize, g: &RadialProfile, top_value: f64, seed: f64) -> Result<SignChain> {
    check_order(order)?;
    if !(top_value < 0.0) || g.values().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::PreconditionViolated(
            "sign chain needs a positive source and a negative top value".into(),
        ));
    }
    let seed = seed.abs().max(f64::MIN_POSITIVE);
    let top = solve_radial_poisson(g, top_value)?;
    let mut alternating = top.values().iter().all(|&v| v < 0.0);
    let mut levels = vec![top];
    let mut centers = vec![None];
    for i in 2..=order {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let prev = &levels[levels.len() - 1];
        let raw = solve_radial_poisson(prev, -sign * seed)?;
        let found = recenter(&raw.map(|v| sign * v)?);
        let (index, radius) = match found {
            Recenter::Found { index, radius } => (index, radius),
            Recenter::NotFound => {
                return Err(Error::GridTooCoarse(format!(
                    "level {i} keeps its start sign up to r = {}",
                    raw.r_max()
                )))
            }
        };
        let level = solve_radial_poisson(prev, raw.values()[index])?;
        alternating &= level.values().iter().all(|&v| sign * v > 0.0);
        levels.push(level);
        centers.push(Some(radius));
    }
    let bottom = &levels[levels.len() - 1];
    let bottom_min = bottom.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let bottom_max = bottom.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SignChain {
        levels,
        centers,
        alternating,
        bottom_sign: if order % 2 == 0 { 1 } else { -1 },
        bottom_min,
        bottom_max,
    })
}
