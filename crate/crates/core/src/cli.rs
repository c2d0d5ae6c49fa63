//! Batch front end: a TOML run configuration, flag overrides, dispatch to
//! the library and report files. Exit status 0 for a positive verdict, 1 for
//! a negative one and 2 when a precondition or the configuration is violated.

use crate::blowup::{run_blowup, BlowupParams, BlowupTrace, BlowupVerdict, RunOptions, Seed};
use crate::equivalence::{
    boundary_decay, bubble_cartesian, bubble_radial, critical_exponent, default_tol_pos,
    finiteness_estimates, fourier_equivalence_check, superpoly_verify_with, synthetic_cartesian,
    synthetic_radial, verify_integral_identity_with, Expr, FieldData, Growth, IdentityOptions,
    SolutionFixture, Verdict, DEFAULT_TOL_EQ,
};
use crate::error::{Error, Result};
use crate::field::Grid;
use crate::green::{build_cascade, limit_profile, scaling_identity, sign_conditions};
use crate::io::{columns_to_string, read_fixture, write_fixture, write_text, Report};
use crate::kernels::{
    bessel_kernel, riesz_potential, wolff_potential, BesselSpec, RieszSpec, WolffSpec,
};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifySuperpoly,
    VerifyEquivalence,
    SimulateBlowup,
    BuildGreen,
    EvalKernel,
    GenerateFixture,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifySuperpoly => "verify-superpoly",
            Command::VerifyEquivalence => "verify-equivalence",
            Command::SimulateBlowup => "simulate-blowup",
            Command::BuildGreen => "build-green",
            Command::EvalKernel => "eval-kernel",
            Command::GenerateFixture => "generate-fixture",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub n: usize,
    /// `L` for boxes, `r_max` for radial profiles.
    #[serde(alias = "L")]
    pub half_width: f64,
    #[serde(alias = "m")]
    pub points: usize,
}

impl GridParams {
    /// Parses `n,L,m`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::Parse(format!("grid must read n,L,m; got `{s}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(Self {
            n: parts[0].parse().map_err(|_| bad())?,
            half_width: parts[1].parse().map_err(|_| bad())?,
            points: parts[2].parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    #[default]
    Cartesian,
    Radial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenerateKind {
    Bubble,
    Synthetic,
}

/// Where a fixture comes from: a file, or generated from parameters.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureSource {
    pub path: Option<PathBuf>,
    pub kind: Option<GenerateKind>,
    #[serde(default)]
    pub layout: Layout,
    pub alpha: Option<f64>,
    /// Synthetic fields in `x1..xn` and `r`.
    #[serde(default)]
    pub fields: Vec<String>,
    /// Synthetic right-hand sides in `u1..um`.
    #[serde(default)]
    pub rhs: Vec<String>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub c_delta: Option<f64>,
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Single,
    TwoSystem,
    EpsCombined,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n: usize,
    pub order: Option<usize>,
    pub t: Option<usize>,
    pub s: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub epsilon: Option<f64>,
    pub c_delta: Option<f64>,
    pub l: Option<f64>,
    /// Defaults to the smallest admissible value.
    pub sigma0: Option<f64>,
    /// Defaults to the induction floor for `sigma0`.
    pub a0: Option<f64>,
    /// With `c0`, seeds by rescaling: `a0 = c0 λ^weight`.
    pub lambda: Option<f64>,
    pub c0: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_log_bound")]
    pub log_bound: f64,
}

fn default_steps() -> usize {
    20
}

fn default_log_bound() -> f64 {
    700.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenConfig {
    pub n: usize,
    pub k: usize,
    #[serde(default = "one")]
    pub r: f64,
    /// Balls compared against the unit ball by the dilation check.
    #[serde(default = "default_dilations")]
    pub dilations: Vec<f64>,
    /// Ball radii for the limit profile.
    #[serde(default = "default_limit_balls")]
    pub limit_balls: Vec<f64>,
    /// Evaluation radii for the limit profile.
    #[serde(default = "default_limit_radii")]
    pub limit_radii: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

fn default_dilations() -> Vec<f64> {
    vec![2.0, 4.0]
}

fn default_limit_balls() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 8.0]
}

fn default_limit_radii() -> Vec<f64> {
    vec![0.0005, 0.001, 0.002]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Riesz,
    Bessel,
    Wolff,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub kind: KernelKind,
    pub n: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    /// Upper limit of the Wolff t-integral; `inf` allowed.
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub pos: Option<f64>,
    pub eq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub out: Option<PathBuf>,
    pub grid: Option<GridParams>,
    pub fixture: Option<FixtureSource>,
    /// Order `k` of the even case; defaults to `alpha / 2`.
    pub k: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub radii: Option<Vec<f64>>,
    /// Also run the Fourier-side check (Cartesian fixtures only).
    #[serde(default)]
    pub fourier: bool,
    pub scenario: Option<ScenarioConfig>,
    pub green: Option<GreenConfig>,
    pub kernel: Option<KernelConfig>,
}

impl RunConfig {
    pub fn empty(command: Command) -> Self {
        Self {
            command: Some(command),
            out: None,
            grid: None,
            fixture: None,
            k: None,
            tolerances: Tolerances::default(),
            radii: None,
            fourier: false,
            scenario: None,
            green: None,
            kernel: None,
        }
    }

    /// Parses TOML; relative paths are taken relative to `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(p) = cfg.fixture.as_mut().and_then(|f| f.path.as_mut()) {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(o) = cfg.out.as_mut() {
            if o.is_relative() {
                *o = base.join(&*o);
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

/// Builds a fixture from generation parameters.
pub fn generate_fixture(src: &FixtureSource, grid: &GridParams) -> Result<SolutionFixture> {
    let kind = src
        .kind
        .ok_or_else(|| Error::InvalidParams("fixture generation needs `kind`".into()))?;
    let alpha = src
        .alpha
        .ok_or_else(|| Error::InvalidParams("fixture generation needs `alpha`".into()))?;
    if !(grid.half_width > 0.0) || grid.points < 2 || grid.n == 0 {
        return Err(Error::InvalidParams(format!("unusable grid {grid:?}")));
    }
    match kind {
        GenerateKind::Bubble => {
            if !(alpha > 0.0 && alpha < grid.n as f64) {
                return Err(Error::InvalidParams(format!(
                    "bubble needs 0 < alpha < n, got alpha={alpha}, n={}",
                    grid.n
                )));
            }
            match src.layout {
                Layout::Cartesian => bubble_cartesian(grid.n, alpha, grid.half_width, grid.points),
                Layout::Radial => bubble_radial(grid.n, alpha, grid.half_width, grid.points),
            }
        }
        GenerateKind::Synthetic => {
            if src.fields.is_empty() || src.fields.len() != src.rhs.len() {
                return Err(Error::InvalidParams(
                    "synthetic fixtures need matching `fields` and `rhs` lists".into(),
                ));
            }
            let fields = src.fields.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
            let rhs = src.rhs.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
            let growth = Growth {
                p: src.p.unwrap_or(critical_exponent(grid.n, alpha.min(grid.n as f64 - 1e-9))),
                delta: src.delta.unwrap_or(0.0),
                c_delta: src.c_delta.unwrap_or(0.0),
                c: src.c,
            };
            let fix = match src.layout {
                Layout::Cartesian => {
                    let g = Grid::new(grid.n, grid.half_width, grid.points)?;
                    synthetic_cartesian(g, &fields, rhs, alpha, growth)?
                }
                Layout::Radial => synthetic_radial(grid.n, grid.half_width, grid.points, &fields, rhs, alpha, growth)?,
            };
            let h = fix.check_hypotheses()?;
            if !h.positive {
                return Err(Error::InvalidParams("synthetic fields must be positive".into()));
            }
            Ok(fix)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub code: i32,
    pub message: String,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    fn precondition(e: &Error) -> Self {
        Self {
            code: 2,
            message: format!("precondition violated: {e}"),
            files: Vec::new(),
        }
    }
}

/// Runs a configuration; configuration and precondition errors become exit
/// status 2 rather than `Err`.
pub fn run(config: &RunConfig) -> RunOutcome {
    match dispatch(config) {
        Ok(outcome) => outcome,
        Err(e) => RunOutcome::precondition(&e),
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        write_text(&path, text)?;
        self.files.push(path);
        Ok(())
    }

    fn finish(self, code: i32, message: String) -> RunOutcome {
        RunOutcome {
            code,
            message,
            files: self.files,
        }
    }
}

fn dispatch(cfg: &RunConfig) -> Result<RunOutcome> {
    let command = cfg
        .command
        .ok_or_else(|| Error::InvalidParams("no command given".into()))?;
    let out = Output {
        dir: cfg.out.clone().unwrap_or_else(|| PathBuf::from(".")),
        files: Vec::new(),
    };
    if let Some(t) = cfg.tolerances.pos.filter(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParams(format!("tol-pos must be >= 0, got {t}")));
    }
    if let Some(t) = cfg.tolerances.eq.filter(|t| !(*t > 0.0)) {
        return Err(Error::InvalidParams(format!("tol-eq must be > 0, got {t}")));
    }
    match command {
        Command::GenerateFixture => cmd_generate(cfg, out),
        Command::VerifySuperpoly => cmd_superpoly(cfg, out),
        Command::VerifyEquivalence => cmd_equivalence(cfg, out),
        Command::SimulateBlowup => cmd_blowup(cfg, out),
        Command::BuildGreen => cmd_green(cfg, out),
        Command::EvalKernel => cmd_kernel(cfg, out),
    }
}

fn load_fixture(cfg: &RunConfig) -> Result<SolutionFixture> {
    let src = cfg
        .fixture
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("this command needs a [fixture]".into()))?;
    match &src.path {
        Some(path) => {
            if !path.exists() {
                return Err(Error::InvalidParams(format!("fixture file {} does not exist", path.display())));
            }
            read_fixture(path)
        }
        None => {
            let grid = cfg
                .grid
                .ok_or_else(|| Error::InvalidParams("generated fixtures need [grid] or --grid".into()))?;
            generate_fixture(src, &grid)
        }
    }
}

fn fixture_section(report: &mut Report, fix: &SolutionFixture) {
    let layout = match fix.fields[0] {
        FieldData::Cartesian(_) => "cartesian",
        FieldData::Radial(_) => "radial",
    };
    let s = report.section("fixture");
    s.text("kind", fix.kind.name())
        .text("layout", layout)
        .text("fields", fix.count())
        .num("alpha", fix.alpha)
        .num("max_radius", fix.fields[0].max_radius());
    for (i, e) in fix.rhs.iter().enumerate() {
        s.text(format!("rhs{}", i + 1), e);
    }
}

fn order_of(cfg: &RunConfig, fix: &SolutionFixture) -> Result<usize> {
    match cfg.k {
        Some(k) => Ok(k),
        None => fix.even_order().ok_or_else(|| {
            Error::PreconditionViolated(format!("alpha={} is not an even integer", fix.alpha))
        }),
    }
}

fn cmd_generate(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let fix = load_fixture(cfg)?;
    let path = out.dir.join("fixture.dat");
    write_fixture(&path, &fix)?;
    out.files.push(path);
    let mut report = Report::new("report", fix.n(), &[("command", "generate-fixture".into())]);
    fixture_section(&mut report, &fix);
    report.section("growth").num("p", fix.growth.p).num("delta", fix.growth.delta).num("c_delta", fix.growth.c_delta);
    out.write("generate-fixture.report", &report.render())?;
    Ok(out.finish(0, format!("wrote fixture with {} field(s)", fix.count())))
}

fn superpoly_block(
    cfg: &RunConfig,
    fix: &SolutionFixture,
    k: usize,
    report: &mut Report,
) -> Result<(crate::equivalence::SuperpolyReport, Option<String>)> {
    let tol = cfg.tolerances.pos.unwrap_or_else(|| default_tol_pos(fix));
    let rep = superpoly_verify_with(fix, k, tol)?;
    let s = report.section("superpoly");
    s.text("k", k).num("tol_pos", tol).text("positive", rep.positive);
    for l in &rep.levels {
        let key = format!("level{}.u{}", l.j, l.field + 1);
        s.num(format!("{key}.min_margin"), l.min_margin)
            .text(format!("{key}.failing"), l.failing)
            .text(format!("{key}.nodes"), l.nodes);
    }
    let violation = rep.first_violation().map(|l| {
        format!(
            "level {} positivity violated (u{}: {} of {} nodes below -tol_pos, min {:.6e})",
            l.j,
            l.field + 1,
            l.failing,
            l.nodes,
            l.min_margin
        )
    });
    Ok((rep, violation))
}

fn cmd_superpoly(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let fix = load_fixture(cfg)?;
    let k = order_of(cfg, &fix)?;
    let mut report = Report::new("report", fix.n(), &[("command", "verify-superpoly".into())]);
    fixture_section(&mut report, &fix);
    let (_, violation) = superpoly_block(cfg, &fix, k, &mut report)?;
    out.write("verify-superpoly.report", &report.render())?;
    Ok(match violation {
        None => out.finish(0, format!("super-polyharmonic: all levels 1..{} positive", k.saturating_sub(1))),
        Some(msg) => out.finish(1, msg),
    })
}

fn cmd_equivalence(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let fix = load_fixture(cfg)?;
    let k = order_of(cfg, &fix)?;
    let mut report = Report::new("report", fix.n(), &[("command", "verify-equivalence".into())]);
    fixture_section(&mut report, &fix);
    let (sp, violation) = superpoly_block(cfg, &fix, k, &mut report)?;
    if let Some(msg) = violation {
        out.write("verify-equivalence.report", &report.render())?;
        return Ok(out.finish(1, msg));
    }
    let opts = IdentityOptions {
        tol_eq: cfg.tolerances.eq.unwrap_or(DEFAULT_TOL_EQ),
        radii: cfg.radii.clone(),
        ..IdentityOptions::default()
    };
    let rep = verify_integral_identity_with(&fix, k, &opts)?;
    report
        .section("identity")
        .num("fitted_c", rep.fitted_c)
        .num("residual", rep.residual)
        .num("tol_eq", rep.tol_eq)
        .text("verdict", rep.verdict.name());
    let radii: Vec<f64> = rep.boundary_trace.iter().map(|t| t.0).collect();
    let decay = boundary_decay(&fix, k, &radii)?;
    {
        let s = report.section("boundary");
        for (i, (r, v)) in decay.trace.iter().enumerate() {
            s.num(format!("r{i}"), *r).num(format!("value{i}"), *v);
        }
        s.text("tail_decreasing", decay.tail_decreasing())
            .text("certified", decay.certified.len())
            .text("jensen_split_holds", decay.jensen.iter().all(|j| j.split_holds))
            .text("jensen_bound_holds", decay.jensen.iter().all(|j| j.jensen_holds));
    }
    let rows: Vec<Vec<f64>> = decay.trace.iter().map(|(r, v)| vec![*r, *v]).collect();
    out.write(
        "boundary_trace.dat",
        &columns_to_string("boundary-trace", fix.n(), &[("k", k.to_string())], &["r", "value"], &rows),
    )?;
    match finiteness_estimates(&fix, k, &sp) {
        Ok(f) => {
            let s = report.section("finiteness");
            s.num("weighted_rhs", f.weighted_rhs)
                .num("weighted_rhs_half", f.weighted_rhs_half)
                .num("green_constant", f.green_constant)
                .num("bound", f.bound)
                .num("slack", f.slack)
                .text("holds", f.holds)
                .text("stable", f.stable);
            for l in &f.levels {
                s.num(format!("level{}.u{}.change", l.j, l.field + 1), l.relative_change());
            }
        }
        Err(e @ Error::InvalidGrid(_)) => {
            report.section("finiteness").text("skipped", e);
        }
        Err(e) => return Err(e),
    }
    let mut ok = rep.verdict == Verdict::Equivalent;
    if cfg.fourier {
        let (u, f) = match (&fix.fields[0], fix.rhs_field(0)?) {
            (FieldData::Cartesian(u), FieldData::Cartesian(f)) => (u.clone(), f),
            _ => return Err(Error::InvalidParams("the Fourier check needs a Cartesian fixture".into())),
        };
        let four = fourier_equivalence_check(&u, &f, fix.alpha)?;
        let agree = ((four.integral_c - rep.fitted_c) / rep.fitted_c).abs();
        report
            .section("fourier")
            .num("fitted_c", four.fitted_c)
            .num("integral_c", four.integral_c)
            .num("residual", four.residual)
            .text("retained_modes", four.retained_modes)
            .num("route_agreement", agree)
            .text("passes", four.passes);
        ok &= four.passes && agree <= 0.05;
    }
    out.write("verify-equivalence.report", &report.render())?;
    let msg = format!(
        "{} (c = {:.6e}, residual {:.3e})",
        rep.verdict.name(),
        rep.fitted_c,
        rep.residual
    );
    Ok(out.finish(if ok { 0 } else { 1 }, msg))
}

fn blowup_params(sc: &ScenarioConfig) -> Result<BlowupParams> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Error::InvalidParams(format!("scenario needs `{name}`")))
    };
    let need_u = |v: Option<usize>, name: &str| {
        v.ok_or_else(|| Error::InvalidParams(format!("scenario needs `{name}`")))
    };
    let params = match sc.kind {
        ScenarioKind::Single => BlowupParams::single(need_u(sc.order, "order")?, need(sc.q, "q")?, sc.n)?,
        ScenarioKind::TwoSystem => BlowupParams::two_system(
            need_u(sc.t, "t")?,
            need_u(sc.s, "s")?,
            need(sc.p, "p")?,
            need(sc.q, "q")?,
            sc.n,
        )?,
        ScenarioKind::EpsCombined => BlowupParams::eps_combined(
            need_u(sc.order, "order")?,
            need(sc.p, "p")?,
            sc.n,
            need(sc.epsilon, "epsilon")?,
            need(sc.c_delta, "c_delta")?,
        )?,
    };
    match sc.l {
        Some(l) => params.with_l(l),
        None => Ok(params),
    }
}

fn blowup_seed(sc: &ScenarioConfig, params: &BlowupParams) -> Result<Seed> {
    let floor = params.min_log_sigma0();
    let log_sigma0 = match sc.sigma0 {
        Some(s) => {
            if !(s >= 1.0) || s.ln() < floor * (1.0 - 1e-12) {
                return Err(Error::PreconditionViolated(format!(
                    "sigma0 = {s} is below the admissible minimum {:.6e}",
                    floor.exp()
                )));
            }
            s.ln()
        }
        None => floor,
    };
    match (sc.a0, sc.lambda, sc.c0) {
        (Some(a0), _, _) => Ok(Seed::new(a0, log_sigma0.exp())),
        (None, Some(lambda), Some(c0)) => {
            let w = params.single_weight().ok_or_else(|| {
                Error::InvalidParams("rescaled seeds need a single-inequality scenario".into())
            })?;
            let mut seed = Seed::from_rescaling(c0, lambda, w, 1.0);
            seed.log_sigma0 = log_sigma0;
            Ok(seed)
        }
        (None, None, None) => Ok(Seed::at_floor(params, log_sigma0)),
        _ => Err(Error::InvalidParams("rescaled seeds need both `lambda` and `c0`".into())),
    }
}

fn trace_rows(trace: &BlowupTrace) -> Vec<Vec<f64>> {
    trace
        .rows
        .iter()
        .map(|r| {
            vec![
                r.state.k as f64,
                r.state.log_a,
                r.state.log_sigma,
                if r.predicate { 1.0 } else { 0.0 },
                r.step_ratio_log,
            ]
        })
        .collect()
}

fn cmd_blowup(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let sc = cfg
        .scenario
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("simulate-blowup needs a [scenario]".into()))?;
    let params = blowup_params(sc)?;
    let seed = blowup_seed(sc, &params)?;
    let opts = RunOptions {
        log_bound: sc.log_bound,
        ..RunOptions::default()
    };
    let trace = run_blowup(&params, seed, sc.steps, &opts)?;
    let mut report = Report::new("report", params.n(), &[("command", "simulate-blowup".into())]);
    report
        .section("scenario")
        .text("kind", match sc.kind {
            ScenarioKind::Single => "single",
            ScenarioKind::TwoSystem => "two-system",
            ScenarioKind::EpsCombined => "eps-combined",
        })
        .num("m", params.m())
        .num("l", params.l())
        .num("log_sigma0", seed.log_sigma0)
        .num("log_a0", seed.log_a0)
        .text("steps", sc.steps);
    let verdict = match trace.verdict {
        BlowupVerdict::Diverges => "Diverges",
        BlowupVerdict::Inconclusive => "Inconclusive",
    };
    report
        .section("result")
        .text("verdict", verdict)
        .text("predicate_always", trace.predicate_always())
        .text("ratio_bound_always", trace.ratio_bound_always())
        .num("final_log_a", trace.last().log_a)
        .num("final_log_sigma", trace.last().log_sigma);
    out.write("simulate-blowup.report", &report.render())?;
    out.write(
        "blowup_trace.dat",
        &columns_to_string(
            "blowup-trace",
            params.n(),
            &[],
            &["k", "log_a", "log_sigma", "predicate", "step_ratio_log"],
            &trace_rows(&trace),
        ),
    )?;
    let ok = trace.verdict == BlowupVerdict::Diverges && trace.predicate_always();
    let msg = format!("{verdict} after {} steps (log a = {:.6e})", sc.steps, trace.last().log_a);
    Ok(out.finish(if ok { 0 } else { 1 }, msg))
}

fn cmd_green(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let gc = cfg
        .green
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("build-green needs a [green] table".into()))?;
    let g = build_cascade(gc.n, gc.k, gc.r)?;
    let mut report = Report::new("report", gc.n, &[("command", "build-green".into())]);
    report.section("cascade").text("k", gc.k).num("r", gc.r).text("nodes", g.radii().len());
    let signs = sign_conditions(&g);
    {
        let s = report.section("signs");
        for l in &signs.levels {
            s.num(format!("level{}.derivative", l.j), l.derivative)
                .num(format!("level{}.derivative_fd", l.j), l.derivative_fd)
                .text(format!("level{}.interior_positive", l.j), l.interior_positive);
        }
        s.text("holds", signs.holds);
    }
    let mut pairing_ok = true;
    {
        let s = report.section("pairing");
        for (i, frac) in [0.3, 0.55, 0.8].iter().enumerate() {
            let v = g.pair_with_bump(frac * gc.r)?;
            pairing_ok &= (v - 1.0).abs() <= 0.01;
            s.num(format!("bump{i}.radius"), frac * gc.r).num(format!("bump{i}.value"), v);
        }
    }
    let unit = build_cascade(gc.n, gc.k, 1.0)?;
    let scale = scaling_identity(&unit, &gc.dilations)?;
    {
        let s = report.section("scaling");
        s.num("identity_error", scale.identity_error).num("envelope", scale.envelope);
        for sl in &scale.slopes {
            s.num(format!("level{}.slope", sl.j), sl.slope)
                .num(format!("level{}.expected", sl.j), sl.expected);
        }
    }
    let limit = limit_profile(gc.n, gc.k, &gc.limit_balls, &gc.limit_radii)?;
    {
        let s = report.section("limit");
        s.text("monotone", limit.monotone).num("tail_spread", limit.tail_spread);
        for (j, (c, r)) in limit.constants.iter().zip(&limit.reference).enumerate() {
            s.num(format!("level{j}.constant"), *c).num(format!("level{j}.whole_space"), *r);
        }
    }
    let names: Vec<String> = std::iter::once("rho".to_string())
        .chain((0..g.levels()).map(|j| format!("psi{j}")))
        .collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..g.radii().len())
        .map(|i| std::iter::once(g.radii()[i]).chain((0..g.levels()).map(|j| g.level(j)[i])).collect())
        .collect();
    out.write(
        "green_profile.dat",
        &columns_to_string("green-profile", gc.n, &[("k", gc.k.to_string()), ("r", gc.r.to_string())], &name_refs, &rows),
    )?;
    out.write("build-green.report", &report.render())?;
    let ok = signs.holds && pairing_ok && scale.slopes_within(0.05) && limit.monotone;
    Ok(out.finish(if ok { 0 } else { 1 }, format!("Green cascade n={} k={} checks {}", gc.n, gc.k, if ok { "hold" } else { "fail" })))
}

fn cmd_kernel(cfg: &RunConfig, mut out: Output) -> Result<RunOutcome> {
    let kc = cfg
        .kernel
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("eval-kernel needs a [kernel] table".into()))?;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::InvalidParams(format!("kernel needs `{name}`")));
    let mut report = Report::new("report", kc.n, &[("command", "eval-kernel".into())]);
    match kc.kind {
        KernelKind::Bessel => {
            let spec = BesselSpec::new(kc.n, need(kc.alpha, "alpha")?)?;
            let radii = cfg
                .radii
                .clone()
                .ok_or_else(|| Error::InvalidParams("the Bessel kernel needs `radii`".into()))?;
            let rows = radii
                .iter()
                .map(|&r| Ok(vec![r, bessel_kernel(r, &spec)?]))
                .collect::<Result<Vec<_>>>()?;
            let decreasing = rows.windows(2).all(|w| w[1][1] < w[0][1]);
            report.section("bessel").num("alpha", spec.alpha()).text("decreasing", decreasing);
            out.write("kernel.dat", &columns_to_string("bessel-kernel", kc.n, &[("alpha", spec.alpha().to_string())], &["rho", "g"], &rows))?;
        }
        KernelKind::Riesz | KernelKind::Wolff => {
            let fix = load_fixture(cfg)?;
            if fix.n() != kc.n {
                return Err(Error::InvalidParams(format!("kernel n={} but fixture n={}", kc.n, fix.n())));
            }
            let f = match &fix.fields[0] {
                FieldData::Cartesian(f) => f.clone(),
                FieldData::Radial(_) => {
                    return Err(Error::InvalidParams("kernel evaluation needs a Cartesian fixture".into()))
                }
            };
            let (field, label) = if kc.kind == KernelKind::Riesz {
                let spec = RieszSpec::new(kc.n, need(kc.alpha, "alpha")?)?;
                let pot = riesz_potential(&f, &spec)?;
                report
                    .section("riesz")
                    .num("alpha", spec.alpha())
                    .num("shell_mass_fraction", pot.shell_mass_fraction)
                    .text("tail_warning", pot.tail_warning);
                (pot.field, "riesz")
            } else {
                let spec = WolffSpec::new(kc.n, need(kc.beta, "beta")?, need(kc.gamma, "gamma")?)?;
                let t_max = need(kc.t_max, "t_max")?;
                let pot = wolff_potential(&f, &spec, t_max)?;
                report
                    .section("wolff")
                    .num("beta", spec.beta())
                    .num("gamma", spec.gamma())
                    .num("t_max", t_max)
                    .text("truncation_dominant", pot.truncation_dominant)
                    .num("last_decade_fraction", pot.last_decade_fraction);
                (pot.field, "wolff")
            };
            if let Some(v) = field.value_at_origin() {
                report.section(label).num("value_at_origin", v);
            }
            report.section(label).num("min", field.min()).num("max", field.max());
            let mut x = vec![0.0; kc.n];
            let rows: Vec<Vec<f64>> = (0..field.grid().len())
                .map(|i| {
                    field.grid().position(i, &mut x);
                    x.iter().cloned().chain(std::iter::once(field.values()[i])).collect()
                })
                .collect();
            let mut names: Vec<String> = (1..=kc.n).map(|d| format!("x{d}")).collect();
            names.push("potential".into());
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            out.write("kernel.dat", &columns_to_string(&format!("{label}-potential"), kc.n, &[], &refs, &rows))?;
        }
    }
    out.write("eval-kernel.report", &report.render())?;
    Ok(out.finish(0, format!("evaluated {:?} kernel", kc.kind).to_lowercase()))
}
