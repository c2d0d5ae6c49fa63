//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per check; exits non-zero if any fails.

use polyharm::blowup::{run_blowup, sign_chain, BlowupParams, BlowupVerdict, RunOptions, Seed};
use polyharm::equivalence::{
    boundary_decay, bubble_cartesian, bubble_radial, fourier_equivalence_check, spectral_fractional,
    superpoly_verify, verify_integral_identity, Expr, FieldData, FixtureKind, Growth,
    SolutionFixture, Verdict,
};
use polyharm::green::{build_cascade, limit_profile, scaling_identity, sign_conditions};
use polyharm::kernels::{
    bessel_kernel, riesz_potential_at, wolff_potential, BesselSpec, RieszSpec, WolffSpec,
};
use polyharm::radial::RadialProfile;
use polyharm::sphere::{unit_sphere_area, SphereRule};
use polyharm::{CartesianField, Grid};
use std::f64::consts::PI;
use std::time::Instant;

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad)
    }
}

fn superpoly() -> Outcome {
    let start = Instant::now();
    let fix = bubble_radial(6, 4.0, 20.0, 801).map_err(|e| e.to_string())?;
    let rep = superpoly_verify(&fix, 2).map_err(|e| e.to_string())?;
    let margin = rep.levels[0].min_margin;
    let control = SolutionFixture::new(
        vec![FieldData::Radial(RadialProfile::from_fn(6, 5.0, 101, |r| 1.0 + r * r).unwrap())],
        vec![Expr::field(0)],
        4.0,
        FixtureKind::Synthetic,
        Growth { p: 1.0, delta: 1.0, c_delta: 0.0, c: None },
    )
    .map_err(|e| e.to_string())?;
    let neg = superpoly_verify(&control, 2).map_err(|e| e.to_string())?;
    let l = &neg.levels[0];
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "bubble min -Δu = {margin:.3e}; control fails at {}/{} nodes; {secs:.2}s",
        l.failing, l.nodes
    );
    check(rep.positive && margin > 0.0 && !neg.positive && l.failing == l.nodes && secs <= 120.0, detail.clone(), detail)
}

fn newtonian_c(m: usize) -> Result<(f64, f64, Verdict), String> {
    let fix = bubble_cartesian(3, 2.0, 8.0, m).map_err(|e| e.to_string())?;
    let rep = verify_integral_identity(&fix, 1).map_err(|e| e.to_string())?;
    Ok((rep.fitted_c, rep.residual, rep.verdict))
}

fn even_equivalence() -> Outcome {
    let start = Instant::now();
    let (c1, r1, v1) = newtonian_c(41)?;
    let (c2, r2, v2) = newtonian_c(61)?;
    let run6 = |points: usize| -> Result<(f64, f64, Verdict), String> {
        let fix = bubble_radial(6, 4.0, 24.0, points).map_err(|e| e.to_string())?;
        let rep = verify_integral_identity(&fix, 2).map_err(|e| e.to_string())?;
        Ok((rep.fitted_c, rep.residual, rep.verdict))
    };
    let (d1, s1, w1) = run6(241)?;
    let (d2, s2, w2) = run6(361)?;
    let secs = start.elapsed().as_secs_f64();
    let drift3 = ((c2 - c1) / c1).abs();
    let drift6 = ((d2 - d1) / d1).abs();
    let detail = format!(
        "n=3: c={c1:.5e}->{c2:.5e} (drift {drift3:.2e}) residual {r1:.2e}/{r2:.2e}; \
         n=6: c={d1:.5e}->{d2:.5e} (drift {drift6:.2e}) residual {s1:.2e}/{s2:.2e}; {secs:.1}s"
    );
    let ok = [v1, v2, w1, w2].iter().all(|v| *v == Verdict::Equivalent)
        && [r1, r2, s1, s2].iter().all(|r| *r <= 0.02)
        && drift3 <= 0.05
        && drift6 <= 0.05;
    check(ok, detail.clone(), detail)
}

fn fourier() -> Outcome {
    let grid = Grid::new(3, 16.0, 65).unwrap();
    let c0 = 3f64.powf(0.25);
    let u = CartesianField::from_fn(grid, |x| c0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()).unwrap();
    let f = u.map(|v| v.powi(5)).unwrap();
    let rep = fourier_equivalence_check(&u, &f, 2.0).map_err(|e| e.to_string())?;
    let (c_int, _, _) = newtonian_c(61)?;
    let agree = ((rep.integral_c - c_int) / c_int).abs();

    // α = 2 against the 7-point Laplacian on a periodic Gaussian
    let fd_error = |m: usize| {
        let grid = Grid::new(3, 6.0, m).unwrap();
        let g = CartesianField::from_fn(grid, |x| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()).unwrap();
        let spec = spectral_fractional(&g, 2.0).restrict(1).unwrap();
        let fd = g.neg_laplacian().unwrap();
        spec.values().iter().zip(fd.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (fd_error(25), fd_error(49));
    let order = (e1 / e2).log2();
    let detail = format!(
        "residual {:.3e} over {} modes; c_F={:.5e}, integral c {:.5e} vs {c_int:.5e} ({agree:.2e}); FD order {order:.3}",
        rep.residual, rep.retained_modes, rep.fitted_c, rep.integral_c
    );
    check(rep.residual <= 0.05 && agree <= 0.05 && order >= 1.8, detail.clone(), detail)
}

fn green() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, k) in [(3, 1), (5, 1), (6, 2)] {
        let g = build_cascade(n, k, 1.0).map_err(|e| e.to_string())?;
        let worst_pair = [0.3, 0.55, 0.8]
            .iter()
            .map(|&a| g.pair_with_bump(a).map(|v| (v - 1.0).abs()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(0.0, f64::max);
        let signs = sign_conditions(&g);
        let scale = scaling_identity(&g, &[2.0, 4.0]).map_err(|e| e.to_string())?;
        let worst_slope = scale
            .slopes
            .iter()
            .map(|s| ((s.slope - s.expected) / s.expected).abs())
            .fold(0.0, f64::max);
        ok &= worst_pair <= 0.01 && signs.holds && scale.identity_error <= 1e-8 && scale.slopes_within(0.05);
        notes.push(format!(
            "({n},{k}) pairing {worst_pair:.1e} signs {} dilation {:.1e} slope {worst_slope:.1e}",
            signs.holds, scale.identity_error
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs <= 60.0;
    let detail = format!("{}; {secs:.2}s", notes.join("; "));
    check(ok, detail.clone(), detail)
}

fn limit() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (n, k) in [(3, 1), (5, 1), (6, 2)] {
        let rep = limit_profile(n, k, &[1.0, 2.0, 4.0, 8.0], &[0.0005, 0.001, 0.002]).map_err(|e| e.to_string())?;
        let match_ref = rep
            .constants
            .iter()
            .zip(&rep.reference)
            .map(|(a, b)| ((a - b) / b).abs())
            .fold(0.0, f64::max);
        ok &= rep.monotone && rep.tail_spread < 5e-4;
        notes.push(format!(
            "({n},{k}) monotone {} tail {:.1e} vs whole-space {match_ref:.1e}",
            rep.monotone, rep.tail_spread
        ));
    }
    let detail = notes.join("; ");
    check(ok, detail.clone(), detail)
}

fn blowup() -> Outcome {
    let start = Instant::now();
    let p = BlowupParams::single(2, 2.0, 5).map_err(|e| e.to_string())?;
    let sigma0 = p.min_log_sigma0().exp();
    let single = run_blowup(&p, Seed::at_floor(&p, p.min_log_sigma0()), 20, &RunOptions::default())
        .map_err(|e| e.to_string())?;
    let s = BlowupParams::two_system(1, 1, 3.0, 3.0, 3).map_err(|e| e.to_string())?;
    let system = run_blowup(&s, Seed::at_floor(&s, s.min_log_sigma0()), 20, &RunOptions::default())
        .map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "m={} l={} sigma0={sigma0}; single log a_20={:.1} {:?}; system log a_20={:.1} {:?}; {:.1}ms",
        p.m(),
        p.l(),
        single.last().log_a,
        single.verdict,
        system.last().log_a,
        system.verdict,
        secs * 1e3
    );
    let ok = p.m() == 9.0
        && p.l() == 3.0
        && (sigma0 - 65536.0).abs() < 1e-6
        && single.rows.len() == 21
        && single.predicate_always()
        && single.ratio_bound_always()
        && single.last().log_a > 700.0
        && single.verdict == BlowupVerdict::Diverges
        && system.predicate_always()
        && system.verdict == BlowupVerdict::Diverges
        && secs < 1.0;
    check(ok, detail.clone(), detail)
}

fn parity() -> Outcome {
    let g = RadialProfile::from_fn(3, 10.0, 401, |_| 1.0).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for order in 2..=4 {
        let chain = sign_chain(order, &g, -1.0, 1.0).map_err(|e| e.to_string())?;
        let expect_negative = order % 2 == 1;
        ok &= chain.alternating && chain.contradicts_positive_solution() == expect_negative;
        notes.push(format!(
            "order {order}: bottom in [{:.3e}, {:.3e}]",
            chain.bottom_min, chain.bottom_max
        ));
    }
    let detail = notes.join("; ");
    check(ok, detail.clone(), detail)
}

fn boundary() -> Outcome {
    let radii = [2.0, 4.0, 6.0, 8.0];
    let fix = bubble_radial(5, 2.0, 10.0, 1001).map_err(|e| e.to_string())?;
    let rep = boundary_decay(&fix, 1, &radii).map_err(|e| e.to_string())?;
    let n = 5;
    let rule = SphereRule::default_for(n).map_err(|e| e.to_string())?;
    let omega = unit_sphere_area(n);
    let worst = radii
        .iter()
        .map(|&r| {
            let mean = rule.average(&[0.0; 5], r, |x| x.iter().map(|v| v * v).sum::<f64>().powf(-1.5));
            let value = omega * r.powi(n as i32 - 1) * mean / r.powi(n as i32 - 1);
            let exact = omega * r.powi(2 - n as i32);
            ((value - exact) / exact).abs()
        })
        .fold(0.0, f64::max);
    let values: Vec<String> = rep.trace.iter().map(|(_, v)| format!("{v:.4e}")).collect();
    let detail = format!("bubble trace [{}]; |x|^(2-n) error {worst:.1e}", values.join(", "));
    check(rep.strictly_decreasing() && worst <= 0.01, detail.clone(), detail)
}

fn kernels() -> Outcome {
    let grid = Grid::new(3, 1.1, 101).unwrap();
    let ball = CartesianField::from_fn(grid, |x| {
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 { 1.0 } else { 0.0 }
    })
    .unwrap();
    let spec = RieszSpec::new(3, 2.0).unwrap();
    let at0 = riesz_potential_at(&ball, &spec, grid.origin_index().unwrap()).map_err(|e| e.to_string())?;
    let ball_err = (at0 / (2.0 * PI) - 1.0).abs();

    let wgrid = Grid::new(3, 1.0, 9).unwrap();
    let f = CartesianField::from_fn(wgrid, |x| 1.0 + x[0] * x[0] + 0.5 * x[1]).unwrap();
    let wspec = WolffSpec::new(3, 0.8, 2.5).unwrap();
    let lambda = 3.7;
    let w1 = wolff_potential(&f, &wspec, 2.0).map_err(|e| e.to_string())?;
    let w2 = wolff_potential(&f.map(|v| lambda * v).unwrap(), &wspec, 2.0).map_err(|e| e.to_string())?;
    let factor = lambda.powf(1.0 / (wspec.gamma() - 1.0));
    let homog = w1
        .field
        .values()
        .iter()
        .zip(w2.field.values())
        .map(|(a, b)| ((b - factor * a) / b).abs())
        .fold(0.0, f64::max);

    let bspec = BesselSpec::new(3, 1.5).unwrap();
    let bessel = (1..=40)
        .map(|i| bessel_kernel(0.1 * i as f64, &bspec))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let decreasing = bessel.windows(2).all(|w| w[1] < w[0]) && bessel.iter().all(|&v| v > 0.0);
    let detail = format!("ball {at0:.6} (err {ball_err:.1e}); Wolff homogeneity {homog:.1e}; Bessel decreasing {decreasing}");
    check(ball_err <= 0.005 && homog <= 1e-13 && decreasing, detail.clone(), detail)
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 9] = [
        ("1 super-polyharmonic", superpoly),
        ("2 even equivalence", even_equivalence),
        ("3 fourier equivalence", fourier),
        ("4 green cascade", green),
        ("5 green limit", limit),
        ("6 blow-up arithmetic", blowup),
        ("7 parity dichotomy", parity),
        ("8 boundary decay", boundary),
        ("9 kernel identities", kernels),
    ];
    let mut failed = 0;
    for (name, run) in checks {
        match run() {
            Ok(detail) => println!("criterion {name}: PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {name}: FAIL  {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
