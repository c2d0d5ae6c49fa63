//! The Bessel kernel
//! `g_α(ρ) = P(α) ∫_0^∞ exp(-πρ²/t - t/(4π)) t^{-(n-α)/2-1} dt`
//! with prefactor `P(α) = 1 / ((4π)^α Γ(α/2))`.

use super::BesselSpec;
use crate::error::{Error, Result};
use crate::quad::{integrate, AdaptiveOptions};
use std::f64::consts::PI;

pub fn bessel_prefactor(spec: &BesselSpec) -> f64 {
    1.0 / ((4.0 * PI).powf(spec.alpha()) * libm::tgamma(spec.alpha() / 2.0))
}

/// The t-integral alone, without the prefactor.
///
/// With `t = e^s` the log-integrand is concave in `s`, so the integral is
/// confined to a window around its maximum outside of which the integrand
/// has dropped by `e^{-60}`.
pub fn bessel_integral(rho: f64, spec: &BesselSpec, opts: AdaptiveOptions) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParams(format!("radius must be finite and >= 0, got {rho}")));
    }
    let n = spec.n() as f64;
    let alpha = spec.alpha();
    if rho == 0.0 && alpha <= n {
        return Err(Error::DivergentKernel {
            n: spec.n(),
            alpha,
        });
    }
    let a = PI * rho * rho;
    let b = 1.0 / (4.0 * PI);
    let c = (n - alpha) / 2.0;
    let log_f = |s: f64| -a * (-s).exp() - b * s.exp() - c * s;
    // maximiser of a concave function by bisection on its derivative
    let slope = |s: f64| a * (-s).exp() - b * s.exp() - c;
    let (mut lo, mut hi) = (-50.0f64, 50.0f64);
    while slope(lo) < 0.0 {
        lo -= 50.0;
    }
    while slope(hi) > 0.0 {
        hi += 50.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let peak = 0.5 * (lo + hi);
    let top = log_f(peak);
    let floor = top - 60.0;
    let mut left = peak - 1.0;
    while log_f(left) > floor {
        left -= 1.0;
    }
    let mut right = peak + 1.0;
    while log_f(right) > floor {
        right += 1.0;
    }
    // integrate the normalised integrand to keep the scale near one
    let v = integrate(|s| (log_f(s) - top).exp(), left, right, opts)?;
    Ok(v * top.exp())
}

pub fn bessel_kernel(rho: f64, spec: &BesselSpec) -> Result<f64> {
    let opts = AdaptiveOptions {
        rel_tol: 1e-12,
        ..AdaptiveOptions::default()
    };
    Ok(bessel_prefactor(spec) * bessel_integral(rho, spec, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn goldens() {
        let s32 = BesselSpec::new(3, 2.0).unwrap();
        for (rho, want) in [
            (0.25, 0.019_727_254_290_593_568_5),
            (0.5, 0.007_681_800_544_681_501_35),
            (1.0, 0.002_329_623_776_073_268_89),
            (2.0, 0.000_428_510_346_440_769_721),
        ] {
            let got = bessel_kernel(rho, &s32).unwrap();
            assert!((got - want).abs() < 1e-10 * want, "rho={rho}: {got}");
        }
        let s53 = BesselSpec::new(5, 3.0).unwrap();
        let got = bessel_kernel(0.7, &s53).unwrap();
        assert!((got - 0.000_271_571_450_486_191_897).abs() < 1e-10 * got);
    }

    #[test]
    fn newtonian_case_matches_closed_form() {
        // n=3, α=2: the t-integral equals e^{-ρ}/ρ
        let spec = BesselSpec::new(3, 2.0).unwrap();
        for rho in [0.01, 0.3, 1.7, 6.0, 20.0] {
            let v = bessel_integral(rho, &spec, AdaptiveOptions::default()).unwrap();
            let exact = (-rho).exp() / rho;
            assert!((v - exact).abs() < 1e-9 * exact);
        }
        assert!((bessel_prefactor(&spec) - 1.0 / (16.0 * PI * PI)).abs() < 1e-16);
    }

    #[test]
    fn origin_behaviour() {
        let spec = BesselSpec::new(3, 2.0).unwrap();
        assert!(matches!(bessel_kernel(0.0, &spec), Err(Error::DivergentKernel { .. })));
        let at_n = BesselSpec::new(3, 3.0).unwrap();
        assert!(matches!(bessel_kernel(0.0, &at_n), Err(Error::DivergentKernel { .. })));
        // α > n: ∫ e^{-t/4π} t^{(α-n)/2-1} dt = Γ((α-n)/2)(4π)^{(α-n)/2}
        let big = BesselSpec::new(3, 5.0).unwrap();
        let v = bessel_integral(0.0, &big, AdaptiveOptions::default()).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = BesselSpec::new(3, 2.0).unwrap();
        let opts = AdaptiveOptions {
            rel_tol: 1e-16,
            abs_tol: 0.0,
            max_intervals: 2,
        };
        assert!(matches!(
            bessel_integral(1.0, &spec, opts),
            Err(Error::QuadratureFailure { .. })
        ));
    }

    #[test]
    fn decreasing_and_positive() {
        let spec = BesselSpec::new(4, 1.5).unwrap();
        let vals: Vec<f64> = (1..60)
            .map(|i| bessel_kernel(0.1 * i as f64, &spec).unwrap())
            .collect();
        assert!(vals.iter().all(|&v| v > 0.0));
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
    }
}
