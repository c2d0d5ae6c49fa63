//! The same identity on the Fourier side, including a fractional order.
use polyharm::equivalence::{bubble_constant, fourier_equivalence_check, spectral_fractional};
use polyharm::{CartesianField, Grid};

fn main() -> polyharm::Result<()> {
    let grid = Grid::new(3, 16.0, 65)?;
    for alpha in [2.0, 1.0] {
        // bubble of (-Δ)^{α/2} u = u^{(n+α)/(n-α)}
        let c0 = bubble_constant(3, alpha)?;
        let e = (3.0 - alpha) / 2.0;
        let p = (3.0 + alpha) / (3.0 - alpha);
        let u = CartesianField::from_fn(grid.clone(), |x| c0 * (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powf(-e))?;
        let f = u.map(|v| v.powf(p))?;
        let rep = fourier_equivalence_check(&u, &f, alpha)?;
        println!(
            "alpha {alpha}: c = {:.5}, residual {:.3e} over {} modes, integral c {:.5e}",
            rep.fitted_c, rep.residual, rep.retained_modes, rep.integral_c
        );
    }
    let g = Grid::new(2, 3.0, 33)?;
    let w = CartesianField::from_fn(g, |x| (-x[0] * x[0] - x[1] * x[1]).exp())?;
    let half = spectral_fractional(&w, 1.0);
    let twice = spectral_fractional(&half, 1.0);
    let full = spectral_fractional(&w, 2.0);
    let err = twice.values().iter().zip(full.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("semigroup: |(-Δ)^½(-Δ)^½ w - (-Δ)w| = {err:.2e}");
    Ok(())
}
