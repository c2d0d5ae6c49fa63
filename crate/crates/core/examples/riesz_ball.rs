//! Riesz potential of the indicator of the unit ball in three dimensions.
//! For α = 2 the value at the centre is 2π.
use polyharm::kernels::{riesz_potential, riesz_potential_at, RieszSpec};
use polyharm::{CartesianField, Grid};
use std::f64::consts::PI;

fn main() -> polyharm::Result<()> {
    let grid = Grid::new(3, 1.1, 61)?;
    let ball = CartesianField::from_fn(grid.clone(), |x| {
        if x.iter().map(|v| v * v).sum::<f64>() <= 1.0 { 1.0 } else { 0.0 }
    })?;
    let spec = RieszSpec::new(3, 2.0)?;
    let centre = riesz_potential_at(&ball, &spec, grid.origin_index().unwrap())?;
    println!("I_2[1_B](0) = {centre:.6} (2π = {:.6})", 2.0 * PI);

    // whole field, by FFT convolution
    let pot = riesz_potential(&ball, &spec)?;
    println!(
        "range [{:.4}, {:.4}], shell mass {:.3}, tail warning {}",
        pot.field.min(),
        pot.field.max(),
        pot.shell_mass_fraction,
        pot.tail_warning
    );
    for alpha in [0.5, 1.0, 1.5, 2.5] {
        let v = riesz_potential_at(&ball, &RieszSpec::new(3, alpha)?, grid.origin_index().unwrap())?;
        // ∫_B |y|^{α-3} dy = 4π/α
        println!("alpha {alpha}: {v:.6} vs {:.6}", 4.0 * PI / alpha);
    }
    Ok(())
}
