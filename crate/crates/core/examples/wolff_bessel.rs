//! Wolff potentials and the Bessel kernel.
use polyharm::kernels::{bessel_kernel, wolff_outer_integral, wolff_potential, BesselSpec, WolffSpec};
use polyharm::{CartesianField, Grid};
use std::f64::consts::PI;

fn main() -> polyharm::Result<()> {
    let spec = WolffSpec::new(3, 0.8, 2.5)?;
    let grid = Grid::new(3, 1.0, 11)?;
    let f = CartesianField::from_fn(grid, |x| 1.0 + x[0] * x[0])?;
    let w = wolff_potential(&f, &spec, 0.5)?;
    let w3 = wolff_potential(&f.map(|v| 3.0 * v)?, &spec, 0.5)?;
    let expect = 3f64.powf(1.0 / (spec.gamma() - 1.0));
    println!(
        "W(f)(0) = {:.6e}, W(3f)/W(f) = {:.12} (expected {expect:.12})",
        w.field.value_at_origin().unwrap(),
        w3.field.value_at_origin().unwrap() / w.field.value_at_origin().unwrap()
    );
    println!("truncation dominant: {} ({:.3})", w.truncation_dominant, w.last_decade_fraction);

    // f = 1 everywhere: μ(B_t) = (4/3)π t³
    let exact = wolff_outer_integral(|t| 4.0 / 3.0 * PI * t.powi(3), &spec, 0.5)?;
    println!("constant density, outer integral {exact:.6e}");

    let bessel = BesselSpec::new(3, 1.5)?;
    for rho in [0.1, 0.5, 1.0, 2.0, 4.0] {
        println!("G_1.5({rho}) = {:.6e}", bessel_kernel(rho, &bessel)?);
    }
    Ok(())
}
