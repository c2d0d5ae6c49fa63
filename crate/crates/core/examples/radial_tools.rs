//! Spherical means, the radial Laplacian and the radial Poisson solver.
use polyharm::radial::{radial_laplacian, solve_radial_poisson, spherical_average, verify_jensen, RadialProfile};
use polyharm::{CartesianField, Grid};

fn main() -> polyharm::Result<()> {
    // |x|² + x1 has spherical mean r² about the origin
    let grid = Grid::new(3, 2.0, 41)?;
    let u = CartesianField::from_fn(grid, |x| x.iter().map(|v| v * v).sum::<f64>() + x[0])?;
    let radii: Vec<f64> = (0..=8).map(|i| 0.2 * i as f64).collect();
    let means = spherical_average(&u, &[0.0; 3], &radii)?;
    for (r, m) in means.radii().iter().zip(means.values()) {
        println!("r = {r:.1}: mean {m:.6} (r² = {:.6})", r * r);
    }

    // -Δ of e^{-r²} in five dimensions, then back
    let v = RadialProfile::from_fn(5, 3.0, 601, |r| (-r * r).exp())?;
    let g = radial_laplacian(&v)?;
    let back = solve_radial_poisson(&g, 1.0)?;
    let err = back.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("round trip error {err:.2e}");

    let jensen = verify_jensen(&u.map(|x| x + 1.0)?, 3.0, &[0.0; 3], &radii)?;
    println!("Jensen avg(f)^3 <= avg(f^3): {} ({} ties)", jensen.holds, jensen.ties);
    Ok(())
}
