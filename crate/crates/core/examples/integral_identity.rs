//! u = c I_α[f(u)] for the Newtonian bubble in three dimensions, with the
//! boundary functional and the finiteness estimate.
use polyharm::equivalence::{
    boundary_decay, boundary_identity, bubble_cartesian, finiteness_estimates, superpoly_verify,
    verify_integral_identity,
};

fn main() -> polyharm::Result<()> {
    let fix = bubble_cartesian(3, 2.0, 8.0, 41)?;
    let rep = verify_integral_identity(&fix, 1)?;
    println!("c = {:.6e}, residual {:.3e}, {}", rep.fitted_c, rep.residual, rep.verdict.name());

    let sp = superpoly_verify(&fix, 1)?;
    let fin = finiteness_estimates(&fix, 1, &sp)?;
    println!("∫ f|x|^(2-n) = {:.6e} <= {:.6e}: {}", fin.weighted_rhs, fin.bound, fin.holds);

    let radii = [1.5, 3.0, 4.5, 6.0];
    let decay = boundary_decay(&fix, 1, &radii)?;
    for (r, v) in &decay.trace {
        println!("boundary functional at r={r}: {v:.6e}");
    }
    for gap in boundary_identity(&fix, 1, &radii)? {
        println!("r={}: u(0) - ∫ f φ_r = {:.4e}", gap.r, gap.gap);
    }
    Ok(())
}
