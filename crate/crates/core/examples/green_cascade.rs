//! Green function of (-Δ)^k on a ball with Navier-type levels, its sign
//! pattern, the δ-pairing and the whole-space limit.
use polyharm::green::{build_cascade, limit_profile, scaling_identity, sign_conditions};

fn main() -> polyharm::Result<()> {
    let g = build_cascade(6, 2, 1.0)?;
    for rho in [0.01, 0.1, 0.5, 0.9] {
        println!("rho {rho}: psi0 {:.6e} psi1 {:.6e}", g.eval(0, rho), g.eval(1, rho));
    }
    let signs = sign_conditions(&g);
    for l in &signs.levels {
        println!("level {}: dpsi/dr(r) = {:.6e} (fd {:.6e})", l.j, l.derivative, l.derivative_fd);
    }
    for a in [0.3, 0.55, 0.8] {
        println!("bump radius {a}: <phi, (-Δ)^k psi> / psi(0) = {:.6}", g.pair_with_bump(a)?);
    }
    let scale = scaling_identity(&g, &[2.0, 4.0])?;
    for s in &scale.slopes {
        println!("level {} boundary slope {:.4} (expected {})", s.j, s.slope, s.expected);
    }
    let lim = limit_profile(6, 2, &[1.0, 2.0, 4.0, 8.0], &[0.001])?;
    for (c, r) in lim.constants.iter().zip(&lim.reference) {
        println!("limit constant {c:.6e}, whole space {r:.6e}");
    }
    Ok(())
}
