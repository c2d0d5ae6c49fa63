//! Positivity of (-Δ)^j u for the bubble of (-Δ)²u = u⁵ in six dimensions,
//! against the control 1 + r².
use polyharm::equivalence::{bubble_radial, superpoly_verify, synthetic_radial, Expr, Growth};

fn main() -> polyharm::Result<()> {
    let bubble = bubble_radial(6, 4.0, 20.0, 801)?;
    let rep = superpoly_verify(&bubble, 2)?;
    for l in &rep.levels {
        println!("bubble level {}: min margin {:.4e} over {} nodes", l.j, l.min_margin, l.nodes);
    }
    let control = synthetic_radial(
        6,
        5.0,
        101,
        &[Expr::parse("1 + r^2")?],
        vec![Expr::field(0)],
        4.0,
        Growth { p: 1.0, delta: 1.0, c_delta: 0.0, c: None },
    )?;
    let rep = superpoly_verify(&control, 2)?;
    match rep.first_violation() {
        Some(l) => println!("control: level {} fails at {}/{} nodes", l.j, l.failing, l.nodes),
        None => println!("control unexpectedly passed"),
    }
    Ok(())
}
