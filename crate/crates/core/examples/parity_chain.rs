//! Alternating signs of the radial chain v_{p-1}, ..., v_0 for a positive
//! source: odd orders force the bottom profile negative.
use polyharm::blowup::sign_chain;
use polyharm::radial::RadialProfile;

fn main() -> polyharm::Result<()> {
    let g = RadialProfile::from_fn(3, 10.0, 401, |r| 1.0 + (-r).exp())?;
    for order in 2..=5 {
        let chain = sign_chain(order, &g, -1.0, 1.0)?;
        let centres: Vec<String> = chain
            .centers
            .iter()
            .flatten()
            .map(|r| format!("{r:.3}"))
            .collect();
        println!(
            "order {order}: alternating {}, bottom in [{:.3e}, {:.3e}], re-centred at [{}], contradiction {}",
            chain.alternating,
            chain.bottom_min,
            chain.bottom_max,
            centres.join(", "),
            chain.contradicts_positive_solution()
        );
    }
    Ok(())
}
