//! The iterated lower bound for -Δ²u >= u² in five dimensions and for the
//! two-equation system, seeded on the induction floor.
use polyharm::blowup::{run_blowup, BlowupParams, RunOptions, Seed};

fn main() -> polyharm::Result<()> {
    let single = BlowupParams::single(2, 2.0, 5)?;
    println!(
        "m = {}, l = {}, sigma0 >= {}",
        single.m(),
        single.l(),
        single.min_log_sigma0().exp()
    );
    let trace = run_blowup(&single, Seed::at_floor(&single, single.min_log_sigma0()), 20, &RunOptions::default())?;
    for row in trace.rows.iter().step_by(4) {
        println!(
            "k={:2} log a={:>14.6e} log sigma={:.4} predicate={}",
            row.state.k, row.state.log_a, row.state.log_sigma, row.predicate
        );
    }
    println!("verdict {:?}", trace.verdict);

    let system = BlowupParams::two_system(1, 1, 3.0, 3.0, 3)?;
    let trace = run_blowup(&system, Seed::at_floor(&system, system.min_log_sigma0()), 20, &RunOptions::default())?;
    println!("system: log a_20 = {:.3e}, verdict {:?}", trace.last().log_a, trace.verdict);

    // seeds below the admissible sigma0 are refused
    match run_blowup(&single, Seed::new(1.0, 100.0), 20, &RunOptions::default()) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("refused: {e}"),
    }
    Ok(())
}
