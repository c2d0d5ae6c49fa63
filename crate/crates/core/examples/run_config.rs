//! Driving the batch front end from a TOML configuration.
use polyharm::cli::{run, RunConfig};
use std::path::Path;

fn main() -> polyharm::Result<()> {
    let out = std::env::temp_dir().join("polyharm-example");
    let text = r#"
        command = "verify-equivalence"
        grid = { n = 6, L = 24.0, m = 241 }
        [fixture]
        kind = "bubble"
        layout = "radial"
        alpha = 4.0
    "#;
    let mut cfg = RunConfig::from_toml(text, Path::new("."))?;
    cfg.out = Some(out.clone());
    let outcome = run(&cfg);
    println!("exit {}: {}", outcome.code, outcome.message);
    for f in &outcome.files {
        println!("  {}", f.display());
    }
    print!("{}", std::fs::read_to_string(out.join("verify-equivalence.report")).unwrap_or_default());
    Ok(())
}
