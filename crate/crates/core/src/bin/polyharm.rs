use clap::{Parser, Subcommand};
use polyharm::cli::{run, Command, FixtureSource, GridParams, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polyharm", about = "Batch verifications for polyharmonic systems")]
struct Args {
    #[command(subcommand)]
    command: Option<Cmd>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    tol_pos: Option<f64>,
    #[arg(long, global = true)]
    tol_eq: Option<f64>,
    /// `n,L,m`
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Fixture file, overriding `[fixture]`.
    #[arg(long, global = true)]
    fixture: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    VerifySuperpoly,
    VerifyEquivalence,
    SimulateBlowup,
    BuildGreen,
    EvalKernel,
    GenerateFixture,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::VerifySuperpoly => Command::VerifySuperpoly,
            Cmd::VerifyEquivalence => Command::VerifyEquivalence,
            Cmd::SimulateBlowup => Command::SimulateBlowup,
            Cmd::BuildGreen => Command::BuildGreen,
            Cmd::EvalKernel => Command::EvalKernel,
            Cmd::GenerateFixture => Command::GenerateFixture,
        }
    }
}

fn build(args: Args) -> polyharm::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::empty(Command::VerifySuperpoly),
    };
    if let Some(c) = args.command {
        cfg.command = Some(c.into());
    } else if args.config.is_none() {
        return Err(polyharm::Error::InvalidParams("give a subcommand or --config".into()));
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if let Some(g) = &args.grid {
        cfg.grid = Some(GridParams::parse(g)?);
    }
    if let Some(p) = args.fixture {
        cfg.fixture = Some(FixtureSource { path: Some(p), ..Default::default() });
    }
    cfg.tolerances.pos = args.tol_pos.or(cfg.tolerances.pos);
    cfg.tolerances.eq = args.tol_eq.or(cfg.tolerances.eq);
    cfg.radii = args.radii.or(cfg.radii);
    Ok(cfg)
}

fn main() -> ExitCode {
    let outcome = match build(Args::parse()) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("polyharm: {e}");
            return ExitCode::from(2);
        }
    };
    for f in &outcome.files {
        eprintln!("wrote {}", f.display());
    }
    println!("{}", outcome.message);
    ExitCode::from(outcome.code as u8)
}
