use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sinn_core::net::Activation;
use sinn_core::run::{run, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "sinn", version, about = "Spectral integrated neural network solver for 3D heat and wave problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quadrature, manufactured-source and derivative self-checks.
    Verify(Opts),
    /// One forward run with error tables.
    Solve(Opts),
    /// The PINN baseline.
    Pinn(Opts),
    /// SINN against PINN at a matched iteration budget.
    Compare(Opts),
    /// Time marching over consecutive subintervals.
    March(Opts),
    /// Recovery of conductivity and heat capacity.
    Inverse(Opts),
}

#[derive(Args)]
struct Opts {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// Single training seed.
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Number of seeds, run as 0..N.
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Comma-separated activation names, or `all`.
    #[arg(long)]
    activations: Option<String>,
    /// Subintervals for `march`.
    #[arg(long)]
    steps: Option<usize>,
    /// Flux noise level for `inverse`.
    #[arg(long)]
    noise: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit non-zero when a tolerance in the config's gate section is violated.
    #[arg(long)]
    gate: bool,
}

fn parse_activations(s: &str) -> Result<Vec<Activation>> {
    if s == "all" {
        return Ok(Activation::ALL.to_vec());
    }
    s.split(',')
        .map(|name| Activation::from_name(name.trim()).with_context(|| format!("unknown activation `{name}`")))
        .collect()
}

fn build_config(o: &Opts) -> Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => RunConfig::default(),
    };
    if let Some(c) = &o.case {
        cfg.case = c.clone();
    }
    if let Some(s) = o.seed {
        cfg.train.seed = s;
        cfg.seeds.clear();
    }
    if let Some(n) = o.seeds {
        if n == 0 {
            bail!("--seeds must be positive");
        }
        cfg.seeds = (0..n).collect();
    }
    if let Some(n) = o.iterations {
        cfg.train.iterations = n;
    }
    if let Some(a) = &o.activations {
        cfg.activations = parse_activations(a)?;
    }
    if let Some(n) = o.steps {
        cfg.steps = n;
    }
    if let Some(n) = o.noise {
        cfg.inverse.noise = n;
    }
    if let Some(d) = &o.out {
        cfg.output = d.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, opts) = match &cli.command {
        Command::Verify(o) => (Mode::Verify, o),
        Command::Solve(o) => (Mode::Solve, o),
        Command::Pinn(o) => (Mode::Pinn, o),
        Command::Compare(o) => (Mode::Compare, o),
        Command::March(o) => (Mode::March, o),
        Command::Inverse(o) => (Mode::Inverse, o),
    };
    let outcome = build_config(opts).and_then(|cfg| Ok(run(&cfg, Some(mode))?));
    match outcome {
        Ok(out) => {
            for line in &out.summary {
                println!("{line}");
            }
            println!("artifacts in {}", out.output.display());
            for f in &out.failures {
                eprintln!("failure: {f}");
            }
            for v in &out.violations {
                eprintln!("tolerance violated: {v}");
            }
            if out.succeeded(opts.gate) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
