//! Command-line front end. Exit codes: 0 pass, 1 tolerance failure,
//! 2 configuration error, 3 precision exhaustion.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rotation_evl::harness::{run, Command, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "rotation-evl", version, about = "Extreme value laws of irrational circle rotations")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Limit profiles ν, θ, γ, δ along K.
    Limits(Opts),
    /// The limiting step law H, optionally plotted.
    Evl(Opts),
    /// Exact entry-time distribution next to the arc-union oracle.
    EntryDist(Opts),
    /// Limit law vs exact finite-k law vs Monte Carlo.
    Compare(Opts),
    /// φ_y knots and the fixed-point check per plateau.
    Phi(Opts),
}

#[derive(Args)]
struct Opts {
    /// Continued fraction, e.g. `periodic:1`, `block:3`, `affine:1,1`.
    #[arg(long)]
    spec: Option<String>,
    /// Depth index; repeat or separate with commas for several.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `default`, `log:lo:hi:n` or `list:y1,y2,...`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sup tolerance for |Ĥ − H_{q_k}|.
    #[arg(long)]
    tol: Option<f64>,
    /// Sup tolerance for |Ĥ − H|.
    #[arg(long)]
    tol_limit: Option<f64>,
    /// Sup tolerance for |H_{q_k} − H|.
    #[arg(long)]
    tol_finite: Option<f64>,
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    jmax: Option<usize>,
    /// Sampling threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Re-run the configuration recorded in a manifest.json.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

fn config(command: Command, o: Opts) -> Result<RunConfig, HarnessError> {
    let mut c = match &o.manifest {
        Some(path) => {
            let c = RunConfig::from_manifest(path)?;
            if c.command != command {
                return Err(HarnessError::Config(format!(
                    "manifest records '{}', not '{}'",
                    c.command.name(),
                    command.name()
                )));
            }
            c
        }
        None => RunConfig {
            command,
            ..RunConfig::default()
        },
    };
    if let Some(v) = o.spec {
        c.spec = v;
    }
    if !o.k.is_empty() {
        c.k = o.k;
    }
    if let Some(v) = o.samples {
        c.samples = v;
    }
    if let Some(v) = o.seed {
        c.seed = v;
    }
    if let Some(v) = o.grid {
        c.grid = v;
    }
    if let Some(v) = o.out {
        c.out = v;
    }
    if let Some(v) = o.tol {
        c.tolerances.empirical_vs_finite = v;
    }
    if let Some(v) = o.tol_limit {
        c.tolerances.empirical_vs_limit = v;
    }
    if let Some(v) = o.tol_finite {
        c.tolerances.finite_vs_limit = v;
    }
    if let Some(v) = o.jmax {
        c.jmax = v;
    }
    if o.plot {
        c.plot = true;
    }
    if o.threads.is_some() {
        c.threads = o.threads;
    }
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, opts) = match cli.command {
        Cmd::Limits(o) => (Command::Limits, o),
        Cmd::Evl(o) => (Command::Evl, o),
        Cmd::EntryDist(o) => (Command::EntryDist, o),
        Cmd::Compare(o) => (Command::Compare, o),
        Cmd::Phi(o) => (Command::Phi, o),
    };
    let outcome = config(command, opts).and_then(|c| run(&c));
    match outcome {
        Ok(o) => {
            println!("{}: {}", if o.passed { "PASS" } else { "FAIL" }, o.summary);
            for p in &o.outputs {
                println!("  wrote {}", p.display());
            }
            ExitCode::from(if o.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
