use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cellmix::config::KeyValueConfig;

mod commands;

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Debug, Parser)]
#[command(name = "cellmix", version, about = "Mixing by randomly shifted cellular flows")]
struct Cli {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: runs/<command>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Base seed; overrides `flow.seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Hardy,
    Ratios,
    Coeffs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Scalar runs over flow realizations with Ḣ⁻¹ rate fits.
    Simulate,
    /// Integrate the two-point equation and record Φ, Ψ and norms.
    TwoPoint {
        /// Write f snapshots into <out>/snapshots.
        #[arg(long)]
        snapshots: bool,
    },
    /// Lagrangian correlations at integer times.
    Correlate,
    /// Numerical checks of the two-point analysis.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
    /// Check or minimise the coefficient exponents.
    Coeffs {
        /// Minimise `max` exponent or the `sum` of exponents.
        #[arg(long)]
        minimize: Option<String>,
        /// Nine comma-separated integers x0,x1,x2,x3,y0,y1,y2,z1,z2 (default: the published point).
        #[arg(long)]
        assignment: Option<String>,
    },
    /// Enhanced-dissipation sweep over kappa.
    SweepKappa,
    /// Fit an exponential rate to one column of a CSV series.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "h_minus1")]
        column: String,
        /// Time column.
        #[arg(long, default_value = "t")]
        time: String,
        /// Window as `t0,t1`; default drops the first 20% of the horizon.
        #[arg(long)]
        window: Option<String>,
        /// Restrict to rows whose `realization` column equals this value.
        #[arg(long)]
        realization: Option<String>,
    },
    /// Time-averaged annulus spectrum of a forced scalar.
    Spectrum,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::TwoPoint { .. } => "two-point",
            Self::Correlate => "correlate",
            Self::Verify { .. } => "verify",
            Self::Coeffs { .. } => "coeffs",
            Self::SweepKappa => "sweep-kappa",
            Self::Fit { .. } => "fit",
            Self::Spectrum => "spectrum",
        }
    }
}

fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<KeyValueConfig> {
    let mut kv = match path {
        Some(p) => KeyValueConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
        None => KeyValueConfig::default(),
    };
    if let Some(s) = seed {
        kv.set("flow.seed", s);
    }
    Ok(kv)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            bail!("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let kv = load_config(cli.config.as_deref(), cli.seed)?;
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(cli.command.name()));
    let ctx = commands::Context { kv, out, name: cli.command.name() };
    match cli.command {
        Command::Simulate => commands::simulate(&ctx),
        Command::TwoPoint { snapshots } => commands::two_point(&ctx, snapshots),
        Command::Correlate => commands::correlate(&ctx),
        Command::Verify { suite } => commands::verify(&ctx, suite),
        Command::Coeffs { minimize, assignment } => commands::coeffs(&ctx, minimize.as_deref(), assignment.as_deref()),
        Command::SweepKappa => commands::sweep_kappa(&ctx),
        Command::Fit { input, column, time, window, realization } => {
            commands::fit(&ctx, &input, &column, &time, window.as_deref(), realization.as_deref())
        }
        Command::Spectrum => commands::spectrum(&ctx),
    }
}
