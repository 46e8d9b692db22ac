use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "virtloc", version, about = "Localization, stratification and virtual-atlas toolkit")]
struct Cli {
    /// Worker threads; VIRTLOC_JOBS takes precedence when set
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Seed for every random stream; echoed in each output header
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format; each command has its own default
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Local Gromov-Witten invariants of the resolved geometries
    #[command(subcommand)]
    Gw(GwCommand),
    /// Boundary strata of stable curves and maps
    #[command(subcommand)]
    Strata(StrataCommand),
    /// Patching-axiom checks on finite atlas models
    #[command(subcommand)]
    Atlas(AtlasCommand),
    /// Stabilized Euler numbers of planar sections
    #[command(subcommand)]
    Vint(VintCommand),
    /// Pre-gluing of holomorphic maps across a smoothed node
    #[command(subcommand)]
    Preglue(PreglueCommand),
    /// Run the acceptance suite
    Selftest,
}

#[derive(Subcommand, Debug)]
enum GwCommand {
    /// One invariant with its per-graph contributions
    Compute(GwCompute),
    /// Higher-genus invariants against the closed form
    Table(GwTable),
}

#[derive(Args, Debug)]
struct GwCompute {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    genus: u32,
    #[arg(long)]
    degree: u32,
    /// genus0 sums all fixed loci; limit uses the single-edge reduction (genus >= 1)
    #[arg(long, value_enum)]
    mode: Option<GwMode>,
    /// Explicit weights "lambda,u" as rationals, e.g. 3/2,-5
    #[arg(long)]
    weights: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GwMode {
    Genus0,
    Limit,
}

#[derive(Args, Debug)]
struct GwTable {
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 8)]
    gmax: u32,
    #[arg(long, default_value_t = 5)]
    dmax: u32,
}

#[derive(Subcommand, Debug)]
enum StrataCommand {
    Enumerate {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        marks: u32,
        /// Enumerate stable-map strata of this total degree
        #[arg(long)]
        degree: Option<u32>,
    },
}

#[derive(Subcommand, Debug)]
enum AtlasCommand {
    /// Check a JSON atlas model; exits 1 on any violation
    Check { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum VintCommand {
    Euler {
        /// z, zbar, z2, z3, zk:<k>, z2-1 or fold
        #[arg(long)]
        section: String,
        /// JSON stabilization; one rank-2 chart per zero when omitted
        #[arg(long)]
        charts: Option<PathBuf>,
        #[arg(long, default_value_t = 0.005)]
        h: f64,
        /// Half width of the square integration box around the zeros
        #[arg(long, default_value_t = 2.5)]
        half_width: f64,
    },
}

#[derive(Subcommand, Debug)]
enum PreglueCommand {
    Sweep {
        #[arg(long, default_value_t = 4)]
        p: u32,
        /// Comma-separated node radii
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3,1e-4,1e-5")]
        rs: Vec<f64>,
        #[arg(long, default_value = "z,z^2")]
        map1: String,
        #[arg(long, default_value = "w^2,w")]
        map2: String,
        #[arg(long, value_enum, default_value_t = Metric::Flat)]
        metric: Metric,
        /// Grid cells per unit of log radius
        #[arg(long, default_value_t = 400)]
        steps: usize,
        #[arg(long, default_value_t = 256)]
        ntheta: usize,
        /// Twist angle of the gluing parameter
        #[arg(long, default_value_t = 0.0)]
        twist: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Metric {
    Flat,
    Cylinder,
}

fn configure_jobs(flag: Option<usize>) -> anyhow::Result<()> {
    let jobs = match std::env::var("VIRTLOC_JOBS") {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| anyhow::anyhow!("VIRTLOC_JOBS must be a positive integer, got {v:?}"))?),
        Err(_) => flag,
    };
    if let Some(n) = jobs {
        anyhow::ensure!(n > 0, "--jobs must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_jobs(cli.jobs) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match commands::dispatch(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
