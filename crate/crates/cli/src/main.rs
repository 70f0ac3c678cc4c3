//! `wga`: desk-scale experiments on weighted group algebras.
//!
//! Exit codes: 0 success, 1 a checked inequality or identity failed,
//! 2 parse or precondition error, 3 a resource cap was hit.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_caps, parse_grid, ExperimentConfig, Settings};

#[derive(Parser, Debug)]
#[command(name = "wga", version, about = "Weighted group algebra workbench")]
struct Cli {
    /// Directory for cached balls, keyed by group hash and radius.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Seed for every randomized step (default 42).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative tolerance for equality checks.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Witness caps `c,k` for growth comparisons against sampled tables.
    #[arg(long, global = true, value_parser = parse_caps)]
    caps: Option<(u32, u32)>,
    /// Largest ball, in elements, any command may enumerate.
    #[arg(long, global = true)]
    max_elements: Option<usize>,
    /// Directory for report and series files, in addition to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML experiment config; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate a ball and print `n,sigma,beta`.
    Ball {
        group: String,
        radius: Option<u32>,
    },
    /// Compare growth functions or test submultiplicativity.
    Growth(GrowthArgs),
    /// Weighted norm of an element file.
    Norm {
        #[command(flatten)]
        elem: ElementArgs,
        file: PathBuf,
        sigma: String,
        r: f64,
        /// Summation exponent, a real >= 1 or `inf`.
        #[arg(long, default_value = "1")]
        p: String,
    },
    /// Convolution of two element files with optional product checks.
    Conv(ConvArgs),
    /// Hopf structure maps and the coproduct norm identity.
    Hopf(HopfArgs),
    /// Grothendieck-Pietsch summability diagnostic for a group and σ.
    Nuclearity {
        group: String,
        sigma: Option<String>,
        #[arg(long, value_parser = parse_grid)]
        rho_grid: Option<Vec<f64>>,
        /// Largest shell used (default 30, or 16 when no closed form exists).
        #[arg(long)]
        radius: Option<u32>,
    },
    /// Partial sums of the complete growth series.
    CompleteGrowth {
        group: String,
        sigma: String,
        /// `|z|`, at most 1.
        z: f64,
        r: f64,
        radius: Option<u32>,
        /// Also search the R grid for the smallest summable exponent.
        #[arg(long)]
        minimal_r: bool,
        #[arg(long, value_parser = parse_grid)]
        r_grid: Option<Vec<f64>>,
    },
    /// BW seminorm values with truncation-error bounds.
    Bw(BwArgs),
    /// Run the full verification battery and print its JSON report.
    VerifyAll {
        /// Random elements or pairs per sampled check.
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct ElementArgs {
    /// Group of the element files; defaults to the config's `[group]`.
    #[arg(long)]
    group: Option<String>,
}

#[derive(Args, Debug)]
struct GrowthArgs {
    sigma: String,
    other: Option<String>,
    /// Check σ(n+m) <= σ(n)σ(m) for n + m up to this range.
    #[arg(long, value_name = "RANGE")]
    check_submult: Option<u64>,
    /// Fit the almost-submultiplicative constant for this ε.
    #[arg(long, value_name = "EPS")]
    almost: Option<f64>,
    /// Range for witness searches and fits.
    #[arg(long, default_value_t = 10_000)]
    range: u64,
}

#[derive(Args, Debug)]
struct ConvArgs {
    #[command(flatten)]
    elem: ElementArgs,
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value = "poly(1,1)")]
    sigma: String,
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Check ‖ab‖_R <= ‖a‖_R ‖b‖_R.
    #[arg(long)]
    check_submult: bool,
    /// Check ‖ab‖_R <= c ‖a‖_{R+ε} ‖b‖_{R+ε} with a fitted c.
    #[arg(long, value_name = "EPS")]
    almost: Option<f64>,
    /// Check the estimates for a acting on the dual element b.
    #[arg(long)]
    bimodule: bool,
}

#[derive(Args, Debug)]
struct HopfArgs {
    #[command(flatten)]
    elem: ElementArgs,
    file: PathBuf,
    sigma: String,
    r: f64,
    #[arg(long)]
    check_coproduct: bool,
    #[arg(long)]
    check_antipode: bool,
    #[arg(long)]
    check_counit: bool,
}

#[derive(Args, Debug)]
struct BwArgs {
    group: String,
    rho: f64,
    m: u32,
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    ell: u64,
    /// Radius of the truncated g-sums (default depends on the group).
    #[arg(long)]
    truncation: Option<u32>,
    /// Evaluate at every k with L(k) up to this radius.
    #[arg(long, default_value_t = 2)]
    point_radius: u32,
    /// Evaluate at these normal forms instead.
    #[arg(long = "point")]
    points: Vec<String>,
    /// Largest accepted tail bound, as a fraction of the value.
    #[arg(long)]
    tail_fraction: Option<f64>,
    /// Also fit the comparison constants against factorial weights.
    #[arg(long)]
    compare: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let file = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let s = Settings::new(file, cli.seed, cli.tolerance, cli.caps, cli.max_elements, cli.cache_dir, cli.out_dir);
    match cli.command {
        Command::Ball { group, radius } => commands::ball(&s, &group, radius),
        Command::Growth(a) => commands::growth(&s, &a.sigma, a.other.as_deref(), a.check_submult, a.almost, a.range),
        Command::Norm { elem, file, sigma, r, p } => commands::norm(&s, elem.group.as_deref(), &file, &sigma, r, &p),
        Command::Conv(a) => commands::conv(
            &s,
            a.elem.group.as_deref(),
            &a.a,
            &a.b,
            &a.sigma,
            a.r,
            commands::ConvChecks { submult: a.check_submult, almost: a.almost, bimodule: a.bimodule },
        ),
        Command::Hopf(a) => {
            let all = !(a.check_coproduct || a.check_antipode || a.check_counit);
            let checks = commands::HopfChecks {
                coproduct: all || a.check_coproduct,
                antipode: all || a.check_antipode,
                counit: all || a.check_counit,
            };
            commands::hopf(&s, a.elem.group.as_deref(), &a.file, &a.sigma, a.r, checks)
        }
        Command::Nuclearity { group, sigma, rho_grid, radius } => {
            commands::nuclearity(&s, &group, sigma.as_deref(), rho_grid, radius)
        }
        Command::CompleteGrowth { group, sigma, z, r, radius, minimal_r, r_grid } => {
            commands::complete_growth(&s, &group, &sigma, z, r, radius, minimal_r.then_some(r_grid))
        }
        Command::Bw(a) => commands::bw(
            &s,
            &commands::BwRequest {
                group: a.group,
                rho: a.rho,
                m: a.m,
                file: a.file,
                ell: a.ell,
                truncation: a.truncation,
                point_radius: a.point_radius,
                points: a.points,
                tail_fraction: a.tail_fraction,
                compare: a.compare,
            },
        ),
        Command::VerifyAll { samples } => commands::verify_all(&s, samples),
    }
}
