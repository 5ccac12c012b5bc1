use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use combkit::tradeoff::instrument::{MAX_D, MIN_D};
use combkit::{Result, TradeoffPoint};

#[derive(Debug, Parser)]
#[command(name = "combkit", version, about = "Optimal information-disturbance networks for unknown unitaries")]
pub struct Cli {
    /// Worker threads for Monte Carlo runs; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the optimal trade-off curve uniformly in I.
    Curve(CurveArgs),
    /// Compare analytic figures of merit with Monte Carlo estimates.
    Verify(VerifyArgs),
    /// Dump the isometric stages realizing the averaged comb.
    Realize(RealizeArgs),
    /// Simulate single runs of the optimal network.
    Trajectory(TrajectoryArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    Lower,
    Upper,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Dimension of the unknown unitary.
    #[arg(long, value_parser = clap::value_parser!(u8).range(MIN_D as i64..=MAX_D as i64))]
    pub d: u8,

    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Common {
    pub fn d(&self) -> usize {
        self.d as usize
    }
}

/// Exactly one of `--x`, `--info`, `--p`.
#[derive(Clone, Copy, Debug, Args)]
#[group(required = true, multiple = false)]
pub struct PointSpec {
    /// Amplitude x of the seed; y follows from the constraint.
    #[arg(long)]
    pub x: Option<f64>,

    /// Information I on the lower branch of the curve.
    #[arg(long)]
    pub info: Option<f64>,

    /// Weight p of the information gain in the optimized functional.
    #[arg(long)]
    pub p: Option<f64>,
}

impl PointSpec {
    pub fn point(&self, d: usize) -> Result<TradeoffPoint> {
        match (self.x, self.info, self.p) {
            (Some(x), _, _) => Ok(TradeoffPoint::from_x(x, d)?.with_inferred_p()),
            (_, Some(i), _) => Ok(TradeoffPoint::from_info(i, d)?.with_inferred_p()),
            (_, _, Some(p)) => Ok(combkit::tradeoff::optimal_seed_for_p(p, d)?.point),
            _ => unreachable!("clap enforces one parametrization"),
        }
    }

    pub fn describe(&self) -> (&'static str, f64) {
        match (self.x, self.info, self.p) {
            (Some(x), _, _) => ("x", x),
            (_, Some(i), _) => ("info", i),
            (_, _, Some(p)) => ("p", p),
            _ => unreachable!("clap enforces one parametrization"),
        }
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: Common,

    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..))]
    pub points: u64,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long, value_enum, default_value_t = Branch::Lower)]
    pub branch: Branch,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,

    #[command(flatten)]
    pub point: PointSpec,

    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RealizeArgs {
    #[command(flatten)]
    pub common: Common,

    #[command(flatten)]
    pub point: PointSpec,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[command(flatten)]
    pub common: Common,

    #[command(flatten)]
    pub point: PointSpec,

    /// Number of trajectories.
    #[arg(long, alias = "count", default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: u64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
