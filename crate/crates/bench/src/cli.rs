use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hybrid_pipecg::hetero::{DeviceConfig, Hybrid3Options};
use hybrid_pipecg::solvers::SolverConfig;

use crate::problem::{ProblemSpec, Source};
use crate::record::DeviceSnapshot;
use crate::run::{RunConfig, Strategy};

#[derive(Debug, Parser)]
#[command(
    name = "pipecg-bench",
    version,
    about = "Run PCG, PIPECG and the hybrid schedules on sparse SPD systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve once with one strategy and print the run record.
    Solve(SolveArgs),
    /// Run several strategies on the same problem and tabulate them.
    Compare(CompareArgs),
    /// Profile both devices and print the resulting split.
    Profile(ProfileArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Matrix Market file (coordinate real general or symmetric).
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,

    /// 125-point Poisson operator on an n x n x n grid.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub poisson: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Absolute tolerance on the preconditioned residual norm.
    #[arg(long, default_value_t = 1e-5, value_parser = positive)]
    pub tol: f64,

    #[arg(long, default_value_t = 10_000)]
    pub max_iters: usize,

    /// Record the residual norm after every iteration.
    #[arg(long)]
    pub history: bool,

    /// Recompute b - Ax every this many iterations (pipecg only).
    #[arg(long, value_name = "K", default_value_t = 0)]
    pub drift_every: usize,

    /// Reserved; every solver is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DeviceArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub host_workers: u64,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub accel_workers: u64,

    /// Slow-down factor applied to every host kernel.
    #[arg(long, default_value_t = 1.0, value_parser = throttle)]
    pub host_throttle: f64,

    /// Slow-down factor applied to every accelerator kernel.
    #[arg(long, default_value_t = 1.0, value_parser = throttle)]
    pub accel_throttle: f64,

    /// Per-copy latency of the host/accelerator link.
    #[arg(long, value_name = "US", default_value_t = 0)]
    pub xfer_latency_us: u64,

    /// Link bandwidth in MB/s; 0 means unlimited.
    #[arg(long, value_name = "MBPS", default_value_t = 0.0, value_parser = non_negative)]
    pub xfer_bandwidth_mbps: f64,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Fix the host share of nonzeros instead of profiling.
    #[arg(long, value_name = "R", value_parser = unit_interval)]
    pub pin_ratio: Option<f64>,

    /// Profile on the first R rows only.
    #[arg(long, value_name = "R", value_parser = clap::value_parser!(u64).range(1..))]
    pub profile_rows: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub strategy: Strategy,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub devices: DeviceArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Comma-separated strategies, run in the order given.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "pcg,pipecg,hybrid1,hybrid2,hybrid3"
    )]
    pub strategies: Vec<Strategy>,
    /// Strategy the speedup column is relative to; defaults to the first.
    #[arg(long)]
    pub baseline: Option<Strategy>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub devices: DeviceArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub devices: DeviceArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// SPMV repetitions per device; the fastest counts.
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

impl SourceArgs {
    pub fn spec(&self, solver: Option<&SolverArgs>) -> ProblemSpec {
        let source = match (&self.matrix, self.poisson) {
            (Some(path), _) => Source::MatrixMarket(path.clone()),
            (None, Some(n)) => Source::Poisson(n as usize),
            (None, None) => unreachable!("clap enforces one source"),
        };
        let mut spec = ProblemSpec::new(source);
        if let Some(s) = solver {
            spec.tolerance = s.tol;
            spec.max_iterations = s.max_iters;
        }
        spec
    }
}

impl DeviceArgs {
    pub fn snapshot(&self) -> DeviceSnapshot {
        DeviceSnapshot {
            host: DeviceConfig::new(self.host_workers as usize, self.host_throttle),
            accel: DeviceConfig::new(self.accel_workers as usize, self.accel_throttle),
            xfer_latency_us: self.xfer_latency_us,
            xfer_bandwidth_mbps: self.xfer_bandwidth_mbps,
        }
    }
}

impl SplitArgs {
    pub fn hybrid3_options(&self, runs: usize) -> hybrid_pipecg::Result<Hybrid3Options> {
        let profile_override = self
            .pin_ratio
            .map(hybrid_pipecg::hetero::DeviceProfile::pinned)
            .transpose()?;
        Ok(Hybrid3Options {
            profile_override,
            profile_runs: runs,
            profile_rows: self.profile_rows.map(|r| r as usize),
        })
    }
}

pub fn run_config(
    solver: &SolverArgs,
    devices: &DeviceArgs,
    split: &SplitArgs,
) -> hybrid_pipecg::Result<RunConfig> {
    let mut cfg = SolverConfig::default()
        .with_tolerance(solver.tol)
        .with_max_iterations(solver.max_iters);
    if solver.history {
        cfg = cfg.with_history();
    }
    if solver.drift_every > 0 {
        cfg = cfg.with_drift_check(solver.drift_every);
    }
    Ok(RunConfig {
        solver: cfg,
        devices: devices.snapshot(),
        hybrid3: split.hybrid3_options(Hybrid3Options::default().profile_runs)?,
    })
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|e| format!("`{s}` is not a number: {e}"))
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a positive number, got {v}"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a finite number >= 0, got {v}"))
    }
}

fn throttle(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v >= 1.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be a finite number >= 1, got {v}"))
    }
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in [0, 1], got {v}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn sources_are_exclusive() {
        let both = Cli::try_parse_from([
            "pipecg-bench",
            "solve",
            "--poisson",
            "4",
            "--matrix",
            "a.mtx",
            "--strategy",
            "pcg",
        ]);
        assert!(both.is_err());
        let neither = Cli::try_parse_from(["pipecg-bench", "solve", "--strategy", "pcg"]);
        assert!(neither.is_err());
    }

    #[test]
    fn strategy_lists_split_on_commas() {
        let cli = Cli::try_parse_from([
            "pipecg-bench",
            "compare",
            "--poisson",
            "4",
            "--strategies",
            "pipecg,hybrid3",
        ])
        .unwrap();
        let Command::Compare(args) = cli.command else {
            panic!("expected compare")
        };
        assert_eq!(args.strategies, vec![Strategy::Pipecg, Strategy::Hybrid3]);
    }

    #[test]
    fn ranges_are_checked() {
        for bad in [
            ["--pin-ratio", "1.5"],
            ["--accel-throttle", "0.5"],
            ["--tol", "0"],
        ] {
            let mut argv = vec![
                "pipecg-bench",
                "solve",
                "--poisson",
                "4",
                "--strategy",
                "hybrid3",
            ];
            argv.extend(bad);
            assert!(Cli::try_parse_from(argv).is_err(), "{bad:?}");
        }
    }
}
