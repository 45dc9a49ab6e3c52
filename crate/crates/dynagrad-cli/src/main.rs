//! Benchmark harness CLI.
//!
//! Runs one or more learners over seeded synthetic environments and writes
//! CSV traces, summaries, and (for curvature-certified environments) bound
//! reports. Exit codes: 0 on success, 2 on configuration errors, 3 on
//! numerical aborts or failed runs.

// validation uses `!(x > 0.0)` so that NaN fails the check too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use dynagrad::env::{EnvKind, EnvironmentConfig};
use dynagrad::harness::{run_suite, RunConfig, SuiteResult};
use dynagrad::{AlgorithmKind, DecisionVector, Error, FeasibleRegion};

#[derive(Parser, Debug)]
#[command(
    name = "dynagrad",
    about = "Online learning benchmark harness for adaptive gradient methods under drift"
)]
struct Cli {
    /// Algorithms to run, comma separated: adagrad, m-adagrad, mm-adagrad, ogd
    #[arg(long, value_delimiter = ',', default_value = "m-adagrad")]
    algo: Vec<String>,

    /// Constant stepsize
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,

    /// Momentum decay in [0, 1)
    #[arg(long, default_value_t = 0.9)]
    beta: f64,

    /// Inner iterations per round for mm-adagrad
    #[arg(long = "inner-k", default_value_t = 10)]
    inner_k: usize,

    /// Number of rounds
    #[arg(long, default_value_t = 5000)]
    horizon: usize,

    /// Decision dimension
    #[arg(long, default_value_t = 10)]
    dim: usize,

    /// Segment length of the piecewise-constant model sequence
    #[arg(long = "drift-every", default_value_t = 2000)]
    drift_every: usize,

    /// Radius of the ball feasible region (centered at the origin)
    #[arg(long, default_value_t = 2.5)]
    radius: f64,

    /// Environment kind: regression | quadratic
    #[arg(long, default_value = "regression")]
    env: String,

    /// Curvature of the quadratic environment (quadratic only)
    #[arg(long)]
    lambda: Option<f64>,

    /// Seeds: a comma list ("3,17,99") or a bare count N meaning 0..N
    #[arg(long, default_value = "10")]
    seeds: String,

    /// Checkpoint rounds, comma separated; default "100,500,1000,<horizon>"
    /// clipped to the horizon
    #[arg(long)]
    checkpoints: Option<String>,

    /// Output directory; omit to skip file outputs
    #[arg(long)]
    out: Option<PathBuf>,

    /// Balance parameter of the squared-path bound branch (default: the
    /// environment's smoothness constant)
    #[arg(long)]
    gamma: Option<f64>,

    /// Also write each run's environment dump (env.csv)
    #[arg(long = "dump-env", default_value_t = false)]
    dump_env: bool,
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, Error> {
    let trimmed = spec.trim();
    if trimmed.is_empty() {
        return Err(Error::Config("empty seed list".into()));
    }
    let parse_one = |s: &str| -> Result<u64, Error> {
        s.trim()
            .parse::<u64>()
            .map_err(|e| Error::Config(format!("bad seed '{s}': {e}")))
    };
    if trimmed.contains(',') {
        // explicit list; a trailing comma selects a single literal seed
        trimmed
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse_one)
            .collect()
    } else {
        let count = parse_one(trimmed)?;
        if count == 0 {
            return Err(Error::Config("seed count must be >= 1".into()));
        }
        Ok((0..count).collect())
    }
}

fn parse_checkpoints(spec: Option<&str>, horizon: usize) -> Result<Vec<usize>, Error> {
    let mut points = match spec {
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Config(format!("bad checkpoint '{s}': {e}")))
            })
            .collect::<Result<Vec<usize>, Error>>()?,
        None => [100, 500, 1000, horizon]
            .into_iter()
            .filter(|&c| c <= horizon)
            .collect(),
    };
    points.sort_unstable();
    points.dedup();
    Ok(points)
}

fn build_config(cli: &Cli) -> Result<RunConfig, Error> {
    let algorithms = cli
        .algo
        .iter()
        .map(|name| AlgorithmKind::from_str(name))
        .collect::<Result<Vec<_>, Error>>()?;
    let kind = match cli.env.as_str() {
        "regression" => EnvKind::SquareRegression,
        "quadratic" => EnvKind::StronglyConvexQuadratic,
        other => return Err(Error::Config(format!("unknown environment '{other}'"))),
    };
    if !(cli.radius > 0.0) {
        return Err(Error::Config("radius must be positive".into()));
    }
    if cli.dim == 0 {
        return Err(Error::Config("dim must be >= 1".into()));
    }
    let region = FeasibleRegion::ball(DecisionVector::zeros(cli.dim), cli.radius)?;
    Ok(RunConfig {
        algorithms,
        alpha: cli.alpha,
        beta: cli.beta,
        inner_k: cli.inner_k,
        environment: EnvironmentConfig {
            dim: cli.dim,
            horizon: cli.horizon,
            drift_every: cli.drift_every,
            region,
            noise_range: (0.0, 0.1),
            seed: 0,
            kind,
        },
        quad_curvature: cli.lambda,
        seeds: parse_seeds(&cli.seeds)?,
        checkpoints: parse_checkpoints(cli.checkpoints.as_deref(), cli.horizon)?,
        gamma: cli.gamma,
        out_dir: cli.out.clone(),
        dump_environment: cli.dump_env,
    })
}

fn print_result(result: &SuiteResult) {
    println!("algorithm,checkpoint,median_regret,q1_regret,q3_regret,runs");
    for stat in &result.stats {
        println!(
            "{},{},{:.6},{:.6},{:.6},{}",
            stat.algorithm, stat.checkpoint, stat.median, stat.q1, stat.q3, stat.runs
        );
    }
    for run in &result.runs {
        if let Ok(summary) = &run.result {
            eprintln!(
                "run {} seed {}: final regret {:.6}, G_inf {:.4}, queries {}",
                summary.algorithm,
                summary.seed,
                summary.final_regret,
                summary.empirical_grad_inf,
                summary.gradient_queries
            );
        }
    }
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Numerical { .. } | Error::Degenerate(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run_suite(&cfg) {
        Ok(result) => {
            print_result(&result);
            let failures: Vec<String> = result
                .failures()
                .map(|(algo, seed, msg)| format!("{algo} seed {seed}: {msg}"))
                .collect();
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                for f in &failures {
                    eprintln!("failed: {f}");
                }
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
