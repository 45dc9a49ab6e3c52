//! Experiment harness: seeded runs, multi-seed suites, and file outputs.
//!
//! A suite fans out over (algorithm, seed) pairs. Each job owns its state
//! exclusively, so jobs run in parallel when the `parallel` feature (default)
//! is enabled; [`run_suite_sequential`] always executes in order and produces
//! identical results. Results merge deterministically in job order either way.
//!
//! File outputs per run directory: `trace.csv`, `summary.csv`, `bounds.csv`
//! (when the environment certifies a curvature), `config.txt`, and optionally
//! `env.csv`. Suite-level outputs: `summary.csv` (per-algorithm checkpoint
//! quantiles) and `curves.csv` (long format: round, algorithm, seed,
//! cum_regret). All CSVs carry a header row, UTF-8, LF.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::bounds::{m_adagrad_bound, mm_adagrad_bound, BoundInputs};
use crate::env::{
    make_drifting_regression, make_strongly_convex_stream, write_environment_csv, EnvKind,
    EnvironmentConfig,
};
use crate::error::{Error, Result};
use crate::loss::LossRound;
use crate::metrics::{
    gradient_history_norms, path_length_l1, path_length_l2, squared_path_length, write_trace_csv,
    RegretLedger,
};
use crate::optimizer::{AlgorithmKind, Optimizer, OptimizerConfig};
use crate::region::FeasibleRegion;
use crate::vector::DecisionVector;

/// Full description of an experiment: one or more algorithms sharing
/// hyperparameters, an environment template, and the seeds to run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithms: Vec<AlgorithmKind>,
    pub alpha: f64,
    pub beta: f64,
    pub inner_k: usize,
    /// Environment template; its `seed` field is overridden per run.
    pub environment: EnvironmentConfig,
    /// Curvature of the quadratic stream; required for that kind.
    pub quad_curvature: Option<f64>,
    pub seeds: Vec<u64>,
    /// Rounds at which suite statistics and bound reports are evaluated.
    pub checkpoints: Vec<usize>,
    /// Balance parameter for the squared-path bound branch; defaults to the
    /// environment's smoothness constant.
    pub gamma: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub dump_environment: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(Error::config("at least one algorithm is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("at least one seed is required"));
        }
        for pair in self.checkpoints.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::config("checkpoints must be strictly increasing"));
            }
        }
        if let Some(&first) = self.checkpoints.first() {
            if first == 0 {
                return Err(Error::config("checkpoints start at round 1"));
            }
        }
        if let Some(&last) = self.checkpoints.last() {
            if last > self.environment.horizon {
                return Err(Error::config(format!(
                    "checkpoint {last} exceeds horizon {}",
                    self.environment.horizon
                )));
            }
        }
        match self.environment.kind {
            EnvKind::StronglyConvexQuadratic => {
                if self.quad_curvature.is_none() {
                    return Err(Error::config(
                        "the quadratic environment requires a curvature",
                    ));
                }
            }
            EnvKind::SquareRegression => {
                if self.quad_curvature.is_some() {
                    return Err(Error::config(
                        "curvature only applies to the quadratic environment",
                    ));
                }
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return Err(Error::config("gamma must be positive"));
            }
        }
        self.environment.validate()?;
        for &algorithm in &self.algorithms {
            self.optimizer_config(algorithm).validate()?;
        }
        Ok(())
    }

    pub fn optimizer_config(&self, algorithm: AlgorithmKind) -> OptimizerConfig {
        OptimizerConfig {
            algorithm,
            alpha: self.alpha,
            beta: self.beta,
            inner_k: self.inner_k,
        }
    }

    /// The decay the algorithm actually applies: the baseline and OGD run
    /// without momentum regardless of the configured decay.
    pub fn effective_beta(&self, algorithm: AlgorithmKind) -> f64 {
        match algorithm {
            AlgorithmKind::MAdagrad | AlgorithmKind::MmAdagrad => self.beta,
            AlgorithmKind::Adagrad | AlgorithmKind::Ogd => 0.0,
        }
    }

    fn rounds_for_seed(&self, seed: u64) -> Result<Vec<LossRound>> {
        let mut env = self.environment.clone();
        env.seed = seed;
        match env.kind {
            EnvKind::SquareRegression => make_drifting_regression(&env),
            EnvKind::StronglyConvexQuadratic => {
                make_strongly_convex_stream(&env, self.quad_curvature.expect("validated"))
            }
        }
    }
}

/// Scalar summary of one completed run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    pub horizon: usize,
    pub final_regret: f64,
    pub path_l1: f64,
    pub path_l2: f64,
    pub path_sq: f64,
    pub empirical_grad_inf: f64,
    pub gradient_queries: u64,
}

/// One row of the bound report.
#[derive(Debug, Clone)]
pub struct BoundRow {
    pub checkpoint: usize,
    pub regret: f64,
    pub thm1_rhs: Option<f64>,
    pub thm2_branch1: Option<f64>,
    pub thm2_branch2: Option<f64>,
    pub thm2_min: Option<f64>,
    pub gamma_used: Option<f64>,
}

/// Everything a single run produces.
#[derive(Debug)]
pub struct RunOutput {
    pub ledger: RegretLedger,
    pub summary: RunSummary,
    pub bound_rows: Vec<BoundRow>,
}

/// Executes one seeded run of one algorithm: play, record, update, repeat.
pub fn run_single(cfg: &RunConfig, algorithm: AlgorithmKind, seed: u64) -> Result<RunOutput> {
    cfg.validate()?;
    let rounds = cfg.rounds_for_seed(seed)?;
    let region = cfg.environment.region.clone();
    let x1 = region.center_point();
    let mut optimizer = Optimizer::new(cfg.optimizer_config(algorithm), &region, x1.clone())?;
    let mut ledger = RegretLedger::new(cfg.environment.dim);

    for (idx, round) in rounds.iter().enumerate() {
        let t = idx + 1;
        // losses are charged at the pre-update iterate
        let played = optimizer.iterate().clone();
        let loss = round.value(&played);
        let comparator_loss = round.value(&round.comparator);
        if !loss.is_finite() || !comparator_loss.is_finite() {
            return Err(Error::Numerical {
                round: t,
                message: "non-finite loss".into(),
            });
        }
        let step = optimizer.step(round, &region).map_err(|e| match e {
            Error::Degenerate(message) => Error::Numerical { round: t, message },
            other => other,
        })?;
        debug_assert_eq!(step.played, played);
        ledger.record(t, loss, comparator_loss, round.comparator.clone(), step.gradients)?;
    }
    if ledger.len() != cfg.environment.horizon {
        return Err(Error::contract("ledger length does not match the horizon"));
    }

    let comparators = ledger.comparators();
    let (_, path_l1) = path_length_l1(comparators)?;
    let path_l2 = path_length_l2(comparators)?;
    let (_, path_sq) = squared_path_length(comparators)?;
    let summary = RunSummary {
        algorithm,
        seed,
        horizon: ledger.len(),
        final_regret: ledger.dynamic_regret()?,
        path_l1,
        path_l2,
        path_sq,
        empirical_grad_inf: ledger.empirical_grad_inf(),
        gradient_queries: optimizer.gradient_queries(),
    };

    let bound_rows = match rounds[0].strong_convexity {
        Some(lambda) => bound_report(cfg, algorithm, &ledger, &rounds, &x1, lambda)?,
        None => Vec::new(),
    };

    Ok(RunOutput {
        ledger,
        summary,
        bound_rows,
    })
}

/// Evaluates the bound report at each checkpoint of a curvature-certified
/// run. Columns that do not apply to the run's algorithm (or whose
/// hypotheses fail) stay empty.
fn bound_report(
    cfg: &RunConfig,
    algorithm: AlgorithmKind,
    ledger: &RegretLedger,
    rounds: &[LossRound],
    x1: &DecisionVector,
    lambda: f64,
) -> Result<Vec<BoundRow>> {
    let smoothness = rounds.iter().map(|r| r.smoothness).fold(0.0, f64::max);
    let gamma = cfg.gamma.unwrap_or(smoothness);
    let mut rows = Vec::with_capacity(cfg.checkpoints.len());
    let mut comparator_grad_sq_prefix = Vec::with_capacity(ledger.len());
    let mut acc = 0.0;
    for round in rounds {
        let g = round.gradient(&round.comparator);
        acc += g.dot(&g)?;
        comparator_grad_sq_prefix.push(acc);
    }

    for &checkpoint in &cfg.checkpoints {
        let comparators = &ledger.comparators()[..checkpoint];
        let (path_l1_per_coord, _) = path_length_l1(comparators)?;
        let (path_sq_per_coord, _) = squared_path_length(comparators)?;
        let norms = gradient_history_norms(ledger, checkpoint);
        let acc_first = aggregate_max(&ledger.accumulator_upto(1));
        let acc_final = aggregate_max(&ledger.accumulator_upto(checkpoint));
        let inputs = BoundInputs {
            alpha: cfg.alpha,
            beta: cfg.effective_beta(algorithm),
            lambda,
            smoothness,
            diameter_inf: cfg.environment.region.diameter_inf(),
            accumulator_first: acc_first,
            accumulator_final: acc_final,
            path_l1_per_coord,
            path_sq_per_coord,
            grad_norms_per_coord: norms.per_coordinate.clone(),
            initial_point: x1.clone(),
            initial_comparator: comparators[0].clone(),
            inner_k: cfg.inner_k,
            gamma,
            comparator_grad_sq_sum: comparator_grad_sq_prefix[checkpoint - 1],
        };
        let (thm1_rhs, thm2, gamma_used) = match algorithm {
            AlgorithmKind::Adagrad | AlgorithmKind::MAdagrad => {
                (m_adagrad_bound(&inputs).ok().map(|b| b.total), None, None)
            }
            AlgorithmKind::MmAdagrad => {
                let evaluated = mm_adagrad_bound(&inputs).ok();
                let gamma_used = evaluated.as_ref().map(|_| gamma);
                (None, evaluated, gamma_used)
            }
            AlgorithmKind::Ogd => (None, None, None),
        };
        rows.push(BoundRow {
            checkpoint,
            regret: ledger.dynamic_regret_upto(checkpoint)?,
            thm1_rhs,
            thm2_branch1: thm2.as_ref().map(|b| b.path_branch),
            thm2_branch2: thm2.as_ref().map(|b| b.sq_branch),
            thm2_min: thm2.as_ref().map(|b| b.minimum),
            gamma_used,
        });
    }
    Ok(rows)
}

/// Per-coordinate maximum across inner-index accumulators.
fn aggregate_max(accumulators: &[DecisionVector]) -> DecisionVector {
    let dim = accumulators[0].len();
    DecisionVector::from_raw(
        (0..dim)
            .map(|i| accumulators.iter().map(|a| a[i]).fold(0.0, f64::max))
            .collect(),
    )
}

/// Best fixed decision in hindsight: projected gradient descent on the
/// aggregate loss `(1/T) sum_t f_t` to first-order tolerance 1e-10.
pub fn best_fixed_point(
    rounds: &[LossRound],
    region: &FeasibleRegion,
) -> Result<DecisionVector> {
    if rounds.is_empty() {
        return Err(Error::contract("best_fixed_point needs at least one round"));
    }
    let t = rounds.len() as f64;
    let mean_smoothness = rounds.iter().map(|r| r.smoothness).sum::<f64>() / t;
    let step = 1.0 / mean_smoothness.max(1e-12);
    let ones = DecisionVector::filled(1.0, region.dim());
    let aggregate_grad = |x: &DecisionVector| -> Result<DecisionVector> {
        let mut g = DecisionVector::zeros(region.dim());
        for round in rounds {
            g = g.add(&round.gradient(x))?;
        }
        Ok(g.scale(1.0 / t))
    };

    let mut x = region.center_point();
    for _ in 0..1_000_000 {
        let g = aggregate_grad(&x)?;
        let next = region.project_weighted(&ones, &x.sub(&g.scale(step))?)?;
        let residual = x
            .sub(&region.project_weighted(&ones, &x.sub(&g)?)?)?
            .inf_norm();
        x = next;
        if residual <= 1e-10 {
            return Ok(x);
        }
    }
    Err(Error::degenerate(
        "aggregate-loss solver did not reach tolerance 1e-10",
    ))
}

/// Outcome of one suite job.
#[derive(Debug)]
pub struct SuiteRun {
    pub algorithm: AlgorithmKind,
    pub seed: u64,
    /// Summary, or the failure message for this (algorithm, seed) pair.
    pub result: std::result::Result<RunSummary, String>,
    /// Cumulative dynamic regret per round (successful runs only).
    pub curve: Option<Vec<f64>>,
}

/// Per-algorithm quantiles of cumulative dynamic regret at one checkpoint.
#[derive(Debug, Clone)]
pub struct CheckpointStat {
    pub algorithm: AlgorithmKind,
    pub checkpoint: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub runs: usize,
}

/// Comparison table over algorithms and seeds.
#[derive(Debug)]
pub struct SuiteResult {
    pub runs: Vec<SuiteRun>,
    pub stats: Vec<CheckpointStat>,
}

impl SuiteResult {
    pub fn failures(&self) -> impl Iterator<Item = (&AlgorithmKind, u64, &str)> {
        self.runs.iter().filter_map(|r| {
            r.result
                .as_ref()
                .err()
                .map(|msg| (&r.algorithm, r.seed, msg.as_str()))
        })
    }

    /// Median final cumulative regret of an algorithm, if any run succeeded.
    pub fn median_final_regret(&self, algorithm: AlgorithmKind) -> Option<f64> {
        let mut finals: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .filter_map(|r| r.result.as_ref().ok().map(|s| s.final_regret))
            .collect();
        if finals.is_empty() {
            return None;
        }
        finals.sort_by(f64::total_cmp);
        Some(quantile(&finals, 0.5))
    }

    /// Median cumulative regret at a given round.
    pub fn median_regret_at(&self, algorithm: AlgorithmKind, round: usize) -> Option<f64> {
        let mut values: Vec<f64> = self
            .runs
            .iter()
            .filter(|r| r.algorithm == algorithm)
            .filter_map(|r| r.curve.as_ref().map(|c| c[round - 1]))
            .collect();
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        Some(quantile(&values, 0.5))
    }
}

/// Runs the whole suite, fanning jobs out across threads when the
/// `parallel` feature is enabled.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    let jobs = job_list(cfg);
    prepare_output_root(cfg)?;
    #[cfg(feature = "parallel")]
    let outcomes: Vec<SuiteRun> = jobs
        .par_iter()
        .map(|&(algorithm, seed)| execute_job(cfg, algorithm, seed))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<SuiteRun> = jobs
        .iter()
        .map(|&(algorithm, seed)| execute_job(cfg, algorithm, seed))
        .collect();
    finish_suite(cfg, outcomes)
}

/// Sequential twin of [`run_suite`]; same outputs, one job at a time.
pub fn run_suite_sequential(cfg: &RunConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    let jobs = job_list(cfg);
    prepare_output_root(cfg)?;
    let outcomes: Vec<SuiteRun> = jobs
        .iter()
        .map(|&(algorithm, seed)| execute_job(cfg, algorithm, seed))
        .collect();
    finish_suite(cfg, outcomes)
}

fn job_list(cfg: &RunConfig) -> Vec<(AlgorithmKind, u64)> {
    let mut jobs = Vec::with_capacity(cfg.algorithms.len() * cfg.seeds.len());
    for &algorithm in &cfg.algorithms {
        for &seed in &cfg.seeds {
            jobs.push((algorithm, seed));
        }
    }
    jobs
}

fn prepare_output_root(cfg: &RunConfig) -> Result<()> {
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn execute_job(cfg: &RunConfig, algorithm: AlgorithmKind, seed: u64) -> SuiteRun {
    match run_single(cfg, algorithm, seed) {
        Ok(output) => {
            let write_result = match &cfg.out_dir {
                Some(dir) => write_run_outputs(cfg, dir, algorithm, seed, &output),
                None => Ok(()),
            };
            match write_result {
                Ok(()) => SuiteRun {
                    algorithm,
                    seed,
                    curve: Some(output.ledger.cumulative_regret_curve()),
                    result: Ok(output.summary),
                },
                Err(e) => SuiteRun {
                    algorithm,
                    seed,
                    curve: None,
                    result: Err(e.to_string()),
                },
            }
        }
        Err(e) => SuiteRun {
            algorithm,
            seed,
            curve: None,
            result: Err(e.to_string()),
        },
    }
}

fn finish_suite(cfg: &RunConfig, runs: Vec<SuiteRun>) -> Result<SuiteResult> {
    let mut stats = Vec::new();
    for &algorithm in &cfg.algorithms {
        for &checkpoint in &cfg.checkpoints {
            let mut values: Vec<f64> = runs
                .iter()
                .filter(|r| r.algorithm == algorithm)
                .filter_map(|r| r.curve.as_ref().map(|c| c[checkpoint - 1]))
                .collect();
            if values.is_empty() {
                continue;
            }
            values.sort_by(f64::total_cmp);
            stats.push(CheckpointStat {
                algorithm,
                checkpoint,
                median: quantile(&values, 0.5),
                q1: quantile(&values, 0.25),
                q3: quantile(&values, 0.75),
                runs: values.len(),
            });
        }
    }
    let result = SuiteResult { runs, stats };
    if let Some(dir) = &cfg.out_dir {
        write_suite_outputs(dir, &result)?;
    }
    Ok(result)
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn run_dir_name(algorithm: AlgorithmKind, seed: u64) -> String {
    format!("{algorithm}-seed{seed}")
}

fn write_run_outputs(
    cfg: &RunConfig,
    root: &Path,
    algorithm: AlgorithmKind,
    seed: u64,
    output: &RunOutput,
) -> Result<()> {
    let dir = root.join(run_dir_name(algorithm, seed));
    fs::create_dir_all(&dir)?;

    let mut trace = fs::File::create(dir.join("trace.csv"))?;
    write_trace_csv(&mut trace, &output.ledger)?;

    let mut summary = fs::File::create(dir.join("summary.csv"))?;
    writeln!(
        summary,
        "algorithm,seed,horizon,final_dynamic_regret,path_l1,path_l2,path_sq,empirical_g_inf,gradient_queries"
    )?;
    let s = &output.summary;
    writeln!(
        summary,
        "{},{},{},{},{},{},{},{},{}",
        s.algorithm,
        s.seed,
        s.horizon,
        s.final_regret,
        s.path_l1,
        s.path_l2,
        s.path_sq,
        s.empirical_grad_inf,
        s.gradient_queries
    )?;

    if !output.bound_rows.is_empty() {
        let mut bounds = fs::File::create(dir.join("bounds.csv"))?;
        writeln!(
            bounds,
            "T,regret,thm1_rhs,thm2_branch1,thm2_branch2,thm2_min,gamma_used"
        )?;
        let fmt = |v: &Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for row in &output.bound_rows {
            writeln!(
                bounds,
                "{},{},{},{},{},{},{}",
                row.checkpoint,
                row.regret,
                fmt(&row.thm1_rhs),
                fmt(&row.thm2_branch1),
                fmt(&row.thm2_branch2),
                fmt(&row.thm2_min),
                fmt(&row.gamma_used)
            )?;
        }
    }

    let mut config = fs::File::create(dir.join("config.txt"))?;
    write_config_echo(&mut config, cfg, algorithm, seed)?;

    if cfg.dump_environment {
        let rounds = cfg.rounds_for_seed(seed)?;
        let mut env = fs::File::create(dir.join("env.csv"))?;
        write_environment_csv(&mut env, &rounds, cfg.environment.drift_every)?;
    }
    Ok(())
}

fn write_config_echo<W: Write>(
    out: &mut W,
    cfg: &RunConfig,
    algorithm: AlgorithmKind,
    seed: u64,
) -> std::io::Result<()> {
    writeln!(out, "algorithm={algorithm}")?;
    writeln!(out, "alpha={}", cfg.alpha)?;
    writeln!(out, "beta={}", cfg.effective_beta(algorithm))?;
    writeln!(out, "inner_k={}", cfg.inner_k)?;
    let env = &cfg.environment;
    let kind = match env.kind {
        EnvKind::SquareRegression => "regression",
        EnvKind::StronglyConvexQuadratic => "quadratic",
    };
    writeln!(out, "env={kind}")?;
    writeln!(out, "dim={}", env.dim)?;
    writeln!(out, "horizon={}", env.horizon)?;
    writeln!(out, "drift_every={}", env.drift_every)?;
    match &env.region {
        FeasibleRegion::Ball { radius, .. } => {
            writeln!(out, "region=ball")?;
            writeln!(out, "radius={radius}")?;
        }
        FeasibleRegion::Box { lower, upper } => {
            writeln!(out, "region=box")?;
            writeln!(out, "lower={:?}", lower.as_slice())?;
            writeln!(out, "upper={:?}", upper.as_slice())?;
        }
    }
    writeln!(out, "noise_lo={}", env.noise_range.0)?;
    writeln!(out, "noise_hi={}", env.noise_range.1)?;
    writeln!(out, "seed={seed}")?;
    if let Some(lambda) = cfg.quad_curvature {
        writeln!(out, "lambda={lambda}")?;
    }
    if let Some(gamma) = cfg.gamma {
        writeln!(out, "gamma={gamma}")?;
    }
    let checkpoints: Vec<String> = cfg.checkpoints.iter().map(|c| c.to_string()).collect();
    writeln!(out, "checkpoints={}", checkpoints.join(","))?;
    Ok(())
}

fn write_suite_outputs(dir: &Path, result: &SuiteResult) -> Result<()> {
    let mut summary = fs::File::create(dir.join("summary.csv"))?;
    writeln!(
        summary,
        "algorithm,checkpoint,median_regret,q1_regret,q3_regret,runs"
    )?;
    for stat in &result.stats {
        writeln!(
            summary,
            "{},{},{},{},{},{}",
            stat.algorithm, stat.checkpoint, stat.median, stat.q1, stat.q3, stat.runs
        )?;
    }

    let mut curves = fs::File::create(dir.join("curves.csv"))?;
    writeln!(curves, "round,algorithm,seed,cum_regret")?;
    for run in &result.runs {
        if let Some(curve) = &run.curve {
            for (idx, value) in curve.iter().enumerate() {
                writeln!(curves, "{},{},{},{}", idx + 1, run.algorithm, run.seed, value)?;
            }
        }
    }
    Ok(())
}
