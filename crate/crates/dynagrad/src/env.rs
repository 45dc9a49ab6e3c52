//! Non-stationary environment generators.
//!
//! Environments are pure functions of their configuration: a seeded,
//! counter-based generator (ChaCha8) is split into one substream per role,
//! so drawing more features never perturbs the model sequence and vice
//! versa. Stream assignment:
//!
//! * stream 0 — piecewise-constant underlying models / quadratic centers
//! * stream 1 — regression features
//! * stream 2 — label noise
//!
//! Models drift on a fixed schedule: a fresh model is sampled at the start
//! of every `drift_every`-round segment, so a horizon of 5000 with
//! `drift_every = 2000` produces three distinct models over the segments
//! `[1, 2000]`, `[2001, 4000]`, `[4001, 5000]` (two change events).

use std::io::Write;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::loss::LossRound;
use crate::region::FeasibleRegion;
use crate::vector::DecisionVector;

const STREAM_MODELS: u64 = 0;
const STREAM_FEATURES: u64 = 1;
const STREAM_NOISE: u64 = 2;

/// Which loss family an environment emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvKind {
    SquareRegression,
    StronglyConvexQuadratic,
}

/// Configuration of a generated environment.
#[derive(Debug, Clone)]
pub struct EnvironmentConfig {
    pub dim: usize,
    pub horizon: usize,
    /// Segment length of the piecewise-constant model sequence.
    pub drift_every: usize,
    pub region: FeasibleRegion,
    /// Support `[lo, hi]` of the uniform label noise (regression only).
    pub noise_range: (f64, f64),
    pub seed: u64,
    pub kind: EnvKind,
}

impl EnvironmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dimension must be >= 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be >= 1"));
        }
        if self.drift_every == 0 || self.drift_every > self.horizon {
            return Err(Error::config(format!(
                "drift_every must lie in [1, horizon]; got {} with horizon {}",
                self.drift_every, self.horizon
            )));
        }
        if self.region.dim() != self.dim {
            return Err(Error::config(format!(
                "region dimension {} does not match configured dimension {}",
                self.region.dim(),
                self.dim
            )));
        }
        if !(self.noise_range.0 <= self.noise_range.1) {
            return Err(Error::config("noise range must satisfy lo <= hi"));
        }
        Ok(())
    }

    fn stream(&self, role: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(role);
        rng
    }

    fn segment_count(&self) -> usize {
        self.horizon.div_ceil(self.drift_every)
    }
}

/// Segment index (0-based) of round `t` (1-based).
pub fn segment_of(t: usize, drift_every: usize) -> usize {
    (t - 1) / drift_every
}

/// Draws a point uniformly from the ball via a normalized Gaussian direction
/// and a `U^(1/p)`-scaled radius.
fn sample_uniform_ball(rng: &mut ChaCha8Rng, center: &DecisionVector, radius: f64) -> DecisionVector {
    let p = center.len();
    loop {
        let dir: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue; // probability-zero redraw
        }
        let r = radius * rng.random_range(0.0..1.0f64).powf(1.0 / p as f64);
        let entries = (0..p).map(|i| center[i] + r * dir[i] / norm).collect();
        return DecisionVector::from_raw(entries);
    }
}

/// Draws a point uniformly from the region.
fn sample_in_region(rng: &mut ChaCha8Rng, region: &FeasibleRegion) -> DecisionVector {
    match region {
        FeasibleRegion::Ball { center, radius } => sample_uniform_ball(rng, center, *radius),
        FeasibleRegion::Box { lower, upper } => DecisionVector::from_raw(
            (0..lower.len())
                .map(|i| rng.random_range(lower[i]..upper[i]))
                .collect(),
        ),
    }
}

/// Generates the drifting square-regression stream: labels are produced by a
/// piecewise-constant underlying model sampled uniformly from the ball, with
/// uniform additive noise; each round's comparator is its segment's model.
pub fn make_drifting_regression(cfg: &EnvironmentConfig) -> Result<Vec<LossRound>> {
    cfg.validate()?;
    if cfg.kind != EnvKind::SquareRegression {
        return Err(Error::config(
            "make_drifting_regression requires the square-regression kind",
        ));
    }
    let (center, radius) = match &cfg.region {
        FeasibleRegion::Ball { center, radius } => (center.clone(), *radius),
        FeasibleRegion::Box { .. } => {
            return Err(Error::config(
                "regression models are sampled from a ball; region must be a ball",
            ))
        }
    };

    let mut model_rng = cfg.stream(STREAM_MODELS);
    let models: Vec<DecisionVector> = (0..cfg.segment_count())
        .map(|_| sample_uniform_ball(&mut model_rng, &center, radius))
        .collect();

    let mut feature_rng = cfg.stream(STREAM_FEATURES);
    let mut noise_rng = cfg.stream(STREAM_NOISE);
    let (lo, hi) = cfg.noise_range;

    let mut rounds = Vec::with_capacity(cfg.horizon);
    for t in 1..=cfg.horizon {
        let model = &models[segment_of(t, cfg.drift_every)];
        let feature = DecisionVector::from_raw(
            (0..cfg.dim).map(|_| feature_rng.sample(StandardNormal)).collect(),
        );
        let noise = if lo == hi {
            lo
        } else {
            noise_rng.random_range(lo..=hi)
        };
        let label = feature.dot(model)? + noise;
        rounds.push(LossRound::square_regression(feature, label, model.clone())?);
    }
    Ok(rounds)
}

/// Generates a stream of strongly convex quadratics with piecewise-constant
/// centers sampled uniformly from the region. Each round's comparator is the
/// exact per-round minimizer, which is the center itself.
pub fn make_strongly_convex_stream(cfg: &EnvironmentConfig, lambda: f64) -> Result<Vec<LossRound>> {
    cfg.validate()?;
    if cfg.kind != EnvKind::StronglyConvexQuadratic {
        return Err(Error::config(
            "make_strongly_convex_stream requires the strongly-convex-quadratic kind",
        ));
    }
    if !(lambda > 0.0) {
        return Err(Error::config(format!(
            "curvature must be positive, got {lambda}"
        )));
    }

    let mut model_rng = cfg.stream(STREAM_MODELS);
    let centers: Vec<DecisionVector> = (0..cfg.segment_count())
        .map(|_| sample_in_region(&mut model_rng, &cfg.region))
        .collect();

    let mut rounds = Vec::with_capacity(cfg.horizon);
    for t in 1..=cfg.horizon {
        let c = centers[segment_of(t, cfg.drift_every)].clone();
        rounds.push(LossRound::quadratic(c.clone(), lambda, c)?);
    }
    Ok(rounds)
}

/// Writes the environment dump CSV: `t,segment_id,comp_0,...,comp_{p-1}`.
pub fn write_environment_csv<W: Write>(
    out: &mut W,
    rounds: &[LossRound],
    drift_every: usize,
) -> std::io::Result<()> {
    let dim = rounds.first().map_or(0, |r| r.dim());
    write!(out, "t,segment_id")?;
    for i in 0..dim {
        write!(out, ",comp_{i}")?;
    }
    writeln!(out)?;
    for (idx, round) in rounds.iter().enumerate() {
        let t = idx + 1;
        write!(out, "{t},{}", segment_of(t, drift_every))?;
        for c in round.comparator.iter() {
            write!(out, ",{c}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
