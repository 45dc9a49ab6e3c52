//! Online learners behind one per-round stepping interface.
//!
//! Four algorithms share the interface:
//!
//! * `MAdagrad` — momentum AdaGrad: an exponential moving average of the
//!   gradients steers the step, a cumulative squared-gradient accumulator
//!   scales it, and the iterate is projected under the accumulator's
//!   square-root weights.
//! * `MmAdagrad` — the multiple-query variant: `K` inner updates per round,
//!   each with its own persistent momentum/accumulator pair indexed by inner
//!   position; the loss is only ever charged at the round's entry point.
//! * `Adagrad` — the momentum-free baseline (the `beta = 0` special case of
//!   `MAdagrad`, kept as an independent code path).
//! * `Ogd` — projected online gradient descent with identity weights.
//!
//! All algorithms charge the loss at the pre-update iterate: round `t` plays
//! `x_t`, then moves to `x_{t+1}`.

use crate::error::{Error, Result};
use crate::loss::LossRound;
use crate::region::FeasibleRegion;
use crate::vector::DecisionVector;

/// Which update rule a learner runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgorithmKind {
    Adagrad,
    MAdagrad,
    MmAdagrad,
    Ogd,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 4] = [
        AlgorithmKind::Adagrad,
        AlgorithmKind::MAdagrad,
        AlgorithmKind::MmAdagrad,
        AlgorithmKind::Ogd,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmKind::Adagrad => "adagrad",
            AlgorithmKind::MAdagrad => "m-adagrad",
            AlgorithmKind::MmAdagrad => "mm-adagrad",
            AlgorithmKind::Ogd => "ogd",
        }
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adagrad" => Ok(AlgorithmKind::Adagrad),
            "m-adagrad" => Ok(AlgorithmKind::MAdagrad),
            "mm-adagrad" => Ok(AlgorithmKind::MmAdagrad),
            "ogd" => Ok(AlgorithmKind::Ogd),
            other => Err(Error::config(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Hyperparameters of a learner.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub algorithm: AlgorithmKind,
    /// Constant stepsize.
    pub alpha: f64,
    /// Momentum decay, in `[0, 1)`. Ignored by `Adagrad` and `Ogd`.
    pub beta: f64,
    /// Inner iterations per round. Only `MmAdagrad` reads it.
    pub inner_k: usize,
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::config(format!(
                "stepsize must be positive, got {}",
                self.alpha
            )));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::config(format!(
                "decay must lie in [0, 1), got {}",
                self.beta
            )));
        }
        if self.inner_k == 0 {
            return Err(Error::config("inner iteration count must be >= 1"));
        }
        Ok(())
    }
}

/// One momentum/accumulator pair `(m, v)`.
#[derive(Debug, Clone)]
pub struct AccumulatorPair {
    pub momentum: DecisionVector,
    pub accumulator: DecisionVector,
}

impl AccumulatorPair {
    fn zeros(dim: usize) -> Self {
        Self {
            momentum: DecisionVector::zeros(dim),
            accumulator: DecisionVector::zeros(dim),
        }
    }
}

/// Mutable per-run state: the iterate plus the algorithm's pairs.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    iterate: DecisionVector,
    pairs: Vec<AccumulatorPair>,
    round: usize,
}

/// Output of one round: the point the loss was charged at, the gradients
/// queried (one per inner iteration), and the iterate moved to.
#[derive(Debug, Clone)]
pub struct Step {
    pub played: DecisionVector,
    pub next: DecisionVector,
    pub gradients: Vec<DecisionVector>,
}

/// A configured learner with exclusive state.
#[derive(Debug, Clone)]
pub struct Optimizer {
    cfg: OptimizerConfig,
    state: OptimizerState,
    gradient_queries: u64,
}

impl Optimizer {
    /// Initializes at `x1`, which must be feasible; all pairs start at zero.
    pub fn new(cfg: OptimizerConfig, region: &FeasibleRegion, x1: DecisionVector) -> Result<Self> {
        cfg.validate()?;
        if x1.len() != region.dim() {
            return Err(Error::contract("initial point dimension mismatch"));
        }
        if !region.contains(&x1) {
            return Err(Error::contract("initial point lies outside the region"));
        }
        let dim = x1.len();
        let pair_count = match cfg.algorithm {
            AlgorithmKind::Adagrad | AlgorithmKind::MAdagrad => 1,
            AlgorithmKind::MmAdagrad => cfg.inner_k,
            AlgorithmKind::Ogd => 0,
        };
        Ok(Self {
            cfg,
            state: OptimizerState {
                iterate: x1,
                pairs: (0..pair_count).map(|_| AccumulatorPair::zeros(dim)).collect(),
                round: 0,
            },
            gradient_queries: 0,
        })
    }

    pub fn config(&self) -> &OptimizerConfig {
        &self.cfg
    }

    /// The point the next round will be played at.
    pub fn iterate(&self) -> &DecisionVector {
        &self.state.iterate
    }

    /// Rounds completed so far.
    pub fn round(&self) -> usize {
        self.state.round
    }

    /// Total gradient oracle queries so far.
    pub fn gradient_queries(&self) -> u64 {
        self.gradient_queries
    }

    /// The momentum/accumulator pairs (one for single-query learners, `K`
    /// for the multiple-query learner, none for OGD).
    pub fn pairs(&self) -> &[AccumulatorPair] {
        &self.state.pairs
    }

    /// Plays the current iterate against `round`, updates state, and returns
    /// the played point, gradients, and next iterate.
    pub fn step(&mut self, round: &LossRound, region: &FeasibleRegion) -> Result<Step> {
        if round.dim() != self.state.iterate.len() {
            return Err(Error::contract("round dimension mismatch"));
        }
        let played = self.state.iterate.clone();
        let step = match self.cfg.algorithm {
            AlgorithmKind::MAdagrad => self.step_scaled(round, region, true)?,
            AlgorithmKind::Adagrad => self.step_scaled(round, region, false)?,
            AlgorithmKind::MmAdagrad => self.step_multiple(round, region)?,
            AlgorithmKind::Ogd => self.step_ogd(round, region)?,
        };
        self.state.iterate = step.next.clone();
        self.state.round += 1;
        debug_assert_eq!(step.played, played);
        Ok(step)
    }

    fn query_gradient(&mut self, round: &LossRound, at: &DecisionVector) -> Result<DecisionVector> {
        let g = round.gradient(at);
        if !g.iter().all(|v| v.is_finite()) {
            return Err(Error::degenerate(format!(
                "non-finite gradient in round {}",
                self.state.round + 1
            )));
        }
        self.gradient_queries += 1;
        Ok(g)
    }

    /// Shared body of the accumulator-scaled algorithms. `with_momentum`
    /// selects between the moving-average direction and the raw gradient.
    fn step_scaled(
        &mut self,
        round: &LossRound,
        region: &FeasibleRegion,
        with_momentum: bool,
    ) -> Result<Step> {
        let played = self.state.iterate.clone();
        let g = self.query_gradient(round, &played)?;
        let beta = if with_momentum { self.cfg.beta } else { 0.0 };
        let pair = &mut self.state.pairs[0];
        pair.momentum = pair
            .momentum
            .scale(beta)
            .add(&g.scale(1.0 - beta))?;
        pair.accumulator = pair.accumulator.add(&g.square())?;
        let direction = if with_momentum {
            pair.momentum.clone()
        } else {
            g.clone()
        };
        let next = scaled_projected_step(
            &played,
            &direction,
            &self.state.pairs[0].accumulator,
            self.cfg.alpha,
            region,
        )?;
        Ok(Step {
            played,
            next,
            gradients: vec![g],
        })
    }

    fn step_multiple(&mut self, round: &LossRound, region: &FeasibleRegion) -> Result<Step> {
        let played = self.state.iterate.clone();
        let beta = self.cfg.beta;
        let mut z = played.clone();
        let mut gradients = Vec::with_capacity(self.cfg.inner_k);
        for j in 0..self.cfg.inner_k {
            let g = self.query_gradient(round, &z)?;
            let pair = &mut self.state.pairs[j];
            pair.momentum = pair.momentum.scale(beta).add(&g.scale(1.0 - beta))?;
            pair.accumulator = pair.accumulator.add(&g.square())?;
            z = scaled_projected_step(
                &z,
                &pair.momentum,
                &pair.accumulator,
                self.cfg.alpha,
                region,
            )?;
            gradients.push(g);
        }
        Ok(Step {
            played,
            next: z,
            gradients,
        })
    }

    fn step_ogd(&mut self, round: &LossRound, region: &FeasibleRegion) -> Result<Step> {
        let played = self.state.iterate.clone();
        let g = self.query_gradient(round, &played)?;
        let candidate = played.sub(&g.scale(self.cfg.alpha))?;
        let ones = DecisionVector::filled(1.0, played.len());
        let next = region.project_weighted(&ones, &candidate)?;
        Ok(Step {
            played,
            next,
            gradients: vec![g],
        })
    }
}

/// One scaled update `x <- proj_{v^(1/2)}(x - alpha * v^(-1/2) (.) dir)`.
///
/// A coordinate with an empty accumulator has seen only zero gradients, so
/// its direction entry is zero by the `0/0 = 0` convention. If the whole
/// accumulator is empty the move is zero and projection would be weightless,
/// so the iterate is returned unchanged (it is already feasible).
fn scaled_projected_step(
    x: &DecisionVector,
    direction: &DecisionVector,
    accumulator: &DecisionVector,
    alpha: f64,
    region: &FeasibleRegion,
) -> Result<DecisionVector> {
    if accumulator.iter().all(|v| *v == 0.0) {
        return Ok(x.clone());
    }
    let weights = accumulator.sqrt()?;
    let scaled = direction.div(&weights)?;
    let candidate = x.sub(&scaled.scale(alpha))?;
    region.project_weighted(&weights, &candidate)
}

/// Inner-iteration count sufficient for a fourfold per-round contraction:
/// `K = ceil((1/alpha + lambda) / (2 lambda) * ln 4)`.
pub fn compute_k(alpha: f64, lambda: f64) -> Result<usize> {
    if !(alpha > 0.0) || !(lambda > 0.0) {
        return Err(Error::contract(format!(
            "compute_k requires positive inputs, got alpha={alpha}, lambda={lambda}"
        )));
    }
    let k = ((1.0 / alpha + lambda) / (2.0 * lambda) * 4.0f64.ln()).ceil();
    Ok((k as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> DecisionVector {
        DecisionVector::new(vec![v]).unwrap()
    }

    fn unit_interval() -> FeasibleRegion {
        FeasibleRegion::bounding_box(scalar(-1.0), scalar(1.0)).unwrap()
    }

    /// f(x) = x^2 on the line, realized as the quadratic with curvature 2.
    fn parabola() -> LossRound {
        LossRound::quadratic(scalar(0.0), 2.0, scalar(0.0)).unwrap()
    }

    fn cfg(algorithm: AlgorithmKind, alpha: f64, beta: f64, inner_k: usize) -> OptimizerConfig {
        OptimizerConfig {
            algorithm,
            alpha,
            beta,
            inner_k,
        }
    }

    #[test]
    fn init_zeroes_state_and_checks_feasibility() {
        let region = unit_interval();
        let opt = Optimizer::new(
            cfg(AlgorithmKind::MAdagrad, 0.5, 0.5, 1),
            &region,
            scalar(0.5),
        )
        .unwrap();
        assert_eq!(opt.iterate()[0], 0.5);
        assert_eq!(opt.pairs()[0].momentum[0], 0.0);
        assert_eq!(opt.pairs()[0].accumulator[0], 0.0);
        assert_eq!(opt.round(), 0);

        let mm = Optimizer::new(
            cfg(AlgorithmKind::MmAdagrad, 0.001, 0.9, 10),
            &region,
            scalar(0.0),
        )
        .unwrap();
        assert_eq!(mm.pairs().len(), 10);

        let outside = Optimizer::new(
            cfg(AlgorithmKind::MAdagrad, 0.5, 0.5, 1),
            &region,
            scalar(1.5),
        );
        assert!(matches!(outside, Err(Error::Contract(_))));
    }

    #[test]
    fn m_adagrad_hand_trace() {
        let region = unit_interval();
        let round = parabola();
        let mut opt = Optimizer::new(
            cfg(AlgorithmKind::MAdagrad, 0.5, 0.5, 1),
            &region,
            scalar(0.5),
        )
        .unwrap();

        let s1 = opt.step(&round, &region).unwrap();
        assert_eq!(s1.gradients[0][0], 1.0);
        assert_eq!(opt.pairs()[0].momentum[0], 0.5);
        assert_eq!(opt.pairs()[0].accumulator[0], 1.0);
        assert!((s1.next[0] - 0.25).abs() < 1e-9);

        let s2 = opt.step(&round, &region).unwrap();
        assert_eq!(s2.gradients[0][0], 0.5);
        assert_eq!(opt.pairs()[0].momentum[0], 0.5);
        assert_eq!(opt.pairs()[0].accumulator[0], 1.25);
        let expected = 0.25 - 0.5 * 0.5 / 1.25f64.sqrt();
        assert!((s2.next[0] - expected).abs() < 1e-9);
        assert!((s2.next[0] - 0.026393).abs() < 1e-6);
    }

    // With beta = 0 the first inner step already reaches the parabola's
    // minimizer: g = 1, m1 = 1, v1 = 1, z2 = 0.5 - 0.5 * 1 = 0. The second
    // inner query then sees a zero gradient and leaves everything in place.
    #[test]
    fn mm_adagrad_hand_trace_without_momentum() {
        let region = unit_interval();
        let round = parabola();
        let mut opt = Optimizer::new(
            cfg(AlgorithmKind::MmAdagrad, 0.5, 0.0, 2),
            &region,
            scalar(0.5),
        )
        .unwrap();
        let s = opt.step(&round, &region).unwrap();
        assert_eq!(s.gradients.len(), 2);
        assert_eq!(s.gradients[0][0], 1.0);
        assert_eq!(opt.pairs()[0].accumulator[0], 1.0);
        assert_eq!(s.gradients[1][0], 0.0);
        assert_eq!(opt.pairs()[1].accumulator[0], 0.0);
        assert_eq!(s.next[0], 0.0);
    }

    // Same setup with beta = 0.5 exercises a nonzero inner momentum:
    // j=1: g=1, m=0.5, v=1, z2 = 0.5 - 0.5*0.5 = 0.25;
    // j=2: g=0.5, m=0.25, v=0.25, z3 = 0.25 - 0.5*0.25/0.5 = 0.
    #[test]
    fn mm_adagrad_hand_trace_with_momentum() {
        let region = unit_interval();
        let round = parabola();
        let mut opt = Optimizer::new(
            cfg(AlgorithmKind::MmAdagrad, 0.5, 0.5, 2),
            &region,
            scalar(0.5),
        )
        .unwrap();
        let s = opt.step(&round, &region).unwrap();
        assert_eq!(s.gradients[0][0], 1.0);
        assert!((opt.pairs()[0].momentum[0] - 0.5).abs() < 1e-15);
        assert_eq!(opt.pairs()[0].accumulator[0], 1.0);
        assert!((s.gradients[1][0] - 0.5).abs() < 1e-15);
        assert!((opt.pairs()[1].momentum[0] - 0.25).abs() < 1e-15);
        assert!((opt.pairs()[1].accumulator[0] - 0.25).abs() < 1e-15);
        assert!(s.next[0].abs() < 1e-15);
    }

    #[test]
    fn ogd_hand_trace() {
        let region = unit_interval();
        let round = parabola();
        let mut opt = Optimizer::new(
            cfg(AlgorithmKind::Ogd, 0.25, 0.0, 1),
            &region,
            scalar(0.5),
        )
        .unwrap();
        let s = opt.step(&round, &region).unwrap();
        assert_eq!(s.next[0], 0.25);

        // a zero gradient is a fixed point
        let flat = LossRound::quadratic(scalar(0.25), 2.0, scalar(0.25)).unwrap();
        let s2 = opt.step(&flat, &region).unwrap();
        assert_eq!(s2.next[0], 0.25);

        // a long step clips to the boundary
        let mut big = Optimizer::new(
            cfg(AlgorithmKind::Ogd, 10.0, 0.0, 1),
            &region,
            scalar(0.5),
        )
        .unwrap();
        let s3 = big.step(&round, &region).unwrap();
        assert_eq!(s3.next[0], -1.0);
    }

    #[test]
    fn compute_k_examples() {
        assert_eq!(compute_k(0.5, 1.0).unwrap(), 3);
        assert_eq!(compute_k(1.0, 1.0).unwrap(), 2);
        assert_eq!(compute_k(1.0, 1000.0).unwrap(), 1);
        assert!(compute_k(0.0, 1.0).is_err());
        assert!(compute_k(1.0, -2.0).is_err());
    }

    fn random_rounds(seed: u64, n: usize) -> Vec<LossRound> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let c = scalar(rng.random_range(-0.9..0.9));
                LossRound::quadratic(c.clone(), rng.random_range(0.5..3.0), c).unwrap()
            })
            .collect()
    }

    #[test]
    fn beta_zero_matches_adagrad_baseline_exactly() {
        let region = unit_interval();
        let rounds = random_rounds(8, 60);
        let mut with_momentum_path = Optimizer::new(
            cfg(AlgorithmKind::MAdagrad, 0.2, 0.0, 1),
            &region,
            scalar(0.3),
        )
        .unwrap();
        let mut baseline = Optimizer::new(
            cfg(AlgorithmKind::Adagrad, 0.2, 0.0, 1),
            &region,
            scalar(0.3),
        )
        .unwrap();
        for round in &rounds {
            let a = with_momentum_path.step(round, &region).unwrap();
            let b = baseline.step(round, &region).unwrap();
            assert_eq!(a.next, b.next);
            assert_eq!(
                with_momentum_path.pairs()[0].accumulator,
                baseline.pairs()[0].accumulator
            );
            assert_eq!(
                with_momentum_path.pairs()[0].momentum,
                baseline.pairs()[0].momentum
            );
        }
    }

    #[test]
    fn k_one_matches_single_momentum_round() {
        let region = unit_interval();
        let rounds = random_rounds(77, 60);
        let mut single = Optimizer::new(
            cfg(AlgorithmKind::MAdagrad, 0.1, 0.7, 1),
            &region,
            scalar(-0.4),
        )
        .unwrap();
        let mut multi = Optimizer::new(
            cfg(AlgorithmKind::MmAdagrad, 0.1, 0.7, 1),
            &region,
            scalar(-0.4),
        )
        .unwrap();
        for round in &rounds {
            let a = single.step(round, &region).unwrap();
            let b = multi.step(round, &region).unwrap();
            assert_eq!(a.next, b.next);
            assert_eq!(a.gradients, b.gradients);
        }
    }

    #[test]
    fn gradient_query_count_is_k_times_t() {
        let region = unit_interval();
        let rounds = random_rounds(5, 40);
        let mut opt = Optimizer::new(
            cfg(AlgorithmKind::MmAdagrad, 0.1, 0.9, 7),
            &region,
            scalar(0.1),
        )
        .unwrap();
        for round in &rounds {
            opt.step(round, &region).unwrap();
        }
        assert_eq!(opt.gradient_queries(), 7 * 40);
        assert_eq!(opt.round(), 40);
    }

    #[test]
    fn iterates_stay_feasible_and_accumulators_grow() {
        let region = unit_interval();
        let rounds = random_rounds(13, 200);
        for algorithm in AlgorithmKind::ALL {
            let mut opt = Optimizer::new(
                cfg(algorithm, 0.05, 0.9, 3),
                &region,
                scalar(0.9),
            )
            .unwrap();
            let mut prev_acc: Vec<DecisionVector> = opt
                .pairs()
                .iter()
                .map(|p| p.accumulator.clone())
                .collect();
            for round in &rounds {
                let s = opt.step(round, &region).unwrap();
                assert!(region.contains(&s.next));
                for (pair, prev) in opt.pairs().iter().zip(prev_acc.iter()) {
                    for i in 0..prev.len() {
                        assert!(pair.accumulator[i] >= prev[i]);
                    }
                }
                prev_acc = opt.pairs().iter().map(|p| p.accumulator.clone()).collect();
            }
        }
    }

    #[test]
    fn momentum_stays_inside_decay_envelope() {
        let region = unit_interval();
        let rounds = random_rounds(29, 150);
        for beta in [0.0, 0.5, 0.9] {
            let mut opt = Optimizer::new(
                cfg(AlgorithmKind::MAdagrad, 0.05, beta, 1),
                &region,
                scalar(0.2),
            )
            .unwrap();
            let mut max_abs_grad: f64 = 0.0;
            for (t, round) in rounds.iter().enumerate() {
                let s = opt.step(round, &region).unwrap();
                max_abs_grad = max_abs_grad.max(s.gradients[0][0].abs());
                let envelope = (1.0 - beta.powi(t as i32 + 1)) * max_abs_grad;
                assert!(
                    opt.pairs()[0].momentum[0].abs() <= envelope * (1.0 + 1e-9) + 1e-300,
                    "round {t}: |m|={} envelope={envelope}",
                    opt.pairs()[0].momentum[0].abs()
                );
            }
        }
    }

    #[test]
    fn non_finite_gradient_reports_degenerate_state() {
        let huge = 1e300;
        let region = FeasibleRegion::bounding_box(scalar(-huge), scalar(huge)).unwrap();
        let round =
            LossRound::square_regression(scalar(huge), 0.0, scalar(0.0)).unwrap();
        let mut opt = Optimizer::new(
            cfg(AlgorithmKind::MAdagrad, 0.5, 0.5, 1),
            &region,
            scalar(huge),
        )
        .unwrap();
        assert!(matches!(
            opt.step(&round, &region),
            Err(Error::Degenerate(_))
        ));
    }
}
