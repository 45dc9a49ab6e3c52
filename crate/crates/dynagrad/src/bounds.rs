//! Regret-bound evaluation for the momentum AdaGrad learners.
//!
//! Everything here is a pure function of run parameters and ledger-derived
//! quantities. The single-query learner admits a bound driven by the l1
//! path-length of the comparators; the multiple-query learner admits the
//! minimum of that bound and a squared-path-length branch. Formulas are kept
//! exactly in their published form, with no algebraic simplification.

use crate::error::{Error, Result};
use crate::optimizer::compute_k;
use crate::vector::DecisionVector;

/// Relative slack for the `alpha <= 1/L` hypothesis check, absorbing the
/// rounding of `alpha = 1/L` configured from a float `L`.
const HYPOTHESIS_SLACK: f64 = 1e-12;

/// Per-step contraction constants of the scaled update under strong
/// convexity: `sigma_bar = 1 - 2 lambda / (1/alpha + lambda)` and
/// `sigma_tilde = 2 / (lambda + 1/alpha)`.
#[derive(Debug, Clone, Copy)]
pub struct Contraction {
    pub sigma_bar: f64,
    pub sigma_tilde: f64,
}

/// Returns the contraction constants, rejecting `lambda * alpha > 1`, where
/// the contraction factor leaves `[0, 1)`.
pub fn contraction_constants(alpha: f64, lambda: f64) -> Result<Contraction> {
    if !(alpha > 0.0) || !(lambda > 0.0) {
        return Err(Error::contract(format!(
            "contraction constants require positive alpha and lambda, got {alpha}, {lambda}"
        )));
    }
    if lambda * alpha > 1.0 + HYPOTHESIS_SLACK {
        return Err(Error::inapplicable(format!(
            "lambda * alpha = {} > 1: contraction factor leaves [0, 1)",
            lambda * alpha
        )));
    }
    let sigma_bar = 1.0 - 2.0 * lambda / (1.0 / alpha + lambda);
    let sigma_tilde = 2.0 / (lambda + 1.0 / alpha);
    Ok(Contraction {
        sigma_bar,
        sigma_tilde,
    })
}

/// The geometric-tail budget `theta = 1/(2 lambda alpha) + 1/2` that caps
/// `sum_{l<K} sigma_bar^l` at the prescribed inner-iteration count.
pub fn contraction_budget(alpha: f64, lambda: f64) -> f64 {
    1.0 / (2.0 * lambda * alpha) + 0.5
}

/// Inputs shared by both bound evaluators, assembled from run parameters and
/// the ledger. For the multiple-query learner, accumulator and gradient-norm
/// fields carry the per-coordinate maxima over inner indices.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub smoothness: f64,
    pub diameter_inf: f64,
    /// Accumulator after round 1.
    pub accumulator_first: DecisionVector,
    /// Accumulator after the final round of the evaluated prefix.
    pub accumulator_final: DecisionVector,
    /// Per-coordinate l1 path-length of the comparators.
    pub path_l1_per_coord: Vec<f64>,
    /// Per-coordinate squared path-length of the comparators.
    pub path_sq_per_coord: Vec<f64>,
    /// Per-coordinate gradient history norms.
    pub grad_norms_per_coord: Vec<f64>,
    pub initial_point: DecisionVector,
    pub initial_comparator: DecisionVector,
    /// Inner iterations the run actually used.
    pub inner_k: usize,
    /// Free balance parameter of the squared-path branch.
    pub gamma: f64,
    /// `sum_t ||grad f_t(x*_t)||^2` over the evaluated prefix.
    pub comparator_grad_sq_sum: f64,
}

impl BoundInputs {
    fn validate(&self) -> Result<()> {
        let p = self.initial_point.len();
        if self.accumulator_first.len() != p
            || self.accumulator_final.len() != p
            || self.path_l1_per_coord.len() != p
            || self.path_sq_per_coord.len() != p
            || self.grad_norms_per_coord.len() != p
            || self.initial_comparator.len() != p
        {
            return Err(Error::contract("bound inputs dimension mismatch"));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::contract("bound inputs require lambda > 0"));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::contract("bound inputs require beta in [0, 1)"));
        }
        if self.alpha * self.smoothness > 1.0 + HYPOTHESIS_SLACK {
            return Err(Error::inapplicable(format!(
                "hypothesis alpha <= 1/L violated: alpha * L = {}",
                self.alpha * self.smoothness
            )));
        }
        Ok(())
    }

    fn sum_sqrt_acc_final(&self) -> f64 {
        self.accumulator_final.iter().map(|v| v.sqrt()).sum()
    }

    fn initial_distance_term(&self) -> f64 {
        (0..self.initial_point.len())
            .map(|i| {
                let d = self.initial_point[i] - self.initial_comparator[i];
                self.accumulator_first[i].sqrt() * d * d
            })
            .sum()
    }

    fn weighted_path_l1(&self) -> f64 {
        self.path_l1_per_coord
            .iter()
            .zip(self.accumulator_final.iter())
            .map(|(c, v)| v.sqrt() * c)
            .sum()
    }

    fn weighted_path_sq(&self) -> f64 {
        self.path_sq_per_coord
            .iter()
            .zip(self.accumulator_final.iter())
            .map(|(s, v)| v.sqrt() * s)
            .sum()
    }

    fn grad_norm_total(&self) -> f64 {
        self.grad_norms_per_coord.iter().sum()
    }

    /// The drift-dependent additive constant of the contraction lemma,
    /// exported for inspection only; the expanded bound coefficients below
    /// already absorb it.
    pub fn drift_offset(&self) -> Result<f64> {
        let _ = contraction_constants(self.alpha, self.lambda)?;
        let one_minus_beta = 1.0 - self.beta;
        let lead: f64 = self
            .path_l1_per_coord
            .iter()
            .zip(self.accumulator_final.iter())
            .map(|(c, v)| {
                (self.diameter_inf * self.diameter_inf / (2.0 * self.alpha) + self.beta * c)
                    * v.sqrt()
            })
            .sum();
        Ok(lead
            + 2.0 * self.alpha / (one_minus_beta * one_minus_beta) * self.grad_norm_total())
    }
}

/// The evaluated path-length bound with its coefficients.
#[derive(Debug, Clone, Copy)]
pub struct BoundBreakdown {
    /// Coefficient of the gradient-history-norm total.
    pub grad_coeff: f64,
    /// Coefficient of the accumulator-weighted l1 path-length.
    pub path_coeff: f64,
    /// Additive constant.
    pub offset: f64,
    pub total: f64,
}

/// Dynamic-regret upper bound for the single-query momentum learner.
pub fn m_adagrad_bound(inputs: &BoundInputs) -> Result<BoundBreakdown> {
    inputs.validate()?;
    let Contraction {
        sigma_bar,
        sigma_tilde,
    } = contraction_constants(inputs.alpha, inputs.lambda)?;
    let inv_gap = 1.0 / (1.0 - sigma_bar);
    let beta = inputs.beta;
    let one_minus_beta = 1.0 - beta;
    let d_inf = inputs.diameter_inf;

    let grad_coeff =
        1.0 + inv_gap * inputs.alpha * beta * sigma_tilde / one_minus_beta.powi(3);
    let path_coeff =
        0.5 * inv_gap * (sigma_tilde * beta * beta / one_minus_beta + 2.0 * d_inf);
    let offset = 0.5
        * inv_gap
        * (inputs.initial_distance_term()
            + (beta * sigma_tilde / (2.0 * one_minus_beta * inputs.alpha) + 1.0)
                * d_inf
                * d_inf
                * inputs.sum_sqrt_acc_final());

    let total = grad_coeff * inputs.grad_norm_total()
        + path_coeff * inputs.weighted_path_l1()
        + offset;
    Ok(BoundBreakdown {
        grad_coeff,
        path_coeff,
        offset,
        total,
    })
}

/// The evaluated two-branch bound for the multiple-query learner.
#[derive(Debug, Clone, Copy)]
pub struct MmBoundBreakdown {
    pub theta: f64,
    /// Path-length branch and its coefficients.
    pub grad_coeff: f64,
    pub path_coeff: f64,
    pub offset: f64,
    pub path_branch: f64,
    /// Squared-path branch and its coefficients.
    pub sq_grad_coeff: f64,
    pub sq_path_coeff: f64,
    pub sq_offset: f64,
    pub sq_branch: f64,
    pub minimum: f64,
}

/// Dynamic-regret upper bound for the multiple-query learner. Requires the
/// run to have used the prescribed inner-iteration count and `gamma > 0`.
pub fn mm_adagrad_bound(inputs: &BoundInputs) -> Result<MmBoundBreakdown> {
    inputs.validate()?;
    if !(inputs.gamma > 0.0) {
        return Err(Error::contract(format!(
            "gamma must be positive, got {}",
            inputs.gamma
        )));
    }
    let required_k = compute_k(inputs.alpha, inputs.lambda)?;
    if inputs.inner_k != required_k {
        return Err(Error::inapplicable(format!(
            "bound requires K = {required_k} inner iterations, run used {}",
            inputs.inner_k
        )));
    }
    let Contraction { sigma_tilde, .. } =
        contraction_constants(inputs.alpha, inputs.lambda)?;
    let theta = contraction_budget(inputs.alpha, inputs.lambda);
    let beta = inputs.beta;
    let one_minus_beta = 1.0 - beta;
    let d_inf = inputs.diameter_inf;
    let alpha = inputs.alpha;
    let smooth_plus_gamma = inputs.smoothness + inputs.gamma;

    let grad_coeff =
        1.0 + 4.0 * sigma_tilde * beta * alpha * theta / (3.0 * one_minus_beta.powi(3));
    let path_coeff =
        2.0 / 3.0 * (sigma_tilde * beta * beta * theta / one_minus_beta + 2.0 * d_inf);
    let offset = 2.0 / 3.0
        * (inputs.initial_distance_term()
            + (sigma_tilde * beta * theta / (2.0 * alpha * one_minus_beta) + 1.0)
                * d_inf
                * d_inf
                * inputs.sum_sqrt_acc_final());
    let path_branch = grad_coeff * inputs.grad_norm_total()
        + path_coeff * inputs.weighted_path_l1()
        + offset;

    let sq_grad_coeff =
        sigma_tilde * theta * smooth_plus_gamma * 4.0 * beta * alpha / one_minus_beta.powi(3);
    let sq_path_coeff =
        smooth_plus_gamma * (beta * sigma_tilde * theta / one_minus_beta + 2.0);
    let sq_offset = smooth_plus_gamma
        * (inputs.initial_distance_term()
            + (beta * sigma_tilde * theta / (alpha * one_minus_beta) + 1.0)
                * d_inf
                * d_inf
                * inputs.sum_sqrt_acc_final());
    let sq_branch = inputs.comparator_grad_sq_sum / (2.0 * inputs.gamma)
        + sq_grad_coeff * inputs.grad_norm_total()
        + sq_path_coeff * inputs.weighted_path_sq()
        + sq_offset;

    Ok(MmBoundBreakdown {
        theta,
        grad_coeff,
        path_coeff,
        offset,
        path_branch,
        sq_grad_coeff,
        sq_path_coeff,
        sq_offset,
        sq_branch,
        minimum: path_branch.min(sq_branch),
    })
}

/// Scans `gamma` over `L * 2^k, k = -6..=6` and returns the pair
/// `(gamma, squared-path branch value)` minimizing the squared-path branch.
pub fn best_gamma_on_grid(inputs: &BoundInputs) -> Result<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    let mut probe = inputs.clone();
    for k in -6i32..=6 {
        probe.gamma = inputs.smoothness * 2.0f64.powi(k);
        let value = mm_adagrad_bound(&probe)?.sq_branch;
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((probe.gamma, value));
        }
    }
    Ok(best.expect("grid is nonempty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar_inputs() -> BoundInputs {
        BoundInputs {
            alpha: 0.5,
            beta: 0.5,
            lambda: 1.0,
            smoothness: 1.0,
            diameter_inf: 2.0,
            accumulator_first: DecisionVector::new(vec![1.0]).unwrap(),
            accumulator_final: DecisionVector::new(vec![4.0]).unwrap(),
            path_l1_per_coord: vec![1.0],
            path_sq_per_coord: vec![0.5],
            grad_norms_per_coord: vec![3.0],
            initial_point: DecisionVector::new(vec![0.5]).unwrap(),
            initial_comparator: DecisionVector::new(vec![0.0]).unwrap(),
            inner_k: 3,
            gamma: 1.0,
            comparator_grad_sq_sum: 0.0,
        }
    }

    #[test]
    fn contraction_constant_examples() {
        let c = contraction_constants(0.5, 1.0).unwrap();
        assert!((c.sigma_bar - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.sigma_tilde - 2.0 / 3.0).abs() < 1e-15);

        let c = contraction_constants(1.0, 1.0).unwrap();
        assert_eq!(c.sigma_bar, 0.0);
        assert_eq!(c.sigma_tilde, 1.0);

        // vanishing curvature degenerates toward sigma_bar = 1
        let c = contraction_constants(1.0, 1e-12).unwrap();
        assert!(c.sigma_bar > 1.0 - 1e-11);

        assert!(matches!(
            contraction_constants(1.0, 2.0),
            Err(Error::BoundInapplicable(_))
        ));
        assert!(contraction_constants(-1.0, 1.0).is_err());
    }

    #[test]
    fn sigma_identity_holds() {
        for (alpha, lambda) in [(0.5, 1.0), (0.001, 2.0), (0.1, 9.9), (1.0, 1.0)] {
            let c = contraction_constants(alpha, lambda).unwrap();
            assert!(
                (c.sigma_bar - (1.0 - lambda * c.sigma_tilde)).abs() <= 1e-14,
                "identity failed at alpha={alpha} lambda={lambda}"
            );
        }
    }

    #[test]
    fn path_bound_full_numeric_case() {
        // alpha=0.5, beta=0.5, lambda=1, D=2, p=1, v1=1, vT=4, ||g||=3,
        // C*=1, (x1 - x1*)^2 = 0.25: coefficients work out to 3, 3.25 and
        // 10.1875, so the bound totals 3*3 + 3.25*2 + 10.1875.
        let b = m_adagrad_bound(&scalar_inputs()).unwrap();
        assert!((b.grad_coeff - 3.0).abs() < 1e-12);
        assert!((b.path_coeff - 3.25).abs() < 1e-12);
        assert!((b.offset - 10.1875).abs() < 1e-12);
        assert!((b.total - 25.6875).abs() < 1e-12);
    }

    #[test]
    fn path_bound_momentum_terms_vanish_at_beta_zero() {
        let mut inputs = scalar_inputs();
        inputs.beta = 0.0;
        let b = m_adagrad_bound(&inputs).unwrap();
        let c = contraction_constants(inputs.alpha, inputs.lambda).unwrap();
        let inv_gap = 1.0 / (1.0 - c.sigma_bar);
        assert_eq!(b.grad_coeff, 1.0);
        assert!((b.path_coeff - inv_gap * inputs.diameter_inf).abs() < 1e-12);
        let expected_offset = 0.5
            * inv_gap
            * (1.0 * 0.25 + inputs.diameter_inf.powi(2) * 4.0f64.sqrt());
        assert!((b.offset - expected_offset).abs() < 1e-12);
    }

    #[test]
    fn zero_motion_comparators_drop_the_path_term() {
        let mut inputs = scalar_inputs();
        inputs.path_l1_per_coord = vec![0.0];
        let b = m_adagrad_bound(&inputs).unwrap();
        assert!((b.total - (b.grad_coeff * 3.0 + b.offset)).abs() < 1e-12);
    }

    #[test]
    fn drift_offset_matches_definition() {
        // (D^2/(2a) + beta C) sqrt(vT) + 2a/(1-b)^2 * sum ||g||
        // = (4/1 + 0.5) * 2 + (1.0/0.25) * 3 = 9 + 12
        let inputs = scalar_inputs();
        assert!((inputs.drift_offset().unwrap() - 21.0).abs() < 1e-12);
    }

    #[test]
    fn two_branch_bound_constants() {
        let inputs = scalar_inputs();
        // theta at alpha=0.5, lambda=1
        assert!((contraction_budget(0.5, 1.0) - 1.5).abs() < 1e-15);
        let b = mm_adagrad_bound(&inputs).unwrap();
        assert!((b.theta - 1.5).abs() < 1e-15);
        assert!(b.path_branch > 0.0 && b.sq_branch > 0.0);
        assert_eq!(b.minimum, b.path_branch.min(b.sq_branch));

        // exact-minimizer comparators zero out the gradient term of the
        // squared-path branch
        let mut grad_free = inputs.clone();
        grad_free.comparator_grad_sq_sum = 0.0;
        let b0 = mm_adagrad_bound(&grad_free).unwrap();
        let mut grad_heavy = inputs;
        grad_heavy.comparator_grad_sq_sum = 10.0;
        let b1 = mm_adagrad_bound(&grad_heavy).unwrap();
        assert!((b1.sq_branch - b0.sq_branch - 10.0 / (2.0 * 1.0)).abs() < 1e-12);
    }

    #[test]
    fn two_branch_bound_beta_zero_collapse() {
        let mut inputs = scalar_inputs();
        inputs.beta = 0.0;
        let b = mm_adagrad_bound(&inputs).unwrap();
        assert_eq!(b.grad_coeff, 1.0);
        assert_eq!(b.sq_grad_coeff, 0.0);
    }

    // frozen from a 50-digit evaluation of the printed formulas
    #[test]
    fn two_branch_bound_matches_high_precision_reference() {
        let inputs = BoundInputs {
            alpha: 0.25,
            beta: 0.7,
            lambda: 2.0,
            smoothness: 3.0,
            diameter_inf: 1.8,
            accumulator_first: DecisionVector::new(vec![0.3, 0.9]).unwrap(),
            accumulator_final: DecisionVector::new(vec![7.0, 11.0]).unwrap(),
            path_l1_per_coord: vec![2.5, 0.5],
            path_sq_per_coord: vec![1.2, 0.8],
            grad_norms_per_coord: vec![7.0f64.sqrt(), 11.0f64.sqrt()],
            initial_point: DecisionVector::new(vec![0.4, -1.1]).unwrap(),
            initial_comparator: DecisionVector::new(vec![-0.2, 0.6]).unwrap(),
            inner_k: 3, // compute_k(0.25, 2)
            gamma: 1.5,
            comparator_grad_sq_sum: 13.0,
        };
        let b = mm_adagrad_bound(&inputs).unwrap();
        let b1 = 100.97256554992545;
        let b2 = 941.0269262790471;
        assert!((b.path_branch - b1).abs() <= 1e-12 * b1);
        assert!((b.sq_branch - b2).abs() <= 1e-12 * b2);
    }

    #[test]
    fn two_branch_bound_rejects_wrong_k_and_gamma() {
        let mut inputs = scalar_inputs();
        inputs.inner_k = 4;
        assert!(matches!(
            mm_adagrad_bound(&inputs),
            Err(Error::BoundInapplicable(_))
        ));
        let mut inputs = scalar_inputs();
        inputs.gamma = 0.0;
        assert!(matches!(mm_adagrad_bound(&inputs), Err(Error::Contract(_))));
    }

    #[test]
    fn hypothesis_violation_is_inapplicable() {
        let mut inputs = scalar_inputs();
        inputs.smoothness = 3.0; // alpha = 0.5 > 1/3
        assert!(matches!(
            m_adagrad_bound(&inputs),
            Err(Error::BoundInapplicable(_))
        ));
    }

    #[test]
    fn gamma_grid_improves_on_default() {
        let mut inputs = scalar_inputs();
        inputs.comparator_grad_sq_sum = 25.0;
        let default = mm_adagrad_bound(&inputs).unwrap().sq_branch;
        let (gamma, best) = best_gamma_on_grid(&inputs).unwrap();
        assert!(best <= default + 1e-12);
        assert!(gamma > 0.0);
    }

    proptest! {
        #[test]
        fn inner_k_forces_quarter_contraction(
            lambda in 0.001f64..10.0,
            ratio in 0.001f64..0.99,
        ) {
            let alpha = ratio / lambda;
            let c = contraction_constants(alpha, lambda).unwrap();
            let k = compute_k(alpha, lambda).unwrap();
            let power = c.sigma_bar.powf(k as f64);
            prop_assert!(power <= 0.25 + 1e-12, "sigma^K = {power} at K = {k}");
            let tail = if c.sigma_bar == 0.0 {
                1.0
            } else {
                (1.0 - power) / (1.0 - c.sigma_bar)
            };
            prop_assert!(tail <= contraction_budget(alpha, lambda) + 1e-9);
        }

        #[test]
        fn path_bound_is_monotone_in_its_inputs(
            scale in 1.0f64..4.0,
        ) {
            let base = scalar_inputs();
            let reference = m_adagrad_bound(&base).unwrap().total;

            let mut more_path = base.clone();
            more_path.path_l1_per_coord = vec![scale * 1.0];
            prop_assert!(m_adagrad_bound(&more_path).unwrap().total >= reference);

            let mut more_grad = base.clone();
            more_grad.grad_norms_per_coord = vec![scale * 3.0];
            prop_assert!(m_adagrad_bound(&more_grad).unwrap().total >= reference);

            let mut more_acc = base.clone();
            more_acc.accumulator_final = DecisionVector::new(vec![scale * 4.0]).unwrap();
            prop_assert!(m_adagrad_bound(&more_acc).unwrap().total >= reference);

            let mut wider = base.clone();
            wider.diameter_inf = scale * 2.0;
            prop_assert!(m_adagrad_bound(&wider).unwrap().total >= reference);
        }
    }
}
