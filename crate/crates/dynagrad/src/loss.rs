//! Per-round loss oracles.
//!
//! A [`LossRound`] bundles one round's loss function with the comparator
//! point the learner is measured against, plus the curvature constants the
//! round can certify about itself.

use crate::error::{Error, Result};
use crate::vector::DecisionVector;

/// The loss function payload of one round.
#[derive(Debug, Clone)]
pub enum LossKind {
    /// Square regression loss `f(x) = 0.5 (a'x - b)^2`.
    SquareRegression {
        feature: DecisionVector,
        label: f64,
    },
    /// Strongly convex quadratic `f(x) = (lambda/2) ||x - c||^2`.
    Quadratic {
        center: DecisionVector,
        curvature: f64,
    },
}

/// One round of the online game: loss oracle, comparator, and the constants
/// known about this round.
#[derive(Debug, Clone)]
pub struct LossRound {
    pub kind: LossKind,
    /// Reference point the round's regret increment is charged against.
    pub comparator: DecisionVector,
    /// Smoothness constant: `||a||^2` for square regression, `lambda` for
    /// the quadratic.
    pub smoothness: f64,
    /// Strong convexity modulus when the round certifies one.
    pub strong_convexity: Option<f64>,
}

impl LossRound {
    pub fn square_regression(
        feature: DecisionVector,
        label: f64,
        comparator: DecisionVector,
    ) -> Result<Self> {
        if feature.len() != comparator.len() {
            return Err(Error::contract("feature/comparator dimension mismatch"));
        }
        let smoothness = feature.dot(&feature)?;
        Ok(Self {
            kind: LossKind::SquareRegression { feature, label },
            comparator,
            smoothness,
            strong_convexity: None,
        })
    }

    pub fn quadratic(
        center: DecisionVector,
        curvature: f64,
        comparator: DecisionVector,
    ) -> Result<Self> {
        if !(curvature > 0.0) {
            return Err(Error::config(format!(
                "quadratic curvature must be positive, got {curvature}"
            )));
        }
        if center.len() != comparator.len() {
            return Err(Error::contract("center/comparator dimension mismatch"));
        }
        Ok(Self {
            kind: LossKind::Quadratic { center, curvature },
            comparator,
            smoothness: curvature,
            strong_convexity: Some(curvature),
        })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            LossKind::SquareRegression { feature, .. } => feature.len(),
            LossKind::Quadratic { center, .. } => center.len(),
        }
    }

    /// Loss value at `x`.
    pub fn value(&self, x: &DecisionVector) -> f64 {
        assert_eq!(x.len(), self.dim(), "loss value: dimension mismatch");
        match &self.kind {
            LossKind::SquareRegression { feature, label } => {
                let residual = feature.dot(x).expect("dims checked") - label;
                0.5 * residual * residual
            }
            LossKind::Quadratic { center, curvature } => {
                let d = x.sub(center).expect("dims checked");
                0.5 * curvature * d.dot(&d).expect("dims checked")
            }
        }
    }

    /// Gradient at `x`.
    pub fn gradient(&self, x: &DecisionVector) -> DecisionVector {
        assert_eq!(x.len(), self.dim(), "loss gradient: dimension mismatch");
        match &self.kind {
            LossKind::SquareRegression { feature, label } => {
                let residual = feature.dot(x).expect("dims checked") - label;
                feature.scale(residual)
            }
            LossKind::Quadratic { center, curvature } => {
                x.sub(center).expect("dims checked").scale(*curvature)
            }
        }
    }
}
