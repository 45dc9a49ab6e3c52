//! Compact convex feasible sets and their weighted projection operator.
//!
//! Two shapes are supported: axis-aligned boxes and Euclidean balls. Both
//! admit a robust projection under any diagonal weighting `v`: the box case
//! is elementwise clipping (the diagonal weights cannot couple coordinates),
//! the ball case reduces to a one-dimensional Lagrange multiplier equation
//! solved by safeguarded bisection.

use crate::error::{Error, Result};
use crate::vector::DecisionVector;

/// Absolute slack accepted by membership tests, matching the projection
/// solver's boundary tolerance.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;

/// Floor substituted for zero weights in the ball projection.
const WEIGHT_FLOOR: f64 = 1e-12;

/// Absolute tolerance on the multiplier equation residual.
const RESIDUAL_TOL: f64 = 1e-12;

/// Bounded convex feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleRegion {
    /// Axis-aligned box `{x : lower <= x <= upper}` with `lower < upper`
    /// in every coordinate.
    Box {
        lower: DecisionVector,
        upper: DecisionVector,
    },
    /// Euclidean ball `{x : ||x - center|| <= radius}` with `radius > 0`.
    Ball {
        center: DecisionVector,
        radius: f64,
    },
}

impl FeasibleRegion {
    pub fn bounding_box(lower: DecisionVector, upper: DecisionVector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::contract("box bounds must share a dimension"));
        }
        for i in 0..lower.len() {
            if !(lower[i] < upper[i]) {
                return Err(Error::contract(format!(
                    "box requires lower < upper; coordinate {i} has [{}, {}]",
                    lower[i], upper[i]
                )));
            }
        }
        Ok(FeasibleRegion::Box { lower, upper })
    }

    pub fn ball(center: DecisionVector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::contract(format!("ball radius must be positive, got {radius}")));
        }
        Ok(FeasibleRegion::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            FeasibleRegion::Box { lower, .. } => lower.len(),
            FeasibleRegion::Ball { center, .. } => center.len(),
        }
    }

    /// Membership test, inclusive of the boundary up to [`MEMBERSHIP_SLACK`].
    pub fn contains(&self, x: &DecisionVector) -> bool {
        assert_eq!(x.len(), self.dim(), "contains: dimension mismatch");
        match self {
            FeasibleRegion::Box { lower, upper } => (0..x.len()).all(|i| {
                x[i] >= lower[i] - MEMBERSHIP_SLACK && x[i] <= upper[i] + MEMBERSHIP_SLACK
            }),
            FeasibleRegion::Ball { center, radius } => {
                let dist = x.sub(center).expect("dims checked").norm();
                dist <= radius + MEMBERSHIP_SLACK
            }
        }
    }

    /// The set's infinity-norm diameter `sup ||x - y||_inf`.
    pub fn diameter_inf(&self) -> f64 {
        match self {
            FeasibleRegion::Box { lower, upper } => (0..lower.len())
                .map(|i| upper[i] - lower[i])
                .fold(0.0, f64::max),
            FeasibleRegion::Ball { radius, .. } => 2.0 * radius,
        }
    }

    /// A canonical interior point: the box midpoint or the ball center.
    pub fn center_point(&self) -> DecisionVector {
        match self {
            FeasibleRegion::Box { lower, upper } => DecisionVector::from_raw(
                (0..lower.len()).map(|i| 0.5 * (lower[i] + upper[i])).collect(),
            ),
            FeasibleRegion::Ball { center, .. } => center.clone(),
        }
    }

    /// Projection under the diagonal weighted norm: the minimizer of
    /// `sum_i w_i (x_i - y_i)^2` over `y` in the region.
    ///
    /// Weights must be nonnegative. Box projections clip coordinatewise and
    /// ignore the weights entirely; ball projections floor zero weights to a
    /// tiny positive value, which keeps the multiplier equation well posed.
    pub fn project_weighted(
        &self,
        weights: &DecisionVector,
        x: &DecisionVector,
    ) -> Result<DecisionVector> {
        if x.len() != self.dim() || weights.len() != self.dim() {
            return Err(Error::contract(format!(
                "project_weighted: dimension mismatch (region {}, weights {}, point {})",
                self.dim(),
                weights.len(),
                x.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| *w < 0.0) {
            return Err(Error::contract(format!(
                "project_weighted: negative weight at coordinate {i}"
            )));
        }
        match self {
            FeasibleRegion::Box { lower, upper } => Ok(DecisionVector::from_raw(
                (0..x.len()).map(|i| x[i].clamp(lower[i], upper[i])).collect(),
            )),
            FeasibleRegion::Ball { center, radius } => {
                project_ball(center, *radius, weights, x)
            }
        }
    }
}

/// Weighted projection onto a ball via the multiplier equation
/// `phi(mu) = sum_i w_i^2 d_i^2 / (w_i + mu)^2 = r^2`, `d = x - center`.
///
/// `phi` is strictly decreasing on `mu >= 0` whenever the point lies outside
/// the ball, so a bracketed bisection converges unconditionally.
fn project_ball(
    center: &DecisionVector,
    radius: f64,
    weights: &DecisionVector,
    x: &DecisionVector,
) -> Result<DecisionVector> {
    let d = x.sub(center)?;
    if d.norm() <= radius {
        return Ok(x.clone());
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(Error::degenerate(
            "ball projection with all-zero weights has no unique minimizer",
        ));
    }
    let w: Vec<f64> = weights.iter().map(|w| w.max(WEIGHT_FLOOR)).collect();
    let r_sq = radius * radius;
    let phi = |mu: f64| -> f64 {
        d.iter()
            .zip(w.iter())
            .map(|(di, wi)| {
                let s = wi * di / (wi + mu);
                s * s
            })
            .sum()
    };

    // phi(0) = ||d||^2 > r^2 here; expand until the bracket's upper end is
    // feasible.
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut expansions = 0;
    while phi(hi) > r_sq {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::degenerate(
                "ball projection bracket expansion failed to terminate",
            ));
        }
    }

    let mut mu = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let residual = phi(mid) - r_sq;
        if residual.abs() <= RESIDUAL_TOL {
            mu = mid;
            break;
        }
        if residual > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        mu = hi; // keep the feasible side if the loop exhausts
        if (hi - lo) <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }

    let projected: Vec<f64> = (0..x.len())
        .map(|i| center[i] + w[i] * d[i] / (w[i] + mu))
        .collect();
    Ok(DecisionVector::from_raw(projected))
}
