//! Dense vectors and the weighted-norm arithmetic shared by all learners.
//!
//! Every quantity an algorithm carries (iterate, gradient, momentum,
//! accumulator, comparator) is a [`DecisionVector`]: a fixed-length list of
//! finite `f64` entries. All vectors in one run share the same dimension.

use crate::error::{Error, Result};

/// Dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionVector {
    entries: Vec<f64>,
}

impl DecisionVector {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::contract("vector must have dimension >= 1"));
        }
        if let Some(i) = entries.iter().position(|e| !e.is_finite()) {
            return Err(Error::contract(format!(
                "non-finite entry {} at coordinate {i}",
                entries[i]
            )));
        }
        Ok(Self { entries })
    }

    /// Zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be >= 1");
        Self {
            entries: vec![0.0; dim],
        }
    }

    /// Constant vector of dimension `dim`.
    pub fn filled(value: f64, dim: usize) -> Self {
        assert!(dim >= 1 && value.is_finite());
        Self {
            entries: vec![value; dim],
        }
    }

    /// Internal constructor for values produced by crate arithmetic.
    ///
    /// Finiteness is enforced at the public boundary by [`DecisionVector::new`];
    /// internal arithmetic may transiently overflow, and the stepping code
    /// checks for that explicitly where the contract demands an error.
    pub(crate) fn from_raw(entries: Vec<f64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.entries.iter()
    }

    fn check_dims(&self, other: &Self, what: &str) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::contract(format!(
                "{what}: dimension mismatch ({} vs {})",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Weighted squared norm `sum_i v_i * x_i^2`.
    ///
    /// Weights must be nonnegative and of matching dimension.
    pub fn weighted_norm_sq(&self, weights: &Self) -> Result<f64> {
        self.check_dims(weights, "weighted_norm_sq")?;
        if let Some(i) = weights.iter().position(|w| *w < 0.0) {
            return Err(Error::contract(format!(
                "weighted_norm_sq: negative weight {} at coordinate {i}",
                weights[i]
            )));
        }
        Ok(self
            .iter()
            .zip(weights.iter())
            .map(|(x, w)| w * x * x)
            .sum())
    }

    /// Infinity norm `max_i |x_i|`.
    pub fn inf_norm(&self) -> f64 {
        self.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Euclidean inner product.
    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_dims(other, "dot")?;
        Ok(self.iter().zip(other.iter()).map(|(a, b)| a * b).sum())
    }

    /// Entrywise square.
    pub fn square(&self) -> Self {
        Self::from_raw(self.iter().map(|x| x * x).collect())
    }

    /// Entrywise square root; all entries must be nonnegative.
    pub fn sqrt(&self) -> Result<Self> {
        if let Some(i) = self.iter().position(|x| *x < 0.0) {
            return Err(Error::contract(format!(
                "sqrt: negative entry {} at coordinate {i}",
                self[i]
            )));
        }
        Ok(Self::from_raw(self.iter().map(|x| x.sqrt()).collect()))
    }

    /// Entrywise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dims(other, "mul")?;
        Ok(Self::from_raw(
            self.iter().zip(other.iter()).map(|(a, b)| a * b).collect(),
        ))
    }

    /// Entrywise division with the zero-accumulator convention: `0/0 = 0`.
    ///
    /// A zero denominator under a nonzero numerator has no sanctioned value
    /// and reports a degenerate state.
    pub fn div(&self, denom: &Self) -> Result<Self> {
        self.check_dims(denom, "div")?;
        let mut out = Vec::with_capacity(self.len());
        for (i, (a, b)) in self.iter().zip(denom.iter()).enumerate() {
            if *b == 0.0 {
                if *a == 0.0 {
                    out.push(0.0);
                } else {
                    return Err(Error::degenerate(format!(
                        "div: {a}/0 at coordinate {i}"
                    )));
                }
            } else {
                out.push(a / b);
            }
        }
        Ok(Self::from_raw(out))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dims(other, "add")?;
        Ok(Self::from_raw(
            self.iter().zip(other.iter()).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dims(other, "sub")?;
        Ok(Self::from_raw(
            self.iter().zip(other.iter()).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.iter().map(|x| c * x).collect())
    }
}

impl std::ops::Index<usize> for DecisionVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl<'a> IntoIterator for &'a DecisionVector {
    type Item = &'a f64;
    type IntoIter = std::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.entries.iter()
    }
}
