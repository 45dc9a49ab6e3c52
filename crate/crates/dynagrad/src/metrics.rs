//! Per-round bookkeeping and the regret / regularity measures.
//!
//! The [`RegretLedger`] is the single-writer record a run produces: losses,
//! comparators, and every gradient queried (one per round for single-query
//! learners, `K` per round for the multiple-query learner). All metrics and
//! bound inputs are pure functions of ledger data.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::vector::DecisionVector;

/// Scalar outcomes of one round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub loss: f64,
    pub comparator_loss: f64,
}

/// Complete trace of a run.
#[derive(Debug, Clone)]
pub struct RegretLedger {
    dim: usize,
    records: Vec<RoundRecord>,
    comparators: Vec<DecisionVector>,
    /// Per round, the gradients in inner-iteration order.
    gradients: Vec<Vec<DecisionVector>>,
}

impl RegretLedger {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1);
        Self {
            dim,
            records: Vec::new(),
            comparators: Vec::new(),
            gradients: Vec::new(),
        }
    }

    /// Appends round `t`; rounds must arrive as `1, 2, 3, ...` with no gaps.
    pub fn record(
        &mut self,
        t: usize,
        loss: f64,
        comparator_loss: f64,
        comparator: DecisionVector,
        gradients: Vec<DecisionVector>,
    ) -> Result<()> {
        if t != self.records.len() + 1 {
            return Err(Error::contract(format!(
                "ledger rounds must be contiguous: got t={t} after {} rounds",
                self.records.len()
            )));
        }
        if !loss.is_finite() || !comparator_loss.is_finite() {
            return Err(Error::contract("ledger values must be finite"));
        }
        if comparator.len() != self.dim
            || gradients.is_empty()
            || gradients.iter().any(|g| g.len() != self.dim)
        {
            return Err(Error::contract("ledger dimension mismatch"));
        }
        if gradients
            .iter()
            .any(|g| g.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::contract("ledger gradients must be finite"));
        }
        self.records.push(RoundRecord {
            t,
            loss,
            comparator_loss,
        });
        self.comparators.push(comparator);
        self.gradients.push(gradients);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn comparators(&self) -> &[DecisionVector] {
        &self.comparators
    }

    pub fn gradients(&self) -> &[Vec<DecisionVector>] {
        &self.gradients
    }

    /// Number of gradients per round (1, or `K` for the multi-query learner).
    pub fn inner_width(&self) -> usize {
        self.gradients.first().map_or(1, |g| g.len())
    }

    /// Cumulative learner loss minus cumulative comparator loss.
    pub fn dynamic_regret(&self) -> Result<f64> {
        self.dynamic_regret_upto(self.len())
    }

    /// Dynamic regret of the first `upto` rounds.
    pub fn dynamic_regret_upto(&self, upto: usize) -> Result<f64> {
        if self.is_empty() || upto == 0 || upto > self.len() {
            return Err(Error::contract("dynamic regret needs 1..=T recorded rounds"));
        }
        Ok(self.records[..upto]
            .iter()
            .map(|r| r.loss - r.comparator_loss)
            .sum())
    }

    /// Per-round cumulative dynamic regret curve.
    pub fn cumulative_regret_curve(&self) -> Vec<f64> {
        let mut total = 0.0;
        self.records
            .iter()
            .map(|r| {
                total += r.loss - r.comparator_loss;
                total
            })
            .collect()
    }

    /// Accumulator snapshot `v_t = sum_{s<=t} g_s (.) g_s` per inner index,
    /// reconstructed from the recorded gradients.
    pub fn accumulator_upto(&self, upto: usize) -> Vec<DecisionVector> {
        assert!(upto >= 1 && upto <= self.len());
        let width = self.inner_width();
        let mut acc = vec![vec![0.0; self.dim]; width];
        for round in &self.gradients[..upto] {
            for (j, g) in round.iter().enumerate() {
                for i in 0..self.dim {
                    acc[j][i] += g[i] * g[i];
                }
            }
        }
        acc.into_iter().map(DecisionVector::from_raw).collect()
    }

    /// Largest gradient infinity norm seen anywhere in the run.
    pub fn empirical_grad_inf(&self) -> f64 {
        self.gradients
            .iter()
            .flat_map(|gs| gs.iter())
            .fold(0.0, |acc, g| acc.max(g.inf_norm()))
    }
}

/// Per-coordinate gradient-history norms of a ledger prefix.
#[derive(Debug, Clone)]
pub struct GradientNorms {
    /// `||g^j_{1:T,i}||` for each inner index `j`.
    pub per_inner: Vec<Vec<f64>>,
    /// Per-coordinate norms aggregated over inner indices by maximum
    /// (for single-query learners this is just the one history norm).
    pub per_coordinate: Vec<f64>,
    /// Sum over coordinates of the aggregated norms.
    pub total: f64,
}

/// Euclidean per-coordinate gradient history norms over the first `upto`
/// rounds of the ledger.
pub fn gradient_history_norms(ledger: &RegretLedger, upto: usize) -> GradientNorms {
    assert!(upto >= 1 && upto <= ledger.len());
    let per_inner: Vec<Vec<f64>> = ledger
        .accumulator_upto(upto)
        .into_iter()
        .map(|acc| acc.iter().map(|v| v.sqrt()).collect())
        .collect();
    let dim = ledger.dim();
    let per_coordinate: Vec<f64> = (0..dim)
        .map(|i| per_inner.iter().map(|n| n[i]).fold(0.0, f64::max))
        .collect();
    let total = per_coordinate.iter().sum();
    GradientNorms {
        per_inner,
        per_coordinate,
        total,
    }
}

/// Static regret against a caller-supplied fixed comparator's loss sequence.
pub fn static_regret(ledger: &RegretLedger, comparator_losses: &[f64]) -> Result<f64> {
    if comparator_losses.len() != ledger.len() {
        return Err(Error::contract(format!(
            "comparator losses length {} does not match ledger length {}",
            comparator_losses.len(),
            ledger.len()
        )));
    }
    if ledger.is_empty() {
        return Err(Error::contract("static regret needs at least one round"));
    }
    let learner: f64 = ledger.records().iter().map(|r| r.loss).sum();
    Ok(learner - comparator_losses.iter().sum::<f64>())
}

/// L1 path-length of a comparator sequence: per-coordinate
/// `C_i = sum_t |x*_{t+1,i} - x*_{t,i}|` and their sum.
pub fn path_length_l1(comparators: &[DecisionVector]) -> Result<(Vec<f64>, f64)> {
    let dim = check_sequence(comparators)?;
    let mut per_coord = vec![0.0; dim];
    for w in comparators.windows(2) {
        for i in 0..dim {
            per_coord[i] += (w[1][i] - w[0][i]).abs();
        }
    }
    let total = per_coord.iter().sum();
    Ok((per_coord, total))
}

/// Euclidean path-length `sum_t ||x*_t - x*_{t-1}||`.
pub fn path_length_l2(comparators: &[DecisionVector]) -> Result<f64> {
    check_sequence(comparators)?;
    Ok(comparators
        .windows(2)
        .map(|w| w[1].sub(&w[0]).expect("dims checked").norm())
        .sum())
}

/// Squared path-length: per-coordinate `S_i = sum_t (x*_{t+1,i} - x*_{t,i})^2`
/// and their sum.
pub fn squared_path_length(comparators: &[DecisionVector]) -> Result<(Vec<f64>, f64)> {
    let dim = check_sequence(comparators)?;
    let mut per_coord = vec![0.0; dim];
    for w in comparators.windows(2) {
        for i in 0..dim {
            let d = w[1][i] - w[0][i];
            per_coord[i] += d * d;
        }
    }
    let total = per_coord.iter().sum();
    Ok((per_coord, total))
}

fn check_sequence(comparators: &[DecisionVector]) -> Result<usize> {
    let first = comparators
        .first()
        .ok_or_else(|| Error::contract("comparator sequence must be nonempty"))?;
    let dim = first.len();
    if comparators.iter().any(|c| c.len() != dim) {
        return Err(Error::contract("comparator sequence dimension mismatch"));
    }
    Ok(dim)
}

/// One row of the trace CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: usize,
    pub loss: f64,
    pub comparator_loss: f64,
    pub inst_regret: f64,
    pub cum_dynamic_regret: f64,
}

/// Writes the per-round trace: `t,loss,comparator_loss,inst_regret,
/// cum_dynamic_regret` with a header row, UTF-8, LF line endings. Floats use
/// the shortest round-trip decimal form.
pub fn write_trace_csv<W: Write>(out: &mut W, ledger: &RegretLedger) -> std::io::Result<()> {
    writeln!(out, "t,loss,comparator_loss,inst_regret,cum_dynamic_regret")?;
    let mut cum = 0.0;
    for r in ledger.records() {
        let inst = r.loss - r.comparator_loss;
        cum += inst;
        writeln!(
            out,
            "{},{},{},{},{}",
            r.t, r.loss, r.comparator_loss, inst, cum
        )?;
    }
    Ok(())
}

/// Parses a trace CSV produced by [`write_trace_csv`].
pub fn read_trace_csv<R: BufRead>(input: R) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line != "t,loss,comparator_loss,inst_regret,cum_dynamic_regret" {
                return Err(Error::contract(format!("unexpected trace header: {line}")));
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::contract(format!(
                "trace row {idx} has {} fields",
                fields.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::contract(format!("trace row {idx}: {e}")))
        };
        rows.push(TraceRow {
            t: fields[0]
                .parse()
                .map_err(|e| Error::contract(format!("trace row {idx}: {e}")))?,
            loss: parse(fields[1])?,
            comparator_loss: parse(fields[2])?,
            inst_regret: parse(fields[3])?,
            cum_dynamic_regret: parse(fields[4])?,
        });
    }
    Ok(rows)
}
