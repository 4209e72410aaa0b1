//! Posterior over the per-cell occupancy variable, in two representations.
//!
//! The joint form stores the full pmf over every occupancy bit-vector and
//! runs the Bayes filter verbatim; it is exact but exponential in the cell
//! count, so it is reserved for small worlds and as the reference oracle.
//! The factored form keeps one marginal per cell and after each report
//! replaces the (now correlated) posterior by the product of its exact
//! marginals, which stays linear-size at the cost of dropping correlations.
//! Both forms agree exactly whenever a report depends on at most one cell.

use serde::Serialize;
use thiserror::Error;

use super::info::{binary_entropy, entropy_bits, Pmf};
use super::sensor::SensorModel;

/// Largest cell count for which the joint representation (2^cells outcomes)
/// may be constructed.
pub const JOINT_CELL_CAP: usize = 12;

/// Clamp bound keeping factored marginals away from the absorbing values 0
/// and 1.
pub const MARGINAL_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum BeliefError {
    #[error("joint beliefs support at most {JOINT_CELL_CAP} cells, got {0}")]
    TooManyCells(usize),
    #[error("marginal probability of cell {cell} must lie in [0, 1], got {value}")]
    BadMarginal { cell: usize, value: f64 },
    #[error("belief must cover at least one cell")]
    NoCells,
    #[error("inconsistent report: the observation has probability zero under the current belief")]
    InconsistentReport,
}

/// Belief over which cells are occupied.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Belief {
    /// Full pmf over occupancy vectors; outcome index `k` has cell `j`
    /// occupied iff bit `j` of `k` is set.
    Joint { cells: usize, probs: Vec<f64> },
    /// Independent per-cell occupancy probabilities.
    Factored { marginals: Vec<f64> },
}

fn check_marginals(marginals: &[f64]) -> Result<(), BeliefError> {
    if marginals.is_empty() {
        return Err(BeliefError::NoCells);
    }
    for (cell, &value) in marginals.iter().enumerate() {
        if !value.is_finite() || !(0.0..=1.0).contains(&value) {
            return Err(BeliefError::BadMarginal { cell, value });
        }
    }
    Ok(())
}

impl Belief {
    pub fn factored(marginals: Vec<f64>) -> Result<Self, BeliefError> {
        check_marginals(&marginals)?;
        Ok(Belief::Factored { marginals })
    }

    /// Factored belief with every cell at probability 1/2 (the maximum
    /// entropy prior).
    pub fn uniform_factored(cells: usize) -> Self {
        Belief::Factored {
            marginals: vec![0.5; cells.max(1)],
        }
    }

    /// Joint belief whose pmf is the product of the given marginals.
    pub fn joint_from_marginals(marginals: &[f64]) -> Result<Self, BeliefError> {
        check_marginals(marginals)?;
        let cells = marginals.len();
        if cells > JOINT_CELL_CAP {
            return Err(BeliefError::TooManyCells(cells));
        }
        let probs = (0..1usize << cells)
            .map(|k| {
                (0..cells)
                    .map(|j| {
                        if k >> j & 1 == 1 {
                            marginals[j]
                        } else {
                            1.0 - marginals[j]
                        }
                    })
                    .product()
            })
            .collect();
        Ok(Belief::Joint { cells, probs })
    }

    pub fn uniform_joint(cells: usize) -> Result<Self, BeliefError> {
        Belief::joint_from_marginals(&vec![0.5; cells.max(1)])
    }

    /// Joint belief from an explicit pmf over the 2^cells occupancy vectors.
    pub fn joint(cells: usize, pmf: Pmf) -> Result<Self, BeliefError> {
        if cells > JOINT_CELL_CAP {
            return Err(BeliefError::TooManyCells(cells));
        }
        assert_eq!(pmf.len(), 1 << cells, "pmf size must be 2^cells");
        Ok(Belief::Joint {
            cells,
            probs: pmf.probs().to_vec(),
        })
    }

    pub fn cells(&self) -> usize {
        match self {
            Belief::Joint { cells, .. } => *cells,
            Belief::Factored { marginals } => marginals.len(),
        }
    }

    pub fn is_joint(&self) -> bool {
        matches!(self, Belief::Joint { .. })
    }

    /// Occupancy probability of one cell.
    pub fn marginal(&self, cell: usize) -> f64 {
        match self {
            Belief::Joint { cells, probs } => {
                assert!(cell < *cells);
                probs
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| k >> cell & 1 == 1)
                    .map(|(_, &p)| p)
                    .sum()
            }
            Belief::Factored { marginals } => marginals[cell],
        }
    }

    pub fn marginals(&self) -> Vec<f64> {
        (0..self.cells()).map(|j| self.marginal(j)).collect()
    }

    /// Expands the belief to a full pmf over occupancy vectors (subject to
    /// the joint cell cap).
    pub fn to_pmf(&self) -> Result<Pmf, BeliefError> {
        match self {
            Belief::Joint { probs, .. } => {
                Ok(Pmf::new(probs.clone()).expect("stored joint pmf is normalized"))
            }
            Belief::Factored { marginals } => match Belief::joint_from_marginals(marginals)? {
                Belief::Joint { probs, .. } => {
                    Ok(Pmf::new(probs).expect("product pmf is normalized"))
                }
                Belief::Factored { .. } => unreachable!(),
            },
        }
    }

    /// Entropy of the belief in bits. Exact for the joint form; for the
    /// factored form it is the sum of per-cell binary entropies, which is the
    /// exact joint entropy under independence.
    pub fn entropy_bits(&self) -> f64 {
        match self {
            Belief::Joint { probs, .. } => entropy_bits(probs),
            Belief::Factored { marginals } => marginals.iter().map(|&m| binary_entropy(m)).sum(),
        }
    }

    /// Distribution of the next report from region `q`: index 0 is `y = 0`,
    /// index 1 is `y = 1`.
    pub fn predictive_report_pmf(&self, model: &SensorModel, q: usize) -> Pmf {
        let p1 = match self {
            Belief::Joint { cells, probs } => {
                let mut p1 = 0.0;
                let mut bits = vec![false; *cells];
                for (k, &p) in probs.iter().enumerate() {
                    fill_bits(&mut bits, k);
                    p1 += p * model.alert_likelihood(&bits, q, true);
                }
                p1
            }
            Belief::Factored { marginals } => {
                // E_s[f(1, s, q)] under independent cells: the false-alarm
                // branch weighted by the all-empty probability plus the
                // chance that some visible target is detected.
                let mut all_empty = 1.0;
                let mut all_missed = 1.0;
                for &(j, d) in model.neighborhood(q) {
                    let m = marginals[j];
                    all_empty *= 1.0 - m;
                    all_missed *= 1.0 - model.detection(d) * m;
                }
                model.false_alarm() * all_empty + 1.0 - all_missed
            }
        };
        let p1 = p1.clamp(0.0, 1.0);
        Pmf::new(vec![1.0 - p1, p1]).expect("report probabilities are normalized")
    }

    /// Incorporates one report from region `q`, returning the new belief.
    pub fn bayes_update(
        &self,
        model: &SensorModel,
        q: usize,
        y: bool,
    ) -> Result<Belief, BeliefError> {
        match self {
            Belief::Joint { cells, probs } => {
                let mut posterior = Vec::with_capacity(probs.len());
                let mut bits = vec![false; *cells];
                let mut total = 0.0;
                for (k, &p) in probs.iter().enumerate() {
                    fill_bits(&mut bits, k);
                    let weighted = model.alert_likelihood(&bits, q, y) * p;
                    total += weighted;
                    posterior.push(weighted);
                }
                if total <= 0.0 {
                    return Err(BeliefError::InconsistentReport);
                }
                for p in &mut posterior {
                    *p /= total;
                }
                Ok(Belief::Joint {
                    cells: *cells,
                    probs: posterior,
                })
            }
            Belief::Factored { marginals } => {
                let hood = model.neighborhood(q);
                let p1 = self.predictive_report_pmf(model, q).prob(1);
                let py = if y { p1 } else { 1.0 - p1 };
                if py <= 0.0 {
                    return Err(BeliefError::InconsistentReport);
                }
                let mut updated = marginals.clone();
                for &(j, dj) in hood {
                    // Alert probability given cell j occupied, the other
                    // visible cells at their marginals. With j occupied the
                    // false-alarm branch never applies.
                    let mut others_missed = 1.0;
                    for &(i, di) in hood {
                        if i != j {
                            others_missed *= 1.0 - model.detection(di) * marginals[i];
                        }
                    }
                    let p1_occupied = 1.0 - (1.0 - model.detection(dj)) * others_missed;
                    let num = if y { p1_occupied } else { 1.0 - p1_occupied };
                    updated[j] =
                        (num * marginals[j] / py).clamp(MARGINAL_CLAMP, 1.0 - MARGINAL_CLAMP);
                }
                Ok(Belief::Factored { marginals: updated })
            }
        }
    }
}

fn fill_bits(bits: &mut [bool], outcome: usize) {
    for (j, bit) in bits.iter_mut().enumerate() {
        *bit = outcome >> j & 1 == 1;
    }
}
