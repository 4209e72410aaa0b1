//! Discrete information measures: entropy, conditional entropy, and mutual
//! information, all in bits.

use thiserror::Error;

/// Tolerance for pmf normalization checks.
pub const PMF_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum PmfError {
    #[error("pmf entry {index} is negative or not finite: {value}")]
    BadEntry { index: usize, value: f64 },
    #[error("pmf entries sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("pmf must have at least one outcome")]
    Empty,
    #[error("joint pmf size {len} does not match {rows} x {cols}")]
    BadShape {
        len: usize,
        rows: usize,
        cols: usize,
    },
}

fn check_entries(probs: &[f64]) -> Result<(), PmfError> {
    if probs.is_empty() {
        return Err(PmfError::Empty);
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(PmfError::BadEntry { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > PMF_TOLERANCE {
        return Err(PmfError::NotNormalized { sum });
    }
    Ok(())
}

/// `-p log2 p` with the `0 log 0 = 0` convention.
fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of a Bernoulli variable with success probability `p`, in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_term(p) + entropy_term(1.0 - p)
}

/// Entropy of an already-normalized probability vector.
pub(crate) fn entropy_bits(probs: &[f64]) -> f64 {
    probs.iter().copied().map(entropy_term).sum()
}

/// Probability mass function over a finite indexed outcome space.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self, PmfError> {
        check_entries(&probs)?;
        Ok(Pmf { probs })
    }

    pub fn uniform(outcomes: usize) -> Self {
        assert!(outcomes > 0, "a pmf needs at least one outcome");
        Pmf {
            probs: vec![1.0 / outcomes as f64; outcomes],
        }
    }

    pub fn point_mass(outcomes: usize, at: usize) -> Self {
        assert!(at < outcomes, "point mass outside the outcome space");
        let mut probs = vec![0.0; outcomes];
        probs[at] = 1.0;
        Pmf { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Shannon entropy in bits; always within `[0, log2(outcomes)]`.
    pub fn entropy(&self) -> f64 {
        self.probs.iter().copied().map(entropy_term).sum()
    }
}

/// Joint pmf over a pair `(X, Y)` of finite variables, stored row-major with
/// `X` indexing rows.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: usize,
    cols: usize,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(rows: usize, cols: usize, probs: Vec<f64>) -> Result<Self, PmfError> {
        if probs.len() != rows * cols {
            return Err(PmfError::BadShape {
                len: probs.len(),
                rows,
                cols,
            });
        }
        check_entries(&probs)?;
        Ok(JointPmf { rows, cols, probs })
    }

    /// Joint distribution of two independent variables.
    pub fn independent(x: &Pmf, y: &Pmf) -> Self {
        let mut probs = Vec::with_capacity(x.len() * y.len());
        for &px in x.probs() {
            for &py in y.probs() {
                probs.push(px * py);
            }
        }
        JointPmf {
            rows: x.len(),
            cols: y.len(),
            probs,
        }
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.probs[x * self.cols + y]
    }

    pub fn marginal_x(&self) -> Pmf {
        let probs = (0..self.rows)
            .map(|x| (0..self.cols).map(|y| self.prob(x, y)).sum())
            .collect();
        Pmf { probs }
    }

    pub fn marginal_y(&self) -> Pmf {
        let probs = (0..self.cols)
            .map(|y| (0..self.rows).map(|x| self.prob(x, y)).sum())
            .collect();
        Pmf { probs }
    }

    /// Conditional entropy `H(X | Y)` in bits.
    pub fn conditional_entropy(&self) -> f64 {
        let py = self.marginal_y();
        let mut h = 0.0;
        for y in 0..self.cols {
            if py.prob(y) == 0.0 {
                continue;
            }
            for x in 0..self.rows {
                let pxy = self.prob(x, y);
                if pxy > 0.0 {
                    h -= pxy * (pxy / py.prob(y)).log2();
                }
            }
        }
        h
    }

    /// Mutual information `I(X; Y)` in bits.
    pub fn mutual_information(&self) -> f64 {
        let px = self.marginal_x();
        let py = self.marginal_y();
        let mut info = 0.0;
        for x in 0..self.rows {
            for y in 0..self.cols {
                let pxy = self.prob(x, y);
                if pxy > 0.0 {
                    info += pxy * (pxy / (px.prob(x) * py.prob(y))).log2();
                }
            }
        }
        info
    }
}
