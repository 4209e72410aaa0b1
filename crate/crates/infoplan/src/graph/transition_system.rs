//! Weighted labeled transition system: the robot's motion model.
//!
//! States are partition regions. Each region carries a label letter over the
//! declared atom set, actions move the robot deterministically along weighted
//! edges, and a symmetric measurement graph records which regions the sensor
//! can observe from where (and at what effective distance).

use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

use crate::scltl::{ApSet, Letter};

#[derive(Debug, Error, PartialEq)]
pub enum TsError {
    #[error("state index {0} is out of range")]
    BadState(usize),
    #[error("transition {from}->{to} has invalid weight {weight} (must be finite and >= 0)")]
    BadWeight { from: usize, to: usize, weight: f64 },
    #[error("label of state {0} uses bits outside the declared atom set")]
    BadLabel(usize),
    #[error("state {state} has two transitions for action `{action}`")]
    DuplicateAction { state: usize, action: String },
    #[error(
        "measurement pair ({a}, {b}) has invalid distance {distance} (must be finite and >= 0)"
    )]
    BadMeasDistance { a: usize, b: usize, distance: f64 },
    #[error("measurement pair ({a}, {b}) is declared twice with different distances")]
    ConflictingMeas { a: usize, b: usize },
    #[error("self measurement of region {0} must have distance 0")]
    BadSelfMeas(usize),
    #[error("regions {a} and {b} are connected by a transition but share no measurement pair")]
    MissingMeas { a: usize, b: usize },
}

/// One deterministic move: applying `action` in `from` lands in `to` at cost
/// `weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub action: String,
    pub to: usize,
    pub weight: f64,
}

/// Weighted transition system with region labels and a measurement graph.
///
/// The measurement graph is undirected: a pair `(j, k, d)` means region `j`
/// is observable from region `k` (and vice versa) at distance `d`. Every
/// region observes itself at distance 0, and any two regions connected by a
/// transition must be measurement neighbors.
#[derive(Debug, Clone)]
pub struct TransitionSystem {
    ap: ApSet,
    labels: Vec<Letter>,
    initial: usize,
    transitions: Vec<Transition>,
    succ: Vec<Vec<(usize, f64)>>,
    meas: Vec<Vec<(usize, f64)>>,
}

impl TransitionSystem {
    pub fn new(
        ap: ApSet,
        labels: Vec<Letter>,
        initial: usize,
        transitions: Vec<Transition>,
        meas_pairs: &[(usize, usize, f64)],
    ) -> Result<Self, TsError> {
        let n = labels.len();
        if initial >= n {
            return Err(TsError::BadState(initial));
        }
        for (q, letter) in labels.iter().enumerate() {
            if ap.len() < 32 && letter.0 >> ap.len() != 0 {
                return Err(TsError::BadLabel(q));
            }
        }

        let mut seen_actions = BTreeSet::new();
        let mut succ = vec![Vec::new(); n];
        for t in &transitions {
            if t.from >= n {
                return Err(TsError::BadState(t.from));
            }
            if t.to >= n {
                return Err(TsError::BadState(t.to));
            }
            if !t.weight.is_finite() || t.weight < 0.0 {
                return Err(TsError::BadWeight {
                    from: t.from,
                    to: t.to,
                    weight: t.weight,
                });
            }
            if !seen_actions.insert((t.from, t.action.clone())) {
                return Err(TsError::DuplicateAction {
                    state: t.from,
                    action: t.action.clone(),
                });
            }
            succ[t.from].push((t.to, t.weight));
        }
        for list in &mut succ {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }

        // Undirected distances keyed by the sorted pair, self pairs implied.
        let mut pair_dist: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(a, b, d) in meas_pairs {
            if a >= n {
                return Err(TsError::BadState(a));
            }
            if b >= n {
                return Err(TsError::BadState(b));
            }
            if !d.is_finite() || d < 0.0 {
                return Err(TsError::BadMeasDistance { a, b, distance: d });
            }
            if a == b {
                if d != 0.0 {
                    return Err(TsError::BadSelfMeas(a));
                }
                continue;
            }
            let key = (a.min(b), a.max(b));
            if let Some(&prev) = pair_dist.get(&key) {
                if prev != d {
                    return Err(TsError::ConflictingMeas { a: key.0, b: key.1 });
                }
            } else {
                pair_dist.insert(key, d);
            }
        }
        for t in &transitions {
            if t.from != t.to {
                let key = (t.from.min(t.to), t.from.max(t.to));
                if !pair_dist.contains_key(&key) {
                    return Err(TsError::MissingMeas { a: key.0, b: key.1 });
                }
            }
        }
        let mut meas = vec![Vec::new(); n];
        for (q, list) in meas.iter_mut().enumerate() {
            list.push((q, 0.0));
        }
        for (&(a, b), &d) in &pair_dist {
            meas[a].push((b, d));
            meas[b].push((a, d));
        }
        for list in &mut meas {
            list.sort_by_key(|&(q, _)| q);
        }

        Ok(TransitionSystem {
            ap,
            labels,
            initial,
            transitions,
            succ,
            meas,
        })
    }

    pub fn ap(&self) -> &ApSet {
        &self.ap
    }

    pub fn state_count(&self) -> usize {
        self.labels.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn label(&self, q: usize) -> Letter {
        self.labels[q]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Successors of `q` as `(state, weight)`, sorted by state index. A pair
    /// of regions connected by several actions appears once per action.
    pub fn successors(&self, q: usize) -> &[(usize, f64)] {
        &self.succ[q]
    }

    /// Regions observable from `q` as `(region, distance)`, sorted by region
    /// index and always including `(q, 0.0)`.
    pub fn observation_neighborhood(&self, q: usize) -> &[(usize, f64)] {
        &self.meas[q]
    }

    /// Whether some transition moves directly from `a` to `b`.
    pub fn is_edge(&self, a: usize, b: usize) -> bool {
        self.succ[a].iter().any(|&(to, _)| to == b)
    }

    /// Label word induced by a region sequence.
    pub fn label_word(&self, path: &[usize]) -> Vec<Letter> {
        path.iter().map(|&q| self.labels[q]).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let labels: Vec<Vec<&str>> = self
            .labels
            .iter()
            .map(|&l| {
                (0..self.ap.len())
                    .filter(|&i| l.contains(i))
                    .map(|i| self.ap.name(i))
                    .collect()
            })
            .collect();
        let transitions: Vec<_> = self
            .transitions
            .iter()
            .map(|t| {
                json!({
                    "from": t.from,
                    "action": t.action,
                    "to": t.to,
                    "weight": t.weight,
                })
            })
            .collect();
        let mut measurement = Vec::new();
        for (k, list) in self.meas.iter().enumerate() {
            for &(j, d) in list {
                if j > k {
                    measurement.push(json!({ "a": k, "b": j, "distance": d }));
                }
            }
        }
        json!({
            "atoms": self.ap.names(),
            "initial": self.initial,
            "labels": labels,
            "transitions": transitions,
            "measurement": measurement,
        })
    }
}
