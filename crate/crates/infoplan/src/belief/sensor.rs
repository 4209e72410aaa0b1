//! Binary alert sensor: detection probability decays exponentially with the
//! measurement distance to a target, false alarms fire at a constant rate,
//! and several targets in view combine as independent detection chances.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::TransitionSystem;

#[derive(Debug, Error, PartialEq)]
pub enum SensorError {
    #[error("{name} must lie in [0, 1], got {value}")]
    BadProbability { name: &'static str, value: f64 },
    #[error("decay rate must be finite and >= 0, got {0}")]
    BadDecay(f64),
    #[error("observation neighborhood of region {0} must contain the region itself at distance 0")]
    MissingSelf(usize),
    #[error("observation neighborhood of region {region} has invalid distance {distance}")]
    BadDistance { region: usize, distance: f64 },
    #[error("region index {0} out of range in an observation neighborhood")]
    BadRegion(usize),
}

/// Sensor parameters plus the observation neighborhood of every region:
/// `(region, distance)` pairs, each region observing itself at distance 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensorModel {
    mu0: f64,
    lambda: f64,
    false_alarm: f64,
    neighborhoods: Vec<Vec<(usize, f64)>>,
}

impl SensorModel {
    pub fn new(
        mu0: f64,
        lambda: f64,
        false_alarm: f64,
        neighborhoods: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, SensorError> {
        for (name, value) in [
            ("peak detection rate", mu0),
            ("false alarm rate", false_alarm),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SensorError::BadProbability { name, value });
            }
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(SensorError::BadDecay(lambda));
        }
        let cells = neighborhoods.len();
        for (region, hood) in neighborhoods.iter().enumerate() {
            for &(j, distance) in hood {
                if j >= cells {
                    return Err(SensorError::BadRegion(j));
                }
                if !distance.is_finite() || distance < 0.0 {
                    return Err(SensorError::BadDistance { region, distance });
                }
            }
            if !hood.contains(&(region, 0.0)) {
                return Err(SensorError::MissingSelf(region));
            }
        }
        Ok(SensorModel {
            mu0,
            lambda,
            false_alarm,
            neighborhoods,
        })
    }

    /// Sensor over the measurement graph of a transition system.
    pub fn from_ts(
        ts: &TransitionSystem,
        mu0: f64,
        lambda: f64,
        false_alarm: f64,
    ) -> Result<Self, SensorError> {
        let neighborhoods = (0..ts.state_count())
            .map(|q| ts.observation_neighborhood(q).to_vec())
            .collect();
        SensorModel::new(mu0, lambda, false_alarm, neighborhoods)
    }

    pub fn cell_count(&self) -> usize {
        self.neighborhoods.len()
    }

    pub fn false_alarm(&self) -> f64 {
        self.false_alarm
    }

    /// Detection probability of a target at measurement distance `d`.
    pub fn detection(&self, d: f64) -> f64 {
        self.mu0 * (-self.lambda * d).exp()
    }

    /// Regions observable from `q` with their measurement distances.
    pub fn neighborhood(&self, q: usize) -> &[(usize, f64)] {
        &self.neighborhoods[q]
    }

    /// Probability of report `y` from region `q` given the true occupancy
    /// `s`: the false alarm rate when nothing is in view, otherwise one minus
    /// the probability that every visible target goes undetected.
    pub fn alert_likelihood(&self, s: &[bool], q: usize, y: bool) -> f64 {
        let mut any_target = false;
        let mut all_missed = 1.0;
        for &(j, d) in &self.neighborhoods[q] {
            if s[j] {
                any_target = true;
                all_missed *= 1.0 - self.detection(d);
            }
        }
        let alert = if any_target {
            1.0 - all_missed
        } else {
            self.false_alarm
        };
        if y {
            alert
        } else {
            1.0 - alert
        }
    }

    /// Draws one report from region `q` under ground truth `s`.
    pub fn sample_report<R: Rng + ?Sized>(&self, s: &[bool], q: usize, rng: &mut R) -> bool {
        rng.gen_bool(self.alert_likelihood(s, q, true))
    }
}
