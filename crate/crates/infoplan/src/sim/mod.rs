//! Grid-world experiment harness: environment generation, ground truths,
//! Monte Carlo studies and their summary artifacts.

mod grid;
mod study;

pub use grid::{
    build_feasible_instance, build_instance_once, generate_grid, sample_ground_truth, Instance,
};
pub use study::{
    monte_carlo, plan_once, study_instance, write_histogram_csv, write_trials_csv, HistogramBin,
    Stats, StudyReport, TrialRecord,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{BeliefError, SensorError};
use crate::graph::{ProductError, TsError};
use crate::planner::PlanError;
use crate::scltl::{ApSetError, ParseError};

/// How one labeled atom is placed on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Placement {
    /// Always on this exact cell.
    Fixed { atom: String, cell: usize },
    /// Always on the cell diagonally opposite the start corner.
    FarCorner { atom: String },
    /// On `count` uniformly drawn cells; `allow_start` permits the start
    /// cell. All placed cells are kept mutually distinct by redrawing.
    Random {
        atom: String,
        count: usize,
        allow_start: bool,
    },
}

/// Which planner a study runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    Rhc,
    Exhaustive,
}

/// Belief representation used for planning and filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeliefMode {
    Factored,
    Joint,
}

/// Full description of one experiment. Serialized as JSON; every field has
/// a default matching the randomized five-by-five survey, so partial
/// documents are valid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid_width: usize,
    pub grid_height: usize,
    /// Start region (a corner by default).
    pub start_cell: usize,
    pub atoms: Vec<String>,
    pub formula: String,
    pub placements: Vec<Placement>,
    /// Peak detection probability of the sensor.
    pub mu0: f64,
    /// Exponential decay of detection with measurement distance.
    pub lambda: f64,
    /// False alarm probability on empty neighborhoods.
    pub false_alarm: f64,
    /// Bernoulli occupancy parameter for ground truths.
    pub occupancy: f64,
    /// Measurement distances are drawn uniformly from this interval.
    pub meas_distance_min: f64,
    pub meas_distance_max: f64,
    pub trials: usize,
    pub seed: u64,
    pub planner: PlannerMode,
    pub belief: BeliefMode,
    /// Receding horizon length.
    pub horizon: usize,
    /// Longest report sequence the entropy expectation expands exactly.
    pub exact_depth_cap: usize,
    /// Sample count of the Monte Carlo entropy estimator.
    pub mc_samples: usize,
    /// Redraw the environment every trial (study over random instances) or
    /// share one environment across all trials (study over reports only).
    pub fresh_environment_per_trial: bool,
    pub histogram_bins: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            grid_width: 5,
            grid_height: 5,
            start_cell: 0,
            atoms: vec!["D1".into(), "D2".into(), "C".into(), "U".into()],
            formula: "(!U U C) & (!C U D2) & (!D2 U D1)".into(),
            placements: vec![
                Placement::FarCorner { atom: "C".into() },
                Placement::Random {
                    atom: "D1".into(),
                    count: 2,
                    allow_start: true,
                },
                Placement::Random {
                    atom: "D2".into(),
                    count: 2,
                    allow_start: true,
                },
                Placement::Random {
                    atom: "U".into(),
                    count: 3,
                    allow_start: false,
                },
            ],
            mu0: 0.9,
            lambda: 0.01,
            false_alarm: 0.01,
            occupancy: 0.08,
            meas_distance_min: 0.0,
            meas_distance_max: 10.0,
            trials: 100,
            seed: 0,
            planner: PlannerMode::Rhc,
            belief: BeliefMode::Factored,
            horizon: 2,
            exact_depth_cap: 12,
            mc_samples: 512,
            fresh_environment_per_trial: true,
            histogram_bins: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn cell_count(&self) -> usize {
        self.grid_width * self.grid_height
    }

    pub fn plan_config(&self) -> crate::planner::PlanConfig {
        crate::planner::PlanConfig {
            horizon: self.horizon,
            exact_depth_cap: self.exact_depth_cap,
            mc_samples: self.mc_samples,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::BadConfig(msg));
        if self.grid_width == 0 || self.grid_height == 0 {
            return bad("grid dimensions must be positive".into());
        }
        if self.start_cell >= self.cell_count() {
            return bad(format!(
                "start cell {} is outside the {}x{} grid",
                self.start_cell, self.grid_width, self.grid_height
            ));
        }
        for (name, value) in [
            ("mu0", self.mu0),
            ("false_alarm", self.false_alarm),
            ("occupancy", self.occupancy),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return bad(format!("{name} must be a probability, got {value}"));
            }
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.meas_distance_min.is_finite() && self.meas_distance_max.is_finite())
            || self.meas_distance_min < 0.0
            || self.meas_distance_max < self.meas_distance_min
        {
            return bad(format!(
                "measurement distance bounds [{}, {}] are not a valid interval",
                self.meas_distance_min, self.meas_distance_max
            ));
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.mc_samples == 0 {
            return bad("mc_samples must be at least 1".into());
        }
        if self.histogram_bins == 0 {
            return bad("histogram_bins must be at least 1".into());
        }
        if self.belief == BeliefMode::Joint && self.cell_count() > crate::belief::JOINT_CELL_CAP {
            return bad(format!(
                "a joint belief over {} cells is intractable (cap {})",
                self.cell_count(),
                crate::belief::JOINT_CELL_CAP
            ));
        }
        let mut total_labeled = 0usize;
        for p in &self.placements {
            let (atom, count) = match p {
                Placement::Fixed { atom, cell } => {
                    if *cell >= self.cell_count() {
                        return bad(format!("fixed label cell {cell} is outside the grid"));
                    }
                    (atom, 1)
                }
                Placement::FarCorner { atom } => (atom, 1),
                Placement::Random { atom, count, .. } => (atom, *count),
            };
            if !self.atoms.iter().any(|a| a == atom) {
                return bad(format!("placement names undeclared atom {atom:?}"));
            }
            total_labeled += count;
        }
        if total_labeled >= self.cell_count() {
            return bad(format!(
                "{total_labeled} labeled cells cannot stay disjoint on {} cells",
                self.cell_count()
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Atoms(#[from] ApSetError),
    #[error(transparent)]
    Formula(#[from] ParseError),
    #[error(transparent)]
    Grid(#[from] TsError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Product(#[from] ProductError),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("no feasible instance found after {0} redraws")]
    NoFeasibleInstance(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// Whether the error is the infeasible-specification condition.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            SimError::Product(ProductError::Infeasible) | SimError::Plan(PlanError::Infeasible)
        )
    }

    /// Whether the error signals a broken internal invariant.
    pub fn is_internal(&self) -> bool {
        matches!(self, SimError::Plan(e) if e.is_internal())
    }
}
