//! Planning layer: expected-entropy evaluation of candidate paths, the
//! exhaustive accepting-run planner, and the receding-horizon planner.

mod exhaustive;
mod expectation;
mod rhc;
mod trace;

pub use exhaustive::{plan_exhaustive, ExhaustivePlan};
pub use expectation::{
    expected_conditional_entropy, terminal_entropy_distribution, visit_terminal_entropies,
};
pub use rhc::{rhc_step, run_rhc, RhcContext, RhcSolve, RhcState};
pub use trace::{simulate_run, Trace, TraceStep};

use thiserror::Error;

use crate::belief::BeliefError;
use crate::graph::ProductError;

/// Knobs shared by both planners.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanConfig {
    /// Receding horizon length in transitions.
    pub horizon: usize,
    /// Longest report sequence expanded exactly; longer paths fall back to
    /// Monte Carlo estimation of the expectation.
    pub exact_depth_cap: usize,
    /// Sample count for the Monte Carlo fallback.
    pub mc_samples: usize,
    /// Root seed; all planner randomness derives from it.
    pub seed: u64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            horizon: 2,
            exact_depth_cap: 12,
            mc_samples: 512,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("specification infeasible: no accepting product state is reachable")]
    Infeasible,
    #[error("region index {0} is out of range")]
    BadRegion(usize),
    #[error("path is disconnected: no transition from region {from} to region {to}")]
    DisconnectedPath { from: usize, to: usize },
    #[error("feasibility violated: no candidate trajectory satisfies the planning constraints")]
    FeasibilityViolated,
    #[error("receding horizon run exceeded its termination bound of {0} steps")]
    TerminationBound(usize),
    #[error(transparent)]
    Belief(#[from] BeliefError),
}

impl From<ProductError> for PlanError {
    fn from(e: ProductError) -> Self {
        match e {
            ProductError::Infeasible => PlanError::Infeasible,
            // A mismatched product cannot be built in the first place, so the
            // planner never sees this case; map it defensively.
            ProductError::ApMismatch => PlanError::Infeasible,
        }
    }
}

impl PlanError {
    /// Whether this error signals a broken internal invariant rather than a
    /// property of the problem instance.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            PlanError::FeasibilityViolated
                | PlanError::TerminationBound(_)
                | PlanError::Belief(BeliefError::InconsistentReport)
        )
    }
}
