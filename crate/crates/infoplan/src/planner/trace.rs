//! Execution traces shared by the receding-horizon loop and open-loop
//! simulation of a fixed run.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{Belief, SensorModel};
use crate::graph::{Potential, ProductAutomaton, TransitionSystem};
use crate::scltl::Letter;

use super::PlanError;

/// One executed step. Step 0 records the initial report at the start region;
/// planner fields (`candidate_count`, `planned`) are populated from step 1 on
/// for receding-horizon runs and stay empty for open-loop simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub time: usize,
    pub region: usize,
    pub product_state: usize,
    pub report: bool,
    pub belief_entropy_bits: f64,
    pub w: Potential,
    pub candidate_count: usize,
    pub planned: Vec<usize>,
}

/// A completed execution: the visited product states with their reports and
/// posterior entropies, plus the projected label word for acceptance checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub regions: Vec<usize>,
    pub label_word: Vec<Letter>,
    pub satisfied: bool,
    pub terminal_entropy_bits: f64,
}

impl Trace {
    pub(super) fn from_steps(
        ts: &TransitionSystem,
        product: &ProductAutomaton,
        steps: Vec<TraceStep>,
        belief: &Belief,
    ) -> Self {
        let regions: Vec<usize> = steps.iter().map(|s| s.region).collect();
        let label_word = ts.label_word(&regions);
        let satisfied = steps
            .last()
            .is_some_and(|s| product.is_accepting(s.product_state));
        Trace {
            steps,
            regions,
            label_word,
            satisfied,
            terminal_entropy_bits: belief.entropy_bits(),
        }
    }

    /// Number of transitions taken.
    pub fn transitions(&self) -> usize {
        self.steps.len().saturating_sub(1)
    }
}

/// Executes a fixed product run against a ground truth: takes one report per
/// visited state, updates the belief, and records the trace. Used to replay
/// the exhaustive planner's open-loop optimum.
#[allow(clippy::too_many_arguments)]
pub fn simulate_run(
    ts: &TransitionSystem,
    product: &ProductAutomaton,
    w: &[Potential],
    run: &[usize],
    belief: Belief,
    model: &SensorModel,
    truth: &[bool],
    rng: &mut impl Rng,
) -> Result<Trace, PlanError> {
    assert!(!run.is_empty(), "a run visits at least its initial state");
    let mut belief = belief;
    let mut steps = Vec::with_capacity(run.len());
    for (time, &state) in run.iter().enumerate() {
        let region = product.region(state);
        let report = model.sample_report(truth, region, rng);
        belief = belief.bayes_update(model, region, report)?;
        steps.push(TraceStep {
            time,
            region,
            product_state: state,
            report,
            belief_entropy_bits: belief.entropy_bits(),
            w: w[state],
            candidate_count: 0,
            planned: Vec::new(),
        });
    }
    Ok(Trace::from_steps(ts, product, steps, &belief))
}
