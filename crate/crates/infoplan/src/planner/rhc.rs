//! Receding-horizon planning.
//!
//! At every step the planner enumerates the bounded walks leaving the current
//! product state, keeps those that respect the progress constraints, and
//! commits to the first move of the walk with the lowest expected terminal
//! entropy. The constraints guarantee the robot reaches the target state:
//!
//! * the walk's endpoint must lie in the reachable neighborhood of the
//!   current state, collapsed to the target once it is within the horizon;
//! * while the target is out of reach, the endpoint's potential must be
//!   strictly below that of the previous prediction's endpoint;
//! * once the robot enters the horizon ball around the target, the first
//!   move may not revisit a state seen during this final approach.

use std::cmp::Ordering;
use std::collections::HashSet;

use rand::Rng;

use crate::belief::{Belief, SensorModel};
use crate::graph::{Potential, ProductAutomaton, TransitionSystem};

use super::expectation::expected_conditional_entropy;
use super::trace::{Trace, TraceStep};
use super::{PlanConfig, PlanError};

/// Immutable data shared by every planning step of one run.
pub struct RhcContext<'a> {
    pub ts: &'a TransitionSystem,
    pub product: &'a ProductAutomaton,
    pub model: &'a SensorModel,
    pub cfg: PlanConfig,
    /// Target product state: the reachable accepting state farthest from the
    /// initial state.
    pub target: usize,
    /// Potential of every product state (shortest distance to the target).
    pub w: Vec<Potential>,
    terminal_ball: Vec<usize>,
}

impl<'a> RhcContext<'a> {
    pub fn new(
        ts: &'a TransitionSystem,
        product: &'a ProductAutomaton,
        model: &'a SensorModel,
        cfg: PlanConfig,
    ) -> Result<Self, PlanError> {
        assert!(cfg.horizon >= 1, "horizon must be at least 1");
        let target = product.select_target()?;
        let w = product.compute_potential(target);
        let terminal_ball = product.reach_neighborhood(target, cfg.horizon);
        Ok(RhcContext {
            ts,
            product,
            model,
            cfg,
            target,
            w,
            terminal_ball,
        })
    }

    /// States reachable from the target within the horizon, sorted.
    pub fn terminal_ball(&self) -> &[usize] {
        &self.terminal_ball
    }

    pub fn in_terminal_ball(&self, state: usize) -> bool {
        self.terminal_ball.binary_search(&state).is_ok()
    }

    /// Longest walk the planner may commit to before replanning.
    fn bound(&self) -> usize {
        self.product.state_count() + self.terminal_ball.len() + 1
    }

    /// Greedy descent of the potential from the initial state, truncated to
    /// the horizon. Seeds the prediction compared against by the progress
    /// constraint of the first planning step.
    fn greedy_seed(&self) -> Vec<usize> {
        let mut seed = vec![self.product.initial()];
        while seed.len() < self.cfg.horizon && *seed.last().unwrap() != self.target {
            let cur = *seed.last().unwrap();
            let mut best: Option<(Potential, usize)> = None;
            for &(next, _) in self.product.successors(cur) {
                let wn = self.w[next];
                if best.is_none_or(|(bw, _)| wn < bw) {
                    best = Some((wn, next));
                }
            }
            let Some((_, next)) = best else { break };
            seed.push(next);
        }
        seed
    }
}

/// Mutable planning state carried across steps.
#[derive(Debug, Clone)]
pub struct RhcState {
    /// Current product state.
    pub current: usize,
    /// Steps taken so far.
    pub time: usize,
    /// Remainder of the previously chosen walk, starting at `current`.
    pub predicted: Vec<usize>,
    pub belief: Belief,
    /// Product states visited since entering the terminal ball.
    pub visited: HashSet<usize>,
    /// Whether the run has entered the terminal ball yet.
    pub in_final_approach: bool,
}

impl RhcState {
    pub fn new(ctx: &RhcContext, belief: Belief) -> Self {
        let mut state = RhcState {
            current: ctx.product.initial(),
            time: 0,
            predicted: ctx.greedy_seed(),
            belief,
            visited: HashSet::new(),
            in_final_approach: false,
        };
        state.note_visit(ctx);
        state
    }

    fn note_visit(&mut self, ctx: &RhcContext) {
        if !self.in_final_approach && ctx.in_terminal_ball(self.current) {
            self.in_final_approach = true;
        }
        if self.in_final_approach {
            self.visited.insert(self.current);
        }
    }

    /// Commits to the first move of `solve` and advances the clock. The
    /// belief update for the new region's report is the caller's job.
    pub fn advance(&mut self, ctx: &RhcContext, solve: &RhcSolve) {
        self.predicted = solve.chosen[1..].to_vec();
        self.current = solve.chosen[1];
        self.time += 1;
        self.note_visit(ctx);
    }
}

/// Outcome of one planning step.
#[derive(Debug, Clone, PartialEq)]
pub struct RhcSolve {
    /// The selected walk; `chosen[0]` is the state planned from and
    /// `chosen[1]` the committed move.
    pub chosen: Vec<usize>,
    /// Number of walks that survived every constraint.
    pub candidate_count: usize,
    /// Expected terminal entropy of the selected walk's reports.
    pub expected_entropy_bits: f64,
    /// Whether the endpoint constraint had collapsed to the target.
    pub collapsed: bool,
}

/// Solves one receding-horizon step: enumerate constrained walks, score them
/// by expected terminal entropy, return the best (ties go to the
/// lexicographically smallest index sequence).
pub fn rhc_step(ctx: &RhcContext, state: &RhcState) -> Result<RhcSolve, PlanError> {
    assert_ne!(state.current, ctx.target, "nothing to plan from the target");
    let b = ctx.cfg.horizon;
    let constrained = ctx
        .product
        .constrained_neighborhood(state.current, b, ctx.target);
    let collapsed = constrained.len() == 1 && constrained[0] == ctx.target;
    let pred_last = *state
        .predicted
        .last()
        .expect("the predicted walk always holds at least the current state");

    let walks = ctx
        .product
        .finite_paths(state.current, b, &HashSet::new(), Some(ctx.target));
    let mut survivors = 0usize;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for cand in walks {
        let last = *cand.last().unwrap();
        if constrained.binary_search(&last).is_err() {
            continue;
        }
        let decreases = ctx.w[last].partial_cmp(&ctx.w[pred_last]) == Some(Ordering::Less);
        if !collapsed && !decreases {
            continue;
        }
        if state.in_final_approach && state.visited.contains(&cand[1]) {
            continue;
        }
        survivors += 1;
        let regions = ctx.product.project(&cand[1..]);
        let h = expected_conditional_entropy(ctx.ts, &regions, &state.belief, ctx.model, &ctx.cfg)?;
        if best.as_ref().is_none_or(|&(bh, _)| h < bh) {
            best = Some((h, cand));
        }
    }
    let Some((h, chosen)) = best else {
        return Err(PlanError::FeasibilityViolated);
    };
    Ok(RhcSolve {
        chosen,
        candidate_count: survivors,
        expected_entropy_bits: h,
        collapsed,
    })
}

/// Runs the receding-horizon planner to completion against a ground truth.
///
/// The robot reports once on arrival in every region, the initial one
/// included, and replans after each report. The run ends at the target
/// product state; a run that exceeds its termination bound aborts with an
/// internal error.
pub fn run_rhc(
    ts: &TransitionSystem,
    product: &ProductAutomaton,
    belief: Belief,
    model: &SensorModel,
    cfg: &PlanConfig,
    truth: &[bool],
    rng: &mut impl Rng,
) -> Result<Trace, PlanError> {
    let ctx = RhcContext::new(ts, product, model, cfg.clone())?;
    let mut state = RhcState::new(&ctx, belief);

    let q0 = product.region(state.current);
    let y0 = model.sample_report(truth, q0, rng);
    state.belief = state.belief.bayes_update(model, q0, y0)?;
    let mut steps = vec![TraceStep {
        time: 0,
        region: q0,
        product_state: state.current,
        report: y0,
        belief_entropy_bits: state.belief.entropy_bits(),
        w: ctx.w[state.current],
        candidate_count: 0,
        planned: Vec::new(),
    }];

    while state.current != ctx.target {
        if state.time >= ctx.bound() {
            return Err(PlanError::TerminationBound(ctx.bound()));
        }
        let solve = rhc_step(&ctx, &state)?;
        state.advance(&ctx, &solve);
        let q = product.region(state.current);
        let y = model.sample_report(truth, q, rng);
        state.belief = state.belief.bayes_update(model, q, y)?;
        steps.push(TraceStep {
            time: state.time,
            region: q,
            product_state: state.current,
            report: y,
            belief_entropy_bits: state.belief.entropy_bits(),
            w: ctx.w[state.current],
            candidate_count: solve.candidate_count,
            planned: solve.chosen.clone(),
        });
    }

    Ok(Trace::from_steps(ts, product, steps, &state.belief))
}
