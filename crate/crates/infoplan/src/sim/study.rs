//! Monte Carlo studies: repeated planning trials over random ground truths
//! (and optionally random environments), with summary statistics and
//! file-friendly report writers.

use std::io::{self, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::grid::{build_feasible_instance, build_instance_once, sample_ground_truth, Instance};
use super::{BeliefMode, ExperimentConfig, PlannerMode, SimError};
use crate::belief::Belief;
use crate::graph::Potential;
use crate::planner::{plan_exhaustive, run_rhc, simulate_run, Trace};
use crate::scltl::{parse_formula, ApSet, Formula};

/// Offset separating the environment stream from the trial streams.
const ENV_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

/// How many unsatisfiable environments a study may discard per draw.
const MAX_ENV_REDRAWS: usize = 1_000;

/// Outcome of a single trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub terminal_entropy_bits: f64,
    pub satisfied: bool,
    pub steps: usize,
    /// Wall time spent planning and filtering, reported but never part of
    /// the summary so that reruns reproduce it byte for byte.
    pub cpu_ms: f64,
}

/// Moments of the terminal entropy sample, plus the satisfaction rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub variance: f64,
    pub satisfied_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Everything a study produces. Traces are kept in trial order.
#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRecord>,
    pub stats: Stats,
    pub histogram: Vec<HistogramBin>,
    pub traces: Vec<Trace>,
    /// Unsatisfiable environment draws discarded across the whole study.
    pub environment_redraws: usize,
}

impl StudyReport {
    /// Timing-free summary document.
    pub fn summary(&self) -> serde_json::Value {
        json!({
            "config": self.config,
            "trials": self.trials.len(),
            "stats": self.stats,
            "histogram": self.histogram,
            "environment_redraws": self.environment_redraws,
        })
    }
}

fn prior_belief(cfg: &ExperimentConfig) -> Result<Belief, SimError> {
    let marginals = vec![cfg.occupancy; cfg.cell_count()];
    Ok(match cfg.belief {
        BeliefMode::Factored => Belief::factored(marginals)?,
        BeliefMode::Joint => Belief::joint_from_marginals(&marginals)?,
    })
}

fn env_rng(cfg: &ExperimentConfig, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64((cfg.seed ^ ENV_STREAM).wrapping_add(trial as u64))
}

fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    cfg.seed ^ trial as u64
}

/// A plan fixed ahead of all trials (shared environment, open-loop mode).
struct FixedPlan {
    run: Vec<usize>,
    w: Vec<Potential>,
}

enum TrialSetup<'a> {
    FreshEnvironment,
    SharedEnvironment(&'a Instance),
    SharedPlan(&'a Instance, &'a FixedPlan),
}

fn run_trial(
    cfg: &ExperimentConfig,
    formula: &Formula,
    setup: &TrialSetup,
    trial: usize,
) -> Result<(TrialRecord, Trace, usize), SimError> {
    let seed = trial_seed(cfg, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fresh;
    let mut redraws = 0;
    let instance = match setup {
        TrialSetup::FreshEnvironment => {
            let mut env = env_rng(cfg, trial);
            let (instance, rejected) =
                build_feasible_instance(cfg, formula, &mut env, MAX_ENV_REDRAWS)?;
            fresh = instance;
            redraws = rejected;
            &fresh
        }
        TrialSetup::SharedEnvironment(i) | TrialSetup::SharedPlan(i, _) => i,
    };
    let truth = sample_ground_truth(cfg, &mut rng);
    let prior = prior_belief(cfg)?;
    let plan_cfg = cfg.plan_config();

    let started = Instant::now();
    let trace = match (setup, cfg.planner) {
        (TrialSetup::SharedPlan(i, plan), _) => simulate_run(
            &i.ts, &i.product, &plan.w, &plan.run, prior, &i.model, &truth, &mut rng,
        )?,
        (_, PlannerMode::Rhc) => run_rhc(
            &instance.ts,
            &instance.product,
            prior,
            &instance.model,
            &plan_cfg,
            &truth,
            &mut rng,
        )?,
        (_, PlannerMode::Exhaustive) => {
            let plan = plan_exhaustive(
                &instance.ts,
                &instance.product,
                &prior,
                &instance.model,
                &plan_cfg,
            )?;
            let target = instance.product.select_target()?;
            let w = instance.product.compute_potential(target);
            simulate_run(
                &instance.ts,
                &instance.product,
                &w,
                &plan.run,
                prior,
                &instance.model,
                &truth,
                &mut rng,
            )?
        }
    };
    let cpu_ms = started.elapsed().as_secs_f64() * 1e3;

    let record = TrialRecord {
        trial,
        seed,
        terminal_entropy_bits: trace.terminal_entropy_bits,
        satisfied: trace.satisfied,
        steps: trace.transitions(),
        cpu_ms,
    };
    Ok((record, trace, redraws))
}

/// The environment a shared-environment study plans on, built exactly the
/// way `monte_carlo` builds it, with the number of discarded draws.
pub fn study_instance(cfg: &ExperimentConfig) -> Result<(Instance, usize), SimError> {
    cfg.validate()?;
    let ap = ApSet::new(cfg.atoms.clone())?;
    let formula = parse_formula(&cfg.formula, &ap)?;
    let mut env = env_rng(cfg, 0);
    build_feasible_instance(cfg, &formula, &mut env, MAX_ENV_REDRAWS)
}

/// Runs the configured number of trials and aggregates the results. Trial
/// outcomes depend only on the configuration (not on thread count or
/// scheduling); the per-trial timing column is the one exception.
pub fn monte_carlo(cfg: &ExperimentConfig) -> Result<StudyReport, SimError> {
    cfg.validate()?;
    let ap = ApSet::new(cfg.atoms.clone())?;
    let formula = parse_formula(&cfg.formula, &ap)?;

    let mut shared_redraws = 0;
    let shared = if cfg.fresh_environment_per_trial {
        None
    } else {
        let mut env = env_rng(cfg, 0);
        let (instance, rejected) =
            build_feasible_instance(cfg, &formula, &mut env, MAX_ENV_REDRAWS)?;
        shared_redraws = rejected;
        Some(instance)
    };
    let fixed_plan = match (&shared, cfg.planner) {
        (Some(instance), PlannerMode::Exhaustive) => {
            let prior = prior_belief(cfg)?;
            let plan = plan_exhaustive(
                &instance.ts,
                &instance.product,
                &prior,
                &instance.model,
                &cfg.plan_config(),
            )?;
            let target = instance.product.select_target()?;
            Some(FixedPlan {
                run: plan.run,
                w: instance.product.compute_potential(target),
            })
        }
        _ => None,
    };
    let setup = match (&shared, &fixed_plan) {
        (Some(i), Some(p)) => TrialSetup::SharedPlan(i, p),
        (Some(i), None) => TrialSetup::SharedEnvironment(i),
        (None, _) => TrialSetup::FreshEnvironment,
    };

    let outcomes: Result<Vec<_>, SimError> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, &formula, &setup, trial))
        .collect();
    let mut environment_redraws = shared_redraws;
    let mut trials = Vec::with_capacity(cfg.trials);
    let mut traces = Vec::with_capacity(cfg.trials);
    for (record, trace, redraws) in outcomes? {
        environment_redraws += redraws;
        trials.push(record);
        traces.push(trace);
    }

    let entropies: Vec<f64> = trials.iter().map(|t| t.terminal_entropy_bits).collect();
    let stats = Stats {
        mean: mean(&entropies),
        median: median(&entropies),
        variance: sample_variance(&entropies),
        satisfied_rate: if trials.is_empty() {
            0.0
        } else {
            trials.iter().filter(|t| t.satisfied).count() as f64 / trials.len() as f64
        },
    };
    let histogram = histogram(&entropies, cfg.histogram_bins);

    Ok(StudyReport {
        config: cfg.clone(),
        trials,
        stats,
        histogram,
        traces,
        environment_redraws,
    })
}

/// Plans one episode from a single environment draw; an unsatisfiable draw
/// is reported as an error rather than redrawn.
pub fn plan_once(cfg: &ExperimentConfig) -> Result<Trace, SimError> {
    cfg.validate()?;
    let ap = ApSet::new(cfg.atoms.clone())?;
    let formula = parse_formula(&cfg.formula, &ap)?;
    let mut env = env_rng(cfg, 0);
    let instance = build_instance_once(cfg, &formula, &mut env)?;

    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg, 0));
    let truth = sample_ground_truth(cfg, &mut rng);
    let prior = prior_belief(cfg)?;
    let plan_cfg = cfg.plan_config();
    let trace = match cfg.planner {
        PlannerMode::Rhc => run_rhc(
            &instance.ts,
            &instance.product,
            prior,
            &instance.model,
            &plan_cfg,
            &truth,
            &mut rng,
        )?,
        PlannerMode::Exhaustive => {
            let plan = plan_exhaustive(
                &instance.ts,
                &instance.product,
                &prior,
                &instance.model,
                &plan_cfg,
            )?;
            let target = instance.product.select_target()?;
            let w = instance.product.compute_potential(target);
            simulate_run(
                &instance.ts,
                &instance.product,
                &w,
                &plan.run,
                prior,
                &instance.model,
                &truth,
                &mut rng,
            )?
        }
    };
    Ok(trace)
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Equal-width histogram over the sample range. A constant sample collapses
/// to a single bin; the top bin includes its upper edge.
fn histogram(xs: &[f64], bins: usize) -> Vec<HistogramBin> {
    if xs.is_empty() {
        return Vec::new();
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return vec![HistogramBin {
            low: lo,
            high: hi,
            count: xs.len(),
        }];
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|i| HistogramBin {
            low: lo + i as f64 * width,
            high: if i + 1 == bins {
                hi
            } else {
                lo + (i + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for &x in xs {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        out[i].count += 1;
    }
    out
}

/// One row per trial. The timing column is informational; everything else
/// reproduces exactly across reruns with the same configuration.
pub fn write_trials_csv(report: &StudyReport, out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "trial,seed,terminal_entropy_bits,satisfied,steps,cpu_ms"
    )?;
    for t in &report.trials {
        writeln!(
            out,
            "{},{},{},{},{},{:.3}",
            t.trial, t.seed, t.terminal_entropy_bits, t.satisfied, t.steps, t.cpu_ms
        )?;
    }
    Ok(())
}

pub fn write_histogram_csv(report: &StudyReport, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "bin_low,bin_high,count")?;
    for b in &report.histogram {
        writeln!(out, "{},{},{}", b.low, b.high, b.count)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            grid_width: 3,
            grid_height: 3,
            atoms: vec!["a".into()],
            formula: "F a".into(),
            placements: vec![super::super::Placement::FarCorner { atom: "a".into() }],
            trials: 8,
            mc_samples: 64,
            exact_depth_cap: 10,
            histogram_bins: 4,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn an_empty_study_produces_empty_artifacts() {
        let cfg = ExperimentConfig {
            trials: 0,
            ..small_cfg()
        };
        let report = monte_carlo(&cfg).unwrap();
        assert!(report.trials.is_empty());
        assert!(report.traces.is_empty());
        assert!(report.histogram.is_empty());
        assert_eq!(report.stats.mean, 0.0);

        let mut csv = Vec::new();
        write_trials_csv(&report, &mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "trial,seed,terminal_entropy_bits,satisfied,steps,cpu_ms\n"
        );
        let mut csv = Vec::new();
        write_histogram_csv(&report, &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "bin_low,bin_high,count\n");
    }

    #[test]
    fn every_trial_satisfies_the_specification_and_reduces_entropy() {
        let cfg = small_cfg();
        let report = monte_carlo(&cfg).unwrap();
        assert_eq!(report.trials.len(), 8);
        assert_eq!(report.stats.satisfied_rate, 1.0);
        // A single surprising alert can leave one trial above the prior, so
        // the reduction guarantee is about the average, not each sample.
        let prior_bits = cfg.cell_count() as f64 * crate::belief::binary_entropy(cfg.occupancy);
        for t in &report.trials {
            assert!(
                t.terminal_entropy_bits >= 0.0,
                "trial {} ended with negative entropy: {}",
                t.trial,
                t.terminal_entropy_bits
            );
        }
        assert!(
            report.stats.mean <= prior_bits + 0.5,
            "mean terminal entropy {} stayed above the prior {}",
            report.stats.mean,
            prior_bits
        );
        let total: usize = report.histogram.iter().map(|b| b.count).sum();
        assert_eq!(total, 8);
    }

    #[test]
    fn studies_reproduce_everything_but_timing() {
        let cfg = small_cfg();
        let a = monte_carlo(&cfg).unwrap();
        let b = monte_carlo(&cfg).unwrap();
        assert_eq!(a.traces, b.traces);
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.histogram, b.histogram);
        assert_eq!(a.summary(), b.summary());
        for (x, y) in a.trials.iter().zip(&b.trials) {
            assert_eq!(x.trial, y.trial);
            assert_eq!(x.seed, y.seed);
            assert_eq!(x.terminal_entropy_bits, y.terminal_entropy_bits);
            assert_eq!(x.satisfied, y.satisfied);
            assert_eq!(x.steps, y.steps);
        }
    }

    #[test]
    fn shared_environments_reuse_one_grid() {
        let cfg = ExperimentConfig {
            fresh_environment_per_trial: false,
            ..small_cfg()
        };
        let report = monte_carlo(&cfg).unwrap();
        let first = &report.traces[0].regions;
        // Same grid and planner may still react to different reports, but
        // the first region is always the shared start.
        for trace in &report.traces {
            assert_eq!(trace.regions.first(), first.first());
            assert!(trace.satisfied);
        }
    }

    #[test]
    fn the_open_loop_planner_replays_one_run_everywhere() {
        let cfg = ExperimentConfig {
            planner: PlannerMode::Exhaustive,
            fresh_environment_per_trial: false,
            grid_width: 2,
            grid_height: 2,
            trials: 5,
            ..small_cfg()
        };
        let report = monte_carlo(&cfg).unwrap();
        let first = &report.traces[0].regions;
        for trace in &report.traces {
            assert_eq!(&trace.regions, first, "open loop runs share the path");
            assert!(trace.satisfied);
        }
    }

    #[test]
    fn plan_once_is_deterministic() {
        let cfg = small_cfg();
        let a = plan_once(&cfg).unwrap();
        let b = plan_once(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.satisfied);
    }

    #[test]
    fn histograms_partition_the_sample() {
        let xs = [0.0, 0.25, 0.5, 0.75, 1.0, 1.0];
        let bins = histogram(&xs, 4);
        assert_eq!(bins.len(), 4);
        assert_eq!(bins.iter().map(|b| b.count).sum::<usize>(), xs.len());
        assert_eq!(bins[0].low, 0.0);
        assert_eq!(bins[3].high, 1.0);
        assert_eq!(bins[3].count, 3, "top edge lands in the top bin");

        let flat = histogram(&[2.0, 2.0], 4);
        assert_eq!(flat.len(), 1);
        assert_eq!(flat[0].count, 2);
    }

    #[test]
    fn summary_statistics_match_hand_computation() {
        assert_eq!(mean(&[1.0, 2.0, 3.0, 6.0]), 3.0);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let v = sample_variance(&[1.0, 2.0, 3.0, 6.0]);
        assert!((v - 14.0 / 3.0).abs() < 1e-12);
        assert_eq!(sample_variance(&[5.0]), 0.0);
    }
}
