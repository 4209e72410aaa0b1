//! Expected terminal entropy of a measurement path.
//!
//! A path is a sequence of regions the robot reports from, one report per
//! element. Its value is the conditional entropy of the target belief after
//! all reports arrive, averaged over report outcomes under the current
//! belief. Short paths are expanded exactly over the binary report tree;
//! long ones are estimated by seeded Monte Carlo rollouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::{Belief, SensorModel};
use crate::graph::TransitionSystem;

use super::{PlanConfig, PlanError};

/// Expected entropy (bits) of the belief after reporting along `path`.
///
/// The empty path returns the entropy of `belief` unchanged. Consecutive
/// regions must be joined by a transition. Deterministic for fixed inputs
/// and `cfg.seed`, including the Monte Carlo fallback.
pub fn expected_conditional_entropy(
    ts: &TransitionSystem,
    path: &[usize],
    belief: &Belief,
    model: &SensorModel,
    cfg: &PlanConfig,
) -> Result<f64, PlanError> {
    let mut mean = 0.0;
    visit_terminal_entropies(ts, path, belief, model, cfg, &mut |h, w| {
        mean += w * h;
    })?;
    Ok(mean)
}

/// Distribution of the terminal entropy along `path` as `(entropy, probability)`
/// pairs. Exact (one entry per reachable report sequence) when the path fits
/// under `cfg.exact_depth_cap`, otherwise an empirical distribution from
/// `cfg.mc_samples` seeded rollouts with uniform weights.
///
/// The exact expansion has up to `2^len` entries. When only summaries of the
/// distribution are needed, fold them with [`visit_terminal_entropies`]
/// instead of materializing this vector.
pub fn terminal_entropy_distribution(
    ts: &TransitionSystem,
    path: &[usize],
    belief: &Belief,
    model: &SensorModel,
    cfg: &PlanConfig,
) -> Result<Vec<(f64, f64)>, PlanError> {
    let mut out = Vec::new();
    visit_terminal_entropies(ts, path, belief, model, cfg, &mut |h, w| {
        out.push((h, w));
    })?;
    Ok(out)
}

/// Streams the terminal entropy distribution of `path` into `visit`, called
/// once per outcome as `(entropy_bits, probability)`.
///
/// Yields the same outcomes in the same order as
/// [`terminal_entropy_distribution`] while holding only one belief per tree
/// level, so exact expansions of long paths run in memory proportional to
/// the path length.
pub fn visit_terminal_entropies(
    ts: &TransitionSystem,
    path: &[usize],
    belief: &Belief,
    model: &SensorModel,
    cfg: &PlanConfig,
    visit: &mut impl FnMut(f64, f64),
) -> Result<(), PlanError> {
    validate_path(ts, path)?;
    if path.len() <= cfg.exact_depth_cap {
        walk_report_tree(belief, path, model, 1.0, &mut |w, b| {
            visit(b.entropy_bits(), w);
        })
    } else {
        let w = 1.0 / cfg.mc_samples as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ path_salt(path));
        for _ in 0..cfg.mc_samples {
            let mut b = belief.clone();
            for &q in path {
                let p1 = b.predictive_report_pmf(model, q).prob(1);
                let y = rng.gen_bool(p1.clamp(0.0, 1.0));
                b = b.bayes_update(model, q, y)?;
            }
            visit(b.entropy_bits(), w);
        }
        Ok(())
    }
}

fn validate_path(ts: &TransitionSystem, path: &[usize]) -> Result<(), PlanError> {
    for &q in path {
        if q >= ts.state_count() {
            return Err(PlanError::BadRegion(q));
        }
    }
    for pair in path.windows(2) {
        if !ts.is_edge(pair[0], pair[1]) {
            return Err(PlanError::DisconnectedPath {
                from: pair[0],
                to: pair[1],
            });
        }
    }
    Ok(())
}

/// Depth-first expansion of the binary report tree, calling `visit` with the
/// probability mass and posterior belief of every leaf. Zero-probability
/// report branches are skipped, so every expanded update succeeds.
fn walk_report_tree(
    belief: &Belief,
    rest: &[usize],
    model: &SensorModel,
    weight: f64,
    visit: &mut impl FnMut(f64, &Belief),
) -> Result<(), PlanError> {
    let Some((&q, tail)) = rest.split_first() else {
        visit(weight, belief);
        return Ok(());
    };
    let pred = belief.predictive_report_pmf(model, q);
    for (y, p) in [(false, pred.prob(0)), (true, pred.prob(1))] {
        if p > 0.0 {
            let next = belief.bayes_update(model, q, y)?;
            walk_report_tree(&next, tail, model, weight * p, visit)?;
        }
    }
    Ok(())
}

/// FNV-1a over the path indices, used to decorrelate the Monte Carlo streams
/// of different paths while keeping each stream a pure function of
/// `(cfg.seed, path)`.
fn path_salt(path: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &q in path {
        for byte in (q as u64).to_le_bytes() {
            h ^= u64::from(byte);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scltl::ApSet;

    fn lone_region() -> TransitionSystem {
        let ap = ApSet::new(["a"]).unwrap();
        TransitionSystem::new(ap, vec![crate::scltl::Letter(0)], 0, vec![], &[]).unwrap()
    }

    fn chain(n: usize) -> TransitionSystem {
        use crate::graph::Transition;
        let ap = ApSet::new(["a"]).unwrap();
        let labels = vec![crate::scltl::Letter(0); n];
        let mut transitions = Vec::new();
        let mut meas = Vec::new();
        for q in 0..n - 1 {
            transitions.push(Transition {
                from: q,
                action: "f".into(),
                to: q + 1,
                weight: 1.0,
            });
            transitions.push(Transition {
                from: q + 1,
                action: "b".into(),
                to: q,
                weight: 1.0,
            });
            meas.push((q, q + 1, 1.0));
        }
        TransitionSystem::new(ap, labels, 0, transitions, &meas).unwrap()
    }

    fn isolated_sensor(n: usize) -> SensorModel {
        let hoods = (0..n).map(|q| vec![(q, 0.0)]).collect();
        SensorModel::new(0.9, 0.0, 0.01, hoods).unwrap()
    }

    #[test]
    fn empty_path_returns_prior_entropy() {
        let ts = lone_region();
        let b = Belief::uniform_factored(1);
        let model = isolated_sensor(1);
        let cfg = PlanConfig::default();
        let h = expected_conditional_entropy(&ts, &[], &b, &model, &cfg).unwrap();
        assert_eq!(h, 1.0);
    }

    #[test]
    fn one_report_matches_reference_expectation() {
        // Uniform prior over one cell, mu0 = 0.9, false alarm 0.01. The two
        // report outcomes have probability 0.455 and 0.545 and the expected
        // posterior entropy works out to the frozen constant below.
        let ts = lone_region();
        let model = isolated_sensor(1);
        let cfg = PlanConfig::default();
        for b in [
            Belief::uniform_factored(1),
            Belief::uniform_joint(1).unwrap(),
        ] {
            let h = expected_conditional_entropy(&ts, &[0], &b, &model, &cfg).unwrap();
            assert!((h - 0.280_745_193_261_703_1).abs() < 1e-12, "got {h}");
        }
    }

    #[test]
    fn exact_expansion_matches_per_truth_enumeration() {
        // Independent oracle: average over ground truths and report sequences
        // instead of walking the predictive tree. Two cells, overlapping
        // neighborhoods, a three-step path revisiting region 0.
        let ts = chain(2);
        let hoods = vec![vec![(0, 0.0), (1, 2.0)], vec![(0, 2.0), (1, 0.0)]];
        let model = SensorModel::new(0.9, 0.05, 0.3, hoods).unwrap();
        let priors = [0.3, 0.6];
        let path = [0usize, 1, 0];

        let mut oracle = 0.0;
        for truth_bits in 0..4u32 {
            let truth = [(truth_bits & 1) != 0, (truth_bits & 2) != 0];
            let p_truth = priors
                .iter()
                .zip(&truth)
                .map(|(&m, &s)| if s { m } else { 1.0 - m })
                .product::<f64>();
            for report_bits in 0..8u32 {
                let ys = [
                    (report_bits & 1) != 0,
                    (report_bits & 2) != 0,
                    (report_bits & 4) != 0,
                ];
                let mut p_reports = 1.0;
                for (step, &q) in path.iter().enumerate() {
                    let p1 = model.alert_likelihood(&truth, q, true);
                    p_reports *= if ys[step] { p1 } else { 1.0 - p1 };
                }
                if p_reports == 0.0 {
                    continue;
                }
                let mut post = Belief::joint_from_marginals(&priors).unwrap();
                for (step, &q) in path.iter().enumerate() {
                    post = post.bayes_update(&model, q, ys[step]).unwrap();
                }
                oracle += p_truth * p_reports * post.entropy_bits();
            }
        }

        let b0 = Belief::joint_from_marginals(&priors).unwrap();
        let cfg = PlanConfig::default();
        let h = expected_conditional_entropy(&ts, &path, &b0, &model, &cfg).unwrap();
        assert!((h - oracle).abs() < 1e-9, "exact {h} vs oracle {oracle}");
    }

    #[test]
    fn factored_and_joint_agree_on_isolated_neighborhoods() {
        let ts = chain(3);
        let model = isolated_sensor(3);
        let cfg = PlanConfig::default();
        let path = [0usize, 1, 2, 1];
        let hf = expected_conditional_entropy(
            &ts,
            &path,
            &Belief::factored(vec![0.2, 0.5, 0.7]).unwrap(),
            &model,
            &cfg,
        )
        .unwrap();
        let hj = expected_conditional_entropy(
            &ts,
            &path,
            &Belief::joint_from_marginals(&[0.2, 0.5, 0.7]).unwrap(),
            &model,
            &cfg,
        )
        .unwrap();
        assert!((hf - hj).abs() < 1e-9);
    }

    #[test]
    fn disconnected_paths_are_rejected() {
        let ts = chain(3);
        let model = isolated_sensor(3);
        let cfg = PlanConfig::default();
        let b = Belief::uniform_factored(3);
        assert_eq!(
            expected_conditional_entropy(&ts, &[0, 2], &b, &model, &cfg),
            Err(PlanError::DisconnectedPath { from: 0, to: 2 })
        );
        assert_eq!(
            expected_conditional_entropy(&ts, &[0, 0], &b, &model, &cfg),
            Err(PlanError::DisconnectedPath { from: 0, to: 0 })
        );
        assert_eq!(
            expected_conditional_entropy(&ts, &[7], &b, &model, &cfg),
            Err(PlanError::BadRegion(7))
        );
    }

    #[test]
    fn monte_carlo_is_deterministic_and_seed_sensitive() {
        let ts = chain(4);
        let model = isolated_sensor(4);
        let b = Belief::uniform_factored(4);
        let path = [0usize, 1, 2, 3, 2, 1];
        let cfg = PlanConfig {
            exact_depth_cap: 2,
            mc_samples: 64,
            seed: 11,
            ..PlanConfig::default()
        };
        let h1 = expected_conditional_entropy(&ts, &path, &b, &model, &cfg).unwrap();
        let h2 = expected_conditional_entropy(&ts, &path, &b, &model, &cfg).unwrap();
        assert_eq!(h1, h2);
        let other = PlanConfig { seed: 12, ..cfg };
        let h3 = expected_conditional_entropy(&ts, &path, &b, &model, &other).unwrap();
        assert_ne!(h1, h3);
    }

    #[test]
    fn monte_carlo_tracks_the_exact_value() {
        let ts = chain(4);
        let model = isolated_sensor(4);
        let b = Belief::uniform_factored(4);
        let path = [0usize, 1, 2, 3, 2, 1];
        let exact_cfg = PlanConfig::default();
        let exact = expected_conditional_entropy(&ts, &path, &b, &model, &exact_cfg).unwrap();
        let mc_cfg = PlanConfig {
            exact_depth_cap: 3,
            mc_samples: 4000,
            seed: 5,
            ..PlanConfig::default()
        };
        let est = expected_conditional_entropy(&ts, &path, &b, &model, &mc_cfg).unwrap();
        assert!((est - exact).abs() < 0.05, "exact {exact} vs mc {est}");
    }

    #[test]
    fn distribution_weights_form_a_pmf_with_matching_mean() {
        let ts = chain(3);
        let hoods = vec![
            vec![(0, 0.0), (1, 1.0)],
            vec![(0, 1.0), (1, 0.0), (2, 1.0)],
            vec![(1, 1.0), (2, 0.0)],
        ];
        let model = SensorModel::new(0.8, 0.02, 0.1, hoods).unwrap();
        let b = Belief::factored(vec![0.4, 0.5, 0.6]).unwrap();
        let cfg = PlanConfig::default();
        let path = [0usize, 1, 2];
        let dist = terminal_entropy_distribution(&ts, &path, &b, &model, &cfg).unwrap();
        let total: f64 = dist.iter().map(|&(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let mean: f64 = dist.iter().map(|&(h, w)| h * w).sum();
        let direct = expected_conditional_entropy(&ts, &path, &b, &model, &cfg).unwrap();
        assert!((mean - direct).abs() < 1e-12);
        // Weights are probabilities, entropies are bits over three cells.
        assert!(dist
            .iter()
            .all(|&(h, w)| (0.0..=3.0).contains(&h) && w > 0.0));
    }

    #[test]
    fn streaming_visits_match_the_materialized_distribution() {
        let ts = chain(4);
        let hoods = vec![
            vec![(0, 0.0), (1, 1.0)],
            vec![(0, 1.0), (1, 0.0), (2, 1.0)],
            vec![(1, 1.0), (2, 0.0), (3, 1.0)],
            vec![(2, 1.0), (3, 0.0)],
        ];
        let model = SensorModel::new(0.85, 0.03, 0.2, hoods).unwrap();
        let b = Belief::factored(vec![0.3, 0.5, 0.2, 0.7]).unwrap();
        let path = [0usize, 1, 2, 3, 2];
        // Exact regime and Monte Carlo regime must both stream the same
        // (entropy, weight) pairs in the same order as the vector form.
        for cfg in [
            PlanConfig::default(),
            PlanConfig {
                exact_depth_cap: 2,
                mc_samples: 50,
                seed: 9,
                ..PlanConfig::default()
            },
        ] {
            let dist = terminal_entropy_distribution(&ts, &path, &b, &model, &cfg).unwrap();
            let mut streamed = Vec::new();
            visit_terminal_entropies(&ts, &path, &b, &model, &cfg, &mut |h, w| {
                streamed.push((h, w));
            })
            .unwrap();
            assert_eq!(dist, streamed);
        }
    }
}
