//! Random grid-world environments: a four-connected grid of regions with
//! uniformly drawn measurement distances and randomly placed labels.

use rand::Rng;

use super::{ExperimentConfig, Placement, SimError};
use crate::belief::SensorModel;
use crate::graph::{ProductAutomaton, Transition, TransitionSystem};
use crate::scltl::{translate, ApSet, Formula, Letter};

/// One fully built environment: motion model, specification product and
/// sensor, ready for planning.
pub struct Instance {
    pub ts: TransitionSystem,
    pub product: ProductAutomaton,
    pub model: SensorModel,
}

/// Draws a random grid environment. Cells are indexed row major, motion is
/// four connected with unit weights, and every pair of adjacent cells is a
/// measurement pair with a distance drawn uniformly from the configured
/// interval. Distances are drawn first (right edge then down edge, cell by
/// cell), then label cells, so the two stay reproducible independently.
pub fn generate_grid(
    cfg: &ExperimentConfig,
    rng: &mut impl Rng,
) -> Result<TransitionSystem, SimError> {
    let (w, h) = (cfg.grid_width, cfg.grid_height);
    let ap = ApSet::new(cfg.atoms.clone())?;

    let mut transitions = Vec::new();
    let mut meas = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let q = y * w + x;
            let mut link = |other: usize, fwd: &str, back: &str| {
                transitions.push(Transition {
                    from: q,
                    action: fwd.into(),
                    to: other,
                    weight: 1.0,
                });
                transitions.push(Transition {
                    from: other,
                    action: back.into(),
                    to: q,
                    weight: 1.0,
                });
            };
            if x + 1 < w {
                link(q + 1, "e", "w");
            }
            if y + 1 < h {
                link(q + w, "s", "n");
            }
        }
    }
    for y in 0..h {
        for x in 0..w {
            let q = y * w + x;
            let mut span = cfg.meas_distance_max - cfg.meas_distance_min;
            if span <= 0.0 {
                span = 0.0;
            }
            let mut draw = |other: usize| {
                let d = if span == 0.0 {
                    cfg.meas_distance_min
                } else {
                    cfg.meas_distance_min + rng.gen::<f64>() * span
                };
                meas.push((q, other, d));
            };
            if x + 1 < w {
                draw(q + 1);
            }
            if y + 1 < h {
                draw(q + w);
            }
        }
    }

    let labels = place_labels(cfg, &ap, rng)?;
    Ok(TransitionSystem::new(
        ap,
        labels,
        cfg.start_cell,
        transitions,
        &meas,
    )?)
}

/// Assigns label letters to cells following the configured placements, in
/// order. Random placements redraw until they land on a free cell (and away
/// from the start when `allow_start` is false); deterministic placements on
/// an already occupied cell are a configuration error.
fn place_labels(
    cfg: &ExperimentConfig,
    ap: &ApSet,
    rng: &mut impl Rng,
) -> Result<Vec<Letter>, SimError> {
    let (w, h) = (cfg.grid_width, cfg.grid_height);
    let cells = cfg.cell_count();
    let mut labels = vec![Letter::EMPTY; cells];
    let mut occupied = vec![false; cells];

    let put = |labels: &mut Vec<Letter>,
               occupied: &mut Vec<bool>,
               atom: &str,
               cell: usize|
     -> Result<(), SimError> {
        if occupied[cell] {
            return Err(SimError::BadConfig(format!(
                "label {atom:?} collides with an earlier placement on cell {cell}"
            )));
        }
        occupied[cell] = true;
        labels[cell] = labels[cell].with(ap.index_of(atom).expect("validated atom"));
        Ok(())
    };

    for placement in &cfg.placements {
        match placement {
            Placement::Fixed { atom, cell } => put(&mut labels, &mut occupied, atom, *cell)?,
            Placement::FarCorner { atom } => {
                let (sx, sy) = (cfg.start_cell % w, cfg.start_cell / w);
                let far = (h - 1 - sy) * w + (w - 1 - sx);
                put(&mut labels, &mut occupied, atom, far)?;
            }
            Placement::Random {
                atom,
                count,
                allow_start,
            } => {
                for _ in 0..*count {
                    let mut attempts = 0;
                    let cell = loop {
                        let c = rng.gen_range(0..cells);
                        if !occupied[c] && (*allow_start || c != cfg.start_cell) {
                            break c;
                        }
                        attempts += 1;
                        if attempts > 10_000 {
                            return Err(SimError::BadConfig(format!(
                                "could not place label {atom:?} on a free cell"
                            )));
                        }
                    };
                    put(&mut labels, &mut occupied, atom, cell)?;
                }
            }
        }
    }
    Ok(labels)
}

/// Independent Bernoulli occupancy draw for every cell.
pub fn sample_ground_truth(cfg: &ExperimentConfig, rng: &mut impl Rng) -> Vec<bool> {
    (0..cfg.cell_count())
        .map(|_| rng.gen_bool(cfg.occupancy.clamp(0.0, 1.0)))
        .collect()
}

fn build_instance(
    cfg: &ExperimentConfig,
    formula: &Formula,
    rng: &mut impl Rng,
) -> Result<Instance, SimError> {
    let ts = generate_grid(cfg, rng)?;
    let fsa = translate(formula, ts.ap());
    let product = ProductAutomaton::build(&ts, &fsa)?;
    let model = SensorModel::from_ts(&ts, cfg.mu0, cfg.lambda, cfg.false_alarm)?;
    Ok(Instance { ts, product, model })
}

/// Redraws environments until the specification is satisfiable from the
/// start cell, returning the instance and how many draws were discarded.
/// Gives up after `max_redraws` rejected environments.
pub fn build_feasible_instance(
    cfg: &ExperimentConfig,
    formula: &Formula,
    rng: &mut impl Rng,
    max_redraws: usize,
) -> Result<(Instance, usize), SimError> {
    let mut rejected = 0;
    loop {
        let instance = build_instance(cfg, formula, rng)?;
        if instance.product.select_target().is_ok() {
            return Ok((instance, rejected));
        }
        rejected += 1;
        if rejected > max_redraws {
            return Err(SimError::NoFeasibleInstance(max_redraws));
        }
    }
}

/// Builds the environment from a single draw without redrawing; an
/// unsatisfiable specification surfaces as an error at planning time.
pub fn build_instance_once(
    cfg: &ExperimentConfig,
    formula: &Formula,
    rng: &mut impl Rng,
) -> Result<Instance, SimError> {
    build_instance(cfg, formula, rng)
}
