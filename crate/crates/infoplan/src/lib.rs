//! Informative path planning for a simulated sensing robot under co-safe
//! LTL mission constraints.
//!
//! The library is organized in layers. [`scltl`] parses syntactically
//! co-safe LTL formulas and compiles them to finite automata via formula
//! progression. [`graph`] holds weighted transition systems and their
//! product with a mission automaton, including the distance-to-target
//! potential the receding-horizon planner descends. [`belief`] implements
//! the target occupancy filter and its information measures, [`planner`]
//! the exhaustive and receding-horizon planners, and [`sim`] a seeded
//! Monte Carlo experiment harness over random grid worlds.

pub mod belief;
pub mod graph;
pub mod planner;
pub mod scltl;
pub mod sim;
