//! Graph layer: the robot's weighted transition system and its product with
//! a specification automaton, including the potential function and the path
//! enumerations the planners are built on.

mod product;
mod transition_system;

pub use product::{Potential, ProductAutomaton, ProductError};
pub use transition_system::{Transition, TransitionSystem, TsError};
