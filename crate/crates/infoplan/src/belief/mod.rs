//! Estimation layer: information measures, the alert sensor model, and the
//! Bayes filter over target occupancy.

mod filter;
mod info;
mod sensor;

pub use filter::{Belief, BeliefError, JOINT_CELL_CAP, MARGINAL_CLAMP};
pub use info::{binary_entropy, JointPmf, Pmf, PmfError, PMF_TOLERANCE};
pub use sensor::{SensorError, SensorModel};
