//! Stiff test workloads in split form.

mod beeler_reuter;
mod dahlquist;
mod gate;
mod membrane;

pub use beeler_reuter::{beeler_reuter, BeelerReuter, BrParams, RateLaw, BR_PARAMS_TEXT};
pub use dahlquist::{make_dahlquist, r_from_theta, theta_from_r, DahlquistSplit, SplitRatio};
pub use gate::ScalarGate;
pub use membrane::{membrane_to_split, MembraneModel, MembraneSystem, Stimulus};
