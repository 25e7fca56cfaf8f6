//! Exponential Adams-Bashforth (EAB_k) and integral EAB (I-EAB_k)
//! integrators for stiff ODEs written as `y' = a(t, y) y + b(t, y)` with a
//! diagonal, time-varying stabilizer `a`.
//!
//! Besides the steppers the crate carries the tooling used to evaluate them:
//!
//! * [`stability`]: Dahlquist analysis on the split
//!   `lambda y = theta lambda y + (1 - theta) lambda y`, A(0) threshold search, 2-D stability grids and
//!   positivity bounds.
//! * [`harness`]: trajectory integration, cubic projection onto a reference
//!   grid, relative error, convergence studies and critical time steps.
//! * [`models`]: the split Dahlquist problem, a scalar gating equation and
//!   the Beeler-Reuter ventricular cell model.
//! * [`classical`]: AB_k, BDF_k and RK4 baselines.
//!
//! ```
//! use expadams::{harness::integrate, models::make_dahlquist, SchemeSpec, StateVector};
//!
//! // With theta = 1 the stabilizer captures the whole linear part and the
//! // scheme is exact.
//! let sys = make_dahlquist(-1.0, 1.0).unwrap();
//! let run = integrate(SchemeSpec::eab(1).unwrap(), &sys, &StateVector(vec![1.0]), 0.1, 1.0).unwrap();
//! assert!(!run.overflowed);
//! assert!((run.final_state()[0] - (-1.0f64).exp()).abs() < 1e-14);
//! ```

// NaN must fail the argument checks, so `!(x > 0.0)` is intended.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod eab;
pub mod error;
pub mod exec;
pub mod harness;
pub mod ieab;
pub mod models;
pub mod phi;
pub mod stability;
pub mod types;

pub use error::{Error, Result};
pub use exec::Exec;
pub use types::{
    consistency_check, DiagStabilizer, Family, HistoryWindow, Sample, SchemeSpec, SplitSystem,
    StateVector,
};

/// Highest multistep order provided.
pub const MAX_K: usize = 4;

/// A state whose max-norm exceeds this is treated as overflowed.
pub const OVERFLOW_CAP: f64 = 1e10;

pub(crate) fn check_overflow(y: &[f64], t: f64) -> Result<()> {
    if y.iter().all(|x| x.is_finite() && x.abs() <= OVERFLOW_CAP) {
        Ok(())
    } else {
        Err(Error::Overflow { t })
    }
}
