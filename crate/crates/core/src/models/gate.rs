use crate::error::{Error, Result};
use crate::types::SplitSystem;

/// `w' = (w_inf(t) - w) / tau` with constant `tau` and a piecewise-constant
/// target `w_inf`, split as `a = -1/tau`, `b = w_inf(t) / tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGate {
    tau: f64,
    /// `(t_start, w_inf)` pairs, sorted by time; the first value also applies
    /// before its start time.
    schedule: Vec<(f64, f64)>,
}

impl ScalarGate {
    pub fn new(tau: f64, schedule: Vec<(f64, f64)>) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tau must be positive, got {tau}"
            )));
        }
        if schedule.is_empty() {
            return Err(Error::InvalidArgument("empty w_inf schedule".into()));
        }
        if schedule.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(Error::InvalidArgument(
                "schedule times must increase".into(),
            ));
        }
        Ok(ScalarGate { tau, schedule })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rate(&self) -> f64 {
        -1.0 / self.tau
    }

    pub fn w_inf(&self, t: f64) -> f64 {
        let idx = self.schedule.partition_point(|&(s, _)| s <= t);
        self.schedule[idx.saturating_sub(1)].1
    }

    /// Smallest and largest target values.
    pub fn target_range(&self) -> (f64, f64) {
        self.schedule
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, w)| {
                (lo.min(w), hi.max(w))
            })
    }
}

impl SplitSystem for ScalarGate {
    fn dim(&self) -> usize {
        1
    }

    fn eval_split(&self, t: f64, _y: &[f64], a: &mut [f64], b: &mut [f64]) {
        a[0] = -1.0 / self.tau;
        b[0] = self.w_inf(t) / self.tau;
    }
}
