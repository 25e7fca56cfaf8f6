use std::time::{Duration, Instant};

use crate::classical::{ab_step, bdf_step, rk4_step, NewtonConfig};
use crate::eab::{bootstrap, eab_step};
use crate::error::{Error, Result};
use crate::ieab::ieab_step;
use crate::types::{Family, Sample, SchemeSpec, SplitSystem, StateVector};

/// What [`integrate_with`] keeps of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Record {
    /// Every state at every step.
    #[default]
    All,
    /// One component at every step.
    Component(usize),
    /// Only the last state.
    Final,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub record: Record,
    pub newton: NewtonConfig,
}

/// Trajectory and diagnostics of one fixed-step run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub scheme: SchemeSpec,
    pub h: f64,
    /// Number of completed steps.
    pub steps: usize,
    /// Recorded times, `n h` for the recorded steps.
    pub times: Vec<f64>,
    /// Recorded values, `stride` per recorded time.
    pub values: Vec<f64>,
    pub stride: usize,
    pub overflowed: bool,
    pub solver_failures: usize,
    /// Last state reached (the one before the failure if the run failed).
    pub last: StateVector,
    pub newton_iterations: usize,
    pub wall_time: Duration,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.overflowed || self.solver_failures > 0
    }

    pub fn final_state(&self) -> &StateVector {
        &self.last
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Recorded values at the `i`-th recorded time.
    pub fn state(&self, i: usize) -> &[f64] {
        &self.values[i * self.stride..(i + 1) * self.stride]
    }

    /// Component `c` of the recorded values (`c < stride`).
    pub fn series(&self, c: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(c)
            .step_by(self.stride)
            .copied()
            .collect()
    }

    /// The last recorded component: the potential for membrane models.
    pub fn last_component(&self) -> Vec<f64> {
        self.series(self.stride - 1)
    }
}

/// Number of steps of size `h` needed to reach `t_end`: `t_end / h` when that
/// is an integer up to rounding, the next integer otherwise.
pub fn steps_for(t_end: f64, h: f64) -> usize {
    let r = t_end / h;
    let n = r.round();
    if (r - n).abs() <= 1e-9 * r.max(1.0) {
        n as usize
    } else {
        r.ceil() as usize
    }
}

pub fn integrate<S: SplitSystem + ?Sized>(
    scheme: SchemeSpec,
    system: &S,
    y0: &StateVector,
    h: f64,
    t_end: f64,
) -> Result<RunRecord> {
    integrate_with(scheme, system, y0, h, t_end, &RunOptions::default())
}

struct Recorder {
    mode: Record,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Recorder {
    fn push(&mut self, t: f64, y: &[f64]) {
        match self.mode {
            Record::All => {
                self.times.push(t);
                self.values.extend_from_slice(y);
            }
            Record::Component(c) => {
                self.times.push(t);
                self.values.push(y[c]);
            }
            Record::Final => {}
        }
    }
}

/// Fixed-step integration of `system` from `t = 0` to `t_end`.
///
/// Multistep schemes start from RK4 values at the same step. A run that
/// overflows or whose Newton solve fails stops there and is flagged; these
/// are not errors. Errors are reserved for invalid arguments.
pub fn integrate_with<S: SplitSystem + ?Sized>(
    scheme: SchemeSpec,
    system: &S,
    y0: &StateVector,
    h: f64,
    t_end: f64,
    opts: &RunOptions,
) -> Result<RunRecord> {
    if !(h > 0.0 && h.is_finite()) || !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need h > 0 and T > 0, got h={h}, T={t_end}"
        )));
    }
    if y0.len() != system.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial state has length {}, system dimension is {}",
            y0.len(),
            system.dim()
        )));
    }
    let stride = match opts.record {
        Record::Component(c) if c >= system.dim() => {
            return Err(Error::InvalidArgument(format!("no component {c}")));
        }
        Record::Component(_) => 1,
        _ => system.dim(),
    };
    let started = Instant::now();
    let n_steps = steps_for(t_end, h);
    let mut rec = Recorder {
        mode: opts.record,
        times: Vec::new(),
        values: Vec::new(),
    };
    if opts.record != Record::Final {
        rec.times.reserve(n_steps + 1);
        rec.values.reserve((n_steps + 1) * stride);
    }

    let mut record = RunRecord {
        scheme,
        h,
        steps: 0,
        times: Vec::new(),
        values: Vec::new(),
        stride,
        overflowed: false,
        solver_failures: 0,
        last: y0.clone(),
        newton_iterations: 0,
        wall_time: Duration::ZERO,
    };

    let outcome = drive(scheme, system, y0, h, n_steps, opts, &mut rec, &mut record);
    match outcome {
        Ok(()) => {}
        Err(Error::Overflow { .. }) => record.overflowed = true,
        Err(Error::SolverFailure { .. }) => {
            record.overflowed = true;
            record.solver_failures += 1;
        }
        Err(e) => return Err(e),
    }
    if opts.record == Record::Final && !record.failed() {
        record.times.push(record.steps as f64 * h);
        record.values = record.last.0.clone();
    } else if opts.record != Record::Final {
        record.times = rec.times;
        record.values = rec.values;
    }
    record.wall_time = started.elapsed();
    Ok(record)
}

#[allow(clippy::too_many_arguments)]
fn drive<S: SplitSystem + ?Sized>(
    scheme: SchemeSpec,
    system: &S,
    y0: &StateVector,
    h: f64,
    n_steps: usize,
    opts: &RunOptions,
    rec: &mut Recorder,
    record: &mut RunRecord,
) -> Result<()> {
    crate::check_overflow(y0, 0.0)?;
    if scheme.family() == Family::Rk4 {
        rec.push(0.0, y0);
        let mut y = y0.clone();
        for n in 0..n_steps {
            y = rk4_step(h, n as f64 * h, &y, system)?;
            record.steps = n + 1;
            rec.push((n + 1) as f64 * h, &y);
            record.last.clone_from(&y);
        }
        return Ok(());
    }

    let mut window = bootstrap(scheme, system, y0, h)?;
    for s in window.iter() {
        rec.push(s.t, &s.y);
    }
    let start = window.len() - 1;
    record.steps = start.min(n_steps);
    record.last = window.newest().y.clone();
    if start >= n_steps {
        return Ok(());
    }
    for n in start..n_steps {
        let y = match scheme.family() {
            Family::Eab => eab_step(&window)?,
            Family::IEab => ieab_step(&window)?,
            Family::Ab => ab_step(&window)?,
            Family::Bdf => {
                let out = bdf_step(&window, system, &opts.newton)?;
                record.newton_iterations += out.iterations;
                out.y
            }
            Family::Rk4 => unreachable!(),
        };
        let t = (n + 1) as f64 * h;
        rec.push(t, &y);
        record.steps = n + 1;
        record.last.clone_from(&y);
        window.push(Sample::eval(system, t, y))?;
    }
    Ok(())
}
