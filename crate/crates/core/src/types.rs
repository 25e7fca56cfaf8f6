//! Shared data model: state vectors, split right-hand sides, multistep
//! history and scheme identifiers.

use std::collections::VecDeque;
use std::fmt;
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense real state `y`. Length is fixed by the owning system.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StateVector(pub Vec<f64>);

/// Diagonal of the stabilizer `a(t, y)`, in 1/time. Zero rows are allowed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagStabilizer(pub Vec<f64>);

macro_rules! vec_newtype {
    ($name:ident) => {
        impl $name {
            pub fn zeros(n: usize) -> Self {
                Self(vec![0.0; n])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn max_norm(&self) -> f64 {
                self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|x| x.is_finite())
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                &mut self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl From<&[f64]> for $name {
            fn from(v: &[f64]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

vec_newtype!(StateVector);
vec_newtype!(DiagStabilizer);

/// An ODE `y' = f(t, y)` written as `f = a(t, y) * y + b(t, y)` with a
/// diagonal stabilizer `a`.
///
/// Implementors must be pure: the same `(t, y)` always yields the same
/// output, and evaluation never mutates shared state.
pub trait SplitSystem: Sync {
    fn dim(&self) -> usize;

    /// Writes the stabilizer diagonal into `a` and the remainder into `b`.
    fn eval_split(&self, t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]);

    /// Full right-hand side. The default assembles `a * y + b`.
    fn eval_rhs(&self, t: f64, y: &[f64], f: &mut [f64]) {
        let n = self.dim();
        let mut a = vec![0.0; n];
        self.eval_split(t, y, &mut a, f);
        for i in 0..n {
            f[i] += a[i] * y[i];
        }
    }

    fn eval_a(&self, t: f64, y: &StateVector) -> DiagStabilizer {
        let n = self.dim();
        let mut a = DiagStabilizer::zeros(n);
        let mut b = vec![0.0; n];
        self.eval_split(t, y, &mut a, &mut b);
        a
    }

    fn eval_b(&self, t: f64, y: &StateVector) -> StateVector {
        let n = self.dim();
        let mut a = vec![0.0; n];
        let mut b = StateVector::zeros(n);
        self.eval_split(t, y, &mut a, &mut b);
        b
    }

    fn eval_f(&self, t: f64, y: &StateVector) -> StateVector {
        let mut f = StateVector::zeros(self.dim());
        self.eval_rhs(t, y, &mut f);
        f
    }
}

impl<S: SplitSystem + ?Sized> SplitSystem for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval_split(&self, t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]) {
        (**self).eval_split(t, y, a, b)
    }
    fn eval_rhs(&self, t: f64, y: &[f64], f: &mut [f64]) {
        (**self).eval_rhs(t, y, f)
    }
}

impl<S: SplitSystem + ?Sized> SplitSystem for Box<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval_split(&self, t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]) {
        (**self).eval_split(t, y, a, b)
    }
    fn eval_rhs(&self, t: f64, y: &[f64], f: &mut [f64]) {
        (**self).eval_rhs(t, y, f)
    }
}

/// True iff `max|f - (a*y + b)| <= tol * (1 + max|f|)`.
pub fn consistency_check<S: SplitSystem + ?Sized>(
    system: &S,
    t: f64,
    y: &StateVector,
    tol: f64,
) -> bool {
    let n = system.dim();
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    let mut f = vec![0.0; n];
    system.eval_split(t, y, &mut a, &mut b);
    system.eval_rhs(t, y, &mut f);
    let mut f_norm = 0.0_f64;
    let mut diff = 0.0_f64;
    for i in 0..n {
        f_norm = f_norm.max(f[i].abs());
        diff = diff.max((f[i] - (a[i] * y[i] + b[i])).abs());
    }
    diff <= tol * (1.0 + f_norm)
}

/// One cached node of a multistep history.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: StateVector,
    pub a: DiagStabilizer,
    pub b: StateVector,
}

impl Sample {
    /// Evaluates and caches `a` and `b` at `(t, y)`.
    pub fn eval<S: SplitSystem + ?Sized>(system: &S, t: f64, y: StateVector) -> Self {
        let n = system.dim();
        let mut a = DiagStabilizer::zeros(n);
        let mut b = StateVector::zeros(n);
        system.eval_split(t, &y, &mut a, &mut b);
        Sample { t, y, a, b }
    }

    /// `f = a * y + b` from the cached split.
    pub fn rhs(&self) -> StateVector {
        StateVector(
            self.y
                .iter()
                .zip(self.a.iter())
                .zip(self.b.iter())
                .map(|((y, a), b)| a * y + b)
                .collect(),
        )
    }
}

/// Ring buffer of the last `k` samples, oldest first, on a uniform grid of
/// step `h`.
#[derive(Debug, Clone)]
pub struct HistoryWindow {
    capacity: usize,
    h: f64,
    samples: VecDeque<Sample>,
}

impl HistoryWindow {
    pub const MAX_CAPACITY: usize = 4;

    pub fn new(capacity: usize, h: f64) -> Result<Self> {
        if capacity == 0 || capacity > Self::MAX_CAPACITY {
            return Err(Error::History(format!(
                "capacity {capacity} outside 1..={}",
                Self::MAX_CAPACITY
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::History(format!("step {h} must be positive")));
        }
        Ok(Self {
            capacity,
            h,
            samples: VecDeque::with_capacity(capacity),
        })
    }

    /// Builds a window from samples given oldest first.
    pub fn from_samples(h: f64, samples: Vec<Sample>) -> Result<Self> {
        let mut w = Self::new(samples.len(), h)?;
        for s in samples {
            w.push(s)?;
        }
        Ok(w)
    }

    /// Appends the newest sample, evicting the oldest when full.
    ///
    /// The new time must follow the previous one by `h`, up to 1e-12
    /// relative to `h` plus a few ulps of the absolute time (times are
    /// computed as `t0 + n*h`, so their rounding grows with `|t|`).
    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if let Some(last) = self.samples.back() {
            let dt = sample.t - last.t;
            let slack = 1e-12 * self.h + 8.0 * f64::EPSILON * sample.t.abs().max(last.t.abs());
            if !(dt > 0.0) || (dt - self.h).abs() > slack {
                return Err(Error::History(format!(
                    "sample at t = {} does not follow t = {} by h = {}",
                    sample.t, last.t, self.h
                )));
            }
            if sample.y.len() != last.y.len() {
                return Err(Error::History("state length changed".into()));
            }
        }
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(sample);
        Ok(())
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.samples.len() == self.capacity
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    /// Sample `n - back`: `back = 0` is the newest.
    pub fn back(&self, back: usize) -> &Sample {
        &self.samples[self.samples.len() - 1 - back]
    }

    pub fn newest(&self) -> &Sample {
        self.back(0)
    }

    /// Oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter()
    }

    pub(crate) fn require_full(&self) -> Result<()> {
        if self.is_full() {
            Ok(())
        } else {
            Err(Error::History(format!(
                "{} of {} samples present",
                self.samples.len(),
                self.capacity
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Exponential Adams-Bashforth.
    Eab,
    /// Integral exponential Adams-Bashforth.
    IEab,
    /// Classical Adams-Bashforth.
    Ab,
    /// Backward differentiation formula.
    Bdf,
    /// Classical four-stage Runge-Kutta.
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeSpec {
    family: Family,
    order: usize,
}

impl SchemeSpec {
    pub fn new(family: Family, order: usize) -> Result<Self> {
        let ok = match family {
            Family::Eab | Family::Ab => (1..=4).contains(&order),
            Family::IEab | Family::Bdf => (2..=4).contains(&order),
            Family::Rk4 => order == 4,
        };
        if ok {
            Ok(Self { family, order })
        } else {
            Err(Error::InvalidScheme(format!(
                "order {order} not available for {family:?}"
            )))
        }
    }

    pub fn eab(k: usize) -> Result<Self> {
        Self::new(Family::Eab, k)
    }
    pub fn ieab(k: usize) -> Result<Self> {
        Self::new(Family::IEab, k)
    }
    pub fn ab(k: usize) -> Result<Self> {
        Self::new(Family::Ab, k)
    }
    pub fn bdf(k: usize) -> Result<Self> {
        Self::new(Family::Bdf, k)
    }
    pub fn rk4() -> Self {
        Self {
            family: Family::Rk4,
            order: 4,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of past nodes a step consumes.
    pub fn history_len(&self) -> usize {
        match self.family {
            Family::Rk4 => 1,
            _ => self.order,
        }
    }

    pub fn is_exponential(&self) -> bool {
        matches!(self.family, Family::Eab | Family::IEab)
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Eab => write!(f, "EAB{}", self.order),
            Family::IEab => write!(f, "I-EAB{}", self.order),
            Family::Ab => write!(f, "AB{}", self.order),
            Family::Bdf => write!(f, "BDF{}", self.order),
            Family::Rk4 => write!(f, "RK4"),
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;

    /// Accepts `EAB2`, `I-EAB3` / `IEAB3`, `AB4`, `BDF2`, `RK4`
    /// (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let u = s.trim().to_ascii_uppercase().replace(['-', '_'], "");
        if u == "RK4" {
            return Ok(Self::rk4());
        }
        let split = u
            .find(|c: char| c.is_ascii_digit())
            .ok_or_else(|| Error::InvalidScheme(format!("missing order in {s:?}")))?;
        let (name, digits) = u.split_at(split);
        let order: usize = digits
            .parse()
            .map_err(|_| Error::InvalidScheme(format!("bad order in {s:?}")))?;
        let family = match name {
            "EAB" => Family::Eab,
            "IEAB" => Family::IEab,
            "AB" => Family::Ab,
            "BDF" => Family::Bdf,
            _ => return Err(Error::InvalidScheme(format!("unknown scheme {s:?}"))),
        };
        Self::new(family, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Linear(f64);

    impl SplitSystem for Linear {
        fn dim(&self) -> usize {
            1
        }
        fn eval_split(&self, _t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]) {
            a[0] = 0.8 * self.0;
            b[0] = 0.2 * self.0 * y[0];
        }
    }

    struct OffByOne;

    impl SplitSystem for OffByOne {
        fn dim(&self) -> usize {
            1
        }
        fn eval_split(&self, _t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]) {
            a[0] = -1.0;
            b[0] = y[0];
        }
        fn eval_rhs(&self, _t: f64, _y: &[f64], f: &mut [f64]) {
            f[0] = 1.0;
        }
    }

    fn sample(t: f64) -> Sample {
        Sample {
            t,
            y: StateVector(vec![t]),
            a: DiagStabilizer(vec![0.0]),
            b: StateVector(vec![0.0]),
        }
    }

    #[test]
    fn consistency_of_exact_and_broken_splits() {
        let y = StateVector(vec![2.5]);
        assert!(consistency_check(&Linear(-1.0), 0.0, &y, 1e-12));
        assert!(!consistency_check(
            &OffByOne,
            0.0,
            &StateVector(vec![0.0]),
            1e-12
        ));
    }

    #[test]
    fn history_evicts_oldest() {
        let h = 0.1;
        let mut w = HistoryWindow::new(3, h).unwrap();
        for n in 0..5 {
            w.push(sample(n as f64 * h)).unwrap();
        }
        assert!(w.is_full());
        let ts: Vec<f64> = w.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![2.0 * h, 3.0 * h, 4.0 * h]);
        assert_eq!(w.newest().t, 4.0 * h);
        assert_eq!(w.back(2).t, 2.0 * h);
    }

    #[test]
    fn history_rejects_bad_spacing() {
        let mut w = HistoryWindow::new(2, 0.1).unwrap();
        w.push(sample(0.0)).unwrap();
        assert!(w.push(sample(0.15)).is_err());
        assert!(w.push(sample(-0.1)).is_err());
        assert!(w.push(sample(0.1)).is_ok());
        assert!(HistoryWindow::new(5, 0.1).is_err());
        assert!(HistoryWindow::new(2, 0.0).is_err());
    }

    #[test]
    fn history_accepts_long_runs_of_n_times_h() {
        let h = 1e-3;
        let mut w = HistoryWindow::new(4, h).unwrap();
        for n in 0..600_000u64 {
            w.push(sample(n as f64 * h)).unwrap();
        }
    }

    #[test]
    fn scheme_parsing_and_validation() {
        assert_eq!(
            "EAB2".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::eab(2).unwrap()
        );
        assert_eq!(
            "i-eab3".parse::<SchemeSpec>().unwrap(),
            SchemeSpec::ieab(3).unwrap()
        );
        assert_eq!("RK4".parse::<SchemeSpec>().unwrap(), SchemeSpec::rk4());
        assert_eq!(SchemeSpec::bdf(4).unwrap().to_string(), "BDF4");
        assert!(SchemeSpec::ieab(1).is_err());
        assert!(SchemeSpec::bdf(1).is_err());
        assert!(SchemeSpec::eab(5).is_err());
        assert!("XYZ2".parse::<SchemeSpec>().is_err());
        for s in ["EAB1", "EAB4", "I-EAB2", "AB3", "BDF3", "RK4"] {
            assert_eq!(s.parse::<SchemeSpec>().unwrap().to_string(), s);
        }
    }
}
