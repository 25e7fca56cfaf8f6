use std::fmt::Write as _;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::exec::{map_collect, Exec};
use crate::stability::fmt_sig15;
use crate::types::{SchemeSpec, SplitSystem, StateVector};

use super::projection::{error_metric, project_cubic};
use super::run::{integrate_with, Record, RunOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub scheme: SchemeSpec,
    pub h: f64,
    /// Relative max error on the last component; infinite for failed runs.
    pub e_h: f64,
    /// `log(e(h') / e(h)) / log(h' / h)` against the next coarser step of
    /// the same scheme, when both runs succeeded.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyResult {
    pub h_ref: f64,
    pub reports: Vec<ErrorReport>,
    pub reference_wall_time: Duration,
}

/// Error of every `(scheme, h)` pair against one RK4 run at `h_ref`
/// (default: the smallest `h` divided by 16). Runs are independent and go
/// through `exec`; reports keep the order schemes x h_list.
pub fn convergence_study<S: SplitSystem + ?Sized>(
    schemes: &[SchemeSpec],
    system: &S,
    y0: &StateVector,
    h_list: &[f64],
    h_ref: Option<f64>,
    t_end: f64,
    exec: Exec,
) -> Result<StudyResult> {
    if schemes.is_empty() || h_list.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one scheme and one step".into(),
        ));
    }
    let h_min = h_list.iter().copied().fold(f64::INFINITY, f64::min);
    let h_ref = h_ref.unwrap_or(h_min / 16.0);
    let last = system.dim() - 1;
    let opts = RunOptions {
        record: Record::Component(last),
        ..Default::default()
    };

    let reference = integrate_with(SchemeSpec::rk4(), system, y0, h_ref, t_end, &opts)?;
    if reference.failed() {
        return Err(Error::InvalidArgument(format!(
            "reference run failed at h_ref = {h_ref}"
        )));
    }
    let v_ref = reference.last_component();

    let jobs: Vec<(SchemeSpec, f64)> = schemes
        .iter()
        .flat_map(|&s| h_list.iter().map(move |&h| (s, h)))
        .collect();
    let errors = map_collect(exec, &jobs, |&(scheme, h)| -> Result<f64> {
        let run = integrate_with(scheme, system, y0, h, t_end, &opts)?;
        if run.failed() {
            return Ok(f64::INFINITY);
        }
        error_metric(&project_cubic(&run, h_ref)?, &v_ref)
    });

    let mut reports = Vec::with_capacity(jobs.len());
    for ((scheme, h), e) in jobs.into_iter().zip(errors) {
        reports.push(ErrorReport {
            scheme,
            h,
            e_h: e?,
            order: None,
        });
    }
    for i in 0..reports.len() {
        // Closest coarser step of the same scheme.
        let coarser = reports
            .iter()
            .filter(|r| r.scheme == reports[i].scheme && r.h > reports[i].h)
            .min_by(|a, b| a.h.total_cmp(&b.h));
        if let Some(c) = coarser {
            let r = &reports[i];
            if c.e_h.is_finite() && r.e_h.is_finite() && c.e_h > 0.0 && r.e_h > 0.0 {
                let order = (c.e_h / r.e_h).ln() / (c.h / r.h).ln();
                reports[i].order = Some(order);
            }
        }
    }
    Ok(StudyResult {
        h_ref,
        reports,
        reference_wall_time: reference.wall_time,
    })
}

/// CSV with header `scheme,k,h,e_h,order`; the order field is empty when
/// unavailable.
pub fn convergence_csv(reports: &[ErrorReport]) -> String {
    let mut out = String::from("scheme,k,h,e_h,order\n");
    for r in reports {
        let order = r.order.map(fmt_sig15).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.scheme,
            r.scheme.order(),
            fmt_sig15(r.h),
            fmt_sig15(r.e_h),
            order
        );
    }
    out
}

/// Growth factor of the upward scan in [`critical_time_step`].
pub const DT0_SCAN_RATIO: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dt0Result {
    /// Midpoint of the final bracket.
    pub dt0: f64,
    /// Largest step seen to succeed.
    pub ok: f64,
    /// Smallest step seen to fail.
    pub failed: f64,
    pub runs: usize,
}

/// Largest `h` such that every tried step below it runs to `t_end` without
/// overflow or Newton failure.
///
/// Failure is not monotone in `h` (very coarse steps can skip a stimulus
/// entirely), so steps are tried upward from `h_lo`: doubling up to
/// `h_hi`, then in ratios of [`DT0_SCAN_RATIO`] inside the first failing
/// octave. The first failing step found is bracketed by bisection to width
/// `tol`. `h_lo` must succeed and some step in `(h_lo, h_hi]` must fail.
#[allow(clippy::too_many_arguments)]
pub fn critical_time_step<S: SplitSystem + ?Sized>(
    scheme: SchemeSpec,
    system: &S,
    y0: &StateVector,
    t_end: f64,
    h_lo: f64,
    h_hi: f64,
    tol: f64,
    opts: &RunOptions,
) -> Result<Dt0Result> {
    if !(0.0 < h_lo && h_lo < h_hi && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < h_lo < h_hi and tol > 0, got {h_lo}, {h_hi}, {tol}"
        )));
    }
    let opts = RunOptions {
        record: Record::Final,
        ..*opts
    };
    let fails = |h: f64| -> Result<bool> {
        Ok(integrate_with(scheme, system, y0, h, t_end, &opts)?.failed())
    };
    if fails(h_lo)? {
        return Err(Error::Bracket(format!(
            "{scheme} already fails at h_lo = {h_lo}"
        )));
    }
    let mut runs = 1;
    // Doubling first, then the finer ratio inside the first failing octave.
    let mut lo = h_lo;
    let mut hi = f64::NAN;
    for ratio in [2.0, DT0_SCAN_RATIO] {
        let cap = if hi.is_nan() { h_hi } else { hi };
        loop {
            let h = (lo * ratio).min(cap);
            if h >= cap && !hi.is_nan() {
                break;
            }
            runs += 1;
            if fails(h)? {
                hi = h;
                break;
            }
            if h >= h_hi {
                return Err(Error::Bracket(format!(
                    "{scheme} succeeds on every step up to h_hi = {h_hi}"
                )));
            }
            lo = h;
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        runs += 1;
        if fails(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Dt0Result {
        dt0: 0.5 * (lo + hi),
        ok: lo,
        failed: hi,
        runs,
    })
}
