use crate::error::{Error, Result};

use super::run::RunRecord;

/// Ratio `h / h_ref` as an integer power of two.
fn refinement(h: f64, h_ref: f64) -> Result<usize> {
    if !(h > 0.0 && h_ref > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need h, h_ref > 0, got {h}, {h_ref}"
        )));
    }
    let r = h / h_ref;
    let p = r.round();
    if (r - p).abs() > 1e-9 * r || p < 1.0 || !(p as u64).is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "h = {h} is not a power-of-two multiple of h_ref = {h_ref}"
        )));
    }
    Ok(p as usize)
}

/// Lagrange weights of the cubic through `s = 0, 1, 2, 3` at `s`.
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0,
        s * (s - 2.0) * (s - 3.0) / 2.0,
        -s * (s - 1.0) * (s - 3.0) / 2.0,
        s * (s - 1.0) * (s - 2.0) / 6.0,
    ]
}

/// Piecewise-cubic projection of samples `values[n] = y(n h)` onto the grid
/// `m h_ref`, `m = 0 ..= (len - 1) h / h_ref`.
///
/// Steps are grouped by three; on `[t_{3n}, t_{3n+3}]` the cubic through the
/// four nodes is evaluated. When the step count is not a multiple of three
/// the remaining one or two steps are covered by the cubic through the last
/// four nodes, so the projected length is always `(len - 1) p + 1` with
/// `p = h / h_ref`.
pub fn project_cubic_values(values: &[f64], h: f64, h_ref: f64) -> Result<Vec<f64>> {
    let p = refinement(h, h_ref)?;
    let n_steps = values.len().saturating_sub(1);
    if values.is_empty() {
        return Ok(Vec::new());
    }
    if p == 1 {
        return Ok(values.to_vec());
    }
    if n_steps < 3 {
        return Err(Error::InvalidArgument(format!(
            "cubic projection needs at least 3 steps, got {n_steps}"
        )));
    }
    // Weights at s = m / p for m = 0..=3p.
    let weights: Vec<[f64; 4]> = (0..=3 * p)
        .map(|m| cubic_weights(m as f64 / p as f64))
        .collect();
    let eval = |base: usize, m: usize| -> f64 {
        let w = &weights[m];
        (0..4).map(|i| w[i] * values[base + i]).sum()
    };

    let mut out = Vec::with_capacity(n_steps * p + 1);
    let full = n_steps / 3;
    for c in 0..full {
        for m in 0..3 * p {
            out.push(eval(3 * c, m));
        }
    }
    let tail_base = n_steps - 3;
    // Offset of the first tail point inside the last four-node window.
    let first = (3 * full - tail_base) * p;
    for m in first..3 * p {
        out.push(eval(tail_base, m));
    }
    out.push(values[n_steps]);
    debug_assert_eq!(out.len(), n_steps * p + 1);
    Ok(out)
}

/// [`project_cubic_values`] on the last recorded component of `run`.
pub fn project_cubic(run: &RunRecord, h_ref: f64) -> Result<Vec<f64>> {
    if run.failed() {
        return Err(Error::InvalidArgument(format!(
            "cannot project a failed run ({} at h = {})",
            run.scheme, run.h
        )));
    }
    project_cubic_values(&run.last_component(), run.h, h_ref)
}

/// `max |ref - proj| / max |ref|`.
pub fn error_metric(projected: &[f64], reference: &[f64]) -> Result<f64> {
    if projected.len() != reference.len() || reference.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "projection has {} samples, reference {}",
            projected.len(),
            reference.len()
        )));
    }
    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for (p, r) in projected.iter().zip(reference) {
        num = num.max((r - p).abs());
        den = den.max(r.abs());
    }
    if den == 0.0 {
        return Err(Error::InvalidArgument(
            "reference is identically zero".into(),
        ));
    }
    Ok(num / den)
}
