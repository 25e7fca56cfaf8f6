//! Exponential Adams-Bashforth stepping.
//!
//! At step `n` the stabilizer is frozen at `a_n` and the remainder
//! `g_{n-i} = b_{n-i} + (a_{n-i} - a_n) y_{n-i}` is extrapolated by its
//! Lagrange polynomial through the last `k` nodes. Writing that polynomial as
//! `sum_j gamma_j / (j-1)! (tau/h)^(j-1)` and integrating exactly gives
//!
//! ```text
//! y_{n+1} = e^{a_n h} y_n + h sum_{j=1..k} phi_j(a_n h) gamma_j
//! ```
//!
//! [`eab_step`] evaluates the same update through the recursion
//! `w_1 = a_n y_n + b_n`, `w_j = gamma_j + a_n h w_{j-1}`, which needs only
//! `phi_k` and therefore a single exponential per stabilized row.

use crate::classical::rk4_step;
use crate::error::{Error, Result};
use crate::phi::{inv_factorial, phi_real, phi_upto_real};
use crate::types::{DiagStabilizer, HistoryWindow, Sample, SchemeSpec, SplitSystem, StateVector};
use crate::{check_overflow, MAX_K};

/// `GAMMA[k-1][j][i]`: weight of `g_{n-i}` in `gamma_{j+1}` for order `k`.
pub const GAMMA: [[[f64; MAX_K]; MAX_K]; MAX_K] = [
    [[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4], [0.0; 4]],
    [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, -1.0, 0.0, 0.0],
        [0.0; 4],
        [0.0; 4],
    ],
    [
        [1.0, 0.0, 0.0, 0.0],
        [1.5, -2.0, 0.5, 0.0],
        [1.0, -2.0, 1.0, 0.0],
        [0.0; 4],
    ],
    [
        [1.0, 0.0, 0.0, 0.0],
        [11.0 / 6.0, -3.0, 1.5, -1.0 / 3.0],
        [2.0, -5.0, 4.0, -1.0],
        [1.0, -3.0, 3.0, -1.0],
    ],
];

/// `[gamma_1, ..., gamma_k]`, each an N-vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSet {
    pub gammas: Vec<StateVector>,
}

/// `g_{n-i} = b_{n-i} + (a_{n-i} - a_n) y_{n-i}` for every sample in the
/// window, oldest first (so `g_n` is last).
pub fn g_values(history: &HistoryWindow, a_n: &DiagStabilizer) -> Result<Vec<StateVector>> {
    history.require_full()?;
    Ok(history
        .iter()
        .map(|s| {
            StateVector(
                (0..s.y.len())
                    .map(|i| s.b[i] + (s.a[i] - a_n[i]) * s.y[i])
                    .collect(),
            )
        })
        .collect())
}

/// Combines `g` (oldest first, `k` entries) into the Taylor coefficients of
/// the extrapolation polynomial.
pub fn gamma_coeffs(k: usize, g: &[StateVector]) -> Result<GammaSet> {
    if !(1..=MAX_K).contains(&k) || g.len() != k {
        return Err(Error::InvalidArgument(format!(
            "gamma_coeffs needs k in 1..=4 and k values, got k = {k} with {}",
            g.len()
        )));
    }
    let n = g[0].len();
    let table = &GAMMA[k - 1];
    let gammas = (0..k)
        .map(|j| {
            let mut out = StateVector::zeros(n);
            for (back, w) in table[j].iter().take(k).enumerate() {
                if *w != 0.0 {
                    let gi = &g[k - 1 - back];
                    for r in 0..n {
                        out[r] += w * gi[r];
                    }
                }
            }
            out
        })
        .collect();
    Ok(GammaSet { gammas })
}

/// One EAB_k step, `k` being the window capacity.
pub fn eab_step(history: &HistoryWindow) -> Result<StateVector> {
    history.require_full()?;
    let k = history.capacity();
    let h = history.step();
    let newest = history.newest();
    let a_n = &newest.a;
    let n = newest.y.len();
    let table = &GAMMA[k - 1];

    let mut y_next = StateVector::zeros(n);
    let mut gamma = [0.0; MAX_K];
    for r in 0..n {
        let ar = a_n[r];
        for (j, gj) in gamma.iter_mut().enumerate().take(k) {
            *gj = (0..k)
                .map(|back| {
                    let s = history.back(back);
                    table[j][back] * (s.b[r] + (s.a[r] - ar) * s.y[r])
                })
                .sum();
        }
        let z = ar * h;
        let mut w = ar * newest.y[r] + newest.b[r];
        let mut acc = 0.0;
        for (j, gj) in gamma.iter().enumerate().take(k).skip(1) {
            // w holds w_j here and enters with weight 1/j!.
            acc += w * inv_factorial(j);
            w = gj + z * w;
        }
        acc += phi_real(k, z) * w;
        y_next[r] = newest.y[r] + h * acc;
    }
    check_overflow(&y_next, newest.t + h)?;
    Ok(y_next)
}

/// The same step evaluated directly as `e^{a h} y + h sum_j phi_j gamma_j`.
pub fn eab_step_direct(history: &HistoryWindow) -> Result<StateVector> {
    let k = history.capacity();
    let h = history.step();
    let newest = history.newest();
    let g = g_values(history, &newest.a)?;
    let gs = gamma_coeffs(k, &g)?;
    let n = newest.y.len();
    let mut y_next = StateVector::zeros(n);
    for r in 0..n {
        let phi = phi_upto_real(k, newest.a[r] * h);
        let mut acc = 0.0;
        for j in 1..=k {
            acc += phi.get(j) * gs.gammas[j - 1][r];
        }
        y_next[r] = phi.get(0) * newest.y[r] + h * acc;
    }
    check_overflow(&y_next, newest.t + h)?;
    Ok(y_next)
}

/// Startup values `y_0 .. y_{m-1}` for a scheme consuming `m` past nodes,
/// produced by RK4, with `a`/`b` cached at every node.
///
/// Each interval of length `h` is covered by `q` RK4 substeps with
/// `q = ceil(h max|a|)` at the interval start (at least one, at most
/// [`MAX_STARTUP_SUBSTEPS`]), so the startup stays stable on steps where
/// the exponential scheme itself is. For `h max|a| <= 1` this is a single
/// RK4 step of size `h`.
pub fn bootstrap<S: SplitSystem + ?Sized>(
    scheme: SchemeSpec,
    system: &S,
    y0: &StateVector,
    h: f64,
) -> Result<HistoryWindow> {
    if y0.len() != system.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial state has length {}, system dimension is {}",
            y0.len(),
            system.dim()
        )));
    }
    let m = scheme.history_len();
    let mut window = HistoryWindow::new(m, h)?;
    let mut sample = Sample::eval(system, 0.0, y0.clone());
    for n in 1..m {
        let t0 = (n - 1) as f64 * h;
        let stiff = sample.a.max_norm() * h;
        let q = if stiff.is_finite() {
            stiff.ceil().clamp(1.0, MAX_STARTUP_SUBSTEPS as f64) as usize
        } else {
            1
        };
        let dt = h / q as f64;
        let mut y = sample.y.clone();
        window.push(sample)?;
        for i in 0..q {
            y = rk4_step(dt, t0 + i as f64 * dt, &y, system)?;
        }
        sample = Sample::eval(system, n as f64 * h, y);
    }
    window.push(sample)?;
    Ok(window)
}

/// Upper bound on RK4 substeps per startup interval.
pub const MAX_STARTUP_SUBSTEPS: usize = 4096;
