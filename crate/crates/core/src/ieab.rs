//! Integral exponential Adams-Bashforth stepping (k = 2, 3, 4).
//!
//! `a` and `b` are interpolated separately through the last `k` nodes. With
//! `G(tau)` the primitive of the interpolated stabilizer and `B(tau)` the
//! interpolated remainder,
//!
//! ```text
//! y_{n+1} = e^{G(h)} ( y_n + int_0^h e^{-G(tau)} B(tau) dtau )
//! ```
//!
//! and the integral is taken with Simpson's rule for k = 2, 3 and three-point
//! Gauss-Legendre for k = 4. Every node value is a fixed linear combination
//! of the history, listed below; all operations are per row, which requires a
//! diagonal stabilizer.

use crate::check_overflow;
use crate::error::{Error, Result};
use crate::types::{HistoryWindow, StateVector};

/// Interpolated exponents (already multiplied by `h`) and remainders at the
/// quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum IEabNodeValues {
    /// k = 2, 3: `g1 = G(h)`, `delta = G(h) - G(h/2)`, `b1 = B(h)`,
    /// `b_half = B(h/2)`.
    Simpson {
        g1: StateVector,
        delta: StateVector,
        b1: StateVector,
        b_half: StateVector,
    },
    /// k = 4: values at `t_l, t_0, t_r = t_n + (1 -/0/+ sqrt(3/5)) h / 2`.
    Gauss {
        g1: StateVector,
        g0: StateVector,
        gl: StateVector,
        gr: StateVector,
        b0: StateVector,
        bl: StateVector,
        br: StateVector,
    },
}

const SQRT15: f64 = 3.872_983_346_207_417;

/// Weights of `x_{n-i}` for one node value, i = 0..k-1.
type Weights = [f64; 4];

fn combine(
    history: &HistoryWindow,
    w: &Weights,
    scale: f64,
    pick: fn(&crate::Sample, usize) -> f64,
) -> StateVector {
    let k = history.capacity();
    let n = history.newest().y.len();
    StateVector(
        (0..n)
            .map(|r| scale * (0..k).map(|i| w[i] * pick(history.back(i), r)).sum::<f64>())
            .collect(),
    )
}

fn pick_a(s: &crate::Sample, r: usize) -> f64 {
    s.a[r]
}

fn pick_b(s: &crate::Sample, r: usize) -> f64 {
    s.b[r]
}

/// Gauss node weights for `G(t_s) * 200 / h` and `B(t_s) * 40` on the side
/// `root = +sqrt(15)` (t_r) or `-sqrt(15)` (t_l).
fn gauss_side(root: f64) -> (Weights, Weights) {
    let g = [
        797.0 / 4.0 + 45.0 * root,
        -(2233.0 / 12.0 + 47.0 * root),
        1373.0 / 12.0 + 29.0 * root,
        -(331.0 / 12.0 + 7.0 * root),
    ];
    let b = [
        95.0 + 179.0 * root / 15.0,
        -(107.0 + 119.0 * root / 5.0),
        69.0 + 79.0 * root / 5.0,
        -(17.0 + 59.0 * root / 15.0),
    ];
    (g, b)
}

pub fn ieab_node_values(history: &HistoryWindow) -> Result<IEabNodeValues> {
    history.require_full()?;
    let h = history.step();
    match history.capacity() {
        2 => Ok(IEabNodeValues::Simpson {
            g1: combine(history, &[3.0, -1.0, 0.0, 0.0], h / 2.0, pick_a),
            delta: combine(history, &[7.0, -3.0, 0.0, 0.0], h / 8.0, pick_a),
            b1: combine(history, &[2.0, -1.0, 0.0, 0.0], 1.0, pick_b),
            b_half: combine(history, &[3.0, -1.0, 0.0, 0.0], 0.5, pick_b),
        }),
        3 => Ok(IEabNodeValues::Simpson {
            g1: combine(history, &[23.0, -16.0, 5.0, 0.0], h / 12.0, pick_a),
            delta: combine(history, &[29.0, -25.0, 8.0, 0.0], h / 24.0, pick_a),
            b1: combine(history, &[3.0, -3.0, 1.0, 0.0], 1.0, pick_b),
            b_half: combine(history, &[15.0, -10.0, 3.0, 0.0], 1.0 / 8.0, pick_b),
        }),
        4 => {
            let (grw, brw) = gauss_side(SQRT15);
            let (glw, blw) = gauss_side(-SQRT15);
            Ok(IEabNodeValues::Gauss {
                g1: combine(history, &[55.0, -59.0, 37.0, -9.0], h / 24.0, pick_a),
                g0: combine(history, &[297.0, -187.0, 107.0, -25.0], h / 384.0, pick_a),
                gl: combine(history, &glw, h / 200.0, pick_a),
                gr: combine(history, &grw, h / 200.0, pick_a),
                b0: combine(history, &[35.0, -35.0, 21.0, -5.0], 1.0 / 16.0, pick_b),
                bl: combine(history, &blw, 1.0 / 40.0, pick_b),
                br: combine(history, &brw, 1.0 / 40.0, pick_b),
            })
        }
        k => Err(Error::InvalidScheme(format!("I-EAB{k} is not provided"))),
    }
}

/// One I-EAB_k step, `k` being the window capacity.
pub fn ieab_step(history: &HistoryWindow) -> Result<StateVector> {
    let nodes = ieab_node_values(history)?;
    let h = history.step();
    let newest = history.newest();
    let n = newest.y.len();
    let y = match nodes {
        IEabNodeValues::Simpson {
            g1,
            delta,
            b1,
            b_half,
        } => StateVector(
            (0..n)
                .map(|r| {
                    g1[r].exp() * (newest.y[r] + newest.b[r] * h / 6.0)
                        + (b1[r] + 4.0 * delta[r].exp() * b_half[r]) * h / 6.0
                })
                .collect(),
        ),
        IEabNodeValues::Gauss {
            g1,
            g0,
            gl,
            gr,
            b0,
            bl,
            br,
        } => StateVector(
            (0..n)
                .map(|r| {
                    let quad = 5.0 * bl[r] * (-gl[r]).exp()
                        + 8.0 * b0[r] * (-g0[r]).exp()
                        + 5.0 * br[r] * (-gr[r]).exp();
                    g1[r].exp() * (newest.y[r] + h / 18.0 * quad)
                })
                .collect(),
        ),
    };
    check_overflow(&y, newest.t + h)?;
    Ok(y)
}
