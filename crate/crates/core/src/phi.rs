//! The entire functions `phi_0(z) = e^z`, `phi_{j+1}(z) = (phi_j(z) - 1/j!) / z`.
//!
//! Near the origin the downward recursion loses one digit per step to
//! cancellation, so for `|z| < TAYLOR_SWITCH` the highest requested `phi_k`
//! is summed from its Taylor series and the lower ones are recovered with
//! the cancellation-free upward relation `phi_j = 1/j! + z phi_{j+1}`.
//! Elsewhere `phi_0 = exp(z)` and the recursion is used as written.

use num_complex::{Complex64, ComplexFloat};

use crate::types::DiagStabilizer;

/// Largest supported index.
pub const MAX_ORDER: usize = 4;

/// Below this modulus the Taylor branch is used.
pub const TAYLOR_SWITCH: f64 = 1.0;

const TAYLOR_TERMS: usize = 26;

const INV_FACT: [f64; 32] = {
    let mut t = [1.0; 32];
    let mut i = 1;
    while i < 32 {
        t[i] = t[i - 1] / i as f64;
        i += 1;
    }
    t
};

/// `1 / j!` for `j < 32`.
pub fn inv_factorial(j: usize) -> f64 {
    INV_FACT[j]
}

/// `[phi_0(z), ..., phi_k(z)]` for one scalar argument.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiTable<T> {
    pub values: Vec<T>,
}

impl<T: Copy> PhiTable<T> {
    pub fn get(&self, j: usize) -> T {
        self.values[j]
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }
}

trait Scalar: ComplexFloat<Real = f64> + From<f64> {}
impl Scalar for f64 {}
impl Scalar for Complex64 {}

fn fill<T: Scalar>(k: usize, z: T, out: &mut [T]) {
    assert!(k <= MAX_ORDER, "phi index {k} exceeds {MAX_ORDER}");
    if z.abs() < TAYLOR_SWITCH {
        // phi_k(z) = sum_m z^m / (m + k)!, by Horner from the top term.
        let mut s = <T as From<f64>>::from(INV_FACT[TAYLOR_TERMS + k]);
        for m in (0..TAYLOR_TERMS).rev() {
            s = s * z + <T as From<f64>>::from(INV_FACT[m + k]);
        }
        out[k] = s;
        for j in (0..k).rev() {
            out[j] = <T as From<f64>>::from(INV_FACT[j]) + z * out[j + 1];
        }
    } else {
        out[0] = z.exp();
        for j in 0..k {
            out[j + 1] = (out[j] - <T as From<f64>>::from(INV_FACT[j])) / z;
        }
    }
}

/// `phi_0 .. phi_k` at a complex argument.
pub fn phi_upto(k: usize, z: Complex64) -> PhiTable<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); k + 1];
    fill(k, z, &mut v);
    PhiTable { values: v }
}

/// Real specialization of [`phi_upto`].
pub fn phi_upto_real(k: usize, x: f64) -> PhiTable<f64> {
    let mut v = vec![0.0; k + 1];
    fill(k, x, &mut v);
    PhiTable { values: v }
}

/// `phi_k(x)` alone, without allocating.
pub fn phi_real(k: usize, x: f64) -> f64 {
    let mut v = [0.0; MAX_ORDER + 1];
    fill(k, x, &mut v[..=k]);
    v[k]
}

/// Componentwise `phi_j(diag_i * h)` for `j = 0..=k`; entry `[j][i]`.
pub fn phi_diag(k: usize, stab: &DiagStabilizer, h: f64) -> Vec<Vec<f64>> {
    assert!(h > 0.0, "step must be positive");
    let mut out = vec![vec![0.0; stab.len()]; k + 1];
    let mut row = [0.0; MAX_ORDER + 1];
    for (i, &d) in stab.iter().enumerate() {
        fill(k, d * h, &mut row[..=k]);
        for j in 0..=k {
            out[j][i] = row[j];
        }
    }
    out
}
