//! Helpers shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};

/// Fixed-point precision of the phi series oracle.
const BITS: u32 = 256;

#[derive(Clone)]
struct Fixed {
    re: BigInt,
    im: BigInt,
}

pub fn to_fixed(x: f64) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, e) = if exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp - 1075)
    };
    let m = BigInt::from(mant);
    let shift = e + BITS as i64;
    let v = if shift >= 0 {
        m << shift as usize
    } else {
        m >> (-shift) as usize
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

pub fn to_f64(x: &BigInt) -> f64 {
    // Keep the top 64 bits so the conversion rounds once.
    let len = x.bits() as i64;
    let drop = (len - 64).max(0);
    let top = (x >> drop as usize).to_f64().unwrap();
    top * 2f64.powi((drop - BITS as i64) as i32)
}

impl Fixed {
    fn new(z: Complex64) -> Self {
        Fixed {
            re: to_fixed(z.re),
            im: to_fixed(z.im),
        }
    }

    fn mul(&self, o: &Fixed) -> Fixed {
        Fixed {
            re: (&self.re * &o.re - &self.im * &o.im) >> BITS as usize,
            im: (&self.re * &o.im + &self.im * &o.re) >> BITS as usize,
        }
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

fn one() -> BigInt {
    BigInt::from(1) << BITS as usize
}

/// `phi_0 .. phi_k` at `z`: `phi_k` from its series, the rest by
/// `phi_j = 1/j! + z phi_{j+1}`, all in fixed point.
pub fn oracle(k: usize, z: Complex64) -> Vec<Complex64> {
    let zf = Fixed::new(z);
    let mut fact = BigInt::from(1);
    for i in 2..=k {
        fact *= i;
    }
    let mut term = Fixed {
        re: one() / &fact,
        im: BigInt::zero(),
    };
    let mut sum = term.clone();
    let tiny = BigInt::from(1) << (BITS as usize - 200);
    let mut m = 0usize;
    loop {
        m += 1;
        let t = term.mul(&zf);
        let d = BigInt::from((m + k) as u64);
        term = Fixed {
            re: t.re / &d,
            im: t.im / &d,
        };
        sum.re += &term.re;
        sum.im += &term.im;
        if m as f64 > z.norm() && term.re.abs() < tiny && term.im.abs() < tiny {
            break;
        }
    }
    let mut out = vec![sum.to_c64(); k + 1];
    let mut cur = sum;
    let mut inv_fact = one() / fact;
    for j in (0..k).rev() {
        inv_fact *= (j + 1) as u64;
        let p = cur.mul(&zf);
        cur = Fixed {
            re: p.re + &inv_fact,
            im: p.im,
        };
        out[j] = cur.to_c64();
    }
    out
}
