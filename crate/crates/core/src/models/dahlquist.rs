use crate::error::{Error, Result};
use crate::types::SplitSystem;

/// `y' = lambda y` split as `a = theta lambda`, `b = (1 - theta) lambda y`.
///
/// Only real rates are integrated; complex `lambda h` is handled directly by
/// the stability analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DahlquistSplit {
    pub lambda: f64,
    pub theta: f64,
}

pub fn make_dahlquist(lambda: f64, theta: f64) -> Result<DahlquistSplit> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "theta must be positive, got {theta}"
        )));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidArgument("lambda must be finite".into()));
    }
    Ok(DahlquistSplit { lambda, theta })
}

impl SplitSystem for DahlquistSplit {
    fn dim(&self) -> usize {
        1
    }

    fn eval_split(&self, _t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]) {
        a[0] = self.theta * self.lambda;
        b[0] = (1.0 - self.theta) * self.lambda * y[0];
    }

    fn eval_rhs(&self, _t: f64, y: &[f64], f: &mut [f64]) {
        f[0] = self.lambda * y[0];
    }
}

/// The alternative parametrization `r = theta / (1 - theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitRatio {
    Finite(f64),
    /// `theta = 1`: the stabilizer is the whole linear part.
    ExactSplit,
}

pub fn theta_from_r(r: f64) -> Result<f64> {
    if r == -1.0 || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("no theta for r = {r}")));
    }
    Ok(r / (1.0 + r))
}

pub fn r_from_theta(theta: f64) -> SplitRatio {
    if theta == 1.0 {
        SplitRatio::ExactSplit
    } else {
        SplitRatio::Finite(theta / (1.0 - theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{consistency_check, StateVector};

    #[test]
    fn split_values() {
        let s = make_dahlquist(-30.0, 0.75).unwrap();
        let y = StateVector(vec![2.0]);
        assert_eq!(s.eval_a(0.0, &y)[0], -22.5);
        assert_eq!(s.eval_b(0.0, &y)[0], -15.0);
        assert_eq!(s.eval_f(0.0, &y)[0], -60.0);
        assert!(consistency_check(&s, 0.0, &y, 1e-14));

        let exact = make_dahlquist(-4.0, 1.0).unwrap();
        assert_eq!(exact.eval_b(0.0, &y)[0], 0.0);
    }

    #[test]
    fn rejects_nonpositive_theta() {
        assert!(make_dahlquist(-1.0, 0.0).is_err());
        assert!(make_dahlquist(-1.0, -0.5).is_err());
        assert!(make_dahlquist(-1.0, f64::NAN).is_err());
    }

    #[test]
    fn ratio_conversion() {
        assert_eq!(theta_from_r(1.0).unwrap(), 0.5);
        assert_eq!(theta_from_r(3.0).unwrap(), 0.75);
        assert_eq!(r_from_theta(0.75), SplitRatio::Finite(3.0));
        assert_eq!(r_from_theta(1.0), SplitRatio::ExactSplit);
        assert!(theta_from_r(-1.0).is_err());
    }
}
