//! Classical baselines: Adams-Bashforth, BDF and RK4.

use nalgebra::{DMatrix, DVector};

use crate::check_overflow;
use crate::error::{Error, Result};
use crate::types::{HistoryWindow, SplitSystem, StateVector};

/// Adams-Bashforth weights of `f_{n-i}`, `AB[k-1][i]`.
pub const AB: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [1.5, -0.5, 0.0, 0.0],
    [23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0, 0.0],
    [55.0 / 24.0, -59.0 / 24.0, 37.0 / 24.0, -9.0 / 24.0],
];

/// BDF_k in the form `y_{n+1} + sum_i alpha_i y_{n-i} = beta h f_{n+1}`:
/// `(alpha, beta)` for k = 2, 3, 4.
pub const BDF: [([f64; 4], f64); 3] = [
    ([-4.0 / 3.0, 1.0 / 3.0, 0.0, 0.0], 2.0 / 3.0),
    ([-18.0 / 11.0, 9.0 / 11.0, -2.0 / 11.0, 0.0], 6.0 / 11.0),
    (
        [-48.0 / 25.0, 36.0 / 25.0, -16.0 / 25.0, 3.0 / 25.0],
        12.0 / 25.0,
    ),
];

/// Settings for the Newton solve inside [`bdf_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub max_iters: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Relative perturbation for forward-difference Jacobian columns.
    pub jacobian_fd_eps: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iters: 25,
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            jacobian_fd_eps: f64::EPSILON.sqrt(),
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0
            || !(self.abs_tol > 0.0)
            || !(self.rel_tol > 0.0)
            || !(self.jacobian_fd_eps > 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "bad Newton config {self:?}"
            )));
        }
        Ok(())
    }
}

/// Classical AB_k step; `k` is the window capacity.
pub fn ab_step(history: &HistoryWindow) -> Result<StateVector> {
    history.require_full()?;
    let k = history.capacity();
    let h = history.step();
    let newest = history.newest();
    let mut y = newest.y.clone();
    for (back, w) in AB[k - 1].iter().take(k).enumerate() {
        let s = history.back(back);
        for r in 0..y.len() {
            y[r] += h * w * (s.a[r] * s.y[r] + s.b[r]);
        }
    }
    check_overflow(&y, newest.t + h)?;
    Ok(y)
}

/// Converged BDF step together with the Newton iterations it took.
#[derive(Debug, Clone, PartialEq)]
pub struct BdfOutcome {
    pub y: StateVector,
    pub iterations: usize,
}

/// BDF_k step (k = window capacity, 2..=4), solved by damped Newton with a
/// dense forward-difference Jacobian. The previous state is the initial
/// guess.
pub fn bdf_step<S: SplitSystem + ?Sized>(
    history: &HistoryWindow,
    system: &S,
    newton: &NewtonConfig,
) -> Result<BdfOutcome> {
    history.require_full()?;
    newton.validate()?;
    let k = history.capacity();
    if !(2..=4).contains(&k) {
        return Err(Error::InvalidScheme(format!("BDF{k} is not provided")));
    }
    let (alpha, beta) = BDF[k - 2];
    let h = history.step();
    let newest = history.newest();
    let t = newest.t + h;
    let n = newest.y.len();
    let bh = beta * h;

    // Constant part of the residual: sum_i alpha_i y_{n-i}.
    let mut rhs0 = vec![0.0; n];
    for (back, al) in alpha.iter().take(k).enumerate() {
        let s = history.back(back);
        for r in 0..n {
            rhs0[r] += al * s.y[r];
        }
    }
    let residual = |x: &[f64], f: &mut [f64], out: &mut [f64]| {
        system.eval_rhs(t, x, f);
        for r in 0..n {
            out[r] = x[r] + rhs0[r] - bh * f[r];
        }
    };
    let norm = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));

    let mut x = newest.y.0.clone();
    let mut f = vec![0.0; n];
    let mut res = vec![0.0; n];
    residual(&x, &mut f, &mut res);
    let mut res_norm = norm(&res);
    let fail = |iters| Error::SolverFailure { t, iters };

    let mut xp = vec![0.0; n];
    let mut fp = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial_res = vec![0.0; n];
    for iter in 1..=newton.max_iters {
        if !res_norm.is_finite() {
            return Err(fail(iter));
        }
        // J = I - beta h df/dy, by forward differences around x.
        let mut jac = DMatrix::<f64>::identity(n, n);
        for c in 0..n {
            let d = newton.jacobian_fd_eps * x[c].abs().max(1e-6);
            xp.copy_from_slice(&x);
            xp[c] += d;
            system.eval_rhs(t, &xp, &mut fp);
            for r in 0..n {
                jac[(r, c)] -= bh * (fp[r] - f[r]) / d;
            }
        }
        let lu = jac.lu();
        let delta = lu
            .solve(&DVector::from_iterator(n, res.iter().map(|v| -v)))
            .ok_or_else(|| fail(iter))?;
        if !delta.iter().all(|d| d.is_finite()) {
            return Err(fail(iter));
        }

        // Halve the step until the residual decreases.
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            for r in 0..n {
                trial[r] = x[r] + lambda * delta[r];
            }
            residual(&trial, &mut fp, &mut trial_res);
            let tn = norm(&trial_res);
            if tn.is_finite() && tn < res_norm {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Residual already at rounding level: accept the current iterate
            // if the full correction is negligible.
            let small =
                (0..n).all(|r| delta[r].abs() <= newton.abs_tol + newton.rel_tol * x[r].abs());
            if small {
                let y = StateVector(x);
                check_overflow(&y, t)?;
                return Ok(BdfOutcome {
                    y,
                    iterations: iter,
                });
            }
            return Err(fail(iter));
        }
        let converged = (0..n)
            .all(|r| (lambda * delta[r]).abs() <= newton.abs_tol + newton.rel_tol * trial[r].abs());
        x.copy_from_slice(&trial);
        f.copy_from_slice(&fp);
        res.copy_from_slice(&trial_res);
        res_norm = norm(&res);
        if converged && lambda == 1.0 {
            let y = StateVector(x);
            check_overflow(&y, t)?;
            return Ok(BdfOutcome {
                y,
                iterations: iter,
            });
        }
    }
    Err(fail(newton.max_iters))
}

/// Classical four-stage Runge-Kutta step from `(t, y)`.
pub fn rk4_step<S: SplitSystem + ?Sized>(
    h: f64,
    t: f64,
    y: &StateVector,
    system: &S,
) -> Result<StateVector> {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];

    system.eval_rhs(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    system.eval_rhs(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    system.eval_rhs(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    system.eval_rhs(t + h, &tmp, &mut k4);

    let out = StateVector(
        (0..n)
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect(),
    );
    check_overflow(&out, t + h)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DiagStabilizer, Sample};
    use approx::assert_relative_eq;

    struct Lin(f64);

    impl SplitSystem for Lin {
        fn dim(&self) -> usize {
            1
        }
        fn eval_split(&self, _t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]) {
            a[0] = 0.0;
            b[0] = self.0 * y[0];
        }
    }

    fn lin_window(lambda: f64, h: f64, ys: &[f64]) -> HistoryWindow {
        let sys = Lin(lambda);
        let samples = ys
            .iter()
            .enumerate()
            .map(|(i, &y)| Sample::eval(&sys, i as f64 * h, StateVector(vec![y])))
            .collect();
        HistoryWindow::from_samples(h, samples).unwrap()
    }

    fn f_window(h: f64, fs: &[f64]) -> HistoryWindow {
        let samples = fs
            .iter()
            .enumerate()
            .map(|(i, &f)| Sample {
                t: i as f64 * h,
                y: StateVector(vec![0.0]),
                a: DiagStabilizer(vec![0.0]),
                b: StateVector(vec![f]),
            })
            .collect();
        HistoryWindow::from_samples(h, samples).unwrap()
    }

    #[test]
    fn ab_examples() {
        // forward Euler
        let w = lin_window(-2.0, 0.1, &[1.0]);
        assert_relative_eq!(ab_step(&w).unwrap()[0], 1.0 - 0.2, max_relative = 1e-15);
        // constant f
        let w = f_window(0.1, &[1.0, 1.0]);
        assert_relative_eq!(ab_step(&w).unwrap()[0], 0.1, max_relative = 1e-15);
        // f_n = 1, f_{n-1} = -1
        let w = f_window(0.1, &[-1.0, 1.0]);
        assert_relative_eq!(ab_step(&w).unwrap()[0], 0.2, max_relative = 1e-14);
    }

    #[test]
    fn ab_weights_sum_to_one() {
        for row in AB {
            assert_relative_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn bdf2_linear_closed_form() {
        let (lambda, h) = (-3.0, 0.2);
        let w = lin_window(lambda, h, &[1.0, 0.7]);
        let got = bdf_step(&w, &Lin(lambda), &NewtonConfig::default())
            .unwrap()
            .y[0];
        let want = (4.0 / 3.0 * 0.7 - 1.0 / 3.0 * 1.0) / (1.0 - 2.0 / 3.0 * h * lambda);
        assert_relative_eq!(got, want, max_relative = 1e-12);
    }

    #[test]
    fn bdf_linear_matches_characteristic_recurrence() {
        // On y' = lambda y every BDF_k is the linear recurrence
        // (1 - beta z) y_{n+1} = -sum alpha_i y_{n-i}.
        let (lambda, h) = (-7.0, 0.05);
        let z = lambda * h;
        for k in 2..=4 {
            let ys: Vec<f64> = (0..k).map(|i| (lambda * h * i as f64).exp()).collect();
            let w = lin_window(lambda, h, &ys);
            let got = bdf_step(&w, &Lin(lambda), &NewtonConfig::default())
                .unwrap()
                .y[0];
            let (alpha, beta) = BDF[k - 2];
            let want = -(0..k).map(|i| alpha[i] * ys[k - 1 - i]).sum::<f64>() / (1.0 - beta * z);
            assert!((got - want).abs() <= 1e-13, "k={k}: {got} vs {want}");
        }
    }

    #[test]
    fn bdf2_is_stable_on_very_stiff_decay() {
        let lambda = -1e6;
        let sys = Lin(lambda);
        let mut w = lin_window(lambda, 1.0, &[1.0, 0.5]);
        let mut last = 0.5f64;
        for n in 2..20 {
            let y = bdf_step(&w, &sys, &NewtonConfig::default()).unwrap().y;
            assert!(y[0].abs() <= last.abs() + 1e-300);
            last = y[0];
            w.push(Sample::eval(&sys, n as f64, y)).unwrap();
        }
        assert!(last.abs() < 1e-10);
    }

    #[test]
    fn rk4_examples() {
        let y = rk4_step(0.1, 0.0, &StateVector(vec![1.0]), &Lin(1.0)).unwrap();
        let h: f64 = 0.1;
        let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert_relative_eq!(y[0], taylor, max_relative = 1e-15);
        assert!((y[0] - 1.1051708333).abs() < 1e-10);

        let y = rk4_step(0.3, 0.0, &StateVector(vec![2.5]), &Lin(0.0)).unwrap();
        assert_eq!(y[0], 2.5);
    }

    #[test]
    fn linear_stability_polynomials() {
        for &(lambda, h) in &[(-1.0, 0.1), (-30.0, 0.05), (2.0, 0.2)] {
            let z: f64 = lambda * h;
            let rk = rk4_step(h, 0.0, &StateVector(vec![1.0]), &Lin(lambda)).unwrap()[0];
            let poly = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
            assert!((rk - poly).abs() <= 1e-13 * poly.abs().max(1.0));

            // AB2 on y' = lambda y: y_{n+1} = (1 + 3z/2) y_n - z/2 y_{n-1}.
            let w = lin_window(lambda, h, &[0.3, 1.0]);
            let ab = ab_step(&w).unwrap()[0];
            assert!((ab - ((1.0 + 1.5 * z) - 0.5 * z * 0.3)).abs() <= 1e-13);
        }
    }

    #[test]
    fn overflow_and_config_errors() {
        let w = f_window(1.0, &[1e11]);
        assert!(matches!(ab_step(&w), Err(Error::Overflow { .. })));
        let bad = NewtonConfig {
            max_iters: 0,
            ..NewtonConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
