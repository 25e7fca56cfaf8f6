//! Linear stability of EAB_k on `y' = lambda y` split as
//! `a = theta lambda`, `b = (1 - theta) lambda y`, plus the positivity
//! bounds for EAB2 and EAB3.
//!
//! With `z = lambda h` one step reads
//! `y_{n+1} + c_1 y_n + ... + c_k y_{n-k+1} = 0`, the coefficients being
//! obtained by substituting `h g_{n-i} = (1 - theta) z y_{n-i}` into the
//! EAB_k update. `rho` is the largest root modulus of
//! `xi^k + c_1 xi^{k-1} + ... + c_k`.

use std::fmt::Write as _;
use std::sync::OnceLock;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::eab::GAMMA;
use crate::error::{Error, Result};
use crate::exec::{all_range, map_range, Exec};
use crate::phi::{phi_real, phi_upto};
use crate::MAX_K;

/// One point of the stability analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityQuery {
    pub k: usize,
    pub theta: f64,
    pub z: Complex64,
}

impl StabilityQuery {
    pub fn new(k: usize, theta: f64, z: Complex64) -> Result<Self> {
        check_k_theta(k, theta)?;
        Ok(StabilityQuery { k, theta, z })
    }

    pub fn rho(&self) -> f64 {
        rho(self.k, self.theta, self.z)
    }
}

fn check_k_theta(k: usize, theta: f64) -> Result<()> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "order {k} outside 1..={MAX_K}"
        )));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "theta must be positive, got {theta}"
        )));
    }
    Ok(())
}

/// Points `z = -i dx`, `i = 1..=n`, covering `[z_min, 0)`; optionally also
/// the limit `z -> -infinity` (see [`rho_limit`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGrid {
    pub z_min: f64,
    pub dx: f64,
    pub include_limit: bool,
}

impl Default for LineGrid {
    fn default() -> Self {
        LineGrid {
            z_min: -30.0,
            dx: 0.01,
            include_limit: false,
        }
    }
}

impl LineGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0 && self.z_min < 0.0 && self.z_min.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad line grid {self:?}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (-self.z_min / self.dx + 1e-9).floor() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: usize) -> f64 {
        -((i + 1) as f64) * self.dx
    }
}

/// Nodes `x0 + i dx` by `y0 + j dx` over a rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectGrid {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub dx: f64,
}

impl Default for RectGrid {
    fn default() -> Self {
        RectGrid {
            x0: -40.0,
            x1: 2.0,
            y0: 0.0,
            y1: 60.0,
            dx: 0.05,
        }
    }
}

impl RectGrid {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dx > 0.0
            && self.x1 >= self.x0
            && self.y1 >= self.y0
            && [self.x0, self.x1, self.y0, self.y1]
                .iter()
                .all(|v| v.is_finite());
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "bad rectangle grid {self:?}"
            )));
        }
        Ok(())
    }

    pub fn nx(&self) -> usize {
        ((self.x1 - self.x0) / self.dx + 1e-9).floor() as usize + 1
    }

    pub fn ny(&self) -> usize {
        ((self.y1 - self.y0) / self.dx + 1e-9).floor() as usize + 1
    }

    pub fn re(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn im(&self, j: usize) -> f64 {
        self.y0 + j as f64 * self.dx
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridSpec {
    Line(LineGrid),
    Rect(RectGrid),
}

/// `[c_1, ..., c_k]` at `z`.
pub fn stability_poly_coeffs(k: usize, theta: f64, z: Complex64) -> Vec<Complex64> {
    assert!((1..=MAX_K).contains(&k), "order {k} outside 1..={MAX_K}");
    let phi = phi_upto(k, z * theta);
    let mu = z * (1.0 - theta);
    let table = &GAMMA[k - 1];
    (0..k)
        .map(|i| {
            let s: Complex64 = (0..k).map(|j| phi.get(j + 1) * table[j][i]).sum();
            let c = -(mu * s);
            if i == 0 {
                c - phi.get(0)
            } else {
                c
            }
        })
        .collect()
}

fn horner(c: &[Complex64], x: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ci in c {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// Roots of `xi^k + c_1 xi^{k-1} + ... + c_k`.
///
/// Degree one and two are solved in closed form; higher degrees through the
/// eigenvalues of the companion matrix (complex Schur form), followed by two
/// Newton corrections on the polynomial.
pub fn poly_roots(c: &[Complex64]) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut deg = c.len();
    while deg > 0 && c[deg - 1] == zero {
        deg -= 1;
    }
    let mut roots = vec![zero; c.len() - deg];
    let c = &c[..deg];
    match deg {
        0 => {}
        1 => roots.push(-c[0]),
        2 => {
            // xi^2 + p xi + q, computed without cancellation.
            let (p, q) = (c[0], c[1]);
            let disc = (p * p - 4.0 * q).sqrt();
            let s = if (p.conj() * disc).re >= 0.0 {
                -(p + disc)
            } else {
                -(p - disc)
            };
            let r1 = s / 2.0;
            let r2 = if r1 == zero { zero } else { q / r1 };
            roots.push(r1);
            roots.push(r2);
        }
        _ => {
            let mut m = DMatrix::<Complex64>::zeros(deg, deg);
            for j in 0..deg {
                m[(0, j)] = -c[j];
            }
            for i in 1..deg {
                m[(i, i - 1)] = Complex64::new(1.0, 0.0);
            }
            let eig = Schur::try_new(m, f64::EPSILON, 10_000)
                .and_then(|s| s.eigenvalues())
                .expect("complex Schur form of a small companion matrix");
            for mut r in eig.iter().copied() {
                for _ in 0..2 {
                    let (p, dp) = horner(c, r);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let next = r - p / dp;
                    if horner(c, next).0.norm() < p.norm() {
                        r = next;
                    } else {
                        break;
                    }
                }
                roots.push(r);
            }
        }
    }
    roots
}

/// Largest root modulus; `z` is in the stability domain iff `rho < 1`.
pub fn rho(k: usize, theta: f64, z: Complex64) -> f64 {
    let c = stability_poly_coeffs(k, theta, z);
    if c.iter().any(|x| !x.is_finite()) {
        return f64::INFINITY;
    }
    poly_roots(&c).iter().fold(0.0, |m, r| m.max(r.norm()))
}

/// `rho` in the limit `z -> -infinity` along the real axis.
///
/// There `e^{theta z} -> 0` and `(1 - theta) z phi_{j+1}(theta z) ->
/// -(1 - theta) / (theta j!)`, so the characteristic polynomial tends to one
/// with coefficients `c_i = (1 - theta) / theta * sum_j gamma_{j,i} / j!`.
pub fn rho_limit(k: usize, theta: f64) -> f64 {
    assert!((1..=MAX_K).contains(&k), "order {k} outside 1..={MAX_K}");
    let q = (1.0 - theta) / theta;
    let table = &GAMMA[k - 1];
    let c: Vec<Complex64> = (0..k)
        .map(|i| {
            let s: f64 = (0..k)
                .map(|j| table[j][i] * crate::phi::inv_factorial(j))
                .sum();
            Complex64::new(q * s, 0.0)
        })
        .collect();
    poly_roots(&c).iter().fold(0.0, |m, r| m.max(r.norm()))
}

/// True when every point of `grid` lies in the stability domain.
pub fn scan_a0(k: usize, theta: f64, grid: &LineGrid, exec: Exec) -> Result<bool> {
    check_k_theta(k, theta)?;
    grid.validate()?;
    if grid.include_limit && rho_limit(k, theta) >= 1.0 {
        return Ok(false);
    }
    Ok(all_range(exec, grid.len(), |i| {
        rho(k, theta, Complex64::new(grid.point(i), 0.0)) < 1.0
    }))
}

/// `theta` values on both sides of a stability switch, `stable - unstable`
/// being at most the requested tolerance in magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaBracket {
    pub unstable: f64,
    pub stable: f64,
}

impl ThetaBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.unstable + self.stable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaThresholds {
    pub lower: ThetaBracket,
    /// `None` when the upper end of the search interval is still stable.
    pub upper: Option<ThetaBracket>,
}

fn bisect_theta(
    k: usize,
    grid: &LineGrid,
    exec: Exec,
    mut unstable: f64,
    mut stable: f64,
    tol: f64,
) -> Result<ThetaBracket> {
    while (stable - unstable).abs() > tol {
        let mid = 0.5 * (stable + unstable);
        if scan_a0(k, mid, grid, exec)? {
            stable = mid;
        } else {
            unstable = mid;
        }
    }
    Ok(ThetaBracket { unstable, stable })
}

/// Bisection for the edges of the set of `theta` for which the scheme is
/// stable on the whole `grid`. `theta = 1` is always stable; `interval.0`
/// must be unstable, `interval.1` may be either.
pub fn find_theta_thresholds(
    k: usize,
    interval: (f64, f64),
    tol: f64,
    grid: &LineGrid,
    exec: Exec,
) -> Result<ThetaThresholds> {
    let (lo, hi) = interval;
    if !(tol > 0.0) || !(lo > 0.0 && lo < 1.0 && hi > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need tol > 0 and 0 < lo < 1 < hi, got tol={tol}, interval=({lo}, {hi})"
        )));
    }
    check_k_theta(k, lo)?;
    if scan_a0(k, lo, grid, exec)? {
        return Err(Error::Bracket(format!(
            "theta = {lo} is already stable for k = {k}; no lower threshold in the interval"
        )));
    }
    let lower = bisect_theta(k, grid, exec, lo, 1.0, tol)?;
    let upper = if scan_a0(k, hi, grid, exec)? {
        None
    } else {
        Some(bisect_theta(k, grid, exec, hi, 1.0, tol)?)
    };
    Ok(ThetaThresholds { lower, upper })
}

/// `rho` on every node of a rectangle, stored row by row (one row per
/// imaginary part, real part varying fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityGrid {
    pub grid: RectGrid,
    pub k: usize,
    pub theta: f64,
    pub rho: Vec<f64>,
}

pub fn stability_grid(k: usize, theta: f64, grid: &RectGrid, exec: Exec) -> Result<StabilityGrid> {
    check_k_theta(k, theta)?;
    grid.validate()?;
    let (nx, ny) = (grid.nx(), grid.ny());
    let rows = map_range(exec, ny, |j| {
        (0..nx)
            .map(|i| rho(k, theta, Complex64::new(grid.re(i), grid.im(j))))
            .collect::<Vec<_>>()
    });
    Ok(StabilityGrid {
        grid: *grid,
        k,
        theta,
        rho: rows.concat(),
    })
}

impl StabilityGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.rho[j * self.grid.nx() + i]
    }

    /// CSV with header `re_z,im_z,rho`.
    pub fn to_csv(&self) -> String {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let mut out = String::with_capacity(64 * nx * ny + 16);
        out.push_str("re_z,im_z,rho\n");
        for j in 0..ny {
            for i in 0..nx {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    fmt_sig15(self.grid.re(i)),
                    fmt_sig15(self.grid.im(j)),
                    fmt_sig15(self.at(i, j))
                );
            }
        }
        out
    }

    /// Largest angle `alpha` (degrees) such that no unstable node with
    /// `|z| >= min_modulus` lies in the sector `|arg(-z)| < alpha`. Limited by
    /// the grid extent; descriptive only.
    pub fn alpha_estimate(&self, min_modulus: f64) -> f64 {
        let mut alpha = 90.0_f64;
        for j in 0..self.grid.ny() {
            for i in 0..self.grid.nx() {
                let (x, y) = (self.grid.re(i), self.grid.im(j));
                if x >= 0.0 || x.hypot(y) < min_modulus || self.at(i, j) < 1.0 {
                    continue;
                }
                alpha = alpha.min(y.abs().atan2(-x).to_degrees());
            }
        }
        alpha
    }
}

/// Float with 15 significant digits in scientific notation.
pub fn fmt_sig15(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        format!("{x}")
    }
}

fn check_positivity_args(h: f64, a: f64, k1: f64, k2: f64) -> Result<()> {
    if !(h > 0.0) || !(a <= 0.0) || !(k1 <= k2) {
        return Err(Error::InvalidArgument(format!(
            "need h > 0, a <= 0 and K1 <= K2, got h={h}, a={a}, K1={k1}, K2={k2}"
        )));
    }
    Ok(())
}

/// `C_p = e^{ah} + a h phi_2(ah)` of the EAB2 bound.
pub fn cp_eab2(a: f64, h: f64) -> f64 {
    let x = a * h;
    x.exp() + x * phi_real(2, x)
}

/// `C_p = e^{ah} + 2 a h (phi_2 + phi_3)` of the EAB3 bound.
pub fn cp_eab3(a: f64, h: f64) -> f64 {
    let x = a * h;
    x.exp() + 2.0 * x * (phi_real(2, x) + phi_real(3, x))
}

/// Sufficient condition for EAB2 iterates of `y' = a y + b` with
/// `-a K1 <= b <= -a K2` to stay in `[K1, K2]` from the third value on.
pub fn positivity_check_eab2(h: f64, a: f64, y1: f64, b0: f64, k1: f64, k2: f64) -> Result<bool> {
    check_positivity_args(h, a, k1, k2)?;
    if h * a.abs() > 1.0 {
        return Ok(false);
    }
    let x = a * h;
    let cp = cp_eab2(a, h);
    let s = x.exp() * y1 - h * phi_real(2, x) * b0;
    Ok(cp * k1 <= s && s <= cp * k2)
}

/// EAB3 analogue of [`positivity_check_eab2`], with `h |a| <= beta_3`.
pub fn positivity_check_eab3(h: f64, a: f64, y2: f64, b1: f64, k1: f64, k2: f64) -> Result<bool> {
    check_positivity_args(h, a, k1, k2)?;
    if h * a.abs() > beta3() {
        return Ok(false);
    }
    let x = a * h;
    let cp = cp_eab3(a, h);
    let s = x.exp() * y2 - 2.0 * h * (phi_real(2, x) + phi_real(3, x)) * b1;
    Ok(cp * k1 <= s && s <= cp * k2)
}

/// `phi_1 e^z + phi_2 (3/2 e^z - 2) + phi_3 (e^z - 2)`, all at `z`.
pub fn psi(z: f64) -> f64 {
    let e = z.exp();
    phi_real(1, z) * e + phi_real(2, z) * (1.5 * e - 2.0) + phi_real(3, z) * (e - 2.0)
}

/// First positive root of `s -> psi(-s)`, by a coarse scan then bisection.
pub fn compute_beta3(tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let step = 1e-3;
    let mut lo = 0.0;
    loop {
        let hi = lo + step;
        if hi > 10.0 {
            return Err(Error::Bracket("psi(-s) keeps its sign on [0, 10]".into()));
        }
        if psi(-hi) < 0.0 {
            let (mut a, mut b) = (lo, hi);
            while b - a > tol {
                let m = 0.5 * (a + b);
                if psi(-m) >= 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            return Ok(a);
        }
        lo = hi;
    }
}

/// [`compute_beta3`] at full precision, computed once.
pub fn beta3() -> f64 {
    static BETA3: OnceLock<f64> = OnceLock::new();
    *BETA3.get_or_init(|| compute_beta3(1e-15).expect("psi changes sign"))
}
