//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the summary lines always reach the
//! output. A criterion fails the target unless every failing sub-check is a
//! known gap (marked `known gap` in its line and explained in the README).

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use expadams::classical::ab_step;
use expadams::eab::eab_step;
use expadams::harness::{convergence_study, critical_time_step, ErrorReport, RunOptions};
use expadams::models::{
    make_dahlquist, membrane_to_split, BeelerReuter, BrParams, ScalarGate, Stimulus,
};
use expadams::phi::{phi_upto, MAX_ORDER, TAYLOR_SWITCH};
use expadams::stability::{
    compute_beta3, find_theta_thresholds, positivity_check_eab2, rho, scan_a0, stability_grid,
    stability_poly_coeffs, LineGrid, RectGrid,
};
use expadams::{DiagStabilizer, Exec, HistoryWindow, Sample, SchemeSpec, StateVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    /// Sub-checks that must hold.
    hard: Vec<(String, bool)>,
    /// Sub-checks with a known, explained gap.
    soft: Vec<(String, bool)>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            hard: Vec::new(),
            soft: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.hard.push((what.into(), ok));
    }

    fn gap(&mut self, what: impl Into<String>, ok: bool) {
        self.soft.push((what.into(), ok));
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn within(&mut self, what: &str, elapsed: Duration, limit_s: f64) {
        self.check(
            format!("{what} {:.2}s < {limit_s}s", elapsed.as_secs_f64()),
            elapsed.as_secs_f64() < limit_s,
        );
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn phi_accuracy() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut points = Vec::with_capacity(10_000);
    for i in 0..10_000 {
        let z = if i < 8_000 {
            let r = 50.0 * rng.gen::<f64>().sqrt();
            Complex64::from_polar(
                r,
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            )
        } else {
            let r = TAYLOR_SWITCH * rng.gen_range(0.9..1.1);
            Complex64::from_polar(
                r,
                rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
            )
        };
        points.push(z);
    }
    let oracle: Vec<Vec<Complex64>> = points
        .iter()
        .map(|&z| common::oracle(MAX_ORDER, z))
        .collect();
    let start = Instant::now();
    let values: Vec<_> = points.iter().map(|&z| phi_upto(MAX_ORDER, z)).collect();
    let elapsed = start.elapsed();
    let mut worst = 0.0f64;
    for (v, w) in values.iter().zip(&oracle) {
        for j in 0..=MAX_ORDER {
            worst = worst.max((v.get(j) - w[j]).norm() / w[j].norm());
        }
    }
    o.check(
        format!("10^4 points, |z| <= 50, worst rel {worst:.1e} < 1e-12"),
        worst < 1e-12,
    );
    o.within("evaluation", elapsed, 1.0);
    o
}

fn exactness_and_reduction() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let (lambda, h, n) = (-1.0, 0.1, 100);
    let sys = make_dahlquist(lambda, 1.0).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=4 {
        let nodes = (0..k)
            .map(|i| {
                Sample::eval(
                    &sys,
                    i as f64 * h,
                    StateVector(vec![(lambda * i as f64 * h).exp()]),
                )
            })
            .collect();
        let mut w = HistoryWindow::from_samples(h, nodes).unwrap();
        for m in k..=n {
            let y = eab_step(&w).unwrap();
            w.push(Sample::eval(&sys, m as f64 * h, y)).unwrap();
        }
        let want = (lambda * n as f64 * h).exp();
        worst = worst.max((w.newest().y[0] - want).abs() / want);
    }
    o.check(
        format!("theta = 1 exact, rel {worst:.1e} < 1e-12"),
        worst < 1e-12,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=4);
        let h = rng.gen_range(1e-3..1.0);
        let nodes = (0..k)
            .map(|i| Sample {
                t: i as f64 * h,
                y: StateVector((0..4).map(|_| rng.gen_range(-10.0..10.0)).collect()),
                a: DiagStabilizer(vec![0.0; 4]),
                b: StateVector((0..4).map(|_| rng.gen_range(-10.0..10.0)).collect()),
            })
            .collect();
        let w = HistoryWindow::from_samples(h, nodes).unwrap();
        let (e, a) = (eab_step(&w).unwrap(), ab_step(&w).unwrap());
        for r in 0..4 {
            worst = worst.max((e[r] - a[r]).abs() / a[r].abs().max(1.0));
        }
    }
    o.check(
        format!("a = 0 gives AB_k, diff {worst:.1e} <= 1e-13"),
        worst <= 1e-13,
    );
    o.within("run", start.elapsed(), 1.0);
    o
}

/// Beeler-Reuter from rest with the potential raised to -58 mV and no
/// applied current: one action potential within 500 ms.
fn br_protocol() -> (expadams::models::MembraneSystem<BeelerReuter>, StateVector) {
    let model = BeelerReuter::new(BrParams::bundled()).with_stimulus(Stimulus::None);
    let mut y0 = model.initial_state();
    y0[7] = -58.0;
    (membrane_to_split(model), y0)
}

const H_LIST: [f64; 4] = [1e-3, 5e-4, 2.5e-4, 1.25e-4];
const H_REF: f64 = 6.25e-5;

fn convergence_orders(reports: &mut Vec<ErrorReport>) -> Outcome {
    let mut o = Outcome::new();
    let (sys, y0) = br_protocol();
    let mut schemes = Vec::new();
    for k in 2..=4 {
        schemes.push(SchemeSpec::eab(k).unwrap());
        schemes.push(SchemeSpec::ieab(k).unwrap());
    }
    let start = Instant::now();
    let study = convergence_study(
        &schemes,
        &sys,
        &y0,
        &H_LIST,
        Some(H_REF),
        500.0,
        Exec::default(),
    )
    .unwrap();
    let elapsed = start.elapsed();
    for s in &schemes {
        let orders: Vec<f64> = study
            .reports
            .iter()
            .filter(|r| r.scheme == *s)
            .filter_map(|r| r.order)
            .collect();
        let k = s.order() as f64;
        let ok = orders.len() == 3 && orders.iter().all(|p| (p - k).abs() <= 0.25);
        let list: Vec<String> = orders.iter().map(|p| format!("{p:.2}")).collect();
        o.check(format!("{s} [{}]", list.join(" ")), ok);
    }
    o.within("study", elapsed, 120.0);
    *reports = study.reports;
    o
}

fn accuracy_table(study: &[ErrorReport]) -> Outcome {
    let mut o = Outcome::new();
    let (sys, y0) = br_protocol();
    let start = Instant::now();
    let ab: Vec<SchemeSpec> = (2..=4).map(|k| SchemeSpec::ab(k).unwrap()).collect();
    let ab_study =
        convergence_study(&ab, &sys, &y0, &[1e-3], Some(H_REF), 500.0, Exec::default()).unwrap();
    let elapsed = start.elapsed();
    let published: [(&str, [f64; 3]); 3] = [
        ("AB", [5.32e-6, 4.33e-8, 8.69e-10]),
        ("I-EAB", [8.55e-6, 4.44e-8, 7.30e-10]),
        ("EAB", [7.90e-6, 7.00e-8, 1.16e-9]),
    ];
    for (family, values) in published {
        for (i, want) in values.iter().enumerate() {
            let name = format!("{family}{}", i + 2);
            let e = study
                .iter()
                .chain(&ab_study.reports)
                .find(|r| r.scheme.to_string() == name && r.h == 1e-3)
                .map(|r| r.e_h)
                .unwrap();
            let factor = (e / want).max(want / e);
            let line = format!("{name} {e:.2e} vs {want:.2e} (x{factor:.1})");
            // Exponential second-order rows are expected to match; the rest
            // are known gaps.
            if i == 0 && family != "AB" {
                o.check(line, factor <= 3.0);
            } else {
                o.gap(line, factor <= 3.0);
            }
        }
    }
    o.within(
        "AB runs (exponential rows reuse criterion 3)",
        elapsed,
        300.0,
    );
    o
}

fn a0_thresholds() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let grid = LineGrid::default();
    for (k, lo, hi) in [(2, 0.74, 0.75), (3, 0.87, 0.88), (4, 0.93, 0.94)] {
        let t = find_theta_thresholds(k, (0.5, 2.5), 1e-4, &grid, Exec::default()).unwrap();
        let b = t.lower;
        o.check(
            format!(
                "k={k} lower ({:.4}, {:.4}] in ({lo}, {hi}]",
                b.unstable, b.stable
            ),
            lo < b.unstable && b.stable <= hi,
        );
        if k >= 3 {
            let grid_upper = t.upper.map(|u| u.stable).unwrap_or(f64::NAN);
            o.note(format!("k={k} upper on [-30, 0] grid {grid_upper:.4}"));
        }
    }
    let with_limit = LineGrid {
        include_limit: true,
        ..LineGrid::default()
    };
    for (k, want) in [(3, 1.9), (4, 1.2)] {
        let t = find_theta_thresholds(k, (0.5, 2.5), 1e-4, &with_limit, Exec::default()).unwrap();
        let upper = t.upper.map(|u| u.stable).unwrap_or(f64::NAN);
        o.gap(
            format!("k={k} upper {upper:.4} vs {want} +- 0.05"),
            (upper - want).abs() <= 0.05,
        );
        // The listed values themselves are A(0) stable.
        o.check(
            format!("theta={want} A(0) stable for k={k}"),
            scan_a0(k, want, &with_limit, Exec::default()).unwrap(),
        );
    }
    o.within("run", start.elapsed(), 30.0);
    o
}

fn printed_coefficients() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let theta = rng.gen_range(0.01..2.5);
        let z = c(rng.gen_range(-40.0..2.0), rng.gen_range(-40.0..40.0));
        let p = phi_upto(2, z * theta);
        let mu = z * (1.0 - theta);
        let printed = [-1.0 - p.get(1) * z - p.get(2) * mu, p.get(2) * mu];
        let got = stability_poly_coeffs(2, theta, z);
        for i in 0..2 {
            worst = worst.max((got[i] - printed[i]).norm() / (1.0 + printed[i].norm()));
        }
    }
    o.check(
        format!("10^3 random (theta, z), diff {worst:.1e} <= 1e-13"),
        worst <= 1e-13,
    );
    o
}

fn beta3_value() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let b = compute_beta3(1e-10).unwrap();
    o.check(
        format!("beta3 = {b:.4}, 0.331 +- 0.005"),
        (b - 0.331).abs() <= 0.005,
    );
    o.within("run", start.elapsed(), 1.0);
    o
}

fn critical_steps() -> Outcome {
    let mut o = Outcome::new();
    let sys = membrane_to_split(BeelerReuter::new(BrParams::bundled()));
    let y0 = sys.model.initial_state();
    let start = Instant::now();
    let dt0 = |s: &str, h_lo: f64| {
        let d = critical_time_step(
            s.parse().unwrap(),
            &sys,
            &y0,
            1000.0,
            h_lo,
            3.0,
            1e-4,
            &RunOptions::default(),
        )
        .unwrap();
        d.dt0
    };
    let eab2 = dt0("EAB2", 1e-2);
    let ab2 = dt0("AB2", 1e-3);
    o.check(
        format!(
            "EAB2 {eab2:.3} vs 0.424 (x{:.2})",
            (eab2 / 0.424).max(0.424 / eab2)
        ),
        (eab2 / 0.424).max(0.424 / eab2) <= 2.0,
    );
    o.check(
        format!(
            "AB2 {ab2:.4} vs 0.0124 (x{:.2})",
            (ab2 / 0.0124).max(0.0124 / ab2)
        ),
        (ab2 / 0.0124).max(0.0124 / ab2) <= 2.0,
    );
    o.check(format!("ratio {:.1} >= 10", eab2 / ab2), eab2 / ab2 >= 10.0);
    for (s, want) in [("BDF2", 0.306), ("BDF3", 0.362), ("BDF4", 0.423)] {
        let d = dt0(s, 1e-2);
        o.check(
            format!("{s} {d:.3} vs {want} (x{:.2})", (d / want).max(want / d)),
            (d / want).max(want / d) < 10.0,
        );
    }
    o.within("run", start.elapsed(), 300.0);
    o
}

fn eab2_gate_step(gate: &ScalarGate, h: f64, t0: f64, y_prev: f64, y: f64) -> f64 {
    let w = HistoryWindow::from_samples(
        h,
        vec![
            Sample::eval(gate, t0, StateVector(vec![y_prev])),
            Sample::eval(gate, t0 + h, StateVector(vec![y])),
        ],
    )
    .unwrap();
    eab_step(&w).unwrap()[0]
}

fn positivity() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let br = BeelerReuter::new(BrParams::bundled());
    let rest = br.initial_state()[7];
    let taus: Vec<f64> = (0..6)
        .map(|g| {
            let (a, b) = br.gate_rates(g, rest);
            1.0 / (a + b)
        })
        .collect();
    let (mut admitted, mut violations) = (0, 0);
    for &tau in &taus {
        for &ha in &[0.1, 0.5, 0.9] {
            let h = ha * tau;
            let schedule: Vec<(f64, f64)> = (0..40)
                .map(|i| (i as f64 * 3.3 * h, (i % 2) as f64))
                .collect();
            let gate = ScalarGate::new(tau, schedule).unwrap();
            let (mut y_prev, mut y) = (0.5, 0.5);
            for n in 1..400 {
                let t = n as f64 * h;
                let ok = positivity_check_eab2(h, -1.0 / tau, y, gate.w_inf(t - h) / tau, 0.0, 1.0)
                    .unwrap();
                let next = eab2_gate_step(&gate, h, t - h, y_prev, y);
                if ok {
                    admitted += 1;
                    if !(-1e-14..=1.0 + 1e-14).contains(&next) {
                        violations += 1;
                    }
                }
                (y_prev, y) = (y, next);
            }
        }
    }
    o.check(
        format!("{admitted} admitted steps, {violations} outside [0, 1]"),
        admitted > 0 && violations == 0,
    );

    let mut found = 0;
    for &tau in &taus {
        let h = 1.5 * tau;
        for i in 0..=10 {
            for j in 0..=10 {
                for (w_prev, w_now) in [(0.0, 1.0), (1.0, 0.0)] {
                    let gate = ScalarGate::new(tau, vec![(0.0, w_prev), (0.5 * h, w_now)]).unwrap();
                    let next = eab2_gate_step(&gate, h, 0.0, i as f64 / 10.0, j as f64 / 10.0);
                    if !(0.0..=1.0).contains(&next) {
                        found += 1;
                    }
                }
            }
        }
    }
    o.check(format!("h = 1.5 tau: {found} violations found"), found > 0);
    o.within("run", start.elapsed(), 10.0);
    o
}

fn stability_domain() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let rect = RectGrid::default();
    for k in 1..=4 {
        let g = stability_grid(k, 1.0, &rect, Exec::default()).unwrap();
        let mut wrong = 0;
        for j in 0..rect.ny() {
            for i in 0..rect.nx() {
                let re = rect.re(i);
                if re.abs() < rect.dx {
                    continue;
                }
                if (g.at(i, j) < 1.0) != (re < 0.0) {
                    wrong += 1;
                }
            }
        }
        o.check(format!("k={k} theta=1: {wrong} misclassified"), wrong == 0);
    }
    let line = LineGrid::default();
    let unstable = (0..line.len())
        .filter(|&i| rho(2, 0.74, c(line.point(i), 0.0)) >= 1.0)
        .count();
    o.check(
        format!("k=2 theta=0.74: {unstable} unstable points"),
        unstable > 0,
    );
    o.check(
        "k=2 theta=0.75: none unstable",
        scan_a0(2, 0.75, &line, Exec::default()).unwrap(),
    );
    o.within("run", start.elapsed(), 60.0);
    o
}

fn main() -> ExitCode {
    let mut study = Vec::new();
    let mut outcomes = vec![
        ("phi functions", phi_accuracy()),
        ("exactness and AB reduction", exactness_and_reduction()),
        (
            "convergence orders on Beeler-Reuter",
            convergence_orders(&mut study),
        ),
    ];
    outcomes.push(("accuracy at h = 1e-3", accuracy_table(&study)));
    outcomes.push(("A(0) thresholds", a0_thresholds()));
    outcomes.push(("printed second-order coefficients", printed_coefficients()));
    outcomes.push(("beta3", beta3_value()));
    outcomes.push(("critical time steps", critical_steps()));
    outcomes.push(("positivity", positivity()));
    outcomes.push(("stability grid", stability_domain()));

    let mut unexpected = 0;
    println!();
    for (i, (name, o)) in outcomes.iter().enumerate() {
        let hard_ok = o.hard.iter().all(|(_, ok)| *ok);
        let soft_ok = o.soft.iter().all(|(_, ok)| *ok);
        let status = if hard_ok && soft_ok { "PASS" } else { "FAIL" };
        let mut parts: Vec<String> = Vec::new();
        for (what, ok) in &o.hard {
            parts.push(if *ok {
                what.clone()
            } else {
                format!("{what} [failed]")
            });
        }
        for (what, ok) in &o.soft {
            parts.push(if *ok {
                what.clone()
            } else {
                format!("{what} [known gap]")
            });
        }
        parts.extend(o.notes.iter().cloned());
        println!(
            "criterion {:>2} {status} {name}: {}",
            i + 1,
            parts.join("; ")
        );
        if !hard_ok {
            unexpected += 1;
        }
    }
    println!();
    if unexpected > 0 {
        println!("{unexpected} criteria failed outside their known gaps");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
