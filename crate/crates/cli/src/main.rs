use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expadams::exec::map_collect;
use expadams::harness::{
    convergence_csv, convergence_study, critical_time_step, ExperimentConfig, RunOptions,
};
use expadams::stability::{
    beta3, cp_eab2, cp_eab3, find_theta_thresholds, fmt_sig15, stability_grid, ThetaBracket,
};
use expadams::Error;

/// Experiments for the exponential Adams-Bashforth integrators.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// INI config; built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides `[run] output_dir`.
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Error and observed order per scheme and step; writes convergence.csv.
    Converge(Common),
    /// Critical time step per scheme; writes dt0.csv.
    Dt0(Common),
    /// Stability function on a rectangle of the complex plane; writes
    /// stability_grid.csv.
    StabilityGrid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Bisects the theta interval of A(0) stability; writes a0_threshold.csv.
    A0Threshold {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Positivity factors along the negative real axis; writes positivity.csv.
    Positivity(Common),
    /// Error of every scheme at `[run] table_h`; writes accuracy.csv.
    Tables(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Params(_)
        | Error::InvalidScheme(_)
        | Error::InvalidArgument(_) => 2,
        Error::Bracket(_) | Error::SolverFailure { .. } | Error::Overflow { .. } => 3,
        _ => 1,
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(dir) = &common.output_dir {
        cfg.run.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn write_csv(dir: &Path, name: &str, body: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, body)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn check_k(k: usize) -> Result<usize, Error> {
    if (1..=expadams::MAX_K).contains(&k) {
        Ok(k)
    } else {
        Err(Error::Config(format!(
            "k must be in 1..={}, got {k}",
            expadams::MAX_K
        )))
    }
}

fn bracket(b: &ThetaBracket) -> String {
    if b.unstable < b.stable {
        format!("({:.6}, {:.6}]", b.unstable, b.stable)
    } else {
        format!("[{:.6}, {:.6})", b.stable, b.unstable)
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Converge(c) => {
            let cfg = load(&c)?;
            let (sys, y0) = cfg.model.build()?;
            let r = &cfg.run;
            let study = convergence_study(
                &cfg.schemes,
                &*sys,
                &y0,
                &r.h_list,
                r.h_ref,
                r.t_end,
                r.exec,
            )?;
            for e in &study.reports {
                let order = e.order.map(|o| format!("{o:.3}")).unwrap_or_default();
                println!(
                    "{:<7} h={:<10} e={:.3e} {}",
                    e.scheme.to_string(),
                    e.h,
                    e.e_h,
                    order
                );
            }
            write_csv(
                &r.output_dir,
                "convergence.csv",
                &convergence_csv(&study.reports),
            )
        }
        Command::Tables(c) => {
            let cfg = load(&c)?;
            let (sys, y0) = cfg.model.build()?;
            let r = &cfg.run;
            let study = convergence_study(
                &cfg.schemes,
                &*sys,
                &y0,
                &[r.table_h],
                r.h_ref,
                r.t_end,
                r.exec,
            )?;
            let mut csv = String::from("scheme,h,e_h\n");
            for e in &study.reports {
                println!("{:<7} {:.3e}", e.scheme.to_string(), e.e_h);
                let _ = writeln!(csv, "{},{},{}", e.scheme, fmt_sig15(e.h), fmt_sig15(e.e_h));
            }
            write_csv(&r.output_dir, "accuracy.csv", &csv)
        }
        Command::Dt0(c) => {
            let cfg = load(&c)?;
            let (sys, y0) = cfg.model.build()?;
            let r = &cfg.run;
            let results = map_collect(r.exec, &cfg.schemes, |&s| {
                critical_time_step(
                    s,
                    &*sys,
                    &y0,
                    r.t_end,
                    r.h_lo,
                    r.h_hi,
                    r.tol,
                    &RunOptions::default(),
                )
            });
            let mut csv = String::from("scheme,dt0,ok,failed,runs\n");
            for (&s, d) in cfg.schemes.iter().zip(results) {
                let d = d?;
                println!("{:<7} {:.4e}", s.to_string(), d.dt0);
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    s,
                    fmt_sig15(d.dt0),
                    fmt_sig15(d.ok),
                    fmt_sig15(d.failed),
                    d.runs
                );
            }
            write_csv(&r.output_dir, "dt0.csv", &csv)
        }
        Command::StabilityGrid { common, k, theta } => {
            let cfg = load(&common)?;
            let k = check_k(k.unwrap_or(cfg.stability.k))?;
            let theta = theta.unwrap_or(cfg.stability.theta);
            let g = stability_grid(k, theta, &cfg.stability.rect, cfg.run.exec)?;
            write_csv(&cfg.run.output_dir, "stability_grid.csv", &g.to_csv())
        }
        Command::A0Threshold { common, k } => {
            let cfg = load(&common)?;
            let s = &cfg.stability;
            let k = check_k(k.unwrap_or(s.k))?;
            let t = find_theta_thresholds(
                k,
                (s.theta_lo, s.theta_hi),
                s.theta_tol,
                &s.line,
                cfg.run.exec,
            )?;
            println!("k={k} lower {}", bracket(&t.lower));
            let mut csv = String::from("k,bound,theta_unstable,theta_stable\n");
            let _ = writeln!(
                csv,
                "{k},lower,{},{}",
                fmt_sig15(t.lower.unstable),
                fmt_sig15(t.lower.stable)
            );
            match &t.upper {
                Some(u) => {
                    println!("k={k} upper {}", bracket(u));
                    let _ = writeln!(
                        csv,
                        "{k},upper,{},{}",
                        fmt_sig15(u.unstable),
                        fmt_sig15(u.stable)
                    );
                }
                None => println!("k={k} upper none below {}", s.theta_hi),
            }
            write_csv(&cfg.run.output_dir, "a0_threshold.csv", &csv)
        }
        Command::Positivity(c) => {
            let cfg = load(&c)?;
            let line = &cfg.stability.line;
            println!("beta3 = {:.6}", beta3());
            let mut csv = String::from("z,cp_eab2,cp_eab3\n");
            for i in (0..line.len()).rev() {
                let z = line.point(i);
                let _ = writeln!(
                    csv,
                    "{},{},{}",
                    fmt_sig15(z),
                    fmt_sig15(cp_eab2(z, 1.0)),
                    fmt_sig15(cp_eab3(z, 1.0))
                );
            }
            write_csv(&cfg.run.output_dir, "positivity.csv", &csv)
        }
    }
}
