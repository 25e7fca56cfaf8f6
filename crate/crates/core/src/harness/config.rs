//! INI experiment configuration.
//!
//! ```ini
//! [model]
//! kind = beeler-reuter        ; beeler-reuter | dahlquist | gate
//! params = br.params          ; optional, bundled constants otherwise
//! stimulus = none             ; none | pulse (pulse uses the params file)
//! v0 = -58                    ; optional override of the initial potential
//!
//! [scheme]
//! schemes = EAB2, EAB3, EAB4
//! k = 2
//! theta = 0.9
//!
//! [grid]
//! z_min = -30
//! dx = 0.01
//!
//! [run]
//! t_end = 500
//! h = 1e-3, 5e-4, 2.5e-4
//! output_dir = out
//! ```
//!
//! Every key is optional; see [`ExperimentConfig::parse`] for the full list
//! and defaults. Unknown sections and keys are rejected.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use ini::Ini;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::models::{
    make_dahlquist, membrane_to_split, BeelerReuter, BrParams, ScalarGate, Stimulus,
};
use crate::stability::{LineGrid, RectGrid};
use crate::types::{SchemeSpec, SplitSystem, StateVector};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    BeelerReuter {
        params: Option<PathBuf>,
        /// `None` keeps the pulse train of the parameter file.
        stimulus: Option<Stimulus>,
        v0: Option<f64>,
    },
    Dahlquist {
        lambda: f64,
        theta: f64,
        y0: f64,
    },
    Gate {
        tau: f64,
        schedule: Vec<(f64, f64)>,
        w0: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
}

impl ModelConfig {
    /// Builds the system and its initial state.
    pub fn build(&self) -> Result<(Box<dyn SplitSystem>, StateVector)> {
        match &self.kind {
            ModelKind::BeelerReuter {
                params,
                stimulus,
                v0,
            } => {
                let p = match params {
                    Some(path) => {
                        BrParams::parse(&std::fs::read_to_string(path).map_err(|e| {
                            Error::Config(format!("cannot read {}: {e}", path.display()))
                        })?)?
                    }
                    None => BrParams::bundled(),
                };
                let mut model = BeelerReuter::new(p);
                if let Some(s) = stimulus {
                    model = model.with_stimulus(*s);
                }
                let mut y0 = model.initial_state();
                if let Some(v) = v0 {
                    let last = y0.len() - 1;
                    y0[last] = *v;
                }
                Ok((Box::new(membrane_to_split(model)), y0))
            }
            ModelKind::Dahlquist { lambda, theta, y0 } => Ok((
                Box::new(make_dahlquist(*lambda, *theta).map_err(to_config)?),
                StateVector(vec![*y0]),
            )),
            ModelKind::Gate { tau, schedule, w0 } => Ok((
                Box::new(ScalarGate::new(*tau, schedule.clone()).map_err(to_config)?),
                StateVector(vec![*w0]),
            )),
        }
    }
}

/// Settings of the Dahlquist stability subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityConfig {
    pub k: usize,
    pub theta: f64,
    pub line: LineGrid,
    pub rect: RectGrid,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub theta_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub h_list: Vec<f64>,
    pub h_ref: Option<f64>,
    /// Step of the accuracy table.
    pub table_h: f64,
    pub h_lo: f64,
    pub h_hi: f64,
    pub tol: f64,
    pub output_dir: PathBuf,
    pub exec: Exec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub schemes: Vec<SchemeSpec>,
    pub stability: StabilityConfig,
    pub run: RunConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::parse("").expect("empty config is valid")
    }
}

fn to_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

const KEYS: &[(&str, &[&str])] = &[
    (
        "model",
        &[
            "kind", "params", "stimulus", "v0", "lambda", "theta", "y0", "tau", "schedule", "w0",
        ],
    ),
    ("scheme", &["schemes", "k", "theta"]),
    (
        "grid",
        &[
            "z_min",
            "dx",
            "include_limit",
            "re_min",
            "re_max",
            "im_min",
            "im_max",
            "spacing",
            "theta_lo",
            "theta_hi",
            "theta_tol",
        ],
    ),
    (
        "run",
        &[
            "t_end",
            "h",
            "h_ref",
            "table_h",
            "h_lo",
            "h_hi",
            "tol",
            "output_dir",
            "exec",
        ],
    ),
];

struct Section<'a> {
    name: &'static str,
    map: HashMap<&'a str, &'a str>,
}

impl<'a> Section<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.map.get(key).copied()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some(s) => parse_f64(s).map_err(|_| self.bad(key, s)),
        }
    }

    fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|s| parse_f64(s).map_err(|_| self.bad(key, s)))
            .transpose()
    }

    fn bad(&self, key: &str, value: &str) -> Error {
        Error::Config(format!("[{}] {key} = {value:?} is not valid", self.name))
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, std::num::ParseFloatError> {
    s.trim().parse::<f64>()
}

fn parse_list<T, E>(s: &str, f: impl Fn(&str) -> std::result::Result<T, E>) -> Option<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| f(p).ok())
        .collect()
}

impl ExperimentConfig {
    /// Reads a config file. A relative `params` path is resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if let ModelKind::BeelerReuter {
            params: Some(p), ..
        } = &mut cfg.model.kind
        {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    /// Parses config text.
    ///
    /// | section | key | default |
    /// |---|---|---|
    /// | model | kind | `beeler-reuter` |
    /// | model | params, stimulus, v0 | bundled file, its pulse train, its rest state |
    /// | model | lambda, theta, y0 | -1, 1, 1 (`dahlquist`) |
    /// | model | tau, schedule (`t:w, t:w`), w0 | 2, `0:1`, 0 (`gate`) |
    /// | scheme | schemes | `EAB2, EAB3, EAB4, I-EAB2, I-EAB3, I-EAB4` |
    /// | scheme | k, theta | 2, 0.9 |
    /// | grid | z_min, dx, include_limit | -30, 0.01, false |
    /// | grid | re_min, re_max, im_min, im_max, spacing | -40, 2, 0, 60, 0.05 |
    /// | grid | theta_lo, theta_hi, theta_tol | 0.5, 2.5, 1e-4 |
    /// | run | t_end | 500 |
    /// | run | h | `1e-3, 5e-4, 2.5e-4, 1.25e-4` |
    /// | run | h_ref | smallest h / 16 |
    /// | run | table_h | 1e-3 |
    /// | run | h_lo, h_hi, tol | 1e-3, 3, 1e-4 |
    /// | run | output_dir | `.` |
    /// | run | exec | `parallel` |
    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut sections: HashMap<&str, HashMap<&str, &str>> = HashMap::new();
        for (name, props) in ini.iter() {
            let Some(name) = name else {
                if props.iter().next().is_some() {
                    return Err(Error::Config("keys outside of any section".into()));
                }
                continue;
            };
            let Some((_, known)) = KEYS.iter().find(|(s, _)| *s == name) else {
                return Err(Error::Config(format!("unknown section [{name}]")));
            };
            let map = sections.entry(name).or_default();
            for (k, v) in props.iter() {
                if !known.contains(&k) {
                    return Err(Error::Config(format!("unknown key {k:?} in [{name}]")));
                }
                map.insert(k, v);
            }
        }
        let mut section = |name: &'static str| Section {
            name,
            map: sections.remove(name).unwrap_or_default(),
        };
        let (model, scheme, grid, run) = (
            section("model"),
            section("scheme"),
            section("grid"),
            section("run"),
        );

        let kind = match model.raw("kind").unwrap_or("beeler-reuter") {
            "beeler-reuter" => {
                let stimulus = match model.raw("stimulus") {
                    None | Some("pulse") => None,
                    Some("none") => Some(Stimulus::None),
                    Some(s) => return Err(model.bad("stimulus", s)),
                };
                ModelKind::BeelerReuter {
                    params: model.raw("params").map(PathBuf::from),
                    stimulus,
                    v0: model.opt_f64("v0")?,
                }
            }
            "dahlquist" => ModelKind::Dahlquist {
                lambda: model.f64_or("lambda", -1.0)?,
                theta: model.f64_or("theta", 1.0)?,
                y0: model.f64_or("y0", 1.0)?,
            },
            "gate" => {
                let schedule = match model.raw("schedule") {
                    None => vec![(0.0, 1.0)],
                    Some(s) => parse_list(s, |p| {
                        let (t, w) = p.split_once(':').ok_or(())?;
                        Ok::<_, ()>((parse_f64(t).map_err(|_| ())?, parse_f64(w).map_err(|_| ())?))
                    })
                    .ok_or_else(|| model.bad("schedule", s))?,
                };
                ModelKind::Gate {
                    tau: model.f64_or("tau", 2.0)?,
                    schedule,
                    w0: model.f64_or("w0", 0.0)?,
                }
            }
            other => return Err(model.bad("kind", other)),
        };

        let schemes = match scheme.raw("schemes") {
            None => ["EAB2", "EAB3", "EAB4", "I-EAB2", "I-EAB3", "I-EAB4"]
                .iter()
                .map(|s| s.parse().expect("default scheme names parse"))
                .collect(),
            Some(s) => parse_list(s, str::parse::<SchemeSpec>)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| scheme.bad("schemes", s))?,
        };
        let k = match scheme.raw("k") {
            None => 2,
            Some(s) => s
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|k| (1..=crate::MAX_K).contains(k))
                .ok_or_else(|| scheme.bad("k", s))?,
        };
        let include_limit = match grid.raw("include_limit") {
            None | Some("false") => false,
            Some("true") => true,
            Some(s) => return Err(grid.bad("include_limit", s)),
        };
        let line = LineGrid {
            z_min: grid.f64_or("z_min", LineGrid::default().z_min)?,
            dx: grid.f64_or("dx", LineGrid::default().dx)?,
            include_limit,
        };
        let rd = RectGrid::default();
        let rect = RectGrid {
            x0: grid.f64_or("re_min", rd.x0)?,
            x1: grid.f64_or("re_max", rd.x1)?,
            y0: grid.f64_or("im_min", rd.y0)?,
            y1: grid.f64_or("im_max", rd.y1)?,
            dx: grid.f64_or("spacing", rd.dx)?,
        };
        line.validate().map_err(to_config)?;
        rect.validate().map_err(to_config)?;
        let stability = StabilityConfig {
            k,
            theta: scheme.f64_or("theta", 0.9)?,
            line,
            rect,
            theta_lo: grid.f64_or("theta_lo", 0.5)?,
            theta_hi: grid.f64_or("theta_hi", 2.5)?,
            theta_tol: grid.f64_or("theta_tol", 1e-4)?,
        };

        let h_list = match run.raw("h") {
            None => vec![1e-3, 5e-4, 2.5e-4, 1.25e-4],
            Some(s) => parse_list(s, parse_f64)
                .filter(|v| !v.is_empty() && v.iter().all(|h| *h > 0.0))
                .ok_or_else(|| run.bad("h", s))?,
        };
        let exec = match run.raw("exec") {
            None | Some("parallel") => Exec::Parallel,
            Some("sequential") => Exec::Sequential,
            Some(s) => return Err(run.bad("exec", s)),
        };
        let run_cfg = RunConfig {
            t_end: run.f64_or("t_end", 500.0)?,
            h_list,
            h_ref: run.opt_f64("h_ref")?,
            table_h: run.f64_or("table_h", 1e-3)?,
            h_lo: run.f64_or("h_lo", 1e-3)?,
            h_hi: run.f64_or("h_hi", 3.0)?,
            tol: run.f64_or("tol", 1e-4)?,
            output_dir: PathBuf::from(run.raw("output_dir").unwrap_or(".")),
            exec,
        };
        if !(run_cfg.t_end > 0.0) {
            return Err(run.bad("t_end", &run_cfg.t_end.to_string()));
        }

        Ok(ExperimentConfig {
            model: ModelConfig { kind },
            schemes,
            stability,
            run: run_cfg,
        })
    }
}
