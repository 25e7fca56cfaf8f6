//! Beeler-Reuter ventricular myocyte, eight state variables.
//!
//! Units: ms, mV, uA/cm^2, mol/L. Constants live in a bundled key/value file
//! so that they can be pinned and audited separately from the code.

use std::collections::BTreeMap;

use super::membrane::{membrane_to_split, MembraneModel, MembraneSystem, Stimulus};
use crate::error::{Error, Result};
use crate::phi::phi_real;
use crate::types::StateVector;

pub const BR_PARAMS_TEXT: &str = include_str!("../../data/beeler_reuter.params");

const GATES: [&str; 6] = ["m", "h", "j", "d", "f", "x1"];

const SCALARS: [&str; 12] = [
    "c_m",
    "g_k1",
    "g_x1",
    "g_na",
    "g_nac",
    "e_na",
    "g_s",
    "e_s_offset",
    "e_s_slope",
    "ca_release",
    "ca_uptake",
    "ca_rest",
];

const INIT: [&str; 8] = ["m", "h", "j", "d", "f", "x1", "ca", "v"];

const STIM: [&str; 4] = ["amplitude", "start", "duration", "period"];

/// `(c1 e^{c2 (v + c3)} + c4 (v + c5)) / (e^{c6 (v + c3)} + c7)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateLaw(pub [f64; 7]);

impl RateLaw {
    pub fn eval(&self, v: f64) -> f64 {
        let [c1, c2, c3, c4, c5, c6, c7] = self.0;
        let x = v + c3;
        if c1 == 0.0 && c7 == -1.0 && c3 == c5 && c6 != 0.0 {
            // c4 x / (e^{c6 x} - 1) has a removable singularity at x = 0.
            return c4 / (c6 * phi_real(1, c6 * x));
        }
        (c1 * (c2 * x).exp() + c4 * (v + c5)) / ((c6 * x).exp() + c7)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BrParams {
    /// `(alpha, beta)` per gate, in the order m, h, j, d, f, x1.
    pub rates: [(RateLaw, RateLaw); 6],
    pub c_m: f64,
    pub g_k1: f64,
    pub g_x1: f64,
    pub g_na: f64,
    pub g_nac: f64,
    pub e_na: f64,
    pub g_s: f64,
    pub e_s_offset: f64,
    pub e_s_slope: f64,
    pub ca_release: f64,
    pub ca_uptake: f64,
    pub ca_rest: f64,
    /// m, h, j, d, f, x1, Ca, v.
    pub init: [f64; 8],
    pub stimulus: Stimulus,
}

impl BrParams {
    /// Parses `name = value  # comment` lines. Every expected key must be
    /// present exactly once and no other key is accepted.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Params(format!("line {}: expected `name = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Params(format!("line {}: bad number for {key}", lineno + 1)))?;
            if !value.is_finite() {
                return Err(Error::Params(format!("{key} is not finite")));
            }
            if map.insert(key.clone(), value).is_some() {
                return Err(Error::Params(format!("duplicate key {key}")));
            }
        }

        let mut take = |key: String| -> Result<f64> {
            map.remove(&key)
                .ok_or_else(|| Error::Params(format!("missing key {key}")))
        };

        let mut rates = [(RateLaw([0.0; 7]), RateLaw([0.0; 7])); 6];
        for (g, gate) in GATES.iter().enumerate() {
            for (slot, kind) in ["alpha", "beta"].iter().enumerate() {
                let mut c = [0.0; 7];
                for (i, ci) in c.iter_mut().enumerate() {
                    *ci = take(format!("{kind}_{gate}.c{}", i + 1))?;
                }
                if slot == 0 {
                    rates[g].0 = RateLaw(c);
                } else {
                    rates[g].1 = RateLaw(c);
                }
            }
        }
        let mut s = [0.0; 12];
        for (v, name) in s.iter_mut().zip(SCALARS) {
            *v = take(name.to_string())?;
        }
        let mut init = [0.0; 8];
        for (v, name) in init.iter_mut().zip(INIT) {
            *v = take(format!("init.{name}"))?;
        }
        let mut st = [0.0; 4];
        for (v, name) in st.iter_mut().zip(STIM) {
            *v = take(format!("stim.{name}"))?;
        }
        if let Some(extra) = map.keys().next() {
            return Err(Error::Params(format!("unknown key {extra}")));
        }
        if s[0] <= 0.0 || init[6] <= 0.0 || st[3] <= 0.0 || st[2] < 0.0 {
            return Err(Error::Params(
                "c_m, init.ca and stim.period must be positive, stim.duration non-negative".into(),
            ));
        }
        Ok(BrParams {
            rates,
            c_m: s[0],
            g_k1: s[1],
            g_x1: s[2],
            g_na: s[3],
            g_nac: s[4],
            e_na: s[5],
            g_s: s[6],
            e_s_offset: s[7],
            e_s_slope: s[8],
            ca_release: s[9],
            ca_uptake: s[10],
            ca_rest: s[11],
            init,
            stimulus: Stimulus::Pulse {
                amplitude: st[0],
                start: st[1],
                duration: st[2],
                period: st[3],
            },
        })
    }

    pub fn bundled() -> Self {
        Self::parse(BR_PARAMS_TEXT).expect("bundled Beeler-Reuter parameters are valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeelerReuter {
    pub params: BrParams,
    pub stimulus: Stimulus,
}

/// Beeler-Reuter with the bundled constants and default pulse train, in
/// split form.
pub fn beeler_reuter() -> MembraneSystem<BeelerReuter> {
    membrane_to_split(BeelerReuter::new(BrParams::bundled()))
}

impl BeelerReuter {
    pub fn new(params: BrParams) -> Self {
        let stimulus = params.stimulus;
        BeelerReuter { params, stimulus }
    }

    pub fn with_stimulus(mut self, stimulus: Stimulus) -> Self {
        self.stimulus = stimulus;
        self
    }

    pub fn initial_state(&self) -> StateVector {
        StateVector(self.params.init.to_vec())
    }

    /// `(alpha, beta)` of gate `g` at `v`.
    pub fn gate_rates(&self, g: usize, v: f64) -> (f64, f64) {
        let (a, b) = &self.params.rates[g];
        (a.eval(v), b.eval(v))
    }

    pub fn reversal_s(&self, ca: f64) -> f64 {
        self.params.e_s_offset - self.params.e_s_slope * ca.ln()
    }

    /// Slow inward current `I_s`.
    pub fn i_s(&self, w: &[f64], ca: f64, v: f64) -> f64 {
        self.params.g_s * w[3] * w[4] * (v - self.reversal_s(ca))
    }
}

impl MembraneModel for BeelerReuter {
    fn gate_count(&self) -> usize {
        6
    }

    fn aux_count(&self) -> usize {
        1
    }

    fn gate_kinetics(&self, v: f64, tau: &mut [f64], w_inf: &mut [f64]) {
        for g in 0..6 {
            let (a, b) = self.gate_rates(g, v);
            let s = a + b;
            tau[g] = 1.0 / s;
            w_inf[g] = a / s;
        }
    }

    fn aux_rhs(&self, w: &[f64], c: &[f64], v: f64, out: &mut [f64]) {
        let p = &self.params;
        out[0] = -p.ca_release * self.i_s(w, c[0], v) + p.ca_uptake * (p.ca_rest - c[0]);
    }

    fn ionic_current(&self, w: &[f64], c: &[f64], v: f64) -> f64 {
        let p = &self.params;
        let (m, h, j, x1) = (w[0], w[1], w[2], w[5]);
        let x23 = v + 23.0;
        let i_k1 = p.g_k1
            * (4.0 * ((0.04 * (v + 85.0)).exp() - 1.0)
                / ((0.08 * (v + 53.0)).exp() + (0.04 * (v + 53.0)).exp())
                + 0.2 / (0.04 * phi_real(1, -0.04 * x23)));
        let i_x1 = x1 * p.g_x1 * ((0.04 * (v + 77.0)).exp() - 1.0) / (0.04 * (v + 35.0)).exp();
        let i_na = (p.g_na * m * m * m * h * j + p.g_nac) * (v - p.e_na);
        (i_k1 + i_x1 + i_na + self.i_s(w, c[0], v)) / p.c_m
    }

    fn stimulus(&self, t: f64) -> f64 {
        self.stimulus.current(t) / self.params.c_m
    }
}
