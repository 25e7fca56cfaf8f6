use crate::types::SplitSystem;

/// Applied current protocol, in current-density units per unit capacitance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stimulus {
    None,
    /// `amplitude` on `[start + m period, start + m period + duration)` for
    /// every integer `m >= 0`.
    Pulse {
        amplitude: f64,
        start: f64,
        duration: f64,
        period: f64,
    },
}

impl Stimulus {
    pub fn current(&self, t: f64) -> f64 {
        match *self {
            Stimulus::None => 0.0,
            Stimulus::Pulse {
                amplitude,
                start,
                duration,
                period,
            } => {
                if t < start {
                    return 0.0;
                }
                let phase = (t - start) % period;
                if phase < duration {
                    amplitude
                } else {
                    0.0
                }
            }
        }
    }
}

/// A membrane equation with `p` gating variables `w`, `q` auxiliary
/// variables `c` and the potential `v`:
///
/// ```text
/// w_i' = (w_inf_i(v) - w_i) / tau_i(v)
/// c'   = q(w, c, v)
/// v'   = -I_ion(w, c, v) + I_st(t)
/// ```
///
/// State layout is `(w_1..w_p, c_1..c_q, v)`.
pub trait MembraneModel: Sync {
    fn gate_count(&self) -> usize;

    fn aux_count(&self) -> usize;

    fn dim(&self) -> usize {
        self.gate_count() + self.aux_count() + 1
    }

    /// Fills `tau` and `w_inf` (each of length `p`) at potential `v`.
    fn gate_kinetics(&self, v: f64, tau: &mut [f64], w_inf: &mut [f64]);

    fn aux_rhs(&self, w: &[f64], c: &[f64], v: f64, out: &mut [f64]);

    /// Total ionic current, already divided by the membrane capacitance.
    fn ionic_current(&self, w: &[f64], c: &[f64], v: f64) -> f64;

    fn stimulus(&self, t: f64) -> f64;
}

/// Split form of a [`MembraneModel`]: `a = -1/tau` on gate rows, zero on
/// the auxiliary and potential rows.
#[derive(Debug, Clone)]
pub struct MembraneSystem<M> {
    pub model: M,
}

pub fn membrane_to_split<M: MembraneModel>(model: M) -> MembraneSystem<M> {
    MembraneSystem { model }
}

impl<M: MembraneModel> SplitSystem for MembraneSystem<M> {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval_split(&self, t: f64, y: &[f64], a: &mut [f64], b: &mut [f64]) {
        let p = self.model.gate_count();
        let q = self.model.aux_count();
        let v = y[p + q];
        let (w, rest) = y.split_at(p);
        let c = &rest[..q];

        let (a_gate, a_rest) = a.split_at_mut(p);
        let (b_gate, b_rest) = b.split_at_mut(p);
        // tau goes into a, w_inf into b, then both are turned into rates.
        self.model.gate_kinetics(v, a_gate, b_gate);
        for i in 0..p {
            let inv_tau = 1.0 / a_gate[i];
            a_gate[i] = -inv_tau;
            b_gate[i] *= inv_tau;
        }
        a_rest.fill(0.0);
        self.model.aux_rhs(w, c, v, &mut b_rest[..q]);
        b_rest[q] = -self.model.ionic_current(w, c, v) + self.model.stimulus(t);
    }
}
