//! Model constants and the closed-form temporal kernels of the simplified
//! spike response model.
//!
//! Four kernels are exposed:
//!
//! * [`current_kernel`]: the exponentially decaying postsynaptic current (nA),
//! * [`psp_kernel`]: the postsynaptic potential it evokes on the membrane (mV),
//! * [`reset_kernel`]: the refractory reset following an output spike (mV),
//! * [`filt_window`]: the learning window of the filtered-error rule (mV).
//!
//! All lags are in ms. Every function is a pure closed-form evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance of the `eps0 = (q / C) * tau_m / (tau_m - tau_s)` identity.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// Validated model constants for one postsynaptic neuron.
///
/// Units: potentials in mV, times in ms, capacitance in nF, charge in pC,
/// escape rate in 1/ms. The reset coefficient `kappa0 = -(theta - u_reset)` is
/// always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronParams {
    eps0: f64,
    tau_m: f64,
    tau_s: f64,
    theta: f64,
    u_reset: f64,
    tau_q: f64,
    capacitance: Option<f64>,
    charge: Option<f64>,
    rho0: f64,
    delta_u: f64,
}

/// Builder for [`NeuronParams`]. Unset fields take the default model values.
///
/// The PSP coefficient may be given directly (`eps0`), derived from charge and
/// capacitance, or both; in the last case the two must agree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NeuronParamsBuilder {
    pub eps0: Option<f64>,
    pub tau_m: Option<f64>,
    pub tau_s: Option<f64>,
    pub theta: Option<f64>,
    pub u_reset: Option<f64>,
    pub tau_q: Option<f64>,
    pub capacitance: Option<f64>,
    pub charge: Option<f64>,
    pub rho0: Option<f64>,
    pub delta_u: Option<f64>,
}

pub const DEFAULT_EPS0: f64 = 4.0;
pub const DEFAULT_TAU_M: f64 = 10.0;
pub const DEFAULT_TAU_S: f64 = 5.0;
pub const DEFAULT_THETA: f64 = 15.0;
pub const DEFAULT_U_RESET: f64 = 0.0;
pub const DEFAULT_TAU_Q: f64 = 10.0;
pub const DEFAULT_CAPACITANCE: f64 = 2.5;
/// Chosen so the current kernel peaks at 1 nA with `tau_s = 5 ms`, which is
/// also what makes `eps0 = 4 mV` consistent with `C = 2.5 nF`.
pub const DEFAULT_CHARGE: f64 = 5.0;
pub const DEFAULT_RHO0: f64 = 0.01;
pub const DEFAULT_DELTA_U: f64 = 1.0;

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParamsBuilder::default()
            .build()
            .expect("default parameters are consistent")
    }
}

impl NeuronParamsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn eps0(mut self, v: f64) -> Self {
        self.eps0 = Some(v);
        self
    }
    pub fn tau_m(mut self, v: f64) -> Self {
        self.tau_m = Some(v);
        self
    }
    pub fn tau_s(mut self, v: f64) -> Self {
        self.tau_s = Some(v);
        self
    }
    pub fn theta(mut self, v: f64) -> Self {
        self.theta = Some(v);
        self
    }
    pub fn u_reset(mut self, v: f64) -> Self {
        self.u_reset = Some(v);
        self
    }
    pub fn tau_q(mut self, v: f64) -> Self {
        self.tau_q = Some(v);
        self
    }
    pub fn capacitance(mut self, v: f64) -> Self {
        self.capacitance = Some(v);
        self
    }
    pub fn charge(mut self, v: f64) -> Self {
        self.charge = Some(v);
        self
    }
    pub fn rho0(mut self, v: f64) -> Self {
        self.rho0 = Some(v);
        self
    }
    pub fn delta_u(mut self, v: f64) -> Self {
        self.delta_u = Some(v);
        self
    }

    pub fn build(self) -> Result<NeuronParams> {
        let tau_m = self.tau_m.unwrap_or(DEFAULT_TAU_M);
        let tau_s = self.tau_s.unwrap_or(DEFAULT_TAU_S);
        let theta = self.theta.unwrap_or(DEFAULT_THETA);
        let u_reset = self.u_reset.unwrap_or(DEFAULT_U_RESET);
        let tau_q = self.tau_q.unwrap_or(DEFAULT_TAU_Q);
        let rho0 = self.rho0.unwrap_or(DEFAULT_RHO0);
        let delta_u = self.delta_u.unwrap_or(DEFAULT_DELTA_U);

        let bad = |msg: String| Err(Error::InvalidParams(msg));
        let all = [tau_m, tau_s, theta, u_reset, tau_q, rho0, delta_u];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all parameters must be finite".into());
        }
        if !(tau_s > 0.0 && tau_m > tau_s) {
            return bad(format!("require tau_m > tau_s > 0, got tau_m={tau_m}, tau_s={tau_s}"));
        }
        if tau_q < 0.0 {
            return bad(format!("tau_q must be >= 0, got {tau_q}"));
        }
        if theta <= u_reset {
            return bad(format!("theta ({theta}) must exceed u_reset ({u_reset})"));
        }
        if rho0 <= 0.0 {
            return bad(format!("rho0 must be > 0, got {rho0}"));
        }
        if delta_u < 0.0 {
            return bad(format!("delta_u must be >= 0, got {delta_u}"));
        }

        let shape = tau_m / (tau_m - tau_s);
        let (eps0, capacitance, charge) = match (self.eps0, self.capacitance, self.charge) {
            // Nothing given: the default model.
            (None, None, None) => (DEFAULT_EPS0, Some(DEFAULT_CAPACITANCE), Some(DEFAULT_CHARGE)),
            (None, Some(c), Some(q)) => {
                check_positive("capacitance", c)?;
                (q / c * shape, Some(c), Some(q))
            }
            (None, _, _) => {
                return bad("eps0 requires either eps0 or both charge and capacitance".into())
            }
            (Some(e), None, None) => (e, None, None),
            (Some(e), Some(c), None) => {
                check_positive("capacitance", c)?;
                (e, Some(c), Some(e * c / shape))
            }
            (Some(e), None, Some(q)) => {
                if q == 0.0 {
                    return bad("charge must be non-zero when deriving capacitance".into());
                }
                (e, Some(q * shape / e), Some(q))
            }
            (Some(e), Some(c), Some(q)) => {
                check_positive("capacitance", c)?;
                let derived = q / c * shape;
                if ((derived - e) / e).abs() > CONSISTENCY_TOLERANCE {
                    return bad(format!(
                        "eps0={e} disagrees with (q/C)*tau_m/(tau_m-tau_s)={derived}"
                    ));
                }
                (e, Some(c), Some(q))
            }
        };
        if !(eps0.is_finite() && eps0 > 0.0) {
            return bad(format!("eps0 must be finite and > 0, got {eps0}"));
        }

        Ok(NeuronParams {
            eps0,
            tau_m,
            tau_s,
            theta,
            u_reset,
            tau_q,
            capacitance,
            charge,
            rho0,
            delta_u,
        })
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")))
    }
}

impl NeuronParams {
    pub fn builder() -> NeuronParamsBuilder {
        NeuronParamsBuilder::new()
    }

    /// Returns a builder pre-filled with these values, for tweaking one field.
    pub fn to_builder(&self) -> NeuronParamsBuilder {
        NeuronParamsBuilder {
            eps0: Some(self.eps0),
            tau_m: Some(self.tau_m),
            tau_s: Some(self.tau_s),
            theta: Some(self.theta),
            u_reset: Some(self.u_reset),
            tau_q: Some(self.tau_q),
            capacitance: self.capacitance,
            charge: self.charge,
            rho0: Some(self.rho0),
            delta_u: Some(self.delta_u),
        }
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }
    pub fn tau_m(&self) -> f64 {
        self.tau_m
    }
    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn u_reset(&self) -> f64 {
        self.u_reset
    }
    pub fn tau_q(&self) -> f64 {
        self.tau_q
    }
    pub fn capacitance(&self) -> Option<f64> {
        self.capacitance
    }
    pub fn rho0(&self) -> f64 {
        self.rho0
    }
    pub fn delta_u(&self) -> f64 {
        self.delta_u
    }

    /// Charge per presynaptic spike. When only `eps0` was supplied this is
    /// unknown, and the default capacitance is assumed to derive it.
    pub fn charge(&self) -> f64 {
        match self.charge {
            Some(q) => q,
            None => {
                self.eps0 * self.capacitance.unwrap_or(DEFAULT_CAPACITANCE) * (self.tau_m - self.tau_s)
                    / self.tau_m
            }
        }
    }

    /// Reset coefficient `-(theta - u_reset)`.
    pub fn kappa0(&self) -> f64 {
        -(self.theta - self.u_reset)
    }
}

/// Postsynaptic current evoked `s` ms after a presynaptic spike, in nA.
pub fn current_kernel(s: f64, p: &NeuronParams) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    p.charge() / p.tau_s * (-s / p.tau_s).exp()
}

/// Postsynaptic potential `s` ms after a presynaptic spike, in mV.
#[inline]
pub fn psp_kernel(s: f64, p: &NeuronParams) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    p.eps0 * ((-s / p.tau_m).exp() - (-s / p.tau_s).exp())
}

/// Reset contribution `s` ms after an output spike, in mV.
#[inline]
pub fn reset_kernel(s: f64, p: &NeuronParams) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    p.kappa0() * (-s / p.tau_m).exp()
}

/// Learning window of the filtered-error rule for a postsynaptic minus
/// presynaptic lag `s`. Positive lags follow a rescaled PSP; non-positive lags
/// decay with the filter constant `tau_q`.
#[inline]
pub fn filt_window(s: f64, p: &NeuronParams) -> f64 {
    let (cm, cs) = filt_coefficients(p);
    if s > 0.0 {
        p.eps0 * (cm * (-s / p.tau_m).exp() - cs * (-s / p.tau_s).exp())
    } else if p.tau_q == 0.0 {
        // cm == cs == 1: the acausal lobe vanishes.
        0.0
    } else {
        p.eps0 * (cm - cs) * (s / p.tau_q).exp()
    }
}

/// Membrane and synaptic coefficients `(tau_m / (tau_m + tau_q), tau_s / (tau_s + tau_q))`.
pub fn filt_coefficients(p: &NeuronParams) -> (f64, f64) {
    (p.tau_m / (p.tau_m + p.tau_q), p.tau_s / (p.tau_s + p.tau_q))
}

/// Lag at which the PSP peaks and the peak value.
pub fn psp_peak(p: &NeuronParams) -> (f64, f64) {
    let s_peak = p.tau_m * p.tau_s / (p.tau_m - p.tau_s) * (p.tau_m / p.tau_s).ln();
    (s_peak, psp_kernel(s_peak, p))
}

/// Smallest target lag that the filtered-error rule learns stably for filter
/// constant `tau_q`. Coincides with the PSP peak lag at `tau_q = 0`.
pub fn filt_min_target_time(tau_q: f64, p: &NeuronParams) -> f64 {
    p.tau_m * p.tau_s / (p.tau_m - p.tau_s) * ((p.tau_m + tau_q) / (p.tau_s + tau_q)).ln()
}
