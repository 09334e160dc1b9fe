//! Batch weight updates for one trial.
//!
//! * [`inst_update`]: instantaneous-error rule, PSP-weighted difference of
//!   target and actual spikes.
//! * [`filt_update`]: filtered-error rule, the same difference through the
//!   learning window [`filt_window`].
//! * [`ml_clamped_update`] / [`ml_intrinsic_update`]: escape-rate
//!   likelihood gradients, with the intensity conditioned on the target or on
//!   the neuron's own output.
//! * [`log_likelihood`]: the objective the clamped rule ascends.
//! * [`appendix_discrepancy`]: the clamped/intrinsic gap for one displaced
//!   output spike against its analytic upper bound.
//!
//! Every function here is per-trial and side-effect free; accumulation over an
//! epoch happens in [`crate::tasks`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{filt_window, psp_kernel, psp_peak, reset_kernel, NeuronParams};
use crate::neuron::{
    conditioned_potential_trace, escape_rate, grid_steps, input_potential, intensity_trace, reset_potential,
    InputPattern, SpikeTrain, WeightVector,
};

/// Minimum spacing of consecutive spikes in a multi-spike target, in ms.
pub const MIN_TARGET_ISI: f64 = 10.0;

/// The two deterministic rules compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Inst,
    Filt,
}

impl Rule {
    pub const ALL: [Rule; 2] = [Rule::Inst, Rule::Filt];

    /// Weight update for one trial under this rule.
    pub fn update(
        self,
        pattern: &InputPattern,
        actual: &SpikeTrain,
        target: &SpikeTrain,
        eta: f64,
        p: &NeuronParams,
    ) -> WeightUpdate {
        match self {
            Rule::Inst => inst_update(pattern, actual, target, eta, p),
            Rule::Filt => filt_update(pattern, actual, target, eta, p),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Inst => "inst",
            Rule::Filt => "filt",
        })
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "inst" => Ok(Rule::Inst),
            "filt" => Ok(Rule::Filt),
            other => Err(Error::InvalidConfig(format!("unknown rule `{other}`, expected inst or filt"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleTag {
    Inst,
    Filt,
    MlClamped,
    MlIntrinsic,
}

impl From<Rule> for RuleTag {
    fn from(r: Rule) -> Self {
        match r {
            Rule::Inst => RuleTag::Inst,
            Rule::Filt => RuleTag::Filt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightUpdate {
    pub dw: Vec<f64>,
    pub rule: RuleTag,
    pub eta: f64,
}

impl WeightUpdate {
    pub fn len(&self) -> usize {
        self.dw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dw.is_empty()
    }
}

/// A target output train. Multi-spike targets keep consecutive spikes at
/// least [`MIN_TARGET_ISI`] apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpikeTrain", into = "SpikeTrain")]
pub struct TargetSpec {
    train: SpikeTrain,
}

impl TargetSpec {
    pub fn new(train: SpikeTrain) -> Result<Self> {
        if let Some(w) = train.times().windows(2).find(|w| w[1] - w[0] < MIN_TARGET_ISI) {
            return Err(Error::InvalidSpikeTrain(format!(
                "target spikes {} and {} are closer than {MIN_TARGET_ISI} ms",
                w[0], w[1]
            )));
        }
        Ok(TargetSpec { train })
    }

    pub fn from_times(times: &[f64]) -> Result<Self> {
        Self::new(SpikeTrain::new(times.to_vec())?)
    }

    pub fn train(&self) -> &SpikeTrain {
        &self.train
    }
}

impl TryFrom<SpikeTrain> for TargetSpec {
    type Error = Error;

    fn try_from(t: SpikeTrain) -> Result<Self> {
        TargetSpec::new(t)
    }
}

impl From<TargetSpec> for SpikeTrain {
    fn from(t: TargetSpec) -> Self {
        t.train
    }
}

/// `eta * [sum_target sum_f k(t~ - t_f) - sum_actual sum_f k(t - t_f)]` per input.
fn paired_window_sum<K>(
    pattern: &InputPattern,
    actual: &SpikeTrain,
    target: &SpikeTrain,
    eta: f64,
    kernel: K,
) -> Vec<f64>
where
    K: Fn(f64) -> f64,
{
    pattern
        .trains()
        .iter()
        .map(|tr| {
            // Separate sums so identical trains cancel exactly.
            let drive = |train: &SpikeTrain| -> f64 {
                tr.times()
                    .iter()
                    .map(|&tf| train.times().iter().map(|&t| kernel(t - tf)).sum::<f64>())
                    .sum()
            };
            eta * (drive(target) - drive(actual))
        })
        .collect()
}

/// Instantaneous-error update.
pub fn inst_update(
    pattern: &InputPattern,
    actual: &SpikeTrain,
    target: &SpikeTrain,
    eta: f64,
    p: &NeuronParams,
) -> WeightUpdate {
    WeightUpdate {
        dw: paired_window_sum(pattern, actual, target, eta, |s| psp_kernel(s, p)),
        rule: RuleTag::Inst,
        eta,
    }
}

/// Filtered-error update.
pub fn filt_update(
    pattern: &InputPattern,
    actual: &SpikeTrain,
    target: &SpikeTrain,
    eta: f64,
    p: &NeuronParams,
) -> WeightUpdate {
    WeightUpdate {
        dw: paired_window_sum(pattern, actual, target, eta, |s| filt_window(s, p)),
        rule: RuleTag::Filt,
        eta,
    }
}

/// Trapezoid weights on a uniform grid of `n + 1` points.
fn trapezoid_weight(k: usize, n: usize, dt: f64) -> f64 {
    if k == 0 || k == n {
        0.5 * dt
    } else {
        dt
    }
}

fn check_stochastic(p: &NeuronParams) -> Result<()> {
    escape_rate(p.theta(), p).map(|_| ())
}

/// Escape rate at `t` just before any output spike at `t` itself: the
/// left limit used for the Dirac terms.
fn intensity_left_limit(
    t: f64,
    pattern: &InputPattern,
    w: &WeightVector,
    history: &SpikeTrain,
    p: &NeuronParams,
) -> f64 {
    let u = input_potential(t, pattern, w, p) + reset_potential(t, history.before(t), p);
    p.rho0() * ((u - p.theta()) / p.delta_u()).exp()
}

/// Log-likelihood of emitting `target`: the log intensity summed over target
/// spikes minus the integrated intensity over `[0, T]` (trapezoid on the `dt`
/// grid), with the reset terms conditioned on the target itself.
pub fn log_likelihood(
    pattern: &InputPattern,
    w: &WeightVector,
    target: &SpikeTrain,
    p: &NeuronParams,
    dt: f64,
) -> Result<f64> {
    check_stochastic(p)?;
    let rho = intensity_trace(pattern, w, target, p, dt)?;
    let n = rho.len() - 1;
    let integral: f64 = rho.iter().enumerate().map(|(k, r)| trapezoid_weight(k, n, dt) * r).sum();
    let log_sum: f64 = target
        .times()
        .iter()
        .map(|&t| intensity_left_limit(t, pattern, w, target, p).ln())
        .sum();
    Ok(log_sum - integral)
}

/// PSP sum of each input on the grid, `[input][k]`.
fn psp_grid(pattern: &InputPattern, p: &NeuronParams, n: usize, dt: f64) -> Vec<Vec<f64>> {
    pattern
        .trains()
        .iter()
        .map(|tr| {
            (0..=n)
                .map(|k| {
                    let t = k as f64 * dt;
                    tr.times().iter().map(|&tf| psp_kernel(t - tf, p)).sum()
                })
                .collect()
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn ml_update(
    pattern: &InputPattern,
    w: &WeightVector,
    conditioning: &SpikeTrain,
    target: &SpikeTrain,
    eta: f64,
    p: &NeuronParams,
    dt: f64,
    tag: RuleTag,
) -> Result<WeightUpdate> {
    check_stochastic(p)?;
    let rho = intensity_trace(pattern, w, conditioning, p, dt)?;
    let n = rho.len() - 1;
    let psp = psp_grid(pattern, p, n, dt);
    let scale = eta / p.delta_u();
    let dw = pattern
        .trains()
        .iter()
        .zip(&psp)
        .map(|(tr, eps)| {
            let dirac: f64 = target
                .times()
                .iter()
                .map(|&tt| tr.times().iter().map(|&tf| psp_kernel(tt - tf, p)).sum::<f64>())
                .sum();
            let smooth: f64 = (0..=n).map(|k| trapezoid_weight(k, n, dt) * rho[k] * eps[k]).sum();
            scale * (dirac - smooth)
        })
        .collect();
    Ok(WeightUpdate { dw, rule: tag, eta })
}

/// Likelihood gradient with the intensity clamped to the target history.
pub fn ml_clamped_update(
    pattern: &InputPattern,
    w: &WeightVector,
    target: &SpikeTrain,
    eta: f64,
    p: &NeuronParams,
    dt: f64,
) -> Result<WeightUpdate> {
    ml_update(pattern, w, target, target, eta, p, dt, RuleTag::MlClamped)
}

/// Likelihood-style update with the intensity conditioned on the neuron's own
/// output `actual`.
pub fn ml_intrinsic_update(
    pattern: &InputPattern,
    w: &WeightVector,
    actual: &SpikeTrain,
    target: &SpikeTrain,
    eta: f64,
    p: &NeuronParams,
    dt: f64,
) -> Result<WeightUpdate> {
    ml_update(pattern, w, actual, target, eta, p, dt, RuleTag::MlIntrinsic)
}

/// Per-input gap between the intrinsic and clamped updates (`lhs`) and its
/// upper bound (`rhs`) for one actual spike at `t_actual` and one target
/// spike at `t_ref`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Escape rate at the largest grid value of the reset-free potential.
    pub rho_max: f64,
}

impl Discrepancy {
    pub fn holds(&self) -> bool {
        self.lhs.iter().zip(&self.rhs).all(|(l, r)| l <= r)
    }
}

/// Gap between the intrinsic and clamped likelihood updates when the actual
/// output spike is displaced from its target.
///
/// The bound is `(eta * eps_peak * n_j * rho_max / delta_u) *
/// integral |exp(K(t) / delta_u) - 1| dt` with `K(t) = kappa(t - t_actual) -
/// kappa(t - t_ref)`, `n_j` the spike count of input `j`, and `rho_max` taken
/// from the potential with no output spikes. Both sides use the same
/// trapezoid grid.
pub fn appendix_discrepancy(
    pattern: &InputPattern,
    w: &WeightVector,
    t_actual: f64,
    t_ref: f64,
    eta: f64,
    p: &NeuronParams,
    dt: f64,
) -> Result<Discrepancy> {
    check_stochastic(p)?;
    let actual = SpikeTrain::new(vec![t_actual])?;
    let target = SpikeTrain::new(vec![t_ref])?;
    let n = grid_steps(pattern.duration(), dt)?;
    let rho_a = intensity_trace(pattern, w, &actual, p, dt)?;
    let rho_r = intensity_trace(pattern, w, &target, p, dt)?;
    let free = conditioned_potential_trace(pattern, w, &SpikeTrain::empty(), p, dt)?;
    let u_max = free.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rho_max = escape_rate(u_max, p)?;
    let psp = psp_grid(pattern, p, n, dt);

    let scale = eta / p.delta_u();
    let lhs = psp
        .iter()
        .map(|eps| {
            let s: f64 = (0..=n)
                .map(|k| trapezoid_weight(k, n, dt) * (rho_a[k] - rho_r[k]) * eps[k])
                .sum();
            scale * s.abs()
        })
        .collect();

    let reset_gap: f64 = (0..=n)
        .map(|k| {
            let t = k as f64 * dt;
            let gap = reset_kernel(t - t_actual, p) - reset_kernel(t - t_ref, p);
            trapezoid_weight(k, n, dt) * ((gap / p.delta_u()).exp() - 1.0).abs()
        })
        .sum();
    let (_, eps_peak) = psp_peak(p);
    let rhs = pattern
        .trains()
        .iter()
        .map(|tr| scale * eps_peak * tr.len() as f64 * rho_max * reset_gap)
        .collect();

    Ok(Discrepancy { lhs, rhs, rho_max })
}
