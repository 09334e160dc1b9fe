//! Spike-train filtering, the van Rossum distance and classification scores.
//!
//! Filtering here uses a unit-amplitude exponential kernel, so a single
//! unmatched spike contributes 0.5 to the distance and two single spikes
//! `d` ms apart are at distance `1 - exp(-d / tau_q)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::neuron::SpikeTrain;

/// Value at time `t` of the train filtered with `exp(-s / tau_q)`.
pub fn filtered_train_value(train: &SpikeTrain, tau_q: f64, t: f64) -> f64 {
    train
        .times()
        .iter()
        .take_while(|&&tf| tf <= t)
        .map(|&tf| (-(t - tf) / tau_q).exp())
        .sum()
}

/// Sum over all spike pairs of `exp(-|a_i - b_j| / tau_q)`.
fn cross_term(a: &[f64], b: &[f64], tau_q: f64) -> f64 {
    a.iter()
        .map(|&ta| b.iter().map(|&tb| (-(ta - tb).abs() / tau_q).exp()).sum::<f64>())
        .sum()
}

/// Van Rossum distance `(1 / tau_q) * integral of (a~ - b~)^2`, evaluated in
/// closed form from pairwise spike lags.
pub fn vrd(a: &SpikeTrain, b: &SpikeTrain, tau_q: f64) -> f64 {
    let (a, b) = (a.times(), b.times());
    let d = 0.5 * (cross_term(a, a, tau_q) + cross_term(b, b, tau_q)) - cross_term(a, b, tau_q);
    // Cancellation can leave a tiny negative residue for identical trains.
    d.max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationOutcome {
    pub correct: bool,
    /// Absolute timing error of each actual spike against its target, paired
    /// in sorted order. Empty when the spike counts differ.
    pub per_spike_errors: Vec<f64>,
}

/// A response is correct when it has exactly as many spikes as the target and
/// each one is within `precision` ms of its counterpart.
pub fn classify(actual: &SpikeTrain, target: &SpikeTrain, precision: f64) -> ClassificationOutcome {
    if actual.len() != target.len() {
        return ClassificationOutcome { correct: false, per_spike_errors: Vec::new() };
    }
    let errors: Vec<f64> = actual
        .times()
        .iter()
        .zip(target.times())
        .map(|(a, t)| (a - t).abs())
        .collect();
    let correct = errors.iter().all(|&e| e <= precision);
    ClassificationOutcome { correct, per_spike_errors: errors }
}

/// Percentage of correct outcomes.
pub fn performance(outcomes: &[ClassificationOutcome]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::EmptyOutcomes);
    }
    let hits = outcomes.iter().filter(|o| o.correct).count();
    Ok(100.0 * hits as f64 / outcomes.len() as f64)
}
