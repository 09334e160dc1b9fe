//! Spike trains, input patterns and the deterministic threshold neuron.
//!
//! The membrane potential is the weighted sum of PSP kernels from every input
//! spike plus a reset kernel per emitted output spike. [`simulate`] walks a
//! fixed time grid and fires at the first grid point where the potential
//! reaches threshold. [`intensity_trace`] instead conditions on a given output
//! history and maps the potential through the exponential escape rate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{psp_kernel, reset_kernel, NeuronParams};

/// Strictly increasing spike times in ms.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpikeTrain(Vec<f64>);

impl SpikeTrain {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if let Some(t) = times.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidSpikeTrain(format!(
                "spike time {t} is not a finite non-negative value"
            )));
        }
        if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpikeTrain(format!(
                "times must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
        Ok(SpikeTrain(times))
    }

    /// Sorts the times first. Duplicates are still rejected.
    pub fn from_unsorted(mut times: Vec<f64>) -> Result<Self> {
        times.sort_by(f64::total_cmp);
        Self::new(times)
    }

    pub fn empty() -> Self {
        SpikeTrain(Vec::new())
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.0.last().copied()
    }

    /// Whether every spike lies in `[0, duration]`.
    pub fn within(&self, duration: f64) -> bool {
        self.0.iter().all(|&t| t <= duration)
    }

    /// Spikes strictly before `t`.
    pub fn before(&self, t: f64) -> &[f64] {
        let n = self.0.partition_point(|&s| s < t);
        &self.0[..n]
    }
}

impl TryFrom<Vec<f64>> for SpikeTrain {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        SpikeTrain::new(v)
    }
}

impl From<SpikeTrain> for Vec<f64> {
    fn from(s: SpikeTrain) -> Self {
        s.0
    }
}

/// One spike train per presynaptic neuron over a trial of fixed duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputPattern {
    trains: Vec<SpikeTrain>,
    duration: f64,
    #[serde(skip)]
    events: Vec<(f64, usize)>,
}

impl InputPattern {
    pub fn new(trains: Vec<SpikeTrain>, duration: f64) -> Result<Self> {
        if trains.is_empty() {
            return Err(Error::InvalidConfig("a pattern needs at least one input".into()));
        }
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidConfig(format!("pattern duration must be > 0, got {duration}")));
        }
        if let Some(j) = trains.iter().position(|tr| !tr.within(duration)) {
            return Err(Error::InvalidSpikeTrain(format!(
                "input {j} has a spike beyond the pattern duration {duration}"
            )));
        }
        let mut events: Vec<(f64, usize)> = trains
            .iter()
            .enumerate()
            .flat_map(|(j, tr)| tr.times().iter().map(move |&t| (t, j)))
            .collect();
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(InputPattern { trains, duration, events })
    }

    /// Builds a pattern with exactly one spike per input.
    pub fn single_spikes(times: &[f64], duration: f64) -> Result<Self> {
        let trains = times
            .iter()
            .map(|&t| SpikeTrain::new(vec![t]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(trains, duration)
    }

    pub fn n_inputs(&self) -> usize {
        self.trains.len()
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn trains(&self) -> &[SpikeTrain] {
        &self.trains
    }

    pub fn train(&self, j: usize) -> &SpikeTrain {
        &self.trains[j]
    }

    /// All input spikes as `(time, input index)`, sorted by time.
    pub fn events(&self) -> &[(f64, usize)] {
        &self.events
    }
}

/// Synaptic efficacies, one per input. Negative values are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(pub Vec<f64>);

impl WeightVector {
    pub fn zeros(n: usize) -> Self {
        WeightVector(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn check_matches(&self, pattern: &InputPattern) -> Result<()> {
        if self.0.len() != pattern.n_inputs() {
            return Err(Error::LengthMismatch { weights: self.0.len(), inputs: pattern.n_inputs() });
        }
        Ok(())
    }
}

impl From<Vec<f64>> for WeightVector {
    fn from(v: Vec<f64>) -> Self {
        WeightVector(v)
    }
}

/// Membrane potential sampled on a uniform grid starting at 0.
///
/// At a grid point where the neuron fires, the stored value is the potential
/// that reached threshold, i.e. before that spike's own reset is added.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembraneTrace {
    pub dt: f64,
    pub u: Vec<f64>,
}

impl MembraneTrace {
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub output: SpikeTrain,
    pub trace: Option<MembraneTrace>,
}

/// Number of grid steps covering `[0, duration]`, checking that `dt` divides it.
pub fn grid_steps(duration: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig(format!("time step must be > 0, got {dt}")));
    }
    let n = (duration / dt).round();
    if (n * dt - duration).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "time step {dt} does not divide the duration {duration}"
        )));
    }
    Ok(n as usize)
}

/// Membrane potential at `t`. Output spikes at or before `t` contribute their
/// reset, so a spike exactly at `t` adds `kappa(0)`.
pub fn membrane_potential(
    t: f64,
    pattern: &InputPattern,
    w: &WeightVector,
    output_history: &SpikeTrain,
    p: &NeuronParams,
) -> Result<f64> {
    w.check_matches(pattern)?;
    Ok(input_potential(t, pattern, w, p) + reset_potential(t, output_history.times(), p))
}

pub(crate) fn input_potential(t: f64, pattern: &InputPattern, w: &WeightVector, p: &NeuronParams) -> f64 {
    pattern
        .trains()
        .iter()
        .zip(w.as_slice())
        .map(|(tr, &wj)| {
            if wj == 0.0 {
                0.0
            } else {
                wj * tr.times().iter().map(|&tf| psp_kernel(t - tf, p)).sum::<f64>()
            }
        })
        .sum()
}

pub(crate) fn reset_potential(t: f64, history: &[f64], p: &NeuronParams) -> f64 {
    history.iter().map(|&tf| reset_kernel(t - tf, p)).sum()
}

/// Grid integrator for the potential: two exponential input traces and one
/// reset trace, advanced by exact decay factors.
struct PotentialStepper<'a> {
    p: &'a NeuronParams,
    events: &'a [(f64, usize)],
    w: &'a [f64],
    next_event: usize,
    trace_m: f64,
    trace_s: f64,
    trace_r: f64,
    decay_m: f64,
    decay_s: f64,
}

impl<'a> PotentialStepper<'a> {
    fn new(p: &'a NeuronParams, pattern: &'a InputPattern, w: &'a WeightVector, dt: f64) -> Self {
        PotentialStepper {
            p,
            events: pattern.events(),
            w: w.as_slice(),
            next_event: 0,
            trace_m: 0.0,
            trace_s: 0.0,
            trace_r: 0.0,
            decay_m: (-dt / p.tau_m()).exp(),
            decay_s: (-dt / p.tau_s()).exp(),
        }
    }

    /// Advance to grid time `t` (one step after the previous call, or the
    /// first call at t = 0) and return the potential there.
    fn advance(&mut self, t: f64, first: bool) -> f64 {
        if !first {
            self.trace_m *= self.decay_m;
            self.trace_s *= self.decay_s;
            self.trace_r *= self.decay_m;
        }
        while let Some(&(te, j)) = self.events.get(self.next_event) {
            if te > t {
                break;
            }
            let wj = self.w[j];
            let lag = t - te;
            self.trace_m += wj * (-lag / self.p.tau_m()).exp();
            self.trace_s += wj * (-lag / self.p.tau_s()).exp();
            self.next_event += 1;
        }
        self.p.eps0() * (self.trace_m - self.trace_s) + self.p.kappa0() * self.trace_r
    }

    fn add_reset(&mut self, lag: f64) {
        self.trace_r += (-lag / self.p.tau_m()).exp();
    }
}

fn run(pattern: &InputPattern, w: &WeightVector, p: &NeuronParams, dt: f64, keep_trace: bool) -> Result<Simulation> {
    w.check_matches(pattern)?;
    let n = grid_steps(pattern.duration(), dt)?;
    let mut stepper = PotentialStepper::new(p, pattern, w, dt);
    let mut spikes = Vec::new();
    let mut u_trace = if keep_trace { Vec::with_capacity(n + 1) } else { Vec::new() };
    for k in 0..=n {
        let t = k as f64 * dt;
        let u = stepper.advance(t, k == 0);
        if keep_trace {
            u_trace.push(u);
        }
        if u >= p.theta() {
            spikes.push(t);
            stepper.add_reset(0.0);
        }
    }
    Ok(Simulation {
        output: SpikeTrain(spikes),
        trace: keep_trace.then_some(MembraneTrace { dt, u: u_trace }),
    })
}

/// Simulates one trial on the grid `0, dt, ..., T`, retaining the membrane trace.
pub fn simulate(pattern: &InputPattern, w: &WeightVector, p: &NeuronParams, dt: f64) -> Result<Simulation> {
    run(pattern, w, p, dt, true)
}

/// Like [`simulate`] but only returns the output spikes.
pub fn simulate_spikes(pattern: &InputPattern, w: &WeightVector, p: &NeuronParams, dt: f64) -> Result<SpikeTrain> {
    run(pattern, w, p, dt, false).map(|s| s.output)
}

/// Potential on the grid with the reset terms conditioned on a fixed history
/// (no threshold dynamics).
pub fn conditioned_potential_trace(
    pattern: &InputPattern,
    w: &WeightVector,
    conditioning: &SpikeTrain,
    p: &NeuronParams,
    dt: f64,
) -> Result<Vec<f64>> {
    w.check_matches(pattern)?;
    let n = grid_steps(pattern.duration(), dt)?;
    let mut stepper = PotentialStepper::new(p, pattern, w, dt);
    let hist = conditioning.times();
    let mut next = 0;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt;
        // Resets must be in the trace before reading u(t), so stage them first.
        stepper.advance_resets(t, k == 0, hist, &mut next);
        out.push(stepper.advance(t, k == 0));
    }
    Ok(out)
}

impl PotentialStepper<'_> {
    /// Adds reset contributions for history spikes in `(t - dt, t]`, decayed to
    /// the end of the upcoming step. Must be called before [`advance`], which
    /// applies the step's decay.
    fn advance_resets(&mut self, t: f64, first: bool, hist: &[f64], next: &mut usize) {
        while let Some(&tf) = hist.get(*next) {
            if tf > t {
                break;
            }
            // `advance` multiplies by decay_m (unless first), so pre-divide.
            let lag = t - tf;
            let contrib = (-lag / self.p.tau_m()).exp();
            self.trace_r += if first { contrib } else { contrib / self.decay_m };
            *next += 1;
        }
    }
}

/// Exponential escape rate `rho0 * exp((u - theta) / delta_u)` in 1/ms.
pub fn escape_rate(u: f64, p: &NeuronParams) -> Result<f64> {
    if p.delta_u() <= 0.0 {
        return Err(Error::InvalidParams(
            "escape rate needs delta_u > 0; use `simulate` for the deterministic limit".into(),
        ));
    }
    Ok(p.rho0() * ((u - p.theta()) / p.delta_u()).exp())
}

/// Escape-rate intensity on the grid, conditioned on the given output history.
pub fn intensity_trace(
    pattern: &InputPattern,
    w: &WeightVector,
    conditioning: &SpikeTrain,
    p: &NeuronParams,
    dt: f64,
) -> Result<Vec<f64>> {
    escape_rate(0.0, p)?;
    let u = conditioned_potential_trace(pattern, w, conditioning, p, dt)?;
    Ok(u.into_iter()
        .map(|u| p.rho0() * ((u - p.theta()) / p.delta_u()).exp())
        .collect())
}
