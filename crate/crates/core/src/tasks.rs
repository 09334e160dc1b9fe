//! Experiment protocols: random patterns and targets, weight initialisation,
//! the batch training loop and the aggregate measurements built on it.
//!
//! One training run draws its patterns, class targets, class labels and
//! initial weights (in that order) from a ChaCha stream seeded by
//! `(seed, run index)`, so the same run index sees identical inputs under
//! either rule. Runs execute in parallel and are always reduced in run order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::NeuronParams;
use crate::metrics::{classify, performance, vrd, ClassificationOutcome};
use crate::neuron::{grid_steps, simulate_spikes, InputPattern, SpikeTrain, WeightVector};
use crate::plasticity::{Rule, TargetSpec, MIN_TARGET_ISI};

/// Rejections allowed while drawing class targets.
pub const MAX_TARGET_REJECTIONS: usize = 100_000;
/// Averaged performance (percent) that must be exceeded to count as learned.
pub const CRITERION_PERCENT: f64 = 90.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskConfig {
    pub n_inputs: usize,
    pub n_patterns: usize,
    pub n_classes: usize,
    pub n_target_spikes: usize,
    /// Pattern duration, ms.
    pub duration: f64,
    /// Timing precision for a correct classification, ms.
    pub precision: f64,
    pub epochs: usize,
    /// Learning rate; `None` selects [`default_eta`].
    pub eta: Option<f64>,
    /// Simulation step, ms.
    pub dt: f64,
    pub seed: u64,
    /// Interval the random target times are drawn from, ms.
    pub target_min: f64,
    pub target_max: f64,
    /// Per-class target trains to use instead of random ones.
    pub fixed_targets: Option<Vec<Vec<f64>>>,
    /// Keep a weight snapshot after every epoch.
    pub record_weights: bool,
    /// Keep every pattern's output train after every epoch.
    pub record_outputs: bool,
    /// Abort when any |w| exceeds this.
    pub divergence_limit: f64,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            n_inputs: 200,
            n_patterns: 10,
            n_classes: 5,
            n_target_spikes: 1,
            duration: 200.0,
            precision: 1.0,
            epochs: 500,
            eta: None,
            dt: 0.1,
            seed: 1,
            target_min: 40.0,
            target_max: 200.0,
            fixed_targets: None,
            record_weights: false,
            record_outputs: false,
            divergence_limit: 1e6,
        }
    }
}

impl TaskConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        Ok(())
    }

    /// Everything except the epoch count, which `train` accepts as zero.
    fn validate_shape(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_inputs < 1 || self.n_patterns < 1 || self.n_classes < 1 {
            return bad("n_inputs, n_patterns and n_classes must all be >= 1".into());
        }
        if !self.n_patterns.is_multiple_of(self.n_classes) {
            return bad(format!(
                "{} patterns cannot be split equally into {} classes",
                self.n_patterns, self.n_classes
            ));
        }
        if !(self.precision > 0.0 && self.precision <= 5.0) {
            return bad(format!("precision must lie in (0, 5] ms, got {}", self.precision));
        }
        grid_steps(self.duration, self.dt)?;
        if let Some(eta) = self.eta {
            if !eta.is_finite() || eta < 0.0 {
                return bad(format!("eta must be finite and >= 0, got {eta}"));
            }
        }
        if !(self.target_min >= 0.0 && self.target_max >= self.target_min && self.target_max <= self.duration) {
            return bad(format!(
                "target window [{}, {}] must lie inside [0, {}]",
                self.target_min, self.target_max, self.duration
            ));
        }
        match &self.fixed_targets {
            Some(t) if t.len() != self.n_classes => {
                bad(format!("{} fixed target trains given for {} classes", t.len(), self.n_classes))
            }
            _ if self.fixed_targets.is_none() && self.n_target_spikes < 1 => {
                bad("random targets need n_target_spikes >= 1".into())
            }
            _ => Ok(()),
        }
    }

    /// Spikes per target train, taken from the fixed targets when present.
    pub fn spikes_per_target(&self) -> usize {
        match &self.fixed_targets {
            Some(t) => t.iter().map(Vec::len).max().unwrap_or(0).max(1),
            None => self.n_target_spikes,
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
            .unwrap_or_else(|| default_eta(self.n_inputs, self.spikes_per_target(), self.n_patterns))
    }
}

/// `600 / (n_inputs * n_spikes * n_patterns)`.
pub fn default_eta(n_inputs: usize, n_spikes: usize, n_patterns: usize) -> f64 {
    600.0 / (n_inputs * n_spikes * n_patterns) as f64
}

/// One spike per input, each uniform on `[0, duration]`.
pub fn gen_pattern<R: Rng + ?Sized>(n_inputs: usize, duration: f64, rng: &mut R) -> Result<InputPattern> {
    let times: Vec<f64> = (0..n_inputs).map(|_| rng.gen_range(0.0..=duration)).collect();
    InputPattern::single_spikes(&times, duration)
}

/// Each weight uniform on `[0, 200 / n_inputs]`.
pub fn init_weights<R: Rng + ?Sized>(n_inputs: usize, rng: &mut R) -> WeightVector {
    let hi = 200.0 / n_inputs as f64;
    WeightVector((0..n_inputs).map(|_| rng.gen_range(0.0..=hi)).collect())
}

/// Whether `candidate` keeps the minimum spike spacing and is at least
/// `n_spikes / 2` (van Rossum) away from every accepted train.
pub fn accept_candidate(accepted: &[TargetSpec], candidate: &SpikeTrain, n_spikes: usize, tau_q: f64) -> bool {
    let spaced = candidate.times().windows(2).all(|w| w[1] - w[0] >= MIN_TARGET_ISI);
    let min_distance = n_spikes as f64 / 2.0;
    spaced && accepted.iter().all(|a| vrd(a.train(), candidate, tau_q) >= min_distance)
}

/// Draws one target train per class from `[lo, hi]` by rejection sampling.
pub fn gen_targets_in<R: Rng + ?Sized>(
    n_classes: usize,
    n_spikes: usize,
    lo: f64,
    hi: f64,
    tau_q: f64,
    rng: &mut R,
) -> Result<Vec<TargetSpec>> {
    let mut accepted: Vec<TargetSpec> = Vec::with_capacity(n_classes);
    let mut rejections = 0;
    while accepted.len() < n_classes {
        let times: Vec<f64> = (0..n_spikes).map(|_| rng.gen_range(lo..=hi)).collect();
        let candidate = SpikeTrain::from_unsorted(times).ok();
        match candidate {
            Some(c) if accept_candidate(&accepted, &c, n_spikes, tau_q) => accepted.push(TargetSpec::new(c)?),
            _ => {
                rejections += 1;
                if rejections > MAX_TARGET_REJECTIONS {
                    return Err(Error::Infeasible {
                        constraint: format!(
                            "{n_classes} targets of {n_spikes} spikes in [{lo}, {hi}] ms, \
                             spikes >= {MIN_TARGET_ISI} ms apart, pairwise distance >= {}",
                            n_spikes as f64 / 2.0
                        ),
                        attempts: rejections,
                    });
                }
            }
        }
    }
    Ok(accepted)
}

/// Targets in the default window of 40-200 ms with `tau_q = 10 ms`.
pub fn gen_targets<R: Rng + ?Sized>(n_classes: usize, n_spikes: usize, rng: &mut R) -> Result<Vec<TargetSpec>> {
    gen_targets_in(n_classes, n_spikes, 40.0, 200.0, 10.0, rng)
}

/// Patterns, class targets and the class label of every pattern.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Task {
    pub patterns: Vec<InputPattern>,
    pub targets: Vec<TargetSpec>,
    pub labels: Vec<usize>,
}

impl Task {
    pub fn generate<R: Rng + ?Sized>(config: &TaskConfig, p: &NeuronParams, rng: &mut R) -> Result<Task> {
        config.validate_shape()?;
        let patterns = (0..config.n_patterns)
            .map(|_| gen_pattern(config.n_inputs, config.duration, rng))
            .collect::<Result<Vec<_>>>()?;
        let targets = match &config.fixed_targets {
            Some(fixed) => fixed.iter().map(|t| TargetSpec::from_times(t)).collect::<Result<Vec<_>>>()?,
            None => gen_targets_in(
                config.n_classes,
                config.n_target_spikes,
                config.target_min,
                config.target_max,
                p.tau_q(),
                rng,
            )?,
        };
        let per_class = config.n_patterns / config.n_classes;
        let mut labels: Vec<usize> = (0..config.n_classes).flat_map(|c| std::iter::repeat_n(c, per_class)).collect();
        labels.shuffle(rng);
        Ok(Task { patterns, targets, labels })
    }

    pub fn target_of(&self, pattern: usize) -> &SpikeTrain {
        self.targets[self.labels[pattern]].train()
    }
}

/// Scores of one pass over all patterns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_vrd: f64,
    /// Percentage of correctly classified patterns.
    pub performance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EpochHistory {
    /// Scores before any learning.
    pub initial: Option<EpochStats>,
    /// Scores after each epoch's update has been applied.
    pub epochs: Vec<EpochStats>,
    pub weights: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<SpikeTrain>>,
    /// First epoch whose performance exceeded the criterion.
    pub epochs_to_criterion: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trained {
    pub initial_weights: WeightVector,
    pub weights: WeightVector,
    pub history: EpochHistory,
    /// Responses to every pattern under the final weights.
    pub outputs: Vec<SpikeTrain>,
}

fn respond(task: &Task, w: &WeightVector, p: &NeuronParams, dt: f64) -> Result<Vec<SpikeTrain>> {
    task.patterns.par_iter().map(|pat| simulate_spikes(pat, w, p, dt)).collect()
}

fn score(task: &Task, outputs: &[SpikeTrain], epoch: usize, precision: f64, tau_q: f64) -> Result<EpochStats> {
    let outcomes: Vec<ClassificationOutcome> = outputs
        .iter()
        .enumerate()
        .map(|(i, out)| classify(out, task.target_of(i), precision))
        .collect();
    let mean_vrd = outputs
        .iter()
        .enumerate()
        .map(|(i, out)| vrd(out, task.target_of(i), tau_q))
        .sum::<f64>()
        / outputs.len() as f64;
    Ok(EpochStats { epoch, mean_vrd, performance: performance(&outcomes)? })
}

/// Sum of per-pattern updates for the current responses, accumulated in
/// pattern order.
pub fn epoch_update(
    task: &Task,
    outputs: &[SpikeTrain],
    rule: Rule,
    eta: f64,
    p: &NeuronParams,
) -> Vec<f64> {
    let per_trial: Vec<Vec<f64>> = task
        .patterns
        .par_iter()
        .enumerate()
        .map(|(i, pat)| rule.update(pat, &outputs[i], task.target_of(i), eta, p).dw)
        .collect();
    let n = task.patterns.first().map_or(0, InputPattern::n_inputs);
    let mut acc = vec![0.0; n];
    for dw in &per_trial {
        for (a, d) in acc.iter_mut().zip(dw) {
            *a += d;
        }
    }
    acc
}

/// Batch training: every epoch presents all patterns, sums the per-trial
/// updates and applies them once. Scores are taken on a fresh pass with the
/// updated weights.
pub fn train(config: &TaskConfig, rule: Rule, task: &Task, w0: &WeightVector, p: &NeuronParams) -> Result<Trained> {
    config.validate_shape()?;
    for pat in &task.patterns {
        w0.check_matches(pat)?;
    }
    if task.labels.len() != task.patterns.len() {
        return Err(Error::InvalidConfig("every pattern needs a class label".into()));
    }
    let eta = config.learning_rate();
    let mut w = w0.clone();
    let mut outputs = respond(task, &w, p, config.dt)?;
    let mut history = EpochHistory::default();
    if config.epochs == 0 {
        return Ok(Trained { initial_weights: w0.clone(), weights: w, history, outputs });
    }
    history.initial = Some(score(task, &outputs, 0, config.precision, p.tau_q())?);

    for epoch in 1..=config.epochs {
        let dw = epoch_update(task, &outputs, rule, eta, p);
        for (wj, d) in w.0.iter_mut().zip(&dw) {
            *wj += d;
        }
        if let Some((j, &v)) = w.0.iter().enumerate().find(|(_, v)| v.is_nan() || v.abs() > config.divergence_limit) {
            return Err(Error::Divergence { epoch, synapse: j, value: v });
        }
        outputs = respond(task, &w, p, config.dt)?;
        let stats = score(task, &outputs, epoch, config.precision, p.tau_q())?;
        if history.epochs_to_criterion.is_none() && stats.performance > CRITERION_PERCENT {
            history.epochs_to_criterion = Some(epoch);
        }
        history.epochs.push(stats);
        if config.record_weights {
            history.weights.push(w.0.clone());
        }
        if config.record_outputs {
            history.outputs.push(outputs.clone());
        }
    }
    Ok(Trained { initial_weights: w0.clone(), weights: w, history, outputs })
}

/// Mixes a base seed with stream identifiers (splitmix64 finaliser).
pub fn derive_seed(base: u64, streams: &[u64]) -> u64 {
    let mut x = base;
    for &s in streams {
        x ^= s.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(x << 6).wrapping_add(x >> 2);
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
    }
    x
}

/// RNG for one run of an experiment.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, &[run as u64]))
}

/// Generates the task and initial weights of run `run` and trains it.
pub fn single_run(config: &TaskConfig, rule: Rule, run: usize, p: &NeuronParams) -> Result<(Task, Trained)> {
    let mut rng = run_rng(config.seed, run);
    let task = Task::generate(config, p, &mut rng)?;
    let w0 = init_weights(config.n_inputs, &mut rng);
    let trained = train(config, rule, &task, &w0, p)?;
    Ok((task, trained))
}

/// Per-epoch mean and sample standard deviation across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub runs: usize,
    pub mean_vrd: Vec<f64>,
    pub std_vrd: Vec<f64>,
    pub mean_performance: Vec<f64>,
    pub std_performance: Vec<f64>,
    /// Epoch at which the run-averaged performance first exceeded the criterion.
    pub epochs_to_criterion: Option<usize>,
    pub per_run: Vec<Trained>,
    pub tasks: Vec<Task>,
}

impl RunSummary {
    pub fn final_mean_vrd(&self) -> f64 {
        self.mean_vrd.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_mean_performance(&self) -> f64 {
        self.mean_performance.last().copied().unwrap_or(f64::NAN)
    }

    pub fn peak_mean_performance(&self) -> f64 {
        self.mean_performance.iter().copied().fold(f64::NAN, f64::max)
    }

    pub fn reached_criterion(&self) -> bool {
        self.epochs_to_criterion.is_some()
    }

    /// Mean over runs of each run's vRD standard deviation across the last
    /// `window` epochs.
    pub fn late_vrd_fluctuation(&self, window: usize) -> f64 {
        let per_run: Vec<f64> = self
            .per_run
            .iter()
            .map(|r| {
                let e = &r.history.epochs;
                let tail: Vec<f64> = e[e.len().saturating_sub(window)..].iter().map(|s| s.mean_vrd).collect();
                sample_std(&tail)
            })
            .collect();
        mean(&per_run)
    }

    /// Mean over runs of the initial scores.
    pub fn initial_mean_vrd(&self) -> f64 {
        mean(&self.per_run.iter().filter_map(|r| r.history.initial.map(|s| s.mean_vrd)).collect::<Vec<_>>())
    }

    /// Chronological weight profile of the first pattern, before and after
    /// training; see [`chronological_profile`].
    pub fn weight_profiles(&self) -> Result<(Vec<ProfilePoint>, Vec<ProfilePoint>)> {
        let first = |r: usize| -> Result<&InputPattern> {
            self.tasks
                .get(r)
                .and_then(|t| t.patterns.first())
                .ok_or_else(|| Error::InvalidConfig("weight profiles need the generated tasks".into()))
        };
        let before = (0..self.runs).map(|r| Ok((first(r)?, &self.per_run[r].initial_weights))).collect::<Result<Vec<_>>>()?;
        let after = (0..self.runs).map(|r| Ok((first(r)?, &self.per_run[r].weights))).collect::<Result<Vec<_>>>()?;
        Ok((chronological_profile(&before)?, chronological_profile(&after)?))
    }

    pub fn final_vrd_stderr(&self) -> f64 {
        let finals: Vec<f64> = self
            .per_run
            .iter()
            .filter_map(|r| r.history.epochs.last().map(|s| s.mean_vrd))
            .collect();
        sample_std(&finals) / (finals.len() as f64).sqrt()
    }
}

pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Trailing moving average: entry `i` averages entries `i + 1 - width ..= i`
/// (fewer near the start).
pub fn trailing_mean(v: &[f64], width: usize) -> Vec<f64> {
    let width = width.max(1);
    (0..v.len())
        .map(|i| mean(&v[(i + 1).saturating_sub(width)..=i]))
        .collect()
}

/// Trains `runs` independent runs and aggregates them per epoch.
pub fn run_many(config: &TaskConfig, rule: Rule, runs: usize, p: &NeuronParams) -> Result<RunSummary> {
    if runs < 1 {
        return Err(Error::InvalidConfig("runs must be >= 1".into()));
    }
    let done: Vec<(Task, Trained)> = (0..runs)
        .into_par_iter()
        .map(|r| single_run(config, rule, r, p))
        .collect::<Result<Vec<_>>>()?;
    let (tasks, per_run) = done.into_iter().unzip();
    Ok(summarise(per_run, tasks))
}

fn summarise(per_run: Vec<Trained>, tasks: Vec<Task>) -> RunSummary {
    let n_epochs = per_run.iter().map(|r| r.history.epochs.len()).min().unwrap_or(0);
    let column = |e: usize, f: &dyn Fn(&EpochStats) -> f64| -> Vec<f64> {
        per_run.iter().map(|r| f(&r.history.epochs[e])).collect()
    };
    let mut s = RunSummary {
        runs: per_run.len(),
        mean_vrd: Vec::with_capacity(n_epochs),
        std_vrd: Vec::with_capacity(n_epochs),
        mean_performance: Vec::with_capacity(n_epochs),
        std_performance: Vec::with_capacity(n_epochs),
        epochs_to_criterion: None,
        per_run: Vec::new(),
        tasks,
    };
    for e in 0..n_epochs {
        let v = column(e, &|x| x.mean_vrd);
        let pc = column(e, &|x| x.performance);
        s.mean_vrd.push(mean(&v));
        s.std_vrd.push(sample_std(&v));
        let m = mean(&pc);
        if s.epochs_to_criterion.is_none() && m > CRITERION_PERCENT {
            s.epochs_to_criterion = Some(e + 1);
        }
        s.mean_performance.push(m);
        s.std_performance.push(sample_std(&pc));
    }
    s.per_run = per_run;
    s
}

/// One rank of a chronological weight profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    /// Mean over runs of the input spike time at this rank, ms.
    pub time: f64,
    pub weight: f64,
}

/// Sorts each run's synapses by their input spike time and averages weights
/// rank by rank across runs. Every input must fire exactly once.
pub fn chronological_profile(runs: &[(&InputPattern, &WeightVector)]) -> Result<Vec<ProfilePoint>> {
    let n = match runs.first() {
        Some((pat, _)) => pat.n_inputs(),
        None => return Ok(Vec::new()),
    };
    let mut acc = vec![ProfilePoint { time: 0.0, weight: 0.0 }; n];
    for (pat, w) in runs {
        w.check_matches(pat)?;
        if pat.n_inputs() != n || pat.trains().iter().any(|t| t.len() != 1) {
            return Err(Error::InvalidConfig("profiles need equally sized single-spike patterns".into()));
        }
        let mut order: Vec<(f64, f64)> = pat.trains().iter().map(|t| t.times()[0]).zip(w.0.iter().copied()).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (slot, (t, wj)) in acc.iter_mut().zip(order) {
            slot.time += t / runs.len() as f64;
            slot.weight += wj / runs.len() as f64;
        }
    }
    Ok(acc)
}

/// Outcome of one pattern count in a capacity sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityCell {
    pub n_patterns: usize,
    pub reached: bool,
    pub epochs_to_criterion: Option<usize>,
    pub peak_mean_performance: f64,
    pub final_mean_performance: f64,
    pub std_final_performance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    /// Memory capacity, patterns per synapse.
    pub alpha_m: f64,
    pub p_max: usize,
    pub n_inputs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacitySweep {
    pub result: CapacityResult,
    pub cells: Vec<CapacityCell>,
}

/// Largest pattern count whose run-averaged performance exceeds the criterion
/// within the epoch cap. All cells and runs are independent and run in parallel.
pub fn capacity_sweep(
    base: &TaskConfig,
    rule: Rule,
    p_grid: &[usize],
    runs: usize,
    p: &NeuronParams,
) -> Result<CapacitySweep> {
    if p_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("pattern grid must be strictly increasing".into()));
    }
    if runs < 1 {
        return Err(Error::InvalidConfig("runs must be >= 1".into()));
    }
    let configs: Vec<TaskConfig> = p_grid
        .iter()
        .map(|&n| {
            let mut c = base.clone();
            c.n_patterns = n;
            c.record_weights = false;
            c.record_outputs = false;
            c.validate().map(|_| c)
        })
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..configs.len()).flat_map(|c| (0..runs).map(move |r| (c, r))).collect();
    let trained: Vec<Trained> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let cfg = &configs[c];
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[cfg.n_patterns as u64, r as u64]));
            let task = Task::generate(cfg, p, &mut rng)?;
            let w0 = init_weights(cfg.n_inputs, &mut rng);
            train(cfg, rule, &task, &w0, p)
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::with_capacity(configs.len());
    let mut chunks = trained.into_iter();
    for cfg in &configs {
        let summary = summarise(chunks.by_ref().take(runs).collect(), Vec::new());
        let finals: Vec<f64> = summary
            .per_run
            .iter()
            .map(|r| r.history.epochs.last().map_or(f64::NAN, |s| s.performance))
            .collect();
        cells.push(CapacityCell {
            n_patterns: cfg.n_patterns,
            reached: summary.reached_criterion(),
            epochs_to_criterion: summary.epochs_to_criterion,
            peak_mean_performance: summary.peak_mean_performance(),
            final_mean_performance: summary.final_mean_performance(),
            std_final_performance: sample_std(&finals),
        });
    }
    let p_max = cells.iter().filter(|c| c.reached).map(|c| c.n_patterns).max().unwrap_or(0);
    Ok(CapacitySweep {
        result: CapacityResult { alpha_m: p_max as f64 / base.n_inputs as f64, p_max, n_inputs: base.n_inputs },
        cells,
    })
}
