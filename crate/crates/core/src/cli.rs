//! Experiment orchestration behind the `spikefilt` binary: configuration
//! merging, one runner per experiment kind, and CSV / JSON output.
//!
//! Configuration comes from kind-specific defaults, then an optional flat
//! TOML file, then command-line flags; later sources win.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{grid, learning_window_curve, phase_portrait, target_weight, threshold_weight, tmin_curve};
use crate::error::{Error, Result};
use crate::kernels::{current_kernel, psp_kernel, reset_kernel, NeuronParams, NeuronParamsBuilder};
use crate::neuron::{simulate, InputPattern, WeightVector};
use crate::plasticity::{appendix_discrepancy, Rule};
use crate::tasks::{
    capacity_sweep, gen_pattern, init_weights, mean, run_many, run_rng, sample_std, trailing_mean, RunSummary,
    TaskConfig,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SPIKEFILT_OUT";
/// Displacements of the actual spike used by `verify-appendix`, ms.
pub const APPENDIX_SHIFTS: [f64; 5] = [5.0, 2.0, 1.0, 0.5, 0.1];
/// Soft-threshold widths used by `verify-appendix` unless one is configured, mV.
pub const APPENDIX_DELTA_US: [f64; 3] = [0.1, 1.0, 10.0];
/// Trailing window of the smoothed vRD curve, epochs.
pub const SMOOTHING_EPOCHS: usize = 5;
/// Window for the late-training vRD fluctuation, epochs.
pub const LATE_EPOCHS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Kernels,
    Dynamics,
    Mapping,
    RateSweep,
    Classify,
    Capacity,
    MultiSpike,
    VerifyAppendix,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Kernels,
        Kind::Dynamics,
        Kind::Mapping,
        Kind::RateSweep,
        Kind::Classify,
        Kind::Capacity,
        Kind::MultiSpike,
        Kind::VerifyAppendix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Kernels => "kernels",
            Kind::Dynamics => "dynamics",
            Kind::Mapping => "mapping",
            Kind::RateSweep => "rate-sweep",
            Kind::Classify => "classify",
            Kind::Capacity => "capacity",
            Kind::MultiSpike => "multi-spike",
            Kind::VerifyAppendix => "verify-appendix",
        }
    }
}

/// Every setting that a config file or a flag may supply. Absent keys fall
/// back to the experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub jobs: Option<usize>,
    pub rule: Option<Rule>,
    pub n_inputs: Option<usize>,
    pub patterns: Option<Vec<usize>>,
    pub classes: Option<usize>,
    pub target_spikes: Option<Vec<usize>>,
    pub precision_ms: Option<Vec<f64>>,
    pub epochs: Option<usize>,
    pub eta: Option<Vec<f64>>,
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub divergence_limit: Option<f64>,
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

macro_rules! overlay {
    ($base:expr, $top:expr, $($f:ident),*) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_toml(text: &str) -> Result<Settings> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Settings> {
        Settings::from_toml(&fs::read_to_string(path)?)
    }

    /// Values present in `top` replace those in `self`.
    pub fn overlay(self, top: Settings) -> Settings {
        overlay!(
            self, top, seed, runs, jobs, rule, n_inputs, patterns, classes, target_spikes, precision_ms, epochs,
            eta, dt, duration, divergence_limit, eps0, tau_m, tau_s, theta, u_reset, tau_q, capacitance, charge,
            rho0, delta_u
        )
    }

    fn neuron(&self) -> NeuronParamsBuilder {
        NeuronParamsBuilder {
            eps0: self.eps0,
            tau_m: self.tau_m,
            tau_s: self.tau_s,
            theta: self.theta,
            u_reset: self.u_reset,
            tau_q: self.tau_q,
            capacitance: self.capacitance,
            charge: self.charge,
            rho0: self.rho0,
            delta_u: self.delta_u,
        }
    }
}

/// Defaults of each experiment kind.
pub fn defaults(kind: Kind) -> Settings {
    let base = Settings { seed: Some(1), runs: Some(1), n_inputs: Some(200), ..Settings::default() };
    let kind_specific = match kind {
        Kind::Kernels | Kind::Dynamics => Settings::default(),
        Kind::Mapping => Settings {
            runs: Some(10),
            patterns: Some(vec![1]),
            classes: Some(1),
            target_spikes: Some(vec![4]),
            epochs: Some(200),
            ..Settings::default()
        },
        Kind::RateSweep => Settings {
            runs: Some(10),
            patterns: Some(vec![10]),
            classes: Some(1),
            target_spikes: Some(vec![1]),
            epochs: Some(500),
            eta: Some(vec![0.05, 0.1, 0.3, 0.6, 1.0]),
            ..Settings::default()
        },
        Kind::Classify => Settings {
            runs: Some(5),
            patterns: Some(vec![10]),
            classes: Some(5),
            target_spikes: Some(vec![1]),
            precision_ms: Some(vec![1.0]),
            epochs: Some(500),
            ..Settings::default()
        },
        Kind::Capacity => Settings {
            runs: Some(5),
            patterns: Some((1..=12).map(|k| 5 * k).collect()),
            classes: Some(5),
            target_spikes: Some(vec![1]),
            precision_ms: Some(vec![1.0]),
            epochs: Some(500),
            ..Settings::default()
        },
        Kind::MultiSpike => Settings {
            runs: Some(5),
            patterns: Some(vec![10]),
            classes: Some(5),
            target_spikes: Some(vec![1, 2, 3, 4, 5]),
            precision_ms: Some(vec![1.0]),
            epochs: Some(1000),
            ..Settings::default()
        },
        Kind::VerifyAppendix => Settings { n_inputs: Some(20), dt: Some(0.01), ..Settings::default() },
    };
    base.overlay(kind_specific)
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub seed: u64,
    pub runs: usize,
    pub jobs: Option<usize>,
    pub rules: Vec<Rule>,
    pub out: PathBuf,
    /// Template for every training run; sweeps override single fields.
    pub task: TaskConfig,
    pub neuron: NeuronParamsBuilder,
    pub patterns: Vec<usize>,
    pub target_spikes: Vec<usize>,
    pub precision_ms: Vec<f64>,
    pub eta: Vec<f64>,
    /// Whether `delta_u` was set explicitly.
    pub delta_u_given: bool,
}

fn non_empty<T: Clone>(name: &str, v: Option<Vec<T>>, fallback: Vec<T>) -> Result<Vec<T>> {
    let v = v.unwrap_or(fallback);
    if v.is_empty() {
        return Err(Error::InvalidConfig(format!("{name} must list at least one value")));
    }
    Ok(v)
}

/// Target trains with spikes at `k * T / (n + 1)`, `k = 1..=n`.
pub fn evenly_spaced_targets(n_spikes: usize, duration: f64) -> Vec<f64> {
    (1..=n_spikes).map(|k| k as f64 * duration / (n_spikes + 1) as f64).collect()
}

impl ExperimentConfig {
    /// Layers `settings` over the kind's defaults and validates the result.
    pub fn resolve(kind: Kind, settings: Settings, out: PathBuf) -> Result<ExperimentConfig> {
        let s = defaults(kind).overlay(settings);
        let bad = |m: String| Err(Error::InvalidConfig(m));
        let seed = s.seed.unwrap_or(1);
        let runs = s.runs.unwrap_or(1);
        if runs < 1 {
            return bad("runs must be >= 1".into());
        }
        if s.jobs == Some(0) {
            return bad("jobs must be >= 1".into());
        }
        let neuron = s.neuron();
        neuron.build()?;
        let patterns = non_empty("patterns", s.patterns.clone(), vec![1])?;
        let target_spikes = non_empty("target_spikes", s.target_spikes.clone(), vec![1])?;
        let precision_ms = non_empty("precision_ms", s.precision_ms.clone(), vec![1.0])?;
        let eta = s.eta.clone().unwrap_or_default();
        if patterns.contains(&0) || target_spikes.contains(&0) {
            return bad("patterns and target_spikes must be >= 1".into());
        }

        let defaults = TaskConfig::default();
        let mut task = TaskConfig {
            n_inputs: s.n_inputs.unwrap_or(defaults.n_inputs),
            n_patterns: patterns[0],
            n_classes: s.classes.unwrap_or(1),
            n_target_spikes: target_spikes[0],
            duration: s.duration.unwrap_or(defaults.duration),
            precision: precision_ms[0],
            epochs: s.epochs.unwrap_or(1),
            eta: None,
            dt: s.dt.unwrap_or(defaults.dt),
            seed,
            divergence_limit: s.divergence_limit.unwrap_or(defaults.divergence_limit),
            ..defaults
        };
        task.target_max = task.duration;

        let single = |name: &str, len: usize| -> Result<()> {
            if len > 1 {
                return Err(Error::InvalidConfig(format!("{} takes a single {name}", kind.name())));
            }
            Ok(())
        };
        if kind != Kind::RateSweep {
            single("eta", eta.len())?;
            task.eta = eta.first().copied();
        } else if eta.is_empty() {
            return bad("rate-sweep needs an eta grid".into());
        }
        match kind {
            Kind::Mapping | Kind::RateSweep => {
                single("pattern count", patterns.len())?;
                single("target spike count", target_spikes.len())?;
                task.n_classes = 1;
                task.fixed_targets = Some(vec![evenly_spaced_targets(task.n_target_spikes, task.duration)]);
            }
            Kind::Capacity => single("target spike count", target_spikes.len())?,
            Kind::MultiSpike => single("pattern count", patterns.len())?,
            _ => {}
        }
        if kind == Kind::Mapping {
            task.record_outputs = true;
        }
        if matches!(kind, Kind::Mapping | Kind::RateSweep | Kind::Classify | Kind::Capacity | Kind::MultiSpike) {
            for &n in &patterns {
                for &n_s in &target_spikes {
                    for &prec in &precision_ms {
                        TaskConfig { n_patterns: n, n_target_spikes: n_s, precision: prec, ..task.clone() }
                            .validate()?;
                    }
                }
            }
        }
        Ok(ExperimentConfig {
            kind,
            seed,
            runs,
            jobs: s.jobs,
            rules: s.rule.map_or_else(|| Rule::ALL.to_vec(), |r| vec![r]),
            out,
            task,
            neuron,
            patterns,
            target_spikes,
            precision_ms,
            eta,
            delta_u_given: s.delta_u.is_some(),
        })
    }

    pub fn params(&self) -> Result<NeuronParams> {
        self.neuron.build()
    }
}

/// Formats a real with 9 significant digits, as short as possible.
pub fn fmt_num(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if (1e-4..1e9).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn fmt_opt(x: Option<usize>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

struct Table {
    name: &'static str,
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&'static str]) -> Table {
        Table { name, header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(dir.join(self.name))?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub kind: Kind,
    pub version: &'static str,
    pub seed: u64,
    pub runs: usize,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Runs the experiment, writes its CSV files and manifest into `config.out`
/// and returns the manifest.
pub fn run(config: &ExperimentConfig) -> Result<Manifest> {
    let start = Instant::now();
    let p = config.params()?;
    let tables = match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("cannot start {n} worker threads: {e}")))?
            .install(|| produce(config, &p))?,
        None => produce(config, &p)?,
    };
    fs::create_dir_all(&config.out)?;
    for t in &tables {
        t.write(&config.out)?;
    }
    let manifest = Manifest {
        kind: config.kind,
        version: VERSION,
        seed: config.seed,
        runs: config.runs,
        wall_time_s: start.elapsed().as_secs_f64(),
        files: tables.iter().map(|t| t.name.to_string()).collect(),
        config: config.clone(),
    };
    fs::write(config.out.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

fn produce(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<Table>> {
    log::info!("running {} (seed {}, {} runs)", c.kind.name(), c.seed, c.runs);
    match c.kind {
        Kind::Kernels => kernels(p),
        Kind::Dynamics => dynamics(p),
        Kind::Mapping => mapping(c, p),
        Kind::RateSweep => rate_sweep(c, p),
        Kind::Classify => classify_curves(c, p),
        Kind::Capacity => capacity(c, p),
        Kind::MultiSpike => multi_spike(c, p),
        Kind::VerifyAppendix => verify_appendix(c, p),
    }
}

fn kernels(p: &NeuronParams) -> Result<Vec<Table>> {
    let mut k = Table::new("kernels.csv", &["s", "alpha", "epsilon", "kappa"]);
    for s in grid(-5.0, 50.0, 0.1) {
        k.push(vec![fmt_num(s), fmt_num(current_kernel(s, p)), fmt_num(psp_kernel(s, p)), fmt_num(reset_kernel(s, p))]);
    }
    // One input at 0 ms with the weight that brings the neuron to threshold at 4 ms.
    let pattern = InputPattern::single_spikes(&[0.0], 50.0)?;
    let w = WeightVector(vec![p.theta() / psp_kernel(4.0, p)]);
    let sim = simulate(&pattern, &w, p, 0.1)?;
    let trace = sim.trace.expect("simulate keeps the trace");
    let mut m = Table::new("membrane.csv", &["t", "u", "spike"]);
    for (i, &u) in trace.u.iter().enumerate() {
        let t = trace.time(i);
        let spike = sim.output.times().iter().any(|&s| (s - t).abs() < 1e-9);
        m.push(vec![fmt_num(t), fmt_num(u), u8::from(spike).to_string()]);
    }
    Ok(vec![k, m])
}

fn dynamics(p: &NeuronParams) -> Result<Vec<Table>> {
    let mut window = Table::new("learning_window.csv", &["s", "inst", "filt"]);
    let inst = learning_window_curve(Rule::Inst, -20.0, 60.0, 0.1, p);
    let filt = learning_window_curve(Rule::Filt, -20.0, 60.0, 0.1, p);
    for ((s, a), (_, b)) in inst.iter().zip(&filt) {
        window.push(vec![fmt_num(*s), fmt_num(*a), fmt_num(*b)]);
    }

    let t_ref = 4.0;
    let w_max = 3.0 * threshold_weight(p);
    let mut phase = Table::new("phase_portrait.csv", &["w", "w_over_theta", "inst_dw", "filt_dw", "fires"]);
    let inst = phase_portrait(Rule::Inst, t_ref, 0.0, w_max, 0.05, p);
    let filt = phase_portrait(Rule::Filt, t_ref, 0.0, w_max, 0.05, p);
    for (a, b) in inst.iter().zip(&filt) {
        phase.push(vec![
            fmt_num(a.w),
            fmt_num(a.w / p.theta()),
            fmt_num(a.dw),
            fmt_num(b.dw),
            u8::from(a.fires).to_string(),
        ]);
    }
    let mut fixed = Table::new("fixed_points.csv", &["t_ref", "threshold_weight", "target_weight"]);
    fixed.push(vec![
        fmt_num(t_ref),
        fmt_num(threshold_weight(p)),
        target_weight(t_ref, p).map_or_else(String::new, fmt_num),
    ]);

    let mut tmin = Table::new("tmin_curve.csv", &["tau_q", "t_min"]);
    for (q, t) in tmin_curve(0.0, 50.0, 0.1, p) {
        tmin.push(vec![fmt_num(q), fmt_num(t)]);
    }
    Ok(vec![window, phase, fixed, tmin])
}

fn mapping(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<Table>> {
    let mut vrd = Table::new("mapping_vrd.csv", &["rule", "epoch", "mean_vrd", "std_vrd", "smoothed_vrd"]);
    let mut weights = Table::new("mapping_weights.csv", &["rule", "rank", "time", "weight_before", "weight_after"]);
    let mut raster = Table::new("mapping_raster.csv", &["rule", "epoch", "spike_time"]);
    let mut summary = Table::new(
        "mapping_summary.csv",
        &[
            "rule",
            "runs",
            "final_mean_vrd",
            "final_std_vrd",
            "late_vrd_fluctuation",
            "max_abs_weight",
            "min_weight",
            "profile_max",
            "profile_min",
        ],
    );
    let mut input = Table::new("mapping_input.csv", &["input", "time"]);
    for (i, rule) in c.rules.iter().enumerate() {
        let s = run_many(&c.task, *rule, c.runs, p)?;
        if i == 0 {
            for (j, train) in s.tasks[0].patterns[0].trains().iter().enumerate() {
                for &t in train.times() {
                    input.push(vec![j.to_string(), fmt_num(t)]);
                }
            }
        }
        let mut curve = vec![s.initial_mean_vrd()];
        curve.extend(&s.mean_vrd);
        let initial: Vec<f64> = s.per_run.iter().filter_map(|r| r.history.initial.map(|x| x.mean_vrd)).collect();
        let mut spread = vec![sample_std(&initial)];
        spread.extend(&s.std_vrd);
        let smooth = trailing_mean(&curve, SMOOTHING_EPOCHS);
        for (e, ((m, sd), sm)) in curve.iter().zip(&spread).zip(&smooth).enumerate() {
            vrd.push(vec![rule.to_string(), e.to_string(), fmt_num(*m), fmt_num(*sd), fmt_num(*sm)]);
        }
        let (before, after) = s.weight_profiles()?;
        for (k, (b, a)) in before.iter().zip(&after).enumerate() {
            weights.push(vec![rule.to_string(), k.to_string(), fmt_num(a.time), fmt_num(b.weight), fmt_num(a.weight)]);
        }
        for (e, outputs) in s.per_run[0].history.outputs.iter().enumerate() {
            for &t in outputs[0].times() {
                raster.push(vec![rule.to_string(), (e + 1).to_string(), fmt_num(t)]);
            }
        }
        let all_w = s.per_run.iter().flat_map(|r| r.weights.0.iter().copied());
        let (max_abs, min_w) = all_w.fold((0.0f64, f64::INFINITY), |(m, n), w| (m.max(w.abs()), n.min(w)));
        let finals: Vec<f64> = s.per_run.iter().filter_map(|r| r.history.epochs.last().map(|x| x.mean_vrd)).collect();
        let prof = after.iter().map(|x| x.weight);
        let (pmax, pmin) = prof.fold((f64::NEG_INFINITY, f64::INFINITY), |(a, b), w| (a.max(w), b.min(w)));
        summary.push(vec![
            rule.to_string(),
            c.runs.to_string(),
            fmt_num(s.final_mean_vrd()),
            fmt_num(sample_std(&finals)),
            fmt_num(s.late_vrd_fluctuation(LATE_EPOCHS)),
            fmt_num(max_abs),
            fmt_num(min_w),
            fmt_num(pmax),
            fmt_num(pmin),
        ]);
    }
    Ok(vec![vrd, weights, raster, input, summary])
}

fn rate_sweep(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<Table>> {
    let mut t = Table::new("rate_sweep.csv", &["rule", "eta", "mean_vrd", "stderr"]);
    for rule in &c.rules {
        for &eta in &c.eta {
            let cfg = TaskConfig { eta: Some(eta), ..c.task.clone() };
            let s = run_many(&cfg, *rule, c.runs, p)?;
            t.push(vec![rule.to_string(), fmt_num(eta), fmt_num(s.final_mean_vrd()), fmt_num(s.final_vrd_stderr())]);
        }
    }
    Ok(vec![t])
}

fn classify_curves(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<Table>> {
    let mut t = Table::new(
        "classify.csv",
        &[
            "rule",
            "n_patterns",
            "precision_ms",
            "n_target_spikes",
            "epoch",
            "mean_performance",
            "std_performance",
            "mean_vrd",
            "std_vrd",
        ],
    );
    for rule in &c.rules {
        for &n in &c.patterns {
            for &prec in &c.precision_ms {
                for &n_s in &c.target_spikes {
                    let cfg = TaskConfig { n_patterns: n, precision: prec, n_target_spikes: n_s, ..c.task.clone() };
                    let s = run_many(&cfg, *rule, c.runs, p)?;
                    for e in 0..s.mean_performance.len() {
                        t.push(vec![
                            rule.to_string(),
                            n.to_string(),
                            fmt_num(prec),
                            n_s.to_string(),
                            (e + 1).to_string(),
                            fmt_num(s.mean_performance[e]),
                            fmt_num(s.std_performance[e]),
                            fmt_num(s.mean_vrd[e]),
                            fmt_num(s.std_vrd[e]),
                        ]);
                    }
                }
            }
        }
    }
    Ok(vec![t])
}

fn capacity(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<Table>> {
    let mut cells = Table::new(
        "capacity.csv",
        &[
            "rule",
            "precision_ms",
            "n_patterns",
            "reached",
            "epochs_to_criterion",
            "peak_mean_performance",
            "final_mean_performance",
            "std_final_performance",
        ],
    );
    let mut summary = Table::new("capacity_summary.csv", &["rule", "n_inputs", "precision_ms", "p_max", "alpha_m"]);
    for rule in &c.rules {
        for &prec in &c.precision_ms {
            let cfg = TaskConfig { precision: prec, ..c.task.clone() };
            let sweep = capacity_sweep(&cfg, *rule, &c.patterns, c.runs, p)?;
            for cell in &sweep.cells {
                cells.push(vec![
                    rule.to_string(),
                    fmt_num(prec),
                    cell.n_patterns.to_string(),
                    cell.reached.to_string(),
                    fmt_opt(cell.epochs_to_criterion),
                    fmt_num(cell.peak_mean_performance),
                    fmt_num(cell.final_mean_performance),
                    fmt_num(cell.std_final_performance),
                ]);
            }
            let r = &sweep.result;
            summary.push(vec![
                rule.to_string(),
                r.n_inputs.to_string(),
                fmt_num(prec),
                r.p_max.to_string(),
                fmt_num(r.alpha_m),
            ]);
        }
    }
    Ok(vec![cells, summary])
}

fn multi_spike(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<Table>> {
    let mut t = Table::new(
        "multi_spike.csv",
        &[
            "rule",
            "n_target_spikes",
            "reached",
            "epochs_to_criterion",
            "peak_mean_performance",
            "final_mean_performance",
            "std_final_performance",
        ],
    );
    for rule in &c.rules {
        for &n_s in &c.target_spikes {
            let cfg = TaskConfig { n_target_spikes: n_s, ..c.task.clone() };
            let s: RunSummary = run_many(&cfg, *rule, c.runs, p)?;
            let finals: Vec<f64> =
                s.per_run.iter().filter_map(|r| r.history.epochs.last().map(|x| x.performance)).collect();
            t.push(vec![
                rule.to_string(),
                n_s.to_string(),
                s.reached_criterion().to_string(),
                fmt_opt(s.epochs_to_criterion),
                fmt_num(s.peak_mean_performance()),
                fmt_num(mean(&finals)),
                fmt_num(sample_std(&finals)),
            ]);
        }
    }
    Ok(vec![t])
}

/// The two instances examined by `verify-appendix`: a single synapse driven
/// to fire at 4 ms, and a random pattern aimed at 100 ms.
pub fn appendix_setups(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<(&'static str, InputPattern, WeightVector, f64)>> {
    let single = InputPattern::single_spikes(&[0.0], c.task.duration)?;
    let w_single = WeightVector(vec![p.theta() / psp_kernel(4.0, p)]);
    let mut rng = run_rng(c.seed, 0);
    let pattern = gen_pattern(c.task.n_inputs, c.task.duration, &mut rng)?;
    let w = init_weights(c.task.n_inputs, &mut rng);
    Ok(vec![("single", single, w_single, 4.0), ("pattern", pattern, w, c.task.duration / 2.0)])
}

fn verify_appendix(c: &ExperimentConfig, p: &NeuronParams) -> Result<Vec<Table>> {
    let mut t = Table::new("appendix.csv", &["setup", "delta_u", "delta_t", "synapse", "lhs", "rhs", "holds"]);
    let delta_us = if c.delta_u_given { vec![p.delta_u()] } else { APPENDIX_DELTA_US.to_vec() };
    let setups = appendix_setups(c, p)?;
    let mut jobs = Vec::new();
    for (si, _) in setups.iter().enumerate() {
        for &du in &delta_us {
            for &shift in &APPENDIX_SHIFTS {
                jobs.push((si, du, shift));
            }
        }
    }
    let results = jobs
        .par_iter()
        .map(|&(si, du, shift)| {
            let (_, pattern, w, t_ref) = &setups[si];
            let pd = p.to_builder().delta_u(du).build()?;
            appendix_discrepancy(pattern, w, t_ref + shift, *t_ref, 1.0, &pd, c.task.dt)
        })
        .collect::<Result<Vec<_>>>()?;
    for ((si, du, shift), d) in jobs.iter().zip(&results) {
        for (j, (l, r)) in d.lhs.iter().zip(&d.rhs).enumerate() {
            t.push(vec![
                setups[*si].0.to_string(),
                fmt_num(*du),
                fmt_num(*shift),
                j.to_string(),
                fmt_num(*l),
                fmt_num(*r),
                (l <= r).to_string(),
            ]);
        }
    }
    Ok(vec![t])
}
