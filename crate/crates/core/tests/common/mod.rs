//! Reference computations built straight from the defining integrals, used to
//! check the closed forms in the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spikefilt::kernels::DEFAULT_CAPACITANCE;
use spikefilt::{InputPattern, NeuronParams, SpikeTrain};

/// Composite Simpson rule on `[a, b]` with steps no longer than `h`. The end
/// points are sampled just inside the interval so that a jump exactly at an
/// end is seen from the correct side.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, h: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let mut n = ((b - a) / h).ceil() as usize;
    n += n % 2;
    n = n.max(2);
    let step = (b - a) / n as f64;
    let inset = 1e-10 * (b - a);
    let mut s = f(a + inset) + f(b - inset);
    for k in 1..n {
        let c = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(a + k as f64 * step);
    }
    s * step / 3.0
}

/// Simpson on `[a, b]`, split at every breakpoint so that each piece is smooth.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64], h: f64) -> f64 {
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| simpson(f, w[0], w[1], h)).sum()
}

/// PSP from its definition: the current kernel filtered by the membrane,
/// `(1 / C) * integral_0^s exp(-(s - x) / tau_m) * alpha(x) dx`.
pub fn psp_oracle(s: f64, p: &NeuronParams) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    let alpha = |x: f64| p.charge() / p.tau_s() * (-x / p.tau_s()).exp();
    let f = |x: f64| (-(s - x) / p.tau_m()).exp() * alpha(x);
    simpson(&f, 0.0, s, 1e-3) / p.capacitance().unwrap_or(DEFAULT_CAPACITANCE)
}

/// Exact closed-form PSP, only for use inside other oracles where the
/// kernel itself is not what is being checked.
fn psp(s: f64, p: &NeuronParams) -> f64 {
    if s < 0.0 {
        0.0
    } else {
        p.eps0() * ((-s / p.tau_m()).exp() - (-s / p.tau_s()).exp())
    }
}

/// Weight change from the filtered-train integral
/// `eta * integral [Y~ref(t) - Y~(t)] * sum_f eps(t - t_f) dt`, where each
/// spike is filtered with `exp(-s / tau_q) / tau_q`.
pub fn filt_oracle(
    pattern: &InputPattern,
    actual: &SpikeTrain,
    target: &SpikeTrain,
    eta: f64,
    p: &NeuronParams,
    h: f64,
) -> Vec<f64> {
    let tq = p.tau_q();
    let filt = |train: &SpikeTrain, t: f64| -> f64 {
        train.times().iter().filter(|&&s| s <= t).map(|&s| (-(t - s) / tq).exp() / tq).sum()
    };
    let end = pattern.duration().max(target.last().unwrap_or(0.0)).max(actual.last().unwrap_or(0.0)) + 60.0 * tq.max(p.tau_m());
    let mut breaks: Vec<f64> = actual.times().to_vec();
    breaks.extend(target.times());
    pattern
        .trains()
        .iter()
        .map(|tr| {
            let mut br = breaks.clone();
            br.extend(tr.times());
            let f = |t: f64| {
                let drive: f64 = tr.times().iter().map(|&tf| psp(t - tf, p)).sum();
                (filt(target, t) - filt(actual, t)) * drive
            };
            eta * integrate(&f, 0.0, end, &br, h)
        })
        .collect()
}

/// Weight change with the output trains taken as Dirac combs, using the PSP
/// evaluated from its defining convolution.
pub fn inst_oracle(pattern: &InputPattern, actual: &SpikeTrain, target: &SpikeTrain, eta: f64, p: &NeuronParams) -> Vec<f64> {
    let drive = |train: &SpikeTrain, inputs: &SpikeTrain| -> f64 {
        train
            .times()
            .iter()
            .map(|&t| inputs.times().iter().map(|&tf| psp_oracle(t - tf, p)).sum::<f64>())
            .sum()
    };
    pattern.trains().iter().map(|tr| eta * (drive(target, tr) - drive(actual, tr))).collect()
}

/// Van Rossum distance `(1 / tau_q) * integral (a~ - b~)^2 dt` with
/// unit-amplitude exponential filtering.
pub fn vrd_oracle(a: &SpikeTrain, b: &SpikeTrain, tau_q: f64, h: f64) -> f64 {
    let filt = |train: &SpikeTrain, t: f64| -> f64 {
        train.times().iter().filter(|&&s| s <= t).map(|&s| (-(t - s) / tau_q).exp()).sum()
    };
    let mut breaks = a.times().to_vec();
    breaks.extend(b.times());
    let end = breaks.iter().copied().fold(0.0, f64::max) + 40.0 * tau_q;
    let f = |t: f64| (filt(a, t) - filt(b, t)).powi(2);
    integrate(&f, 0.0, end, &breaks, h) / tau_q
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sorted train of `n` times uniform on `[lo, hi]` at least `gap` apart.
pub fn random_train(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, gap: f64) -> SpikeTrain {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= gap) {
            return SpikeTrain::new(v).unwrap();
        }
    }
}

/// A pattern of `n_inputs` synapses with 1 to 3 spikes each, plus an actual
/// train of 0 to 3 spikes and a target train of 1 to 3 spikes.
pub struct Instance {
    pub pattern: InputPattern,
    pub actual: SpikeTrain,
    pub target: SpikeTrain,
}

pub fn random_instance(seed: u64, n_inputs: usize) -> Instance {
    let mut r = rng(seed);
    let trains = (0..n_inputs)
        .map(|_| {
            let n = r.gen_range(1..=3);
            random_train(&mut r, n, 0.0, 200.0, 0.5)
        })
        .collect();
    let pattern = InputPattern::new(trains, 200.0).unwrap();
    let n_actual = r.gen_range(0..=3);
    let actual = random_train(&mut r, n_actual, 20.0, 200.0, 1.0);
    let n_target = r.gen_range(1..=3);
    let target = random_train(&mut r, n_target, 20.0, 200.0, 10.0);
    Instance { pattern, actual, target }
}

/// Relative error with a small absolute floor for components that cancel.
pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-9)
}

/// Golden-section search for the maximiser of a unimodal function.
pub fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > tol {
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    0.5 * (a + b)
}
