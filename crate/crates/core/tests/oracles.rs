mod common;

use common::*;
use rand::Rng;
use spikefilt::analysis::firing_time;
use spikefilt::kernels::{filt_min_target_time, filt_window, psp_kernel, psp_peak};
use spikefilt::metrics::vrd;
use spikefilt::plasticity::{filt_update, inst_update, log_likelihood, ml_clamped_update};
use spikefilt::{InputPattern, NeuronParams, SpikeTrain, WeightVector};

#[test]
fn psp_matches_membrane_filtered_current() {
    let p = NeuronParams::default();
    for k in 0..=120 {
        let s = 0.25 * k as f64;
        let want = psp_oracle(s, &p);
        assert!((psp_kernel(s, &p) - want).abs() <= 1e-9 * want.abs().max(1.0), "s = {s}");
    }
    assert_eq!(psp_kernel(-1.0, &p), 0.0);
}

#[test]
fn learning_window_matches_filtered_target_integral() {
    for tau_q in [2.0, 10.0, 25.0] {
        let p = NeuronParams::builder().tau_q(tau_q).build().unwrap();
        let pattern = InputPattern::single_spikes(&[100.0], 200.0).unwrap();
        for k in 0..=40 {
            let s = -20.0 + 2.0 * k as f64;
            let target = SpikeTrain::new(vec![100.0 + s]).unwrap();
            let want = filt_oracle(&pattern, &SpikeTrain::empty(), &target, 1.0, &p, 0.01)[0];
            let got = filt_window(s, &p);
            assert!((got - want).abs() <= 1e-7 * want.abs().max(1e-3), "tau_q {tau_q} s {s}: {got} vs {want}");
        }
    }
}

#[test]
fn updates_and_distance_match_quadrature() {
    let p = NeuronParams::default();
    for seed in 100..105 {
        let inst = random_instance(seed, 5);
        let eta = 0.37;
        let f = filt_update(&inst.pattern, &inst.actual, &inst.target, eta, &p).dw;
        let fo = filt_oracle(&inst.pattern, &inst.actual, &inst.target, eta, &p, 0.01);
        let i = inst_update(&inst.pattern, &inst.actual, &inst.target, eta, &p).dw;
        let io = inst_oracle(&inst.pattern, &inst.actual, &inst.target, eta, &p);
        for j in 0..5 {
            assert!(rel_err(f[j], fo[j]) <= 1e-6, "filt seed {seed} synapse {j}: {} vs {}", f[j], fo[j]);
            assert!(rel_err(i[j], io[j]) <= 1e-6, "inst seed {seed} synapse {j}: {} vs {}", i[j], io[j]);
        }
        let d = vrd(&inst.actual, &inst.target, p.tau_q());
        let dq = vrd_oracle(&inst.actual, &inst.target, p.tau_q(), 0.01);
        assert!((d - dq).abs() <= 1e-8, "vrd seed {seed}: {d} vs {dq}");
    }
}

#[test]
fn clamped_update_is_likelihood_gradient() {
    let p = NeuronParams::default();
    let dt = 0.1;
    for seed in 200..203 {
        let inst = random_instance(seed, 5);
        let mut r = rng(seed);
        let w = WeightVector((0..5).map(|_| r.gen_range(2.0..8.0)).collect());
        let grad = ml_clamped_update(&inst.pattern, &w, &inst.target, 1.0, &p, dt).unwrap().dw;
        let h = 1e-5;
        for j in 0..5 {
            let mut up = w.clone();
            up.0[j] += h;
            let mut down = w.clone();
            down.0[j] -= h;
            let fd = (log_likelihood(&inst.pattern, &up, &inst.target, &p, dt).unwrap()
                - log_likelihood(&inst.pattern, &down, &inst.target, &p, dt).unwrap())
                / (2.0 * h);
            assert!(rel_err(grad[j], fd) <= 1e-4, "seed {seed} synapse {j}: {} vs {fd}", grad[j]);
        }
    }
}

#[test]
fn firing_time_matches_bisection() {
    let p = NeuronParams::default();
    let (s_peak, _) = psp_peak(&p);
    for w in [15.1, 15.5, 17.0, 20.0, 30.0, 80.0] {
        let (mut lo, mut hi) = (0.0, s_peak);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if w * psp_kernel(mid, &p) >= p.theta() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t = firing_time(w, &p).expect("suprathreshold weight fires");
        assert!((t - hi).abs() <= 1e-9, "w {w}: {t} vs {hi}");
    }
    assert!(firing_time(14.9, &p).is_none());
    assert!((firing_time(15.0, &p).unwrap() - s_peak).abs() < 1e-6);
}

#[test]
fn minimum_target_lag_maximises_the_window() {
    for tau_q in [0.5, 5.0, 10.0, 30.0] {
        let p = NeuronParams::builder().tau_q(tau_q).build().unwrap();
        let best = golden_max(&|s| filt_window(s, &p), 0.0, 20.0, 1e-10);
        assert!((filt_min_target_time(tau_q, &p) - best).abs() <= 1e-6, "tau_q {tau_q}");
    }
}
