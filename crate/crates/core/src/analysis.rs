//! Single-synapse analysis: one input spike at 0 ms, one target spike at
//! `t_ref`, and at most one output spike on the rising flank of the PSP.

use serde::Serialize;

use crate::kernels::{filt_min_target_time, filt_window, psp_kernel, psp_peak, NeuronParams};
use crate::plasticity::Rule;

/// Weight change predicted at weight `w` (learning rate 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub w: f64,
    pub dw: f64,
    pub fires: bool,
}

/// Smallest weight that makes the neuron fire, `theta / eps_peak`.
pub fn threshold_weight(p: &NeuronParams) -> f64 {
    p.theta() / psp_peak(p).1
}

/// Output spike time for weight `w`, or `None` if the PSP never reaches
/// threshold. Uses the closed form when `tau_s = tau_m / 2` and bisection on
/// the rising flank otherwise.
pub fn firing_time(w: f64, p: &NeuronParams) -> Option<f64> {
    let w_min = threshold_weight(p);
    if !(w > 0.0 && w >= w_min * (1.0 - 1e-12)) {
        return None;
    }
    let (s_peak, _) = psp_peak(p);
    if (p.tau_s() - 0.5 * p.tau_m()).abs() <= 1e-12 * p.tau_m() {
        let disc = (1.0 - 4.0 * p.theta() / (p.eps0() * w)).max(0.0);
        let t = p.tau_m() * (2.0 / (1.0 + disc.sqrt())).ln();
        return Some(t.min(s_peak));
    }
    // w * eps(t) - theta is increasing on [0, s_peak].
    let f = |t: f64| w * psp_kernel(t, p) - p.theta();
    if f(s_peak) <= 0.0 {
        return Some(s_peak);
    }
    let (mut lo, mut hi) = (0.0, s_peak);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 * s_peak {
            break;
        }
    }
    Some(hi)
}

/// Instantaneous-error phase portrait: `eps(t_ref) - theta / w` when the
/// neuron fires, `eps(t_ref)` otherwise.
pub fn inst_phase(w: f64, t_ref: f64, p: &NeuronParams) -> PhasePoint {
    let target = psp_kernel(t_ref, p);
    match firing_time(w, p) {
        Some(_) => PhasePoint { w, dw: target - p.theta() / w, fires: true },
        None => PhasePoint { w, dw: target, fires: false },
    }
}

/// Filtered-error phase portrait: `lambda(t_ref) - lambda(t_i)` when the
/// neuron fires at `t_i`, `lambda(t_ref)` otherwise.
pub fn filt_phase(w: f64, t_ref: f64, p: &NeuronParams) -> PhasePoint {
    let target = filt_window(t_ref, p);
    match firing_time(w, p) {
        Some(t) => PhasePoint { w, dw: target - filt_window(t, p), fires: true },
        None => PhasePoint { w, dw: target, fires: false },
    }
}

pub fn phase(rule: Rule, w: f64, t_ref: f64, p: &NeuronParams) -> PhasePoint {
    match rule {
        Rule::Inst => inst_phase(w, t_ref, p),
        Rule::Filt => filt_phase(w, t_ref, p),
    }
}

/// Weight at which the output spike lands on `t_ref`, if that lag is on the
/// rising flank.
pub fn target_weight(t_ref: f64, p: &NeuronParams) -> Option<f64> {
    let (s_peak, _) = psp_peak(p);
    (t_ref > 0.0 && t_ref <= s_peak).then(|| p.theta() / psp_kernel(t_ref, p))
}

/// Points `start, start + step, ...` up to `end` inclusive.
pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && end >= start, "grid needs step > 0 and end >= start");
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}

/// Weight change against `t_ref - t_pre` with no actual output spike.
pub fn learning_window_curve(rule: Rule, start: f64, end: f64, step: f64, p: &NeuronParams) -> Vec<(f64, f64)> {
    grid(start, end, step)
        .into_iter()
        .map(|s| {
            let dw = match rule {
                Rule::Inst => psp_kernel(s, p),
                Rule::Filt => filt_window(s, p),
            };
            (s, dw)
        })
        .collect()
}

/// Minimum stable target lag against the filter constant.
pub fn tmin_curve(start: f64, end: f64, step: f64, p: &NeuronParams) -> Vec<(f64, f64)> {
    grid(start, end, step)
        .into_iter()
        .map(|q| (q, filt_min_target_time(q, p)))
        .collect()
}

pub fn phase_portrait(rule: Rule, t_ref: f64, w_start: f64, w_end: f64, w_step: f64, p: &NeuronParams) -> Vec<PhasePoint> {
    grid(w_start, w_end, w_step)
        .into_iter()
        .map(|w| phase(rule, w, t_ref, p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuron::{simulate_spikes, InputPattern, WeightVector};
    use approx::assert_relative_eq;

    fn p() -> NeuronParams {
        NeuronParams::default()
    }

    /// Golden-section maximisation, independent of any closed form.
    fn golden_argmax(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        while (b - a).abs() > 1e-12 {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - r * (b - a);
            d = a + r * (b - a);
        }
        0.5 * (a + b)
    }

    #[test]
    fn firing_time_examples() {
        let p = p();
        assert_relative_eq!(firing_time(15.0, &p).unwrap(), 10.0 * 2f64.ln(), max_relative = 1e-6);
        assert_relative_eq!(firing_time(20.0, &p).unwrap(), 10.0 * (4.0f64 / 3.0).ln(), max_relative = 1e-12);
        assert!(firing_time(14.0, &p).is_none());
        assert!(firing_time(-20.0, &p).is_none());
    }

    #[test]
    fn bisection_matches_closed_form() {
        let p = p();
        // Nudge tau_s off the closed-form ratio by a negligible amount.
        let q = NeuronParams::builder().tau_s(5.0 + 1e-9).build().unwrap();
        for w in [15.5, 17.0, 20.0, 30.0, 100.0] {
            let a = firing_time(w, &p).unwrap();
            let b = firing_time(w, &q).unwrap();
            assert!((a - b).abs() < 1e-6, "w={w}: {a} vs {b}");
        }
        let r = NeuronParams::builder().tau_s(3.0).eps0(4.0).build().unwrap();
        let t = firing_time(30.0, &r).unwrap();
        assert_relative_eq!(30.0 * psp_kernel(t, &r), r.theta(), max_relative = 1e-9);
    }

    #[test]
    fn firing_time_agrees_with_simulation() {
        let p = p();
        let pat = InputPattern::single_spikes(&[0.0], 50.0).unwrap();
        let dt = 0.1;
        for w in [15.5, 17.0, 20.0, 30.0] {
            let closed = firing_time(w, &p).unwrap();
            let sim = simulate_spikes(&pat, &WeightVector(vec![w]), &p, dt).unwrap();
            let first = sim.times()[0];
            assert!(first >= closed - 1e-9 && first - closed <= dt + 1e-9, "w={w}: {first} vs {closed}");
        }
    }

    #[test]
    fn inst_phase_examples() {
        let p = p();
        let eps4 = psp_kernel(4.0, &p);
        let quiet = inst_phase(10.0, 4.0, &p);
        assert!(!quiet.fires);
        assert_relative_eq!(quiet.dw, 0.8839, epsilon = 1e-4);
        assert_relative_eq!(inst_phase(20.0, 4.0, &p).dw, eps4 - 0.75, max_relative = 1e-12);
        assert_relative_eq!(inst_phase(20.0, 4.0, &p).dw, 0.1339, epsilon = 1e-4);
        let w_star = target_weight(4.0, &p).unwrap();
        assert_relative_eq!(w_star, 16.970, epsilon = 1e-3);
        assert!(inst_phase(w_star, 4.0, &p).dw.abs() < 1e-12);
    }

    #[test]
    fn filt_phase_examples() {
        let p = p();
        assert_relative_eq!(filt_phase(10.0, 4.0, &p).dw, 0.7416, epsilon = 1e-4);
        let w_star = target_weight(4.0, &p).unwrap();
        assert!(filt_phase(w_star, 4.0, &p).dw.abs() < 1e-9);
        let d20 = filt_phase(20.0, 4.0, &p).dw;
        assert_relative_eq!(d20, filt_window(4.0, &p) - 0.75, max_relative = 1e-9);
        assert!(d20 < 0.0 && d20 > -0.01);
    }

    #[test]
    fn phase_points_fire_above_threshold_weight() {
        let p = p();
        for rule in Rule::ALL {
            for pt in phase_portrait(rule, 4.0, 0.0, 40.0, 0.25, &p) {
                assert_eq!(pt.fires, pt.w >= 15.0, "w={}", pt.w);
            }
        }
    }

    #[test]
    fn inst_has_single_sign_change_and_jump() {
        let p = p();
        let (s_peak, _) = psp_peak(&p);
        let t_min = filt_min_target_time(p.tau_q(), &p);
        for t_ref in [3.0, 4.0, 5.5, 6.5] {
            assert!(t_ref > t_min && t_ref < s_peak);
            let w_star = p.theta() / psp_kernel(t_ref, &p);
            let pts = phase_portrait(Rule::Inst, t_ref, 15.0 + 1e-6, 80.0, 0.01, &p);
            let changes: Vec<f64> = pts
                .windows(2)
                .filter(|w| w[0].dw.signum() != w[1].dw.signum())
                .map(|w| w[1].w)
                .collect();
            assert_eq!(changes.len(), 1);
            assert!((changes[0] - w_star).abs() <= 0.011);
            let below = inst_phase(15.0 - 1e-9, t_ref, &p).dw;
            let above = inst_phase(15.0, t_ref, &p).dw;
            assert!(below > 0.0 && above < 0.0);
        }
    }

    #[test]
    fn filt_attractor_above_min_target_time() {
        let p = p();
        let (s_peak, _) = psp_peak(&p);
        let t_min = filt_min_target_time(p.tau_q(), &p);
        // Weight whose firing time is exactly t_min.
        let w_upper = p.theta() / psp_kernel(t_min, &p);
        for t_ref in [3.5, 4.0, 5.0, 6.5] {
            assert!(t_ref > t_min && t_ref < s_peak);
            let w_star = target_weight(t_ref, &p).unwrap();
            for w in grid(15.0 + 1e-6, w_star - 1e-3, 0.01) {
                assert!(filt_phase(w, t_ref, &p).dw > 0.0, "t_ref={t_ref}, w={w}");
            }
            for w in grid(w_star + 1e-3, w_upper - 1e-3, 0.01) {
                assert!(filt_phase(w, t_ref, &p).dw < 0.0, "t_ref={t_ref}, w={w}");
            }
        }
    }

    #[test]
    fn filt_repels_below_min_target_time() {
        let p = p();
        let t_min = filt_min_target_time(p.tau_q(), &p);
        for t_ref in [1.0, 2.0, 2.5] {
            assert!(t_ref < t_min);
            let w_star = target_weight(t_ref, &p).unwrap();
            let h = 1e-3 * w_star;
            assert!(filt_phase(w_star + h, t_ref, &p).dw > 0.0);
            assert!(filt_phase(w_star - h, t_ref, &p).dw < 0.0);
        }
    }

    #[test]
    fn window_argmax_matches_min_target_time() {
        for tau_q in [1.0, 5.0, 10.0, 20.0, 40.0] {
            let p = NeuronParams::builder().tau_q(tau_q).build().unwrap();
            let arg = golden_argmax(|s| filt_window(s, &p), 1e-9, 50.0);
            assert!((arg - filt_min_target_time(tau_q, &p)).abs() < 1e-5, "tau_q={tau_q}");
        }
    }

    #[test]
    fn learning_window_curves() {
        let p = p();
        let inst = learning_window_curve(Rule::Inst, -20.0, 50.0, 0.001, &p);
        let filt = learning_window_curve(Rule::Filt, -20.0, 50.0, 0.001, &p);
        let at = |c: &[(f64, f64)], s: f64| c.iter().find(|(x, _)| (x - s).abs() < 1e-6).unwrap().1;
        assert_eq!(at(&inst, -2.0), 0.0);
        assert_relative_eq!(at(&filt, -2.0), 0.5458, epsilon = 1e-4);
        let argmax = |c: &[(f64, f64)]| c.iter().copied().fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a }).0;
        assert!((argmax(&inst) - 6.9315).abs() < 1e-3);
        assert!((argmax(&filt) - 2.877).abs() < 1e-3);
    }

    #[test]
    fn tmin_curve_delegates() {
        let p = p();
        let c = tmin_curve(0.0, 40.0, 10.0, &p);
        assert_eq!(c.len(), 5);
        assert_relative_eq!(c[0].1, 6.9315, epsilon = 1e-4);
        assert_relative_eq!(c[1].1, 2.877, epsilon = 1e-3);
        assert_relative_eq!(c[4].1, 1.054, epsilon = 1e-3);
    }
}
