use proptest::prelude::*;
use spikefilt::metrics::vrd;
use spikefilt::neuron::simulate_spikes;
use spikefilt::tasks::{single_run, TaskConfig};
use spikefilt::{InputPattern, NeuronParams, Rule, SpikeTrain, WeightVector};

fn train(max_len: usize) -> impl Strategy<Value = SpikeTrain> {
    prop::collection::vec(0.0f64..200.0, 0..max_len).prop_map(|t| SpikeTrain::from_unsorted(t).unwrap())
}

fn pattern_and_weights() -> impl Strategy<Value = (InputPattern, WeightVector)> {
    prop::collection::vec((0.0f64..150.0, -5.0f64..30.0), 1..12).prop_map(|v| {
        let times: Vec<f64> = v.iter().map(|x| x.0).collect();
        let w = v.iter().map(|x| x.1).collect();
        (InputPattern::single_spikes(&times, 200.0).unwrap(), WeightVector(w))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vrd_is_a_squared_metric(a in train(6), b in train(6), c in train(6)) {
        let d = |x: &SpikeTrain, y: &SpikeTrain| vrd(x, y, 10.0).max(0.0).sqrt();
        prop_assert!(vrd(&a, &a, 10.0).abs() < 1e-9);
        prop_assert!((vrd(&a, &b, 10.0) - vrd(&b, &a, 10.0)).abs() < 1e-9);
        prop_assert!(vrd(&a, &b, 10.0) >= -1e-9);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-6);
    }

    #[test]
    fn simulation_is_deterministic_and_in_window((pat, w) in pattern_and_weights()) {
        let p = NeuronParams::default();
        let a = simulate_spikes(&pat, &w, &p, 0.1).unwrap();
        let b = simulate_spikes(&pat, &w, &p, 0.1).unwrap();
        prop_assert_eq!(a.times(), b.times());
        prop_assert!(a.within(pat.duration()));
    }

    #[test]
    fn updates_vanish_on_target((pat, w) in pattern_and_weights()) {
        let p = NeuronParams::default();
        let out = simulate_spikes(&pat, &w, &p, 0.1).unwrap();
        for rule in Rule::ALL {
            let u = rule.update(&pat, &out, &out, 3.0, &p);
            prop_assert!(u.dw.iter().all(|x| x.abs() < 1e-12), "{rule}: {:?}", u.dw);
        }
    }

    #[test]
    fn updates_scale_with_rate((pat, w) in pattern_and_weights(), target in train(4), eta in 0.1f64..10.0) {
        let p = NeuronParams::default();
        let out = simulate_spikes(&pat, &w, &p, 0.1).unwrap();
        for rule in Rule::ALL {
            let one = rule.update(&pat, &out, &target, 1.0, &p).dw;
            let many = rule.update(&pat, &out, &target, eta, &p).dw;
            for (x, y) in one.iter().zip(&many) {
                prop_assert!((x * eta - y).abs() <= 1e-9 * (1.0 + y.abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn training_is_reproducible(seed in any::<u64>(), run in 0usize..4) {
        let config = TaskConfig { n_inputs: 20, n_patterns: 2, n_classes: 2, epochs: 3, seed, ..TaskConfig::default() };
        let (_, a) = single_run(&config, Rule::Filt, run, &NeuronParams::default()).unwrap();
        let (_, b) = single_run(&config, Rule::Filt, run, &NeuronParams::default()).unwrap();
        prop_assert_eq!(a.weights.as_slice(), b.weights.as_slice());
        prop_assert_eq!(a.history.epochs.len(), 3);
    }
}
