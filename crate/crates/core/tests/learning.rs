mod common;

use common::*;
use rand::Rng;
use sublinear_core::*;

fn dataset(seed: u64, n: usize) -> Vec<LabeledExample<i8>> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| {
            let order = r.random_range(2..=4);
            let g = random_graph(&mut r, order, 2);
            LabeledExample::new(g, if r.random_bool(0.5) { 1 } else { -1 })
        })
        .collect()
}

#[test]
fn training_is_invariant_to_node_order() {
    for seed in 0..5 {
        let data = dataset(seed, 12);
        let mut r = rng(1000 + seed);
        let permuted: Vec<_> = data
            .iter()
            .map(|e| {
                let p = random_permutation(&mut r, e.graph.order());
                LabeledExample::new(e.graph.permuted(&p).unwrap(), e.label)
            })
            .collect();
        let cfg = TrainConfig {
            learning_rate: 0.3,
            margin: 0.1,
            max_epochs: 5,
            seed,
            ..TrainConfig::default()
        };
        let (a, _) = train_binary(&data, &cfg).unwrap();
        let (b, _) = train_binary(&permuted, &cfg).unwrap();
        for _ in 0..20 {
            let q = random_graph(&mut r, 3, 2);
            let (fa, fb) = (a.evaluate(&q).unwrap(), b.evaluate(&q).unwrap());
            assert!((fa - fb).abs() <= 1e-9 * fa.abs().max(1.0), "{fa} vs {fb}");
        }
    }
}

#[test]
fn trace_is_consistent() {
    let data = dataset(7, 20);
    let cfg = TrainConfig {
        max_epochs: 4,
        stop_when_separated: false,
        ..TrainConfig::default()
    };
    let (_, trace) = train_binary(&data, &cfg).unwrap();
    assert_eq!(trace.epochs.len(), 4);
    assert_eq!(trace.total_updates, trace.epochs.iter().map(|e| e.updates).sum::<usize>());
    assert_eq!(trace.matcher_calls, 4 * data.len());
    if trace.converged {
        assert_eq!(trace.epochs.last().unwrap().updates, 0);
    }
}

#[test]
fn weight_order_knob_controls_capacity() {
    let data = dataset(3, 10);
    for order in [1, 2, 6] {
        let cfg = TrainConfig {
            weight_order: Some(order),
            max_epochs: 2,
            ..TrainConfig::default()
        };
        let (m, _) = train_binary(&data, &cfg).unwrap();
        assert_eq!(m.weight_rep().order(), order);
    }
    let (m, _) = train_binary(&data, &TrainConfig { max_epochs: 1, ..TrainConfig::default() }).unwrap();
    assert_eq!(m.weight_rep().order(), 4);
}

#[test]
fn two_class_ova_agrees_with_binary_sign() {
    // well separated scalar clusters
    let mut r = rng(5);
    let mut data = Vec::new();
    for i in 0..16 {
        let c = i % 2;
        let centre = if c == 0 { 3.0 } else { -3.0 };
        let g = AttributedGraph::from_nodes(1, &[[centre + r.random_range(-0.5..0.5)]]).unwrap();
        data.push(LabeledExample::new(g, c));
    }
    let classes = vec!["pos".to_string(), "neg".to_string()];
    let cfg = TrainConfig { margin: 0.5, ..TrainConfig::default() };
    let (ova, _) = train_one_vs_all(&data, &classes, &cfg).unwrap();
    let binary: Vec<_> = data
        .iter()
        .map(|e| LabeledExample::new(e.graph.clone(), if e.label == 0 { 1 } else { -1 }))
        .collect();
    let (bin, trace) = train_binary(&binary, &cfg).unwrap();
    assert!(trace.converged);
    for e in &data {
        let ova_pos = ova.predict(&e.graph).unwrap() == 0;
        assert_eq!(ova_pos, bin.classify(&e.graph).unwrap() == 1);
    }
}
