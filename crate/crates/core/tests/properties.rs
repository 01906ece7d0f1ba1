use ehh::network::anova_decompose;
use ehh::sysid::{build_regressors, predict_one_step, IoData, NarxModel, NarxSpec};
use ehh::trainer::{generate_structure, TrainConfig};
use ehh::{train, Dataset, EhhNetwork};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_data(seed: u64, n: usize, len: usize) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..len)
        .map(|_| (0..n).map(|_| r.random_range(-3.0..3.0)).collect())
        .collect();
    let y = rows
        .iter()
        .map(|x| x[0].abs() - x.iter().product::<f64>().tanh())
        .collect();
    Dataset::from_rows(&rows, y).unwrap()
}

/// Random valid structure with roughly `zero_frac` of the weights zeroed.
fn random_network(seed: u64, n: usize, q: usize, extra: usize, zero_frac: f64) -> EhhNetwork {
    let data = random_data(seed, n, 120);
    let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let config = TrainConfig {
        q,
        neurons: n * q + extra,
        ..TrainConfig::default()
    };
    let net = generate_structure(&config, &mut r, &data).unwrap();
    let w = (0..=net.n_nodes())
        .map(|_| {
            if r.random_bool(zero_frac) {
                0.0
            } else {
                r.random_range(-3.0..3.0)
            }
        })
        .collect();
    net.with_weights(w)
}

fn inputs(seed: u64, n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..n).map(|_| r.random_range(-4.0..4.0)).collect())
        .collect()
}

#[test]
fn trained_model_survives_serialization_exactly() {
    let data = random_data(11, 3, 300);
    let config = TrainConfig {
        q: 3,
        neurons: 24,
        max_cycles: 3,
        seed: 2,
        ..TrainConfig::default()
    };
    let (net, _) = train(&config, &data).unwrap();
    let back = EhhNetwork::from_json(&net.to_json().unwrap()).unwrap();
    assert_eq!(back, net);
    for x in inputs(12, 3, 1000) {
        assert_eq!(net.predict(&x).unwrap().to_bits(), back.predict(&x).unwrap().to_bits());
    }
}

#[test]
fn model_file_round_trip_through_disk() {
    let net = random_network(3, 4, 2, 10, 0.2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.json");
    net.save(&path).unwrap();
    let back = EhhNetwork::load(&path).unwrap();
    for x in inputs(4, 4, 1000) {
        assert_eq!(net.predict(&x).unwrap().to_bits(), back.predict(&x).unwrap().to_bits());
    }
}

#[test]
fn narx_model_predicts_like_its_network() {
    let spec = NarxSpec::new(2, 1, true).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let u: Vec<f64> = (0..200).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut y = vec![0.0; 200];
    for k in 2..200 {
        y[k] = 0.5 * y[k - 1] - 0.2 * y[k - 2] + u[k] * u[k - 1].abs();
    }
    let io = IoData::new(u, y).unwrap();
    let data = build_regressors(&io, &spec).unwrap();
    let (net, _) = train(
        &TrainConfig {
            q: 2,
            neurons: 14,
            max_cycles: 2,
            ..TrainConfig::default()
        },
        &data,
    )
    .unwrap();
    let model = NarxModel::new(spec, net).unwrap();
    let back = NarxModel::from_json(&model.to_json().unwrap()).unwrap();
    let a = predict_one_step(&model.model, &io, &spec).unwrap();
    let b = predict_one_step(&back.model, &io, &back.narx).unwrap();
    assert_eq!(a, b);
    let batch: Vec<f64> = model
        .model
        .predict_batch(&data.inputs)
        .unwrap()
        .iter()
        .copied()
        .collect();
    assert_eq!(a, batch);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nodes_equal_their_min_form(seed in 0u64..100_000, n in 2usize..5, q in 1usize..4, extra in 1usize..12) {
        let extra = extra.min(((q + 1).pow(n as u32) - 1 - n * q) / 2).max(1);
        let net = random_network(seed, n, q, extra, 0.0);
        prop_assert!(net.validate().is_empty());
        for x in inputs(seed, n, 50) {
            let nodes = net.forward(&x).unwrap().nodes;
            for j in 0..net.n_nodes() {
                let min = net.min_form(j).into_iter().map(|k| nodes[k]).fold(f64::INFINITY, f64::min);
                prop_assert_eq!(nodes[j], min);
            }
        }
    }

    #[test]
    fn pruning_preserves_the_function(seed in 0u64..100_000, zero_frac in 0.0f64..0.9) {
        let net = random_network(seed, 3, 3, 15, zero_frac);
        let pruned = net.prune();
        prop_assert!(pruned.validate().is_empty());
        prop_assert!(pruned.n_nodes() <= net.n_nodes());
        // pruning reaches a fixpoint in one call
        prop_assert_eq!(pruned.prune(), pruned.clone());
        for x in inputs(seed, 3, 50) {
            prop_assert!((pruned.predict(&x).unwrap() - net.predict(&x).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn anova_functions_sum_to_the_output(seed in 0u64..100_000) {
        let net = random_network(seed, 4, 2, 12, 0.3);
        let report = anova_decompose(&net);
        let mut covered: Vec<usize> = report.entries.iter().flat_map(|e| e.neurons.clone()).collect();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..net.n_nodes()).collect::<Vec<_>>());
        for e in &report.entries {
            for &k in &e.neurons {
                prop_assert_eq!(net.variable_set(k), e.variables.clone());
            }
        }
        for x in inputs(seed, 4, 50) {
            let f = net.forward(&x).unwrap();
            let sum = net.weights()[0] + report.entries.iter().map(|e| e.evaluate(&net, &f.nodes)).sum::<f64>();
            prop_assert!((sum - f.output).abs() <= 1e-12);
        }
    }

    #[test]
    fn interaction_matrix_matches_min_form(seed in 0u64..100_000) {
        let net = random_network(seed, 3, 2, 10, 0.0);
        let ir = net.interaction_matrix();
        for j in net.n_sources()..net.n_nodes() {
            let from_ir: Vec<usize> = ir.sources_of(j).to_vec();
            let from_form: Vec<usize> = net.min_form(j).into_iter().collect();
            prop_assert_eq!(from_ir, from_form);
        }
        prop_assert!(net.adjacency().validate().is_empty());
    }
}
