//! Fixtures shared by the benchmarks: benchmark-sized data and networks.

use ehh::sysid::{build_regressors, narendra_li_generate, NarxSpec};
use ehh::trainer::{generate_structure, TrainConfig, TrainState};
use ehh::{Dataset, EhhNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Regressors for 2000 noisy benchmark samples.
pub fn narendra_li_data(seed: u64) -> Dataset {
    let (train, _) = narendra_li_generate(2000, 0.1, &mut ChaCha8Rng::seed_from_u64(seed));
    build_regressors(&train, &NarxSpec::narendra_li()).expect("benchmark record is long enough")
}

/// The 30 + 40 node structure used on the benchmark, with random weights.
pub fn narendra_li_network(data: &Dataset, seed: u64) -> EhhNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let net = generate_structure(&config, &mut rng, data).expect("valid benchmark structure");
    let w = (0..=net.n_nodes()).map(|_| rng.random_range(-1.0..1.0)).collect();
    net.with_weights(w)
}

pub fn training_state(data: &Dataset, seed: u64) -> TrainState {
    let net = narendra_li_network(data, seed);
    TrainState::new(net, 1.0, 0.1, data, true).expect("dimensions agree")
}
