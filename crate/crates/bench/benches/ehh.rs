use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use ehh::trainer::{lasso_admm, structure_step_column, structure_step_element, AdmmSettings, TrainConfig};
use ehh_bench::{narendra_li_data, narendra_li_network, training_state};

fn forward(c: &mut Criterion) {
    let data = narendra_li_data(0);
    let net = narendra_li_network(&data, 1);
    c.bench_function("predict_batch 2000x6, 70 nodes", |b| {
        b.iter(|| net.predict_batch(black_box(&data.inputs)).unwrap())
    });
    c.bench_function("data_matrix 2000x71", |b| {
        b.iter(|| net.data_matrix(black_box(&data.inputs)).unwrap())
    });
}

fn lasso(c: &mut Criterion) {
    let data = narendra_li_data(0);
    let z = narendra_li_network(&data, 1).data_matrix(&data.inputs).unwrap();
    let settings = AdmmSettings::default();
    c.bench_function("lasso_admm 2000x71", |b| {
        b.iter(|| lasso_admm(black_box(&z), &data.targets, 1.0, &settings).unwrap())
    });
}

fn structure(c: &mut Criterion) {
    let data = narendra_li_data(0);
    let state = training_state(&data, 1);
    let last = state.network.n_nodes() - 1;
    c.bench_function("column step, last node", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| structure_step_column(&mut s, last, &data).unwrap(),
            BatchSize::LargeInput,
        )
    });
    c.bench_function("element step, last node", |b| {
        b.iter_batched(
            || state.clone(),
            |mut s| structure_step_element(&mut s, last, &data).unwrap(),
            BatchSize::LargeInput,
        )
    });
}

fn training(c: &mut Criterion) {
    let data = narendra_li_data(0);
    let config = TrainConfig {
        max_cycles: 3,
        ..TrainConfig::default()
    };
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("benchmark size, 3 cycles", |b| {
        b.iter(|| ehh::train(&config, &data).unwrap())
    });
    group.finish();
}

criterion_group!(benches, forward, lasso, structure, training);
criterion_main!(benches);
