use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use spherecode_core::channel::sample_gmm;
use spherecode_core::codebook::{min_distance, min_distance_reference};
use spherecode_core::decoders::{decode_nn, estimate_error_prob};
use spherecode_core::learner::{step1_screen, LocalTest};
use spherecode_core::rng::derived_rng;
use spherecode_core::sphere::build_net;
use spherecode_core::{noise_for_beta, sample_codebook, Decoder, NetConfig, TestKind};

fn bench_decode_nn(c: &mut Criterion) {
    let mut g = c.benchmark_group("decode_nn");
    for &(d, k) in &[(16usize, 64usize), (128, 256), (16, 2981)] {
        let mut rng = derived_rng(1, &[d as u64, k as u64]);
        let cb = sample_codebook(d, k, &mut rng).unwrap();
        let sigma2 = noise_for_beta(d, k, 1.0).unwrap().sigma2;
        let batch = sample_gmm(&cb, sigma2, 64, &mut rng).unwrap();
        let obs = batch.observations();
        g.bench_with_input(BenchmarkId::from_parameter(format!("d{d}_k{k}")), &obs, |b, obs| {
            b.iter(|| {
                let mut acc = 0usize;
                for y in obs.iter() {
                    acc += decode_nn(&cb, black_box(y)).unwrap();
                }
                acc
            })
        });
    }
    g.finish();
}

fn bench_error_prob(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate_error_prob");
    g.sample_size(10);
    let cb = sample_codebook(128, 256, &mut derived_rng(2, &[])).unwrap();
    let sigma2 = noise_for_beta(128, 256, 1.0).unwrap().sigma2;
    g.bench_function("d128_k256_nn_2000", |b| {
        b.iter(|| estimate_error_prob(&cb, sigma2, &Decoder::Nn, 2000, black_box(7)).unwrap())
    });
    g.finish();
}

fn bench_step1(c: &mut Criterion) {
    let mut g = c.benchmark_group("step1_screen");
    g.sample_size(10);
    let (d, k, eps_i) = (6usize, 4usize, 0.25);
    let mut rng = derived_rng(3, &[]);
    let cb = sample_codebook(d, k, &mut rng).unwrap();
    let sigma2 = noise_for_beta(d, k, 2.0).unwrap().sigma2;
    let net = build_net(d, eps_i, &NetConfig::default(), &mut rng).unwrap();
    let batch = sample_gmm(&cb, sigma2, 2000, &mut rng).unwrap();
    let test = LocalTest::new(TestKind::ZeroRate, d, eps_i, sigma2);
    g.bench_function(format!("net{}_n2000", net.len()), |b| {
        b.iter(|| step1_screen(&net, batch.observations(), &test, k, 0.25).unwrap())
    });
    g.finish();
}

fn bench_min_distance(c: &mut Criterion) {
    let mut g = c.benchmark_group("min_distance");
    let cb = sample_codebook(16, 2981, &mut derived_rng(4, &[])).unwrap();
    g.sample_size(10);
    g.bench_function("fast_d16_k2981", |b| b.iter(|| min_distance(black_box(&cb))));
    g.bench_function("reference_d16_k2981", |b| b.iter(|| min_distance_reference(black_box(&cb))));
    g.finish();
}

criterion_group!(benches, bench_decode_nn, bench_error_prob, bench_step1, bench_min_distance);
criterion_main!(benches);
