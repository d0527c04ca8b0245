//! Sequential vs parallel batch work: oracle queries, signature prediction
//! and an ordered-logit simulation sweep.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use factkit::oracle::{build_index, expected_inference_batch, FeatureSchema};
use factkit::signature::{predict_batch, EnvironmentPolicy, SignatureLexicon};
use factkit::stats::fit_ordered_logistic;
use factkit::{
    Dataset, Environment, EventRecord, Execution, FactualityCategory, FactualityScore, Frame, Polarity, Span, Split,
};

const VERBS: [&str; 8] = ["know", "think", "forget", "manage", "pretend", "say", "realize", "believe"];
const FRAMES: [Frame; 3] = [Frame::VThatS, Frame::WasVedThatS, Frame::VToVpEv];

fn items(n: usize, seed: u64) -> Vec<EventRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let polarity = if rng.random_bool(0.5) { Polarity::Positive } else { Polarity::Negative };
            EventRecord {
                id: format!("mv:bench:{i}"),
                dataset: Dataset::MV,
                split: if i % 2 == 0 { Split::Train } else { Split::Test },
                sentence: "someone knew that something happened".into(),
                tokens: "someone knew that something happened".split(' ').map(String::from).collect(),
                event_span: Span::single(4),
                gold: FactualityScore::new(rng.random_range(-3.0..=3.0)).unwrap(),
                annotations: vec![],
                verb: Some(VERBS[rng.random_range(0..VERBS.len())].to_string()),
                frame: Some(FRAMES[rng.random_range(0..FRAMES.len())]),
                polarity: Some(polarity),
                environment: Some(Environment::from_polarity(polarity)),
                genre: None,
            }
        })
        .collect()
}

fn simulate(seed: u64, n: usize, beta: f64) -> (Vec<f64>, Vec<FactualityCategory>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = rng.random_range(-3.0..3.0);
        let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
        let latent = beta * xi + (u / (1.0 - u)).ln();
        y.push(if latent <= -2.2 {
            FactualityCategory::Minus
        } else if latent <= 0.4 {
            FactualityCategory::Neutral
        } else {
            FactualityCategory::Plus
        });
        x.push(xi);
    }
    (x, y)
}

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn oracle(c: &mut Criterion) {
    let all = items(200_000, 1);
    let (train, test): (Vec<_>, Vec<_>) = all.into_iter().partition(|r| r.split == Split::Train);
    let index = build_index(&train, &FeatureSchema::verb_polarity_frame()).unwrap();
    let mut g = c.benchmark_group("oracle_batch");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, test.len()), &test, |b, t| {
            b.iter(|| black_box(expected_inference_batch(t, &index, exec).unwrap()))
        });
    }
    g.finish();
}

fn signatures(c: &mut Criterion) {
    let all = items(200_000, 2);
    let lex = SignatureLexicon::starter();
    let mut g = c.benchmark_group("signature_batch");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, all.len()), &all, |b, t| {
            b.iter(|| black_box(predict_batch(t, &lex, EnvironmentPolicy::Uniform, exec).unwrap()))
        });
    }
    g.finish();
}

fn simulation_sweep(c: &mut Criterion) {
    let runs = 20;
    let mut g = c.benchmark_group("ordered_logit_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new(name, runs), |b| {
            b.iter(|| {
                black_box(exec.map_range(runs, |i| {
                    let beta = 0.5 + 2.0 * i as f64 / (runs - 1) as f64;
                    let (x, y) = simulate(i as u64, 5000, beta);
                    fit_ordered_logistic(&x, &y).unwrap().beta
                }))
            })
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, signatures, simulation_sweep);
criterion_main!(benches);
