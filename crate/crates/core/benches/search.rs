// SPDX-License-Identifier: Apache-2.0

//! Sequential vs rayon execution of query batches and similarity scans, and
//! the three search algorithms side by side.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kicq::graph::extend_graph_keywords;
use kicq::synth::{generate, keyword_name, SynthConfig};
use kicq::workload::{run_batch, sample_queries};
use kicq::{build_inverted_index, Algorithm, Execution, KicTree, Metric, Predicate, QueryParams, SimilarityModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn workload() -> (kicq::AttributedGraph, Vec<kicq::KicQuery>) {
    let g = generate(&SynthConfig {
        vertices: 5000,
        edges: 40_000,
        keywords: 20,
        zipf_exponent: 1.2,
        ..SynthConfig::default()
    })
    .unwrap();
    let idx = build_inverted_index(&g);
    let params = QueryParams {
        k_min: 3,
        ..QueryParams::default()
    };
    let queries = sample_queries(&idx, 32, 2, Predicate::Or, &params, 1, 7).unwrap();
    (g, queries)
}

fn batch(c: &mut Criterion) {
    let (g, queries) = workload();
    let idx = build_inverted_index(&g);
    let tree = KicTree::build(&g);
    let mut group = c.benchmark_group("batch");
    group.sample_size(10);
    for algo in Algorithm::ALL {
        for exec in MODES {
            group.bench_with_input(BenchmarkId::new(algo.to_string(), exec), &exec, |b, &exec| {
                b.iter(|| black_box(run_batch(&g, &idx, Some(&tree), &queries, algo, exec).unwrap()))
            });
        }
    }
    group.finish();
}

/// Random 50-dimensional vectors for `kw0..kw{words}`, covering the
/// synthetic graph keywords.
fn embedding_model(words: usize) -> SimilarityModel {
    let mut r = ChaCha8Rng::seed_from_u64(3);
    let entries: Vec<(String, Vec<f64>)> = (0..words)
        .map(|i| (keyword_name(i), (0..50).map(|_| r.random_range(-1.0..1.0)).collect()))
        .collect();
    SimilarityModel::from_vectors(entries, 15, Metric::IndirectCosine).unwrap()
}

fn similarity(c: &mut Criterion) {
    let model = embedding_model(300);
    let g = generate(&SynthConfig {
        vertices: 2000,
        edges: 8000,
        keywords: 120,
        ..SynthConfig::default()
    })
    .unwrap();
    let mut group = c.benchmark_group("augment");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(exec), &exec, |b, &exec| {
            b.iter(|| black_box(extend_graph_keywords(&g, &model, 10, exec).unwrap()))
        });
    }
    group.finish();
}

fn index_build(c: &mut Criterion) {
    let (g, _) = workload();
    c.bench_function("kictree_build", |b| b.iter(|| black_box(KicTree::build(&g))));
}

criterion_group!(benches, batch, similarity, index_build);
criterion_main!(benches);
