use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netid::conditions::{analyze_batch, remove_dependent_edges, AnalysisOptions};
use netid::numeric::{eliminate_dependent_functions, EliminationOptions};
use netid::sample::random_model;
use netid::structure::bipartite_graph;
use netid::{Execution, NetworkModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn ladder() -> NetworkModel {
    NetworkModel::new(
        8,
        [
            (1, 2),
            (2, 3),
            (3, 4),
            (5, 6),
            (6, 7),
            (7, 8),
            (1, 5),
            (2, 6),
            (3, 7),
            (4, 8),
        ],
        [1, 2, 3, 4],
        [5, 6, 7, 8],
    )
    .unwrap()
}

/// Two interleaved rings on twelve vertices, half excited and half measured.
fn wide() -> NetworkModel {
    let n = 12;
    let mut edges: Vec<(usize, usize)> = (1..=n).map(|v| (v, v % n + 1)).collect();
    edges.extend((1..=n).step_by(3).map(|v| (v, (v + 4) % n + 1)));
    NetworkModel::new(n, edges, (1..=n).step_by(2), (2..=n).step_by(2)).unwrap()
}

fn elimination(c: &mut Criterion) {
    let mut group = c.benchmark_group("entry_elimination");
    group.sample_size(20);
    for (name, model) in [("ladder8", ladder()), ("wide12", wide())] {
        for (mode, execution) in MODES {
            let opts = EliminationOptions {
                execution,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(mode, name), &model, |b, m| {
                b.iter(|| eliminate_dependent_functions(m, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn edge_removal(c: &mut Criterion) {
    let mut group = c.benchmark_group("edge_removal");
    let model = wide();
    let graph = bipartite_graph(&model);
    for (mode, execution) in MODES {
        group.bench_function(BenchmarkId::new(mode, "wide12"), |b| {
            b.iter(|| remove_dependent_edges(&model, &graph, None, execution).unwrap())
        });
    }
    group.finish();
}

fn batch(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let models: Vec<NetworkModel> = (0..32)
        .map(|_| random_model(&mut rng, 4..=8, 0.15..=0.5))
        .collect();
    let mut group = c.benchmark_group("batch_analysis");
    group.sample_size(10);
    for (mode, execution) in MODES {
        let opts = AnalysisOptions {
            execution,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::new(mode, "random32"), |b| {
            b.iter(|| analyze_batch(&models, &opts))
        });
    }
    group.finish();
}

criterion_group!(benches, elimination, edge_removal, batch);
criterion_main!(benches);
