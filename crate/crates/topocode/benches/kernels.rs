use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use topocode::graph_core::{count_spanning_trees, Graph, TreeCountKind};
use topocode::labeling_engine::{search, ConstraintSpec, Family, SearchConfig};
use topocode::string_algebra::{DigitString, Ring};
use topocode::topcode::{pronbs_solve, PronbsBounds};
use topocode::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("auto", Exec::Auto)];

fn spanning_trees(c: &mut Criterion) {
    let mut g = c.benchmark_group("count_spanning_trees");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, "K7"), &exec, |b, &exec| {
            b.iter(|| count_spanning_trees(black_box(TreeCountKind::Complete(7)), 0, exec).unwrap())
        });
    }
    g.finish();
}

fn pronbs(c: &mut Criterion) {
    let s = DigitString::parse("1235321343434", Ring::Mod10).unwrap();
    let bounds = PronbsBounds::default();
    let mut g = c.benchmark_group("pronbs_solve");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::new(name, s.len()), &exec, |b, &exec| {
            b.iter(|| pronbs_solve(black_box(&s), &bounds, exec).unwrap())
        });
    }
    g.finish();
}

fn labeling_search(c: &mut Criterion) {
    // K_5 is not graceful, so the whole space is explored.
    let k5 = Graph::complete(5);
    let spec = ConstraintSpec::labeling(Family::Graceful);
    let mut g = c.benchmark_group("graceful_search_k5");
    g.sample_size(10);
    for (name, exec) in MODES {
        let cfg = SearchConfig { exec, ..SearchConfig::default() };
        g.bench_with_input(BenchmarkId::new(name, "K5"), &cfg, |b, cfg| {
            b.iter(|| search(black_box(&k5), &spec, cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, spanning_trees, pronbs, labeling_search);
criterion_main!(benches);
