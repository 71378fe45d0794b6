//! Data-parallel versus sequential timings for the hot paths: analyzing a
//! random corpus, per-transition loop mode, and multi-bound oracle runs.
//! Both paths run the same code; the parallel one fans out over rayon.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use vass::complexity::is_generalized_conservative;
use vass::generate::{corpus, CorpusSpec};
use vass::oracle::{estimate_exponent, OracleBudget};
use vass::ranking::{analyze, AnalyzeOptions, SolveMode};
use vass::Vass;

fn corpus_for_bench() -> Vec<Vass> {
    corpus(0xbeef, 60, &CorpusSpec::default())
}

fn options(mode: SolveMode, parallel: bool) -> AnalyzeOptions {
    AnalyzeOptions {
        mode,
        parallel,
        ..AnalyzeOptions::default()
    }
}

fn bench_corpus_analysis(c: &mut Criterion) {
    let instances = corpus_for_bench();
    let mut group = c.benchmark_group("corpus_analyze");
    for (name, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let opts = options(SolveMode::PrimalDual, parallel);
                let verdicts: Vec<bool> = instances
                    .iter()
                    .map(|v| analyze(v, &opts).unwrap().is_terminating())
                    .collect();
                black_box(verdicts)
            })
        });
    }
    group.finish();
}

fn bench_loop_mode(c: &mut Criterion) {
    let v = vass::fixtures::vcsys();
    let mut group = c.benchmark_group("loop_mode_vcsys");
    for (name, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let opts = options(SolveMode::Loop, parallel);
                black_box(analyze(&v, &opts).unwrap().is_terminating())
            })
        });
    }
    group.finish();
}

fn bench_mode_comparison(c: &mut Criterion) {
    let instances = corpus_for_bench();
    let mut group = c.benchmark_group("solve_mode");
    for (name, mode) in [
        ("primal_dual", SolveMode::PrimalDual),
        ("per_transition_loop", SolveMode::Loop),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let opts = options(mode, true);
                let orders: Vec<Option<usize>> = instances
                    .iter()
                    .map(|v| analyze(v, &opts).unwrap().order())
                    .collect();
                black_box(orders)
            })
        });
    }
    group.finish();
}

fn bench_oracle_multi_bound(c: &mut Criterion) {
    let v = vass::fixtures::vcsys();
    let budget = OracleBudget::default();
    let bounds = [2u64, 4, 6, 8, 10, 12];
    let mut group = c.benchmark_group("oracle_exponent_vcsys");
    for (name, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_function(name, |b| {
            b.iter(|| black_box(estimate_exponent(&v, &bounds, &budget, parallel).unwrap()))
        });
    }
    group.finish();
}

fn bench_conservativity(c: &mut Criterion) {
    let instances = corpus_for_bench();
    let mut group = c.benchmark_group("generalized_conservative");
    for (name, parallel) in [("sequential", false), ("parallel", true)] {
        group.bench_function(name, |b| {
            b.iter(|| {
                let flags: Vec<bool> = instances
                    .iter()
                    .map(|v| is_generalized_conservative(v, parallel))
                    .collect();
                black_box(flags)
            })
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_corpus_analysis,
    bench_loop_mode,
    bench_mode_comparison,
    bench_oracle_multi_bound,
    bench_conservativity
);
criterion_main!(benches);
