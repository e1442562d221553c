//! Sequential vs parallel Monte Carlo, plus the two exact engines.
//!
//! Without the `parallel` feature both Monte Carlo arms run sequentially,
//! which makes the feature's overhead and speedup easy to compare.

use std::hint::black_box;

use cis_core::exact::{complete_prob, p_value};
use cis_core::montecarlo::{Execution, MonteCarlo};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("mc_l1_m2_n50");
    group.sample_size(20);
    for trials in [2_000u64, 20_000] {
        group.throughput(Throughput::Elements(trials));
        for (name, mode) in MODES {
            let mc = MonteCarlo::new(trials, 1).with_execution(mode);
            group.bench_with_input(BenchmarkId::new(name, trials), &mc, |b, mc| {
                b.iter(|| black_box(mc.estimate_l1(2, 50).unwrap()))
            });
        }
    }
    group.finish();

    let mut group = c.benchmark_group("mc_lmax_m1_n100000");
    group.sample_size(10);
    for (name, mode) in MODES {
        let mc = MonteCarlo::new(64, 1).with_execution(mode);
        group.bench_function(name, |b| b.iter(|| black_box(mc.estimate_lmax(1, 100_000).unwrap())));
    }
    group.finish();
}

fn exact_engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("complete_prob_m4_n12");
    group.bench_function("horton_kurn", |b| b.iter(|| black_box(complete_prob(4, 12).unwrap())));
    group.bench_function("generating_function", |b| b.iter(|| black_box(p_value(4, 12).unwrap())));
    group.finish();
}

criterion_group!(benches, monte_carlo, exact_engines);
criterion_main!(benches);
