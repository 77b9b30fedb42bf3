//! Benchmarks for the per-character batch passes, which run on rayon under
//! the default `parallel` feature and sequentially without it.
//!
//! To compare the two modes, run the suite once per build and diff the
//! saved baselines:
//!
//! ```sh
//! cargo bench -p galled-ptn -- --save-baseline parallel
//! cargo bench -p galled-ptn --no-default-features -- --baseline parallel
//! ```
//!
//! The second run prints each benchmark's change relative to the parallel
//! baseline. Benchmark names are identical in both modes on purpose.

use criterion::{criterion_group, BenchmarkId, Criterion, Throughput};
use galled_ptn::completion::{galled_completion, CompletionOutcome};
use galled_ptn::io::parse_newick;
use galled_ptn::ptn::{fa_statistics, verify};
use galled_ptn::{par, Character, CharacterSet, LgtNetwork, Tree};

/// A balanced binary tree over `t0001..=t1024` (2047 nodes).
fn big_tree() -> Tree {
    fn balanced(lo: usize, hi: usize) -> String {
        if lo == hi {
            format!("t{lo:04}")
        } else {
            let mid = (lo + hi) / 2;
            format!("({},{})", balanced(lo, mid), balanced(mid + 1, hi))
        }
    }
    parse_newick(&format!("{};", balanced(1, 1024))).unwrap()
}

/// `k` characters matching the first `k` internal clades of the tree, so
/// every instance is completable and every pass does real work.
fn clade_chars(tree: &Tree, k: usize) -> CharacterSet {
    let characters = tree
        .nodes()
        .filter(|&v| !tree.is_leaf(v))
        .take(k)
        .enumerate()
        .map(|(i, v)| Character::new(format!("K{i}"), tree.clade(v).clone()).unwrap())
        .collect();
    CharacterSet::new(tree.taxa().clone(), characters).unwrap()
}

fn completed(tree: &Tree, chars: &CharacterSet) -> LgtNetwork {
    match galled_completion(tree, chars).unwrap() {
        CompletionOutcome::Completable { network, .. } => network,
        CompletionOutcome::Rejected(_) => unreachable!("clade characters always complete"),
    }
}

fn bench_fa_statistics(c: &mut Criterion) {
    let tree = big_tree();
    let mut group = c.benchmark_group("fa-statistics");
    for k in [64usize, 512] {
        let chars = clade_chars(&tree, k);
        group.throughput(Throughput::Elements(k as u64));
        group.bench_with_input(BenchmarkId::from_parameter(k), &chars, |b, chars| {
            b.iter(|| fa_statistics(&tree, chars));
        });
    }
    group.finish();
}

fn bench_verify(c: &mut Criterion) {
    let tree = big_tree();
    let mut group = c.benchmark_group("verify");
    for k in [64usize, 512] {
        let chars = clade_chars(&tree, k);
        let net = completed(&tree, &chars);
        group.throughput(Throughput::Elements(k as u64));
        group.bench_with_input(BenchmarkId::from_parameter(k), &chars, |b, chars| {
            b.iter(|| verify(&net, chars));
        });
    }
    group.finish();
}

fn bench_completion(c: &mut Criterion) {
    let tree = big_tree();
    let mut group = c.benchmark_group("completion");
    group.sample_size(30);
    for k in [64usize, 256] {
        let chars = clade_chars(&tree, k);
        group.throughput(Throughput::Elements(k as u64));
        group.bench_with_input(BenchmarkId::from_parameter(k), &chars, |b, chars| {
            b.iter(|| galled_completion(&tree, chars).unwrap());
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fa_statistics, bench_verify, bench_completion);

fn main() {
    eprintln!(
        "batch passes: {}",
        if par::PARALLEL_ENABLED {
            "parallel (rayon)"
        } else {
            "sequential fallback"
        }
    );
    benches();
    Criterion::default().configure_from_args().final_summary();
}
