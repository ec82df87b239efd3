use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sqfree::extremes::sieved_extremes;
use sqfree::mertens::{build_ensemble, BlockSource, GapPolicy, Sieved};
use sqfree::seqgen::restricted_sequence;

fn pools() -> Vec<(String, rayon::ThreadPool)> {
    let mut out = vec![("sequential".to_string(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap())];
    if cfg!(feature = "parallel") {
        let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        out.push((format!("parallel-{n}"), rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()));
    }
    out
}

fn bench(c: &mut Criterion) {
    let ens = build_ensemble(1_000_000_000, 2_000_000_000, 200, 100_000, GapPolicy::Fixed(1000), None).unwrap();
    let mut g = c.benchmark_group("sieve");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_with_input(BenchmarkId::new("restricted_sequence_1e7", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| restricted_sequence(black_box(1_000_000_000), 10_000_000).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("block_sums_200x1e5", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| Sieved.block_sums(black_box(&ens.blocks)).unwrap()))
        });
        g.bench_with_input(BenchmarkId::new("extremes_4000x5000", &name), &pool, |b, pool| {
            b.iter(|| pool.install(|| sieved_extremes(black_box(1_000_000_000_000), 5_000, 4_000).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
