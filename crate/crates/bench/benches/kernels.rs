use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use collider_bench::synthetic_bignat;
use collider_core::collider::{count_collisions, DigitTally};
use collider_core::constructor::{make_params_manual, ProgressionSpec, ShiftFamily};
use collider_core::digits::{self, pow2, BigNat};
use collider_core::distribution::{phi_table, PhiMode};

fn bench_digit_sums(c: &mut Criterion) {
    let mut group = c.benchmark_group("digit_sum");
    for bits in [1_000u64, 10_000, 100_000] {
        let n = synthetic_bignat(bits, 42);
        group.bench_with_input(BenchmarkId::new("base2", bits), &n, |b, n| {
            b.iter(|| digits::s2(black_box(n)))
        });
        group.bench_with_input(BenchmarkId::new("base3", bits), &n, |b, n| {
            b.iter(|| digits::s3(black_box(n)))
        });
    }
    group.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumeration");
    let span = 1_000_000u64;
    group.throughput(Throughput::Elements(span));
    group.bench_function("incremental_scan_1e6", |b| {
        b.iter(|| {
            let mut tally2 = DigitTally::new(2, 0);
            let mut tally3 = DigitTally::new(3, 0);
            let mut hits = 0u64;
            for _ in 0..span {
                if tally2.sum() == tally3.sum() {
                    hits += 1;
                }
                tally2.step();
                tally3.step();
            }
            black_box(hits)
        })
    });
    group.bench_function("counts_1e7_threads4", |b| {
        let limit = BigNat::from(10_000_000u64);
        let marks = [limit.clone()];
        b.iter(|| count_collisions(black_box(&limit), &marks, 4).unwrap())
    });
    group.finish();
}

fn bench_distribution(c: &mut Criterion) {
    let mut group = c.benchmark_group("phi_table");
    let t = BigNat::from(0b1011_0110_1011u64);
    group.bench_function("recurrence_L40", |b| {
        b.iter(|| phi_table(black_box(&t), 40, PhiMode::Recurrence).unwrap())
    });
    group.bench_function("bruteforce_L16", |b| {
        b.iter(|| phi_table(black_box(&t), 16, PhiMode::BruteForce).unwrap())
    });
    group.finish();
}

fn bench_construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construction");
    group.sample_size(20);
    let params = make_params_manual(48, 4, 2).unwrap();
    group.bench_function("family_eta48_J2", |b| {
        b.iter(|| ShiftFamily::build(black_box(&params), 7, 10_000_000).unwrap())
    });
    let family = ShiftFamily::build(&params, 7, 10_000_000).unwrap();
    let spec = ProgressionSpec::new(family, pow2(2000)).unwrap();
    group.bench_function("f_at_2000bit_element", |b| {
        let k = spec.k_lo.clone();
        b.iter(|| spec.f_at(black_box(&k)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_digit_sums,
    bench_enumeration,
    bench_distribution,
    bench_construction
);
criterion_main!(benches);
