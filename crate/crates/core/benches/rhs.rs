//! Sequential versus rayon evaluation of the alternating velocity sum.
//!
//! Run with `cargo bench`; the parallel variant is only built with the
//! default `parallel` feature.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use muskat_core::curve::{make_grid, PhysicalParams, Preset};
use muskat_core::spectral::FilterSpec;
use muskat_core::velocity::{alternating_sum_sequential, NodalData, DEFAULT_DENOMINATOR_FLOOR};

fn bench_alternating_sum(c: &mut Criterion) {
    let mut group = c.benchmark_group("alternating_sum");
    group.sample_size(20);
    let params = PhysicalParams::default();
    for n in [256usize, 1024, 2048] {
        let grid = make_grid(n).expect("even grid");
        let curve = Preset::SeedT0.sample(grid).expect("preset");
        let filter = FilterSpec::default();
        let (z1, dz1, dz2) = (curve.z1(), curve.dz1(&filter), curve.dz2(&filter));
        let data = NodalData {
            z1: &z1,
            z2: curve.z2(),
            dz1: &dz1,
            dz2: &dz2,
        };
        let weight = 2.0 * grid.spacing() * params.prefactor();
        group.bench_with_input(BenchmarkId::new("sequential", n), &data, |b, d| {
            b.iter(|| alternating_sum_sequential(black_box(d), weight, DEFAULT_DENOMINATOR_FLOOR).expect("smooth"))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", n), &data, |b, d| {
            b.iter(|| {
                muskat_core::velocity::alternating_sum_parallel(black_box(d), weight, DEFAULT_DENOMINATOR_FLOOR)
                    .expect("smooth")
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_alternating_sum);
criterion_main!(benches);
