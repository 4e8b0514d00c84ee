use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mtsharp_core::halfline::transfer_identities;
use mtsharp_core::par::{map_indexed, map_indexed_seq};
use mtsharp_core::profile::log_grid;
use mtsharp_core::rearrangement::symmetric_rearrangement;
use mtsharp_core::verify::{random_profile, random_samples};
use mtsharp_core::{MtParams, NonlinearitySpec};

fn transfer_batch(c: &mut Criterion) {
    let spec = NonlinearitySpec::phi_critical(MtParams::new(2, 0.0).unwrap());
    let radii = log_grid(1e-4, 20.0, 600).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let profiles: Vec<_> = (0..32).map(|_| random_profile(&mut rng, &radii).unwrap()).collect();
    let work = |i: usize| transfer_identities(&profiles[i], &spec).unwrap().max_relative_error();
    let mut g = c.benchmark_group("transfer identities x32");
    g.bench_function(BenchmarkId::new("rayon", 32), |b| b.iter(|| map_indexed(profiles.len(), work)));
    g.bench_function(BenchmarkId::new("sequential", 32), |b| b.iter(|| map_indexed_seq(profiles.len(), work)));
    g.finish();
}

fn rearrangement_batch(c: &mut Criterion) {
    let radii = log_grid(1e-3, 8.0, 600).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples: Vec<_> = (0..32).map(|_| random_samples(&mut rng, &radii).unwrap()).collect();
    let work = |i: usize| symmetric_rearrangement(&samples[i], 3).unwrap().sup();
    let mut g = c.benchmark_group("rearrangement x32");
    g.bench_function(BenchmarkId::new("rayon", 32), |b| b.iter(|| map_indexed(samples.len(), work)));
    g.bench_function(BenchmarkId::new("sequential", 32), |b| b.iter(|| map_indexed_seq(samples.len(), work)));
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = transfer_batch, rearrangement_batch
}
criterion_main!(benches);
