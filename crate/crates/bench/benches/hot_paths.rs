//! Criterion benches over the sampling-side hot paths: the weight tree,
//! whole-buffer reweighting, the occupancy solver and profile accumulation.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use erelab::mdp::random::{random_mdp, random_policy};
use erelab::mdp::solve::occupancy_measure;
use erelab::profile::expected_selection_profile;
use erelab::replay::transition_at;
use erelab::weighting::EreParams;
use erelab::{FenwickTree, ReplayBuffer, WeightScheme};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn filled_buffer(n: usize) -> ReplayBuffer {
    let mut buffer = ReplayBuffer::with_capacity(n).unwrap();
    for t in 1..=n as u64 {
        buffer.push(transition_at(t)).unwrap();
    }
    buffer
}

fn bench_fenwick(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(17);
    let weights: Vec<f64> = (0..100_000).map(|_| rng.gen_range(0.01..2.0)).collect();
    let tree = FenwickTree::from_weights(&weights);

    c.bench_function("fenwick_add_100k", |b| {
        b.iter_batched(
            || tree.clone(),
            |mut t| {
                for i in (0..t.len()).step_by(97) {
                    t.add(i, 0.25);
                }
                t
            },
            BatchSize::SmallInput,
        )
    });

    c.bench_function("fenwick_find_prefix_100k", |b| {
        let total = tree.total();
        let mut u = 0.0f64;
        b.iter(|| {
            u = (u + 0.618_033_988_749_894_9) % 1.0;
            black_box(tree.find_prefix(u * total))
        })
    });
}

fn bench_reweight(c: &mut Criterion) {
    let buffer = filled_buffer(100_000);
    let schemes = [
        (
            "one_over_age",
            WeightScheme::OneOverAge,
        ),
        (
            "ere_approx",
            WeightScheme::EreApprox(EreParams {
                buffer_size: 100_000,
                horizon: 1000,
                eta: 0.996,
                min_coverage: 5000,
                stages: 1000,
            }),
        ),
    ];
    for (name, scheme) in schemes {
        c.bench_function(&format!("reweight_100k_{name}"), |b| {
            b.iter_batched(
                || buffer.clone(),
                |mut buf| {
                    buf.reweight(&scheme, 100_000).unwrap();
                    buf
                },
                BatchSize::LargeInput,
            )
        });
    }
}

fn bench_sample(c: &mut Criterion) {
    let buffer = filled_buffer(100_000);
    c.bench_function("sample_batch_256_of_100k", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed = seed.wrapping_add(1);
            black_box(buffer.sample_batch(256, seed).unwrap())
        })
    });
}

fn bench_occupancy(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(5);
    let mdp = random_mdp(&mut rng, 50, 4);
    let policy = random_policy(&mut rng, 50, 4);
    let rho: Vec<f64> = {
        let raw: Vec<f64> = (0..50).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    };
    c.bench_function("occupancy_measure_50s_4a", |b| {
        b.iter(|| black_box(occupancy_measure(&mdp, &rho, &policy).unwrap()))
    });
}

fn bench_profile(c: &mut Criterion) {
    let scheme = WeightScheme::OneOverAge;
    c.bench_function("selection_profile_fft_65536", |b| {
        b.iter(|| black_box(expected_selection_profile(&scheme, 65_536, 4, 1).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_fenwick,
    bench_reweight,
    bench_sample,
    bench_occupancy,
    bench_profile
);
criterion_main!(benches);
