use std::hint::black_box;

use cab_bench::{three_type_spec, two_type_spec};
use cab_core::{run_episode, PolicyConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn episodes(c: &mut Criterion) {
    let spec = two_type_spec();
    let mut group = c.benchmark_group("episode_two_types_n10k");
    let policies = [
        PolicyConfig::Alg1,
        PolicyConfig::Alg2 { burn_in: None },
        PolicyConfig::Alg3,
        PolicyConfig::EtcInfinity {
            delta_lower_bound: 0.1,
        },
        PolicyConfig::FrontLoadedUcb {
            alpha1_hint: 0.5,
            c: 1.0,
        },
    ];
    for policy in &policies {
        group.bench_with_input(
            BenchmarkId::from_parameter(policy.name()),
            policy,
            |b, p| {
                let mut seed = 0u64;
                b.iter(|| {
                    seed += 1;
                    black_box(run_episode(&spec, p, 10_000, seed).unwrap().pseudo_regret)
                })
            },
        );
    }
    group.finish();

    let spec = three_type_spec();
    c.bench_function("episode_three_types_alg4_n10k", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            black_box(run_episode(&spec, &PolicyConfig::Alg4, 10_000, seed).unwrap())
        })
    });
}

criterion_group!(benches, episodes);
criterion_main!(benches);
