use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gstl::dynamics::rollout;
use gstl::oracle::verify_batch;
use gstl::par::Execution;
use gstl::pipeline::Scenario;
use gstl::{ControlSequence, TeamTrajectory};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scenario() -> Scenario {
    Scenario::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/example1.toml")).unwrap()
}

/// Teams driven by uniformly random admissible controls.
fn random_teams(s: &Scenario, n: usize, seed: u64) -> Vec<TeamTrajectory> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let trajs = s
                .fleet
                .agents
                .iter()
                .map(|a| {
                    let m = &s.models[&a.id];
                    let u = (0..s.horizon)
                        .map(|_| m.control_bounds().iter().map(|(lo, hi)| rng.gen_range(*lo..=*hi)).collect())
                        .collect();
                    rollout(m, &a.x0, &ControlSequence::new(u)).unwrap()
                })
                .collect();
            TeamTrajectory::new(trajs).unwrap()
        })
        .collect()
}

fn verify(c: &mut Criterion) {
    let s = scenario();
    let groups = s.groups().unwrap();
    let mut g = c.benchmark_group("verify_batch");
    g.sample_size(20);
    for n in [8, 64, 256] {
        let teams = random_teams(&s, n, 11);
        for (label, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            g.bench_with_input(BenchmarkId::new(label, n), &teams, |b, teams| {
                b.iter(|| verify_batch(exec, &s.spec, &groups, teams))
            });
        }
    }
    g.finish();
}

criterion_group!(benches, verify);
criterion_main!(benches);
