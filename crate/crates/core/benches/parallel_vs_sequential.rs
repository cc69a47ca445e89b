//! Sequential vs rayon paths of the data-parallel kernels. Without the
//! `parallel` feature both arms run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use harvest_core::game::{self, GameConfig, NashSettings};
use harvest_core::limitp::{self, ReplicaConfig};
use harvest_core::nondurable::{self, ConstantSharePlan, Variant};
use harvest_core::{Exec, ModelParams};
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn oracle(c: &mut Criterion) {
    let p = ModelParams::new(0.15, 0.0, 10.0, 0.5, 1.0).unwrap();
    let plan = ConstantSharePlan::new(0.1, p.round_time).unwrap();
    let mut g = c.benchmark_group("oracle_65536_cells");
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| nondurable::aggregate_revenue_oracle_with(&plan, &p, black_box(65_536), |_| 1.0, exec).unwrap())
        });
    }
    g.finish();
}

fn sweep(c: &mut Criterion) {
    let p = ModelParams::default();
    let thetas: Vec<f64> = (1..=20).map(|k| 10.0 / k as f64).collect();
    let alphas: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
    let mut g = c.benchmark_group("sweep_20x19");
    g.sample_size(20);
    for (name, exec) in MODES {
        for variant in [Variant::ClosedForm, Variant::Oracle { locations: 1024 }] {
            g.bench_with_input(BenchmarkId::new(name, variant.tag()), &variant, |b, &v| {
                b.iter(|| nondurable::sweep_objective_with(&thetas, &alphas, &p, v, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn detection(c: &mut Criterion) {
    let cfg = ReplicaConfig {
        trials: 10_000,
        ..ReplicaConfig::default()
    };
    let game = GameConfig::new(cfg.players, vec![1.0; cfg.rounds], 1.0).unwrap();
    let players = [10, 30, 100, 300, 1000];
    let mut g = c.benchmark_group("detection_1e4_trials");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| limitp::detection_experiment_with(&players, &cfg, &game, exec).unwrap())
        });
    }
    g.finish();
}

fn nash(c: &mut Criterion) {
    let cfg = GameConfig::new(8, vec![1.0, 1.05, 1.1, 1.15], 1.0).unwrap();
    let mut g = c.benchmark_group("nash_8_players_4_rounds");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| game::solve_nash_with(&cfg, &NashSettings::default(), exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, sweep, detection, nash);
criterion_main!(benches);
