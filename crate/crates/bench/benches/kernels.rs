use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kamlab_core::elliptic::{jacobi, EllipticModulus};
use kamlab_core::integrator::{integrate, verlet_step, ObserverSet, StepPolicy};
use kamlab_core::model::{to_action_angle, ForcingSpec, PhaseState};
use kamlab_core::sweep::{classify_orbit, HorizonRule, SweepConfig};

fn elliptic(c: &mut Criterion) {
    let k = EllipticModulus::QUARTIC;
    c.bench_function("jacobi", |b| b.iter(|| jacobi(black_box(5.3), k).unwrap()));
    c.bench_function("to_action_angle", |b| {
        b.iter(|| to_action_angle(black_box(0.7), black_box(-0.4), 1.3).unwrap())
    });
}

fn stepping(c: &mut Criterion) {
    let f = ForcingSpec::new(0.8, 0.3).unwrap();
    let s = PhaseState::new(1.0, 0.5, 0.0).unwrap();
    c.bench_function("verlet_step", |b| {
        b.iter(|| verlet_step(black_box(&s), 1e-2, &f).unwrap())
    });
    c.bench_function("integrate_1e4_steps", |b| {
        b.iter(|| {
            integrate(
                &s,
                &f,
                &StepPolicy::fixed(1e-2),
                100.0,
                &ObserverSet::default(),
            )
            .unwrap()
        })
    });
}

fn classification(c: &mut Criterion) {
    let cfg = SweepConfig {
        horizon: HorizonRule {
            min_time: 100.0,
            max_time: 100.0,
            ..HorizonRule::default()
        },
        ..SweepConfig::default()
    };
    let f = ForcingSpec::new(0.8, 0.3).unwrap();
    let ic = PhaseState::new(1.2, -0.3, 0.0).unwrap();
    let p = StepPolicy::default();
    c.bench_function("classify_orbit_t100", |b| {
        b.iter(|| classify_orbit(black_box(&ic), &f, &cfg, &p).unwrap())
    });
}

criterion_group!(benches, elliptic, stepping, classification);
criterion_main!(benches);
