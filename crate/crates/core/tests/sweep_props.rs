use kamlab_core::integrator::StepPolicy;
use kamlab_core::sweep::{
    classify_orbit, classify_system, run_grid, sample_ics, HorizonRule, OrbitClass, SweepConfig,
    SystemVerdict,
};
use proptest::prelude::*;

fn quick(n: usize) -> SweepConfig {
    SweepConfig {
        n_ics: n,
        horizon: HorizonRule {
            min_time: 100.0,
            max_time: 200.0,
            ..HorizonRule::default()
        },
        ..SweepConfig::default()
    }
}

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .unwrap()
}

#[test]
fn report_independent_of_thread_count() {
    let cfg = quick(24);
    let p = StepPolicy::default();
    let cells = [(0.8, 0.3), (5.0, 0.5), (0.0, 1.0)];
    let one = pool(1).install(|| run_grid(&cells, &cfg, &p)).unwrap();
    let three = pool(3).install(|| run_grid(&cells, &cfg, &p)).unwrap();
    assert_eq!(one, three);
}

#[test]
fn unforced_cells_are_stable() {
    for &omega in &[0.05, 1.0, 14.0] {
        let f = quick(32).forcing(0.0, omega).unwrap();
        let c = classify_system(&f, &quick(32), &StepPolicy::default()).unwrap();
        assert_eq!(c.verdict, SystemVerdict::Stable, "omega {omega}");
        assert_eq!(c.frac_close(), 1.0);
    }
}

#[test]
fn close_fraction_monotone_in_delta() {
    let p = StepPolicy::default();
    let mut last = -1.0;
    for &delta in &[0.02, 0.05, 0.1, 0.25, 0.5, 1.0] {
        let cfg = SweepConfig {
            closeness_delta: delta,
            ..quick(24)
        };
        let c = classify_system(&cfg.forcing(0.8, 0.3).unwrap(), &cfg, &p).unwrap();
        assert!(c.frac_close() >= last, "delta {delta}");
        last = c.frac_close();
    }
}

#[test]
fn escapes_monotone_in_threshold() {
    let p = StepPolicy::default();
    let mut last = usize::MAX;
    for &thr in &[5.0, 10.0, 30.0] {
        let cfg = SweepConfig {
            escape_threshold: thr,
            ..quick(24)
        };
        let c = classify_system(&cfg.forcing(5.0, 0.5).unwrap(), &cfg, &p).unwrap();
        assert!(c.n_escaped() <= last, "threshold {thr}");
        last = c.n_escaped();
    }
}

#[test]
fn escape_count_independent_of_ic_order() {
    let cfg = quick(24);
    let p = StepPolicy::default();
    let f = cfg.forcing(5.0, 0.5).unwrap();
    let system = classify_system(&f, &cfg, &p).unwrap();
    let mut ics = sample_ics(cfg.n_ics, cfg.seed, cfg.ic_half_width);
    ics.reverse();
    let escaped = ics
        .iter()
        .filter(|ic| classify_orbit(ic, &f, &cfg, &p).unwrap() == OrbitClass::Escaped)
        .count();
    assert!(system.n_escaped() > 0);
    assert_eq!(escaped, system.n_escaped());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ics_fill_square(seed in any::<u64>(), w in 0.1..5.0f64) {
        let ics = sample_ics(64, seed, w);
        prop_assert!(ics.iter().all(|s| s.x.abs() <= w && s.y.abs() <= w));
        // Every quadrant is hit by 64 uniform draws with overwhelming probability.
        for (sx, sy) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            prop_assert!(ics.iter().any(|s| s.x * sx > 0.0 && s.y * sy > 0.0));
        }
    }
}
