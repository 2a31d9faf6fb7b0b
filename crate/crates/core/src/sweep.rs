//! Monte-Carlo stability classification over initial conditions and
//! `(mu, omega)` grids.
//!
//! Each orbit is integrated from a pseudo-random initial condition in the
//! square `[-w, w]^2` and classified as
//!
//! * `Escaped` if `|x|` or `|y|` passes the escape threshold,
//! * `Close` if, at every stroboscopic sample after the transient window,
//!   its unforced orbit label stays within `closeness_delta` (relative) of
//!   the initial one,
//! * `Drifted` otherwise.
//!
//! A cell is `Unbounded` if any orbit escapes, `Stable` if none escape and
//! at least `stable_fraction` are close, and `Bounded` otherwise.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::integrator::{integrate, ObserverSet, StepPolicy, DEFAULT_ESCAPE_THRESHOLD};
use crate::model::{unforced_period, ForcingSpec, FourierShape, PhaseState};

/// Floor on the initial unforced energy used to normalise deviations.
pub const ENERGY_FLOOR: f64 = 1e-6;

/// Share of failed orbits above which a cell is not classified.
pub const MAX_FAILED_FRACTION: f64 = 0.01;

/// Quantity compared against its initial value at each strobe sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClosenessMetric {
    /// `rho = (4E)^(1/4)` with `E = y^2/2 + x^4/4`: the turning point of the
    /// unforced orbit through the state.
    #[default]
    Amplitude,
    /// `E = y^2/2 + x^4/4` itself.
    Energy,
}

impl ClosenessMetric {
    /// Relative deviation of `e` from `e0` (both unforced energies).
    pub fn deviation(self, e: f64, e0: f64) -> f64 {
        let e0 = e0.max(ENERGY_FLOOR);
        match self {
            ClosenessMetric::Energy => (e - e0).abs() / e0,
            ClosenessMetric::Amplitude => {
                let r0 = (4.0 * e0).powf(0.25);
                ((4.0 * e).powf(0.25) - r0).abs() / r0
            }
        }
    }
}

/// Integration time for one orbit:
/// `max(forcing_periods 2pi/omega, unforced_periods P(E0), min_time)`,
/// capped at `max_time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorizonRule {
    pub forcing_periods: f64,
    pub unforced_periods: f64,
    pub min_time: f64,
    pub max_time: f64,
}

impl Default for HorizonRule {
    fn default() -> Self {
        HorizonRule {
            forcing_periods: 20.0,
            unforced_periods: 50.0,
            min_time: 1e3,
            max_time: 5e3,
        }
    }
}

impl HorizonRule {
    pub fn horizon(&self, ic: &PhaseState, forcing: &ForcingSpec) -> f64 {
        let e0 = ic.unforced_energy();
        let loops = if e0 > 0.0 && self.unforced_periods > 0.0 {
            self.unforced_periods * unforced_period(e0)
        } else {
            0.0
        };
        (self.forcing_periods * forcing.period())
            .max(loops)
            .max(self.min_time)
            .min(self.max_time)
    }

    fn validate(&self) -> Result<()> {
        let vals = [self.forcing_periods, self.unforced_periods, self.min_time];
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(KamError::config(
                "horizon rule terms must be finite and >= 0",
            ));
        }
        if !(self.max_time > 0.0) || self.max_time.is_nan() {
            return Err(KamError::config("horizon max_time must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_ics: usize,
    pub seed: u64,
    pub ic_half_width: f64,
    pub escape_threshold: f64,
    pub closeness_delta: f64,
    pub closeness_metric: ClosenessMetric,
    pub stable_fraction: f64,
    pub transient_fraction: f64,
    pub horizon: HorizonRule,
    pub shape: FourierShape,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_ics: 500,
            seed: 20_140_101,
            ic_half_width: 2.0,
            escape_threshold: DEFAULT_ESCAPE_THRESHOLD,
            closeness_delta: 0.25,
            closeness_metric: ClosenessMetric::Amplitude,
            stable_fraction: 0.9,
            transient_fraction: 0.1,
            horizon: HorizonRule::default(),
            shape: FourierShape::cosine(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ics == 0 {
            return Err(KamError::config("n_ics must be >= 1"));
        }
        if !(self.ic_half_width > 0.0 && self.ic_half_width.is_finite()) {
            return Err(KamError::config("ic_half_width must be > 0"));
        }
        if !(self.escape_threshold > 0.0) {
            return Err(KamError::config("escape_threshold must be > 0"));
        }
        if !(self.closeness_delta > 0.0) {
            return Err(KamError::config("closeness_delta must be > 0"));
        }
        if !(self.stable_fraction > 0.0 && self.stable_fraction <= 1.0) {
            return Err(KamError::config("stable_fraction must be in (0, 1]"));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(KamError::config("transient_fraction must be in [0, 1)"));
        }
        self.horizon.validate()
    }

    /// Forcing for one grid cell with this sweep's shape.
    pub fn forcing(&self, mu: f64, omega: f64) -> Result<ForcingSpec> {
        ForcingSpec::with_shape(mu, omega, self.shape.clone())
    }
}

fn unit_interval(rng: &mut Xoshiro256StarStar) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn draw_ic(mut rng: Xoshiro256StarStar, half_width: f64) -> PhaseState {
    let x = half_width * (2.0 * unit_interval(&mut rng) - 1.0);
    let y = half_width * (2.0 * unit_interval(&mut rng) - 1.0);
    PhaseState { x, y, t: 0.0 }
}

/// `n` initial conditions uniform in `[-w, w]^2` at `t = 0`.
///
/// Index `i` draws from the SplitMix64-seeded xoshiro256** stream advanced
/// by `i` jumps of `2^128`, so [`sample_ic`] reproduces any single entry.
pub fn sample_ics(n: usize, seed: u64, half_width: f64) -> Vec<PhaseState> {
    let mut base = Xoshiro256StarStar::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let ic = draw_ic(base.clone(), half_width);
            base.jump();
            ic
        })
        .collect()
}

/// Entry `index` of [`sample_ics`].
pub fn sample_ic(index: usize, seed: u64, half_width: f64) -> PhaseState {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    for _ in 0..index {
        rng.jump();
    }
    draw_ic(rng, half_width)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OrbitClass {
    Close,
    Drifted,
    Escaped,
}

/// Classification of one orbit with the deviation that decided it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitVerdict {
    pub class: OrbitClass,
    /// Largest relative deviation over post-transient strobe samples
    /// (`NaN` for escaped orbits).
    pub max_deviation: f64,
    pub escape_time: Option<f64>,
}

/// Classify a single orbit. Numeric failures come back as errors.
pub fn classify_orbit(
    ic: &PhaseState,
    forcing: &ForcingSpec,
    cfg: &SweepConfig,
    policy: &StepPolicy,
) -> Result<OrbitClass> {
    cfg.validate()?;
    orbit_verdict(ic, forcing, cfg, policy).map(|v| v.class)
}

/// Like [`classify_orbit`], keeping the deciding deviation.
pub fn orbit_verdict(
    ic: &PhaseState,
    forcing: &ForcingSpec,
    cfg: &SweepConfig,
    policy: &StepPolicy,
) -> Result<OrbitVerdict> {
    if ic.x == 0.0 && ic.y == 0.0 {
        // Fixed point of the flow for any forcing.
        return Ok(OrbitVerdict {
            class: OrbitClass::Close,
            max_deviation: 0.0,
            escape_time: None,
        });
    }
    let horizon = cfg.horizon.horizon(ic, forcing);
    let obs = ObserverSet::bounds_only(cfg.escape_threshold).with_strobe(None);
    let run = integrate(ic, forcing, policy, horizon, &obs)?;
    if run.escaped {
        return Ok(OrbitVerdict {
            class: OrbitClass::Escaped,
            max_deviation: f64::NAN,
            escape_time: run.escape_time,
        });
    }
    let e0 = ic.unforced_energy();
    let after = ic.t + cfg.transient_fraction * horizon;
    let mut samples = run.strobes.iter().filter(|s| s.t >= after).peekable();
    let max_deviation = if samples.peek().is_some() {
        samples
            .map(|s| cfg.closeness_metric.deviation(s.unforced_energy(), e0))
            .fold(0.0, f64::max)
    } else {
        cfg.closeness_metric
            .deviation(run.final_state.unforced_energy(), e0)
    };
    let class = if max_deviation <= cfg.closeness_delta {
        OrbitClass::Close
    } else {
        OrbitClass::Drifted
    };
    Ok(OrbitVerdict {
        class,
        max_deviation,
        escape_time: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemVerdict {
    Stable,
    Bounded,
    Unbounded,
}

impl SystemVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemVerdict::Stable => "Stable",
            SystemVerdict::Bounded => "Bounded",
            SystemVerdict::Unbounded => "Unbounded",
        }
    }
}

impl std::fmt::Display for SystemVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Aggregate over the orbits of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OrbitCounts {
    pub close: usize,
    pub drifted: usize,
    pub escaped: usize,
    pub failed: usize,
}

impl OrbitCounts {
    pub fn total(&self) -> usize {
        self.close + self.drifted + self.escaped + self.failed
    }

    fn valid(&self) -> usize {
        self.close + self.drifted + self.escaped
    }

    fn add(&mut self, outcome: &Result<OrbitClass>) {
        match outcome {
            Ok(OrbitClass::Close) => self.close += 1,
            Ok(OrbitClass::Drifted) => self.drifted += 1,
            Ok(OrbitClass::Escaped) => self.escaped += 1,
            Err(_) => self.failed += 1,
        }
    }

    pub fn frac_close(&self) -> f64 {
        ratio(self.close, self.valid())
    }

    pub fn frac_drifted(&self) -> f64 {
        ratio(self.drifted, self.valid())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemClass {
    pub verdict: SystemVerdict,
    pub counts: OrbitCounts,
}

impl SystemClass {
    pub fn frac_close(&self) -> f64 {
        self.counts.frac_close()
    }

    pub fn frac_drifted(&self) -> f64 {
        self.counts.frac_drifted()
    }

    pub fn n_escaped(&self) -> usize {
        self.counts.escaped
    }
}

/// Verdict for a set of counts, or `None` when too many orbits failed.
pub fn verdict_for(counts: &OrbitCounts, stable_fraction: f64) -> Option<SystemVerdict> {
    let total = counts.total();
    if total == 0 || counts.failed as f64 > MAX_FAILED_FRACTION * total as f64 {
        return None;
    }
    Some(if counts.escaped > 0 {
        SystemVerdict::Unbounded
    } else if counts.frac_close() >= stable_fraction {
        SystemVerdict::Stable
    } else {
        SystemVerdict::Bounded
    })
}

/// Classify one `(mu, omega)` system over `cfg.n_ics` orbits.
///
/// Fails with [`KamError::CellFailed`] when more than 1% of orbits hit a
/// numeric failure.
pub fn classify_system(
    forcing: &ForcingSpec,
    cfg: &SweepConfig,
    policy: &StepPolicy,
) -> Result<SystemClass> {
    cfg.validate()?;
    policy.validate()?;
    let ics = sample_ics(cfg.n_ics, cfg.seed, cfg.ic_half_width);
    let outcomes: Vec<Result<OrbitClass>> = ics
        .par_iter()
        .map(|ic| orbit_verdict(ic, forcing, cfg, policy).map(|v| v.class))
        .collect();
    let mut counts = OrbitCounts::default();
    outcomes.iter().for_each(|o| counts.add(o));
    match verdict_for(&counts, cfg.stable_fraction) {
        Some(verdict) => Ok(SystemClass { verdict, counts }),
        None => Err(KamError::CellFailed {
            failed: counts.failed,
            total: counts.total(),
        }),
    }
}

/// Result for one grid cell. `verdict` is `None` for a failed cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub mu: f64,
    pub omega: f64,
    pub verdict: Option<SystemVerdict>,
    pub counts: OrbitCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub seed: u64,
    pub cells: Vec<CellResult>,
}

/// Classify every `(mu, omega)` cell. Orbits run in parallel on the current
/// rayon pool; results are merged in `(cell, ic)` order, so the report does
/// not depend on the schedule or the thread count.
pub fn run_grid(
    cells: &[(f64, f64)],
    cfg: &SweepConfig,
    policy: &StepPolicy,
) -> Result<SweepReport> {
    cfg.validate()?;
    policy.validate()?;
    let forcings = cells
        .iter()
        .map(|&(mu, omega)| cfg.forcing(mu, omega))
        .collect::<Result<Vec<_>>>()?;
    let ics = sample_ics(cfg.n_ics, cfg.seed, cfg.ic_half_width);

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..ics.len()).map(move |i| (c, i)))
        .collect();
    let outcomes: Vec<Result<OrbitClass>> = jobs
        .par_iter()
        .map(|&(c, i)| orbit_verdict(&ics[i], &forcings[c], cfg, policy).map(|v| v.class))
        .collect();

    let mut per_cell = vec![OrbitCounts::default(); cells.len()];
    for (&(c, _), outcome) in jobs.iter().zip(&outcomes) {
        per_cell[c].add(outcome);
    }
    let results = cells
        .iter()
        .zip(per_cell)
        .map(|(&(mu, omega), counts)| CellResult {
            mu,
            omega,
            verdict: verdict_for(&counts, cfg.stable_fraction),
            counts,
        })
        .collect();
    Ok(SweepReport {
        seed: cfg.seed,
        cells: results,
    })
}
