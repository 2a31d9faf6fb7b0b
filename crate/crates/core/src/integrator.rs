//! Störmer-Verlet (kick-drift-kick) integration of the forced oscillator.
//!
//! Steps are either fixed or scaled with the unforced energy
//! `E = y^2/2 + x^4/4` as `h = h0 / (1 + E^(1/4))`, which keeps the number of
//! steps per oscillation roughly constant since the loop frequency grows
//! like `E^(1/4)`. Either way the step is capped so that every forcing
//! period gets at least `min_steps_per_forcing_period` steps, and steps are
//! shortened to land exactly on strobe times and on the horizon.

use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::model::{frozen_energy, ForcingSpec, PhaseState};
use crate::poincare::{CrossingDirection, CrossingRecord};

/// Escape threshold on `|x|` and `|y|`.
pub const DEFAULT_ESCAPE_THRESHOLD: f64 = 30.0;

/// Crossing refinement target on `|y|`.
pub const CROSSING_TOL: f64 = 1e-10;

/// Maximum bisection steps when refining a section crossing.
pub const CROSSING_BISECTIONS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StepMode {
    Fixed,
    #[default]
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepPolicy {
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub min_steps_per_forcing_period: u32,
    pub mode: StepMode,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            h0: 1e-2,
            h_min: 1e-6,
            h_max: 0.1,
            min_steps_per_forcing_period: 50,
            mode: StepMode::Adaptive,
        }
    }
}

impl StepPolicy {
    /// Fixed step `h` with loose bounds around it.
    pub fn fixed(h: f64) -> Self {
        StepPolicy {
            h0: h,
            h_min: h,
            h_max: h,
            mode: StepMode::Fixed,
            ..StepPolicy::default()
        }
    }

    /// Adaptive step with base `h0` and the default bounds widened to
    /// contain it.
    pub fn adaptive(h0: f64) -> Self {
        let d = StepPolicy::default();
        StepPolicy {
            h0,
            h_min: d.h_min.min(h0),
            h_max: d.h_max.max(h0),
            ..d
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.h0, self.h_min, self.h_max]
            .iter()
            .all(|h| h.is_finite());
        if !finite || !(0.0 < self.h_min && self.h_min <= self.h0 && self.h0 <= self.h_max) {
            return Err(KamError::config(format!(
                "step policy needs 0 < h_min <= h0 <= h_max, got {} / {} / {}",
                self.h_min, self.h0, self.h_max
            )));
        }
        if self.min_steps_per_forcing_period == 0 {
            return Err(KamError::config(
                "min_steps_per_forcing_period must be >= 1",
            ));
        }
        Ok(())
    }
}

/// One kick-drift-kick step of length `h`.
pub fn verlet_step(s: &PhaseState, h: f64, forcing: &ForcingSpec) -> Result<PhaseState> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(KamError::invalid(format!("step must be > 0, got {h}")));
    }
    kdk(s, h, forcing)
}

#[inline]
fn kdk(s: &PhaseState, h: f64, forcing: &ForcingSpec) -> Result<PhaseState> {
    let t1 = s.t + h;
    let half = 0.5 * h;
    let y_half = s.y - half * forcing.a_at(s.t) * s.x * s.x * s.x;
    let x = s.x + h * y_half;
    let y = y_half - half * forcing.a_at(t1) * x * x * x;
    let next = PhaseState { x, y, t: t1 };
    if !next.is_finite() {
        return Err(KamError::NumericFailure { t: s.t });
    }
    Ok(next)
}

/// Step length the policy asks for at `s`.
pub fn choose_step(s: &PhaseState, forcing: &ForcingSpec, policy: &StepPolicy) -> f64 {
    let h = match policy.mode {
        StepMode::Fixed => policy.h0,
        StepMode::Adaptive => {
            let e = s.unforced_energy();
            (policy.h0 / (1.0 + e.sqrt().sqrt())).clamp(policy.h_min, policy.h_max)
        }
    };
    h.min(forcing.period() / policy.min_steps_per_forcing_period as f64)
}

/// What to record along an orbit and when to stop early.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSet {
    /// Sample at `k 2pi/omega`, landing on those times exactly.
    pub strobe: bool,
    /// Stop once this many strobe samples are collected.
    pub strobe_limit: Option<usize>,
    /// Record crossings of `{y = 0, x > 0}` from `y > 0` into `y < 0`.
    pub section: bool,
    /// Stop once this many crossings are collected.
    pub section_limit: Option<usize>,
    pub escape_threshold: f64,
    /// Keep every `n`-th accepted state (plus the initial one).
    pub trajectory_stride: Option<usize>,
}

impl Default for ObserverSet {
    fn default() -> Self {
        ObserverSet {
            strobe: false,
            strobe_limit: None,
            section: false,
            section_limit: None,
            escape_threshold: DEFAULT_ESCAPE_THRESHOLD,
            trajectory_stride: None,
        }
    }
}

impl ObserverSet {
    pub fn bounds_only(escape_threshold: f64) -> Self {
        ObserverSet {
            escape_threshold,
            ..ObserverSet::default()
        }
    }

    pub fn with_strobe(mut self, limit: Option<usize>) -> Self {
        self.strobe = true;
        self.strobe_limit = limit;
        self
    }

    pub fn with_section(mut self, limit: Option<usize>) -> Self {
        self.section = true;
        self.section_limit = limit;
        self
    }

    pub fn with_trajectory(mut self, stride: usize) -> Self {
        self.trajectory_stride = Some(stride.max(1));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSummary {
    pub initial: PhaseState,
    pub final_state: PhaseState,
    pub escaped: bool,
    pub escape_time: Option<f64>,
    pub strobes: Vec<PhaseState>,
    pub crossings: Vec<CrossingRecord>,
    pub trajectory: Vec<PhaseState>,
    pub max_abs_x: f64,
    pub max_abs_y: f64,
    /// Extremes of `y^2/2 + x^4/4` over every accepted state.
    pub min_unforced_energy: f64,
    pub max_unforced_energy: f64,
    pub steps: u64,
}

impl OrbitSummary {
    /// True when the run ended because an observer limit was reached.
    pub fn limits_reached(&self, obs: &ObserverSet) -> bool {
        let strobe_done = obs.strobe_limit.is_some_and(|n| self.strobes.len() >= n);
        let section_done = obs.section_limit.is_some_and(|n| self.crossings.len() >= n);
        strobe_done || section_done
    }
}

/// Integrate from `ic` over `[ic.t, ic.t + horizon]`, or until escape or an
/// observer limit. Observers fire after each accepted step in the order:
/// section detector, strobe sampler, bound checker.
pub fn integrate(
    ic: &PhaseState,
    forcing: &ForcingSpec,
    policy: &StepPolicy,
    horizon: f64,
    obs: &ObserverSet,
) -> Result<OrbitSummary> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(KamError::invalid(format!(
            "horizon must be > 0, got {horizon}"
        )));
    }
    if !ic.is_finite() {
        return Err(KamError::NonFinite("initial condition"));
    }
    policy.validate()?;

    let t_end = ic.t + horizon;
    let period = forcing.period();
    let mut next_strobe_k = (ic.t / period).floor() as i64 + 1;
    let mut next_strobe = next_strobe_k as f64 * period;

    let e0 = ic.unforced_energy();
    let mut summary = OrbitSummary {
        initial: *ic,
        final_state: *ic,
        escaped: false,
        escape_time: None,
        strobes: Vec::new(),
        crossings: Vec::new(),
        trajectory: Vec::new(),
        max_abs_x: ic.x.abs(),
        max_abs_y: ic.y.abs(),
        min_unforced_energy: e0,
        max_unforced_energy: e0,
        steps: 0,
    };
    if obs.trajectory_stride.is_some() {
        summary.trajectory.push(*ic);
    }
    if ic.x.abs() > obs.escape_threshold || ic.y.abs() > obs.escape_threshold {
        summary.escaped = true;
        summary.escape_time = Some(ic.t);
        return Ok(summary);
    }

    let mut s = *ic;
    while s.t < t_end {
        let mut h = choose_step(&s, forcing, policy);
        let mut target = None;
        if obs.strobe && next_strobe <= t_end && s.t + h >= next_strobe {
            h = next_strobe - s.t;
            target = Some(next_strobe);
        } else if s.t + h >= t_end {
            h = t_end - s.t;
            target = Some(t_end);
        }
        if h <= 0.0 {
            // Already on the target time up to roundoff.
            s.t = target.unwrap_or(s.t);
            if target == Some(next_strobe) {
                next_strobe_k += 1;
                next_strobe = next_strobe_k as f64 * period;
            }
            continue;
        }
        let mut next = kdk(&s, h, forcing)?;
        if let Some(tt) = target {
            next.t = tt;
        }
        summary.steps += 1;

        if obs.section && s.y > 0.0 && next.y <= 0.0 {
            if let Some(rec) = refine_crossing(&s, h, forcing)? {
                summary.crossings.push(rec);
            }
        }
        if obs.strobe && target == Some(next_strobe) {
            summary.strobes.push(next);
            next_strobe_k += 1;
            next_strobe = next_strobe_k as f64 * period;
        }
        if let Some(stride) = obs.trajectory_stride {
            if summary.steps.is_multiple_of(stride as u64) || next.t >= t_end {
                summary.trajectory.push(next);
            }
        }

        s = next;
        summary.max_abs_x = summary.max_abs_x.max(s.x.abs());
        summary.max_abs_y = summary.max_abs_y.max(s.y.abs());
        let e = s.unforced_energy();
        summary.min_unforced_energy = summary.min_unforced_energy.min(e);
        summary.max_unforced_energy = summary.max_unforced_energy.max(e);

        if s.x.abs() > obs.escape_threshold || s.y.abs() > obs.escape_threshold {
            summary.escaped = true;
            summary.escape_time = Some(s.t);
            break;
        }
        if summary.limits_reached(obs) {
            break;
        }
    }
    summary.final_state = s;
    Ok(summary)
}

/// Locate `y = 0` inside the step `start -> start + h`, where `y` changes
/// sign from positive to non-positive, by bisecting the length of a single
/// Verlet substep from `start`. Falls back to secant updates if bisection
/// alone does not reach [`CROSSING_TOL`].
fn refine_crossing(
    start: &PhaseState,
    h: f64,
    forcing: &ForcingSpec,
) -> Result<Option<CrossingRecord>> {
    let mut lo = 0.0;
    let mut hi = h;
    let mut y_lo = start.y;
    let mut best = kdk(start, h, forcing)?;
    let mut y_hi = best.y;
    if best.y.abs() > CROSSING_TOL {
        for _ in 0..CROSSING_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let trial = kdk(start, mid, forcing)?;
            best = trial;
            if trial.y.abs() <= CROSSING_TOL {
                break;
            }
            if trial.y > 0.0 {
                lo = mid;
                y_lo = trial.y;
            } else {
                hi = mid;
                y_hi = trial.y;
            }
        }
        let mut guard = 0;
        while best.y.abs() > CROSSING_TOL && guard < 16 && y_lo != y_hi {
            let mid = (lo - y_lo * (hi - lo) / (y_hi - y_lo)).clamp(lo, hi);
            if mid <= 0.0 {
                break;
            }
            let trial = kdk(start, mid, forcing)?;
            best = trial;
            if trial.y > 0.0 {
                lo = mid;
                y_lo = trial.y;
            } else {
                hi = mid;
                y_hi = trial.y;
            }
            guard += 1;
        }
    }
    if best.x <= 0.0 {
        return Ok(None);
    }
    Ok(Some(CrossingRecord {
        t: best.t,
        x: best.x,
        y: best.y,
        e_frozen: frozen_energy(best.x, best.y, forcing.a_at(best.t)),
        direction: CrossingDirection::Descending,
    }))
}
