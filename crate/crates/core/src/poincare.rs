//! Poincaré sections: the stroboscopic map at multiples of the forcing
//! period, and the oscillator-angle section `{y = 0, x > 0}`.

use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::integrator::{integrate, ObserverSet, StepPolicy, DEFAULT_ESCAPE_THRESHOLD};
use crate::model::{unforced_period, ForcingSpec, PhaseState};

/// Side from which a section crossing is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    /// `y` passes from positive to non-positive, i.e. `x` at its maximum.
    Descending,
}

/// A refined crossing of `{y = 0, x > 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub t: f64,
    pub x: f64,
    /// Residual `y` after refinement.
    pub y: f64,
    /// `y^2/2 + a(omega t) x^4/4` at the crossing.
    pub e_frozen: f64,
    pub direction: CrossingDirection,
}

impl CrossingRecord {
    pub fn state(&self) -> PhaseState {
        PhaseState {
            x: self.x,
            y: self.y,
            t: self.t,
        }
    }
}

/// Stroboscopic samples `(t_k, x, y)` at `t_k = k 2pi/omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrobeRun {
    pub samples: Vec<PhaseState>,
    /// False when the orbit escaped before all samples were taken.
    pub complete: bool,
    pub escape_time: Option<f64>,
}

/// Section crossings in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionRun {
    pub records: Vec<CrossingRecord>,
    pub complete: bool,
    pub escape_time: Option<f64>,
}

/// `n` stroboscopic samples at `k 2pi/omega`, `k = 1..=n` (counted from the
/// first strobe time after `ic.t`).
pub fn stroboscopic(
    ic: &PhaseState,
    forcing: &ForcingSpec,
    n: usize,
    policy: &StepPolicy,
) -> Result<StrobeRun> {
    if n == 0 {
        return Err(KamError::invalid("need at least one strobe sample"));
    }
    let obs = ObserverSet::default().with_strobe(Some(n));
    let horizon = (n as f64 + 1.0) * forcing.period();
    let run = integrate(ic, forcing, policy, horizon, &obs)?;
    Ok(StrobeRun {
        complete: run.strobes.len() >= n,
        samples: run.strobes,
        escape_time: run.escape_time,
    })
}

/// Time budget for `n` section crossings. A loop of the frozen system with
/// factor `a` takes the unforced period at energy `E` scaled by
/// `a^(-1/4)`; the budget allows ten times that for the slowest `a`
/// reachable with this forcing, plus one forcing period.
fn section_budget(ic: &PhaseState, forcing: &ForcingSpec, n: usize) -> f64 {
    let e = ic.unforced_energy().max(1e-12);
    let a_min = (1.0 - forcing.mu().abs()).max(0.05);
    10.0 * (n as f64 + 1.0) * unforced_period(e) * a_min.powf(-0.5) + forcing.period()
}

/// The first `n` crossings of `{y = 0, x > 0}` with `y` decreasing.
pub fn angle_section(
    ic: &PhaseState,
    forcing: &ForcingSpec,
    n: usize,
    policy: &StepPolicy,
) -> Result<SectionRun> {
    if n == 0 {
        return Err(KamError::invalid("need at least one section crossing"));
    }
    section_with_budget(ic, forcing, Some(n), section_budget(ic, forcing, n), policy)
}

/// Every crossing of `{y = 0, x > 0}` within `[ic.t, ic.t + span]`.
pub fn section_over(
    ic: &PhaseState,
    forcing: &ForcingSpec,
    span: f64,
    policy: &StepPolicy,
) -> Result<SectionRun> {
    section_with_budget(ic, forcing, None, span, policy)
}

fn section_with_budget(
    ic: &PhaseState,
    forcing: &ForcingSpec,
    limit: Option<usize>,
    span: f64,
    policy: &StepPolicy,
) -> Result<SectionRun> {
    if ic.x == 0.0 && ic.y == 0.0 {
        return Err(KamError::invalid(
            "the origin is a fixed point and never crosses",
        ));
    }
    let obs = ObserverSet::bounds_only(DEFAULT_ESCAPE_THRESHOLD).with_section(limit);
    let run = integrate(ic, forcing, policy, span, &obs)?;
    let complete = !run.escaped && limit.is_none_or(|n| run.crossings.len() >= n);
    Ok(SectionRun {
        records: run.crossings,
        complete,
        escape_time: run.escape_time,
    })
}
