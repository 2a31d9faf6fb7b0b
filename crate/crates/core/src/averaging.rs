//! Slow-forcing action chain and the two scaling experiments.
//!
//! For `|mu| < 1` the loop action of the frozen system, measured where the
//! orbit crosses `{y = 0, x > 0}`, is rescaled by the averaged forcing
//! factor `kappa` into an adiabatic action `J`. Its per-loop increments
//! and the high-frequency deviation of the unforced action are fitted
//! against the small parameter on a log-log scale.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};
use crate::integrator::{integrate, ObserverSet, StepPolicy, DEFAULT_ESCAPE_THRESHOLD};
use crate::model::{period_constant, ForcingSpec, PhaseState};
use crate::poincare::section_over;

pub const KAPPA_TOL: f64 = 1e-10;

/// Median per-loop increments below this are integrator noise.
pub const NOISE_FLOOR: f64 = 1e-9;

const MIN_PANELS: usize = 8;
const MAX_DOUBLINGS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub value: f64,
    /// Change in `value` over the last panel doubling.
    pub error: f64,
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// `1/kappa = (1/4) (3/T)^(4/3) <a^(1/3)>`, the mean over one forcing
/// period by composite Simpson with panel doubling until successive values
/// of `kappa` differ by less than `tol`.
pub fn kappa(forcing: &ForcingSpec, tol: f64) -> Result<Kappa> {
    if forcing.mu().abs() >= 1.0 {
        return Err(KamError::invalid(format!(
            "kappa needs |mu| < 1 so that a stays positive, got mu = {}",
            forcing.mu()
        )));
    }
    if !(tol > 0.0) {
        return Err(KamError::invalid("kappa tolerance must be > 0"));
    }
    let scale = 0.25 * (3.0 / period_constant()).powf(4.0 / 3.0);
    let value_at = |panels| {
        let mean = simpson(|q| forcing.a(q).cbrt(), 0.0, TAU, panels) / TAU;
        1.0 / (scale * mean)
    };
    let mut panels = MIN_PANELS;
    let mut prev = value_at(panels);
    for _ in 0..MAX_DOUBLINGS {
        panels *= 2;
        let next = value_at(panels);
        let error = (next - prev).abs();
        if error < tol {
            return Ok(Kappa { value: next, error });
        }
        prev = next;
    }
    Err(KamError::invalid(format!(
        "kappa quadrature did not reach tol {tol}"
    )))
}

/// `(T/3) (4p)^(3/4) a(q)^(-1/4)`: the frozen-system loop action at energy
/// `p` and forcing phase `q`.
pub fn script_a0(p: f64, q: f64, forcing: &ForcingSpec) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(KamError::invalid(format!("energy must be >= 0, got {p}")));
    }
    let a = forcing.a(q);
    if !(a > 0.0) {
        return Err(KamError::invalid(format!("a(q) = {a} is not positive")));
    }
    Ok(period_constant() / 3.0 * (4.0 * p).powf(0.75) * a.powf(-0.25))
}

/// `J = B^(4/3) / kappa` with `B = script_a0(E_a, omega t)` and `E_a` the
/// frozen energy of `s`. Only meaningful on or near `{y = 0, x > 0}`.
pub fn adiabatic_action(s: &PhaseState, forcing: &ForcingSpec, kappa: Kappa) -> Result<f64> {
    let q = forcing.omega() * s.t;
    let a = forcing.a(q);
    if !(a > 0.0) {
        return Err(KamError::invalid(format!(
            "a(omega t) = {a} is not positive"
        )));
    }
    let e = 0.5 * s.y * s.y + 0.25 * a * s.x.powi(4);
    let b = script_a0(e, q, forcing)?;
    Ok(b.powf(4.0 / 3.0) / kappa.value)
}

/// `(3 pi / 2) kappa^(3/4) J^(-1/4)`. Unforced, with `J = c^4/4`, this is
/// `4K/c`, the time between crossings of the orbit through `(c, 0)`.
pub fn twist_frequency(j: f64, kappa: Kappa) -> Result<f64> {
    if !(j > 0.0) || !j.is_finite() {
        return Err(KamError::invalid(format!("J must be > 0, got {j}")));
    }
    Ok(1.5 * PI * kappa.value.powf(0.75) * j.powf(-0.25))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwistSample {
    pub j: f64,
    pub t: f64,
    /// Slow phase `eps t mod 2pi`.
    pub psi: f64,
}

/// Least-squares line through `(ln x, ln y)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

impl ScalingFit {
    /// Fit `ln y = slope ln x + intercept`. Needs two distinct positive `x`
    /// and positive `y`.
    pub fn log_log(xy: &[(f64, f64)]) -> Result<ScalingFit> {
        if xy.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
            return Err(KamError::invalid("log-log fit needs positive data"));
        }
        let points: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
        let n = points.len() as f64;
        if points.len() < 2 {
            return Err(KamError::invalid("log-log fit needs at least two points"));
        }
        let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
        if sxx == 0.0 {
            return Err(KamError::invalid("log-log fit needs distinct abscissae"));
        }
        let slope = sxy / sxx;
        let r_squared = if syy == 0.0 {
            1.0
        } else {
            (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
        };
        Ok(ScalingFit {
            slope,
            intercept: my - slope * mx,
            r_squared,
            points,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwistConfig {
    pub policy: StepPolicy,
    pub kappa_tol: f64,
    pub noise_floor: f64,
}

impl Default for TwistConfig {
    fn default() -> Self {
        TwistConfig {
            // The per-loop increments at the smallest eps are ~1e-8; the
            // integrator error per loop has to sit well below that.
            policy: StepPolicy::adaptive(2e-4),
            kappa_tol: KAPPA_TOL,
            noise_floor: NOISE_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistPoint {
    pub eps: f64,
    pub median_dj: f64,
    pub n_loops: usize,
    pub escaped: bool,
    pub samples: Vec<TwistSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistReport {
    pub points: Vec<TwistPoint>,
    /// `None` when every median sits at the noise floor or fewer than two
    /// points survive.
    pub fit: Option<ScalingFit>,
}

impl TwistReport {
    pub fn is_degenerate(&self) -> bool {
        self.fit.is_none()
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn twist_point(mu: f64, eps: f64, ic: &PhaseState, cfg: &TwistConfig) -> Result<TwistPoint> {
    let forcing = ForcingSpec::new(mu, eps)?;
    let k = kappa(&forcing, cfg.kappa_tol)?;
    let run = section_over(ic, &forcing, forcing.period(), &cfg.policy)?;
    let samples = run
        .records
        .iter()
        .map(|r| {
            Ok(TwistSample {
                j: adiabatic_action(&r.state(), &forcing, k)?,
                t: r.t,
                psi: (eps * r.t).rem_euclid(TAU),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let increments: Vec<f64> = samples
        .windows(2)
        .map(|w| (w[1].j - w[0].j).abs())
        .collect();
    Ok(TwistPoint {
        eps,
        n_loops: increments.len(),
        median_dj: median(increments),
        escaped: run.escape_time.is_some(),
        samples,
    })
}

/// For each `eps` (the forcing frequency), follow `ic` over one slow period
/// `2pi/eps`, take the median of `|J_(n+1) - J_n|` over successive section
/// crossings, and fit `ln median` against `ln eps`.
///
/// Escaped points are kept in the report but left out of the fit. When no
/// median rises above the noise floor the report is degenerate and carries
/// no fit.
pub fn lowfreq_twist_experiment(
    mu: f64,
    eps_list: &[f64],
    ic: &PhaseState,
    cfg: &TwistConfig,
) -> Result<TwistReport> {
    if mu.abs() >= 1.0 {
        return Err(KamError::invalid(format!(
            "twist experiment needs |mu| < 1, got {mu}"
        )));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e <= 0.05)) {
        return Err(KamError::invalid("each eps must lie in (0, 0.05]"));
    }
    cfg.policy.validate()?;
    let points = eps_list
        .par_iter()
        .map(|&eps| twist_point(mu, eps, ic, cfg))
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.escaped && p.median_dj > 0.0)
        .map(|p| (p.eps, p.median_dj))
        .collect();
    let above_floor = usable.iter().any(|&(_, dj)| dj > cfg.noise_floor);
    let fit = if above_floor && usable.len() >= 2 {
        Some(ScalingFit::log_log(&usable)?)
    } else {
        None
    };
    Ok(TwistReport { points, fit })
}

/// Which states enter the maximum in the drift experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DriftSampling {
    /// Every accepted integrator state.
    #[default]
    Every,
    /// Only the stroboscopic samples `k 2pi/omega`. The leading `1/omega`
    /// oscillation vanishes there, so this measures the `1/omega^2` part.
    Strobe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftConfig {
    pub window: f64,
    pub policy: StepPolicy,
    pub sampling: DriftSampling,
}

impl Default for DriftConfig {
    fn default() -> Self {
        DriftConfig {
            window: 100.0,
            policy: StepPolicy::default(),
            sampling: DriftSampling::Every,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftPoint {
    pub omega: f64,
    pub max_da: f64,
    pub escaped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub points: Vec<DriftPoint>,
    pub fit: Option<ScalingFit>,
}

/// `(T/3) (4E)^(3/4)`, the unforced action at energy `E`.
pub fn unforced_action(e: f64) -> f64 {
    period_constant() / 3.0 * (4.0 * e.max(0.0)).powf(0.75)
}

fn drift_point(mu: f64, omega: f64, ic: &PhaseState, cfg: &DriftConfig) -> Result<DriftPoint> {
    let forcing = ForcingSpec::new(mu, omega)?;
    let mut obs = ObserverSet::bounds_only(DEFAULT_ESCAPE_THRESHOLD);
    if cfg.sampling == DriftSampling::Strobe {
        obs = obs.with_strobe(None);
    }
    let run = integrate(ic, &forcing, &cfg.policy, cfg.window, &obs)?;
    let a0 = unforced_action(ic.unforced_energy());
    let max_da = match cfg.sampling {
        // The action is monotone in the energy, so the extremes suffice.
        DriftSampling::Every => (unforced_action(run.max_unforced_energy) - a0)
            .abs()
            .max((unforced_action(run.min_unforced_energy) - a0).abs()),
        DriftSampling::Strobe => run
            .strobes
            .iter()
            .map(|s| (unforced_action(s.unforced_energy()) - a0).abs())
            .fold(0.0, f64::max),
    };
    Ok(DriftPoint {
        omega,
        max_da,
        escaped: run.escaped,
    })
}

/// For each `omega`, integrate `ic` over `[0, window]` and record the
/// largest deviation of the unforced action from its initial value; fit
/// `ln D` against `ln omega`.
pub fn highfreq_drift_experiment(
    mu: f64,
    omega_list: &[f64],
    ic: &PhaseState,
    cfg: &DriftConfig,
) -> Result<DriftReport> {
    if omega_list.iter().any(|&w| !(w >= 10.0) || !w.is_finite()) {
        return Err(KamError::invalid("each omega must be >= 10"));
    }
    if !(cfg.window > 0.0 && cfg.window.is_finite()) {
        return Err(KamError::invalid("drift window must be > 0"));
    }
    cfg.policy.validate()?;
    let points = omega_list
        .par_iter()
        .map(|&w| drift_point(mu, w, ic, cfg))
        .collect::<Result<Vec<_>>>()?;
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.escaped && p.max_da > 0.0)
        .map(|p| (p.omega, p.max_da))
        .collect();
    let fit = if usable.len() >= 2 {
        Some(ScalingFit::log_log(&usable)?)
    } else {
        None
    };
    Ok(DriftReport { points, fit })
}
