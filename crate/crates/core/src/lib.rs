#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Numerics for the periodically forced quartic oscillator
//! `H = y^2/2 + (1 + mu f(omega t)) x^4/4`.

pub mod averaging;
pub mod elliptic;
pub mod error;
pub mod integrator;
pub mod model;
pub mod poincare;
pub mod sweep;

pub use averaging::{
    adiabatic_action, highfreq_drift_experiment, kappa, lowfreq_twist_experiment, script_a0,
    twist_frequency, DriftConfig, DriftReport, Kappa, ScalingFit, TwistConfig, TwistReport,
};
pub use elliptic::{
    complete_elliptic_k, incomplete_elliptic_f, jacobi, EllipticModulus, JacobiTriple,
};
pub use error::{KamError, Result};
pub use integrator::{integrate, verlet_step, ObserverSet, OrbitSummary, StepMode, StepPolicy};
pub use model::{
    from_action_angle, period_constant, to_action_angle, ActionAngle, ForcingSpec, FourierShape,
    PhaseState,
};
pub use poincare::{angle_section, stroboscopic, CrossingRecord, SectionRun, StrobeRun};
pub use sweep::{
    classify_orbit, classify_system, run_grid, sample_ics, CellResult, OrbitClass, SweepConfig,
    SweepReport, SystemClass, SystemVerdict,
};
