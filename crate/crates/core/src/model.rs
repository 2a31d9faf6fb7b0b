//! The forced quartic-potential oscillator
//!
//! ```text
//! H(x, y, t) = y^2/2 + a(omega t) x^4/4,    a(theta) = 1 + mu f(theta)
//! ```
//!
//! with `f` a zero-mean, unit sup-norm Fourier series, and the exact
//! action-angle coordinates of the frozen system `y^2/2 + a x^4/4`:
//!
//! ```text
//! x =  (3A/T)^(1/3) a^(-1/6) cn(T alpha)
//! y = -(3A/T)^(2/3) a^( 1/6) sn(T alpha) dn(T alpha)      (modulus 1/sqrt 2)
//! ```
//!
//! where `T = 4K(1/sqrt 2) / 2pi`.

use std::f64::consts::TAU;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_elliptic_k, incomplete_elliptic_f, jacobi, EllipticModulus};
use crate::error::{KamError, Result};

static QUARTER_PERIOD: LazyLock<f64> =
    LazyLock::new(|| complete_elliptic_k(EllipticModulus::QUARTIC));

/// `K(1/sqrt 2)`, the quarter period of `cn` for the quartic oscillator.
pub fn quarter_period() -> f64 {
    *QUARTER_PERIOD
}

/// `T = 4K(1/sqrt 2) / 2pi`, approximately `1.1803405990`.
pub fn period_constant() -> f64 {
    4.0 * quarter_period() / TAU
}

/// Relative tolerance on `||f||_inf = 1`.
pub const SUP_NORM_TOL: f64 = 1e-10;

/// A `2pi`-periodic, zero-mean forcing profile
/// `f(theta) = sum_n cos[n-1] cos(n theta) + sin[n-1] sin(n theta)`.
///
/// There is no constant term, so the mean is zero by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawShape", into = "RawShape")]
pub struct FourierShape {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShape {
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

impl TryFrom<RawShape> for FourierShape {
    type Error = KamError;

    fn try_from(raw: RawShape) -> Result<Self> {
        FourierShape::new(raw.cos, raw.sin)
    }
}

impl From<FourierShape> for RawShape {
    fn from(s: FourierShape) -> Self {
        RawShape {
            cos: s.cos,
            sin: s.sin,
        }
    }
}

impl Default for FourierShape {
    fn default() -> Self {
        FourierShape::cosine()
    }
}

impl FourierShape {
    /// `f(theta) = cos theta`.
    pub fn cosine() -> Self {
        FourierShape {
            cos: vec![1.0],
            sin: Vec::new(),
        }
    }

    /// Build a shape whose sup-norm must already be 1.
    pub fn new(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let shape = Self::unchecked(cos, sin)?;
        let norm = shape.sup_norm();
        if (norm - 1.0).abs() > SUP_NORM_TOL {
            return Err(KamError::InvalidShape(format!(
                "sup-norm is {norm}, expected 1"
            )));
        }
        Ok(shape)
    }

    /// Build a shape from arbitrary coefficients, rescaled to unit sup-norm.
    pub fn normalized(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        let mut shape = Self::unchecked(cos, sin)?;
        let norm = shape.sup_norm();
        shape.cos.iter_mut().for_each(|c| *c /= norm);
        shape.sin.iter_mut().for_each(|s| *s /= norm);
        Ok(shape)
    }

    fn unchecked(cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        if cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(KamError::InvalidShape("non-finite coefficient".into()));
        }
        if cos.iter().chain(&sin).all(|&c| c == 0.0) {
            return Err(KamError::InvalidShape("all coefficients are zero".into()));
        }
        Ok(FourierShape { cos, sin })
    }

    pub fn cos_coefficients(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coefficients(&self) -> &[f64] {
        &self.sin
    }

    /// Highest harmonic present.
    pub fn order(&self) -> usize {
        self.cos.len().max(self.sin.len())
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.series(theta, 0)
    }

    /// `f'(theta)`.
    pub fn derivative(&self, theta: f64) -> f64 {
        self.series(theta, 1)
    }

    /// `d^order f / dtheta^order` for `order` in 0..=2.
    fn series(&self, theta: f64, order: u32) -> f64 {
        let mut acc = 0.0;
        for (i, &c) in self.cos.iter().enumerate() {
            let n = (i + 1) as f64;
            let (s, co) = (n * theta).sin_cos();
            acc += c * match order {
                0 => co,
                1 => -n * s,
                _ => -n * n * co,
            };
        }
        for (i, &c) in self.sin.iter().enumerate() {
            let n = (i + 1) as f64;
            let (s, co) = (n * theta).sin_cos();
            acc += c * match order {
                0 => s,
                1 => n * co,
                _ => -n * n * s,
            };
        }
        acc
    }

    /// `max |f|` over one period: dense grid, then golden-section refinement
    /// around every grid-local maximum.
    pub fn sup_norm(&self) -> f64 {
        let m = 64 * (self.order() + 1);
        let h = TAU / m as f64;
        let vals: Vec<f64> = (0..m).map(|i| self.eval(i as f64 * h).abs()).collect();
        let mut best = 0.0_f64;
        for i in 0..m {
            let prev = vals[(i + m - 1) % m];
            let next = vals[(i + 1) % m];
            if vals[i] >= prev && vals[i] >= next {
                let centre = i as f64 * h;
                best = best.max(self.refine_peak(centre - h, centre + h));
            }
        }
        best
    }

    fn refine_peak(&self, mut lo: f64, mut hi: f64) -> f64 {
        let g = |t: f64| self.eval(t).abs();
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let mut x1 = hi - ratio * (hi - lo);
        let mut x2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (g(x1), g(x2));
        for _ in 0..80 {
            if hi - lo < 1e-12 {
                break;
            }
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + ratio * (hi - lo);
                f2 = g(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - ratio * (hi - lo);
                f1 = g(x1);
            }
        }
        f1.max(f2).max(g(0.5 * (lo + hi)))
    }

    /// Mean over one period by the trapezoid rule, exact for trigonometric
    /// polynomials of the sampled order.
    pub fn mean(&self) -> f64 {
        let m = 4 * (self.order() + 1);
        (0..m)
            .map(|i| self.eval(TAU * i as f64 / m as f64))
            .sum::<f64>()
            / m as f64
    }
}

/// Forcing amplitude `mu`, frequency `omega` and profile `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawForcing", into = "RawForcing")]
pub struct ForcingSpec {
    mu: f64,
    omega: f64,
    shape: FourierShape,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForcing {
    mu: f64,
    omega: f64,
    #[serde(default)]
    shape: FourierShape,
}

impl TryFrom<RawForcing> for ForcingSpec {
    type Error = KamError;

    fn try_from(raw: RawForcing) -> Result<Self> {
        ForcingSpec::with_shape(raw.mu, raw.omega, raw.shape)
    }
}

impl From<ForcingSpec> for RawForcing {
    fn from(f: ForcingSpec) -> Self {
        RawForcing {
            mu: f.mu,
            omega: f.omega,
            shape: f.shape,
        }
    }
}

impl ForcingSpec {
    /// Cosine forcing.
    pub fn new(mu: f64, omega: f64) -> Result<Self> {
        Self::with_shape(mu, omega, FourierShape::cosine())
    }

    pub fn with_shape(mu: f64, omega: f64, shape: FourierShape) -> Result<Self> {
        if !mu.is_finite() {
            return Err(KamError::NonFinite("mu"));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(KamError::invalid(format!("omega must be > 0, got {omega}")));
        }
        Ok(ForcingSpec { mu, omega, shape })
    }

    /// The unforced system (`mu = 0`) at the given frequency.
    pub fn unforced(omega: f64) -> Result<Self> {
        Self::new(0.0, omega)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn shape(&self) -> &FourierShape {
        &self.shape
    }

    /// `2pi / omega`.
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// `a(theta) = 1 + mu f(theta)`.
    #[inline]
    pub fn a(&self, theta: f64) -> f64 {
        if self.mu == 0.0 {
            return 1.0;
        }
        1.0 + self.mu * self.shape.eval(theta)
    }

    /// `a(omega t)`.
    #[inline]
    pub fn a_at(&self, t: f64) -> f64 {
        self.a(self.omega * t)
    }

    /// `d/dtheta a(theta) = mu f'(theta)`.
    pub fn a_rate(&self, theta: f64) -> f64 {
        self.mu * self.shape.derivative(theta)
    }

    pub fn hamiltonian(&self, s: &PhaseState) -> f64 {
        frozen_energy(s.x, s.y, self.a_at(s.t))
    }

    /// `(xdot, ydot) = (y, -a(omega t) x^3)`.
    pub fn vector_field(&self, s: &PhaseState) -> (f64, f64) {
        (s.y, -self.a_at(s.t) * s.x * s.x * s.x)
    }
}

/// `a(theta)` for the given forcing.
pub fn forcing_a(theta: f64, forcing: &ForcingSpec) -> f64 {
    forcing.a(theta)
}

/// A point of the extended phase space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, t: f64) -> Result<Self> {
        let s = PhaseState { x, y, t };
        if !s.is_finite() {
            return Err(KamError::NonFinite("phase state"));
        }
        Ok(s)
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    /// `y^2/2 + x^4/4`.
    #[inline]
    pub fn unforced_energy(&self) -> f64 {
        frozen_energy(self.x, self.y, 1.0)
    }
}

/// `y^2/2 + a x^4/4`.
#[inline]
pub fn frozen_energy(x: f64, y: f64, a: f64) -> f64 {
    let x2 = x * x;
    0.5 * y * y + 0.25 * a * x2 * x2
}

/// Period of the unforced orbit at energy `e`: `4K / c` with `c = (4e)^(1/4)`.
pub fn unforced_period(e: f64) -> f64 {
    4.0 * quarter_period() / (4.0 * e).powf(0.25)
}

/// Action-angle pair of the frozen oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAngle {
    pub action: f64,
    pub angle: f64,
}

impl ActionAngle {
    /// Normalises `angle` into `[0, 2pi)`.
    pub fn new(action: f64, angle: f64) -> Result<Self> {
        if !action.is_finite() || !angle.is_finite() {
            return Err(KamError::NonFinite("action-angle"));
        }
        if action < 0.0 {
            return Err(KamError::invalid(format!(
                "action must be >= 0, got {action}"
            )));
        }
        Ok(ActionAngle {
            action,
            angle: wrap_angle(angle),
        })
    }
}

fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn check_a(a: f64) -> Result<()> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(KamError::invalid(format!(
            "forcing factor a must be > 0, got {a}"
        )))
    }
}

/// Position and momentum of the frozen oscillator with factor `a` at the
/// given action and angle. `a = 1` is the unforced transform.
pub fn from_action_angle(aa: ActionAngle, a: f64) -> Result<(f64, f64)> {
    check_a(a)?;
    if aa.action == 0.0 {
        return Ok((0.0, 0.0));
    }
    let t = period_constant();
    let r = (3.0 * aa.action / t).cbrt();
    let j = jacobi(t * aa.angle, EllipticModulus::QUARTIC)?;
    let x = r * a.powf(-1.0 / 6.0) * j.cn;
    let y = -r * r * a.powf(1.0 / 6.0) * j.sn * j.dn;
    Ok((x, y))
}

/// Inverse of [`from_action_angle`].
///
/// The action follows from the frozen energy, `A = (T/3) (4E)^(3/4) a^(-1/4)`.
/// The angle comes from the Jacobi amplitude `phi` (`cn = cos phi`,
/// `sn = sin phi`) through `T alpha = F(phi, 1/sqrt 2)`.
pub fn to_action_angle(x: f64, y: f64, a: f64) -> Result<ActionAngle> {
    check_a(a)?;
    if !x.is_finite() || !y.is_finite() {
        return Err(KamError::NonFinite("position/momentum"));
    }
    if x == 0.0 && y == 0.0 {
        return Err(KamError::invalid("angle undefined at the origin"));
    }
    let t = period_constant();
    let e = frozen_energy(x, y, a);
    let action = t / 3.0 * (4.0 * e).powf(0.75) * a.powf(-0.25);

    // Normalised coordinates on the unit level set: xi = cn, eta = sn dn.
    let xi = (x / (4.0 * e / a).powf(0.25)).clamp(-1.0, 1.0);
    let eta = -y / (2.0 * e.sqrt());
    let (sin_phi, cos_phi) = if xi * xi <= 0.5 {
        ((1.0 - xi * xi).sqrt().copysign(eta), xi)
    } else {
        // sn^2 (1 - sn^2/2) = eta^2, small-sn branch.
        let disc = (1.0 - 2.0 * eta * eta).max(0.0);
        let sn = (2.0 * eta * eta / (1.0 + disc.sqrt())).sqrt();
        (if eta == 0.0 { 0.0 } else { sn.copysign(eta) }, xi)
    };
    let mut phi = sin_phi.atan2(cos_phi);
    if phi < 0.0 {
        phi += TAU;
    }
    let u = incomplete_elliptic_f(phi, EllipticModulus::QUARTIC)?;
    ActionAngle::new(action, u / t)
}

/// `Omega_0(A) = dH_0/dA = (3A/T^4)^(1/3)`.
pub fn omega0_action(action: f64) -> Result<f64> {
    if !(action.is_finite() && action > 0.0) {
        return Err(KamError::invalid(format!(
            "action must be > 0, got {action}"
        )));
    }
    let t = period_constant();
    Ok((3.0 * action / t.powi(4)).cbrt())
}

/// `H_0(A) = (3A/T)^(4/3) / 4`.
pub fn h0_action(action: f64) -> f64 {
    0.25 * (3.0 * action / period_constant()).powf(4.0 / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cos_forcing(mu: f64, omega: f64) -> ForcingSpec {
        ForcingSpec::new(mu, omega).unwrap()
    }

    #[test]
    fn period_constant_value() {
        assert!((period_constant() - 1.1803405990).abs() < 1e-10);
    }

    #[test]
    fn forcing_factor_examples() {
        assert_eq!(cos_forcing(0.8, 1.0).a(0.0), 1.8);
        assert!(cos_forcing(1.0, 1.0).a(PI).abs() < 1e-15);
        assert_eq!(cos_forcing(0.0, 3.0).a(1.234), 1.0);
    }

    #[test]
    fn forcing_is_periodic() {
        let shape = FourierShape::normalized(vec![0.3, 0.0, 0.2], vec![0.0, 0.5]).unwrap();
        let f = ForcingSpec::with_shape(0.7, 1.0, shape).unwrap();
        for i in 0..100 {
            let th = -5.0 + 0.17 * i as f64;
            assert!((f.a(th + TAU) - f.a(th)).abs() < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let unforced = cos_forcing(0.0, 1.0);
        let s = PhaseState::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(unforced.hamiltonian(&s), 0.25);

        let f = cos_forcing(0.8, 0.3);
        let s = PhaseState::new(0.0, 2.0, 17.0).unwrap();
        assert_eq!(f.hamiltonian(&s), 2.0);

        let s = PhaseState::new(1.0, 1.0, 0.0).unwrap();
        assert!((f.hamiltonian(&s) - 0.95).abs() < 1e-15);
    }

    #[test]
    fn vector_field_examples() {
        let s = PhaseState::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(cos_forcing(0.0, 1.0).vector_field(&s), (0.0, -1.0));

        let s = PhaseState::new(0.0, 0.7, 3.0).unwrap();
        let (dx, dy) = cos_forcing(0.9, 2.0).vector_field(&s);
        assert_eq!(dx, 0.7);
        assert_eq!(dy.abs(), 0.0);

        let omega = 2.0;
        let s = PhaseState::new(1.0, 1.0, PI / omega).unwrap();
        let (dx, dy) = cos_forcing(1.0, omega).vector_field(&s);
        assert_eq!(dx, 1.0);
        assert!(dy.abs() < 1e-15);
    }

    #[test]
    fn phase_state_rejects_non_finite() {
        assert!(PhaseState::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(PhaseState::new(0.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn shape_validation() {
        assert!(FourierShape::new(vec![0.5], vec![]).is_err());
        assert!(FourierShape::new(vec![], vec![]).is_err());
        assert!(FourierShape::new(vec![f64::NAN], vec![]).is_err());
        assert!(FourierShape::new(vec![], vec![1.0]).is_ok());
        let s = FourierShape::normalized(vec![1.0, 1.0], vec![]).unwrap();
        assert!((s.sup_norm() - 1.0).abs() < SUP_NORM_TOL);
        assert!(s.mean().abs() < 1e-15);
        assert!(FourierShape::new(s.cos_coefficients().to_vec(), vec![]).is_ok());
    }

    #[test]
    fn sup_norm_of_two_harmonics() {
        // cos t + cos 2t peaks at t = 0 with value 2.
        let s = FourierShape::unchecked(vec![1.0, 1.0], vec![]).unwrap();
        assert!((s.sup_norm() - 2.0).abs() < 1e-13);
        // sin t + sin 2t: max of |f| is at cos t = (-1 + sqrt 33)/8.
        let s = FourierShape::unchecked(vec![], vec![1.0, 1.0]).unwrap();
        let c: f64 = (-1.0 + 33f64.sqrt()) / 8.0;
        let t = c.acos();
        let expected = t.sin() + (2.0 * t).sin();
        assert!((s.sup_norm() - expected).abs() < 1e-13);
    }

    #[test]
    fn forcing_spec_validation() {
        assert!(ForcingSpec::new(0.5, 0.0).is_err());
        assert!(ForcingSpec::new(0.5, -1.0).is_err());
        assert!(ForcingSpec::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn forcing_json_fragment() {
        let f: ForcingSpec = serde_json::from_str(
            r#"{"mu": 0.8, "omega": 0.2, "shape": {"cos": [1.0], "sin": []}}"#,
        )
        .unwrap();
        assert_eq!(f, cos_forcing(0.8, 0.2));
        let f: ForcingSpec = serde_json::from_str(r#"{"mu": 0.8, "omega": 0.2}"#).unwrap();
        assert_eq!(f.shape(), &FourierShape::cosine());
        assert!(serde_json::from_str::<ForcingSpec>(
            r#"{"mu": 0.8, "omega": 0.2, "shape": {"cos": [0.5]}}"#
        )
        .is_err());
        assert!(serde_json::from_str::<ForcingSpec>(
            r#"{"mu": 0.8, "omega": 0.2, "shape": {"cos": [1.0], "const": 0.1}}"#
        )
        .is_err());
        let back: ForcingSpec = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn action_angle_normalises() {
        let aa = ActionAngle::new(1.0, -0.5).unwrap();
        assert!((aa.angle - (TAU - 0.5)).abs() < 1e-15);
        assert!(ActionAngle::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn transform_examples() {
        let t = period_constant();
        let action = 0.7;
        let r = (3.0 * action / t).cbrt();

        let (x, y) = from_action_angle(ActionAngle::new(action, 0.0).unwrap(), 1.0).unwrap();
        assert!((x - r).abs() < 1e-14 && y == 0.0);

        let (x, y) = from_action_angle(ActionAngle::new(action, PI / 2.0).unwrap(), 1.0).unwrap();
        assert!(x.abs() < 1e-14);
        assert!((y + r * r / 2f64.sqrt()).abs() < 1e-14);

        assert_eq!(
            from_action_angle(ActionAngle::new(0.0, 1.0).unwrap(), 1.0).unwrap(),
            (0.0, 0.0)
        );
        assert!(from_action_angle(ActionAngle::new(1.0, 1.0).unwrap(), 0.0).is_err());
    }

    #[test]
    fn inverse_transform_examples() {
        let t = period_constant();
        let c = 1.3;
        let aa = to_action_angle(c, 0.0, 1.0).unwrap();
        assert!((aa.action - t / 3.0 * c.powi(3)).abs() < 1e-14);
        assert_eq!(aa.angle, 0.0);

        let action = 2.5;
        let (x, _) = from_action_angle(ActionAngle::new(action, 0.0).unwrap(), 1.0).unwrap();
        let aa = to_action_angle(x, 0.0, 1.0).unwrap();
        assert!((aa.action - action).abs() < 1e-13);

        assert!(to_action_angle(0.0, 0.0, 1.0).is_err());
        assert!(to_action_angle(1.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn boundary_angles() {
        // Quadrant ties resolve onto the boundary angle.
        let quarter = [
            (1.0, 0.0, 0.0),
            (0.0, -1.0, 0.5 * PI),
            (-1.0, 0.0, PI),
            (0.0, 1.0, 1.5 * PI),
        ];
        for (x, y, expected) in quarter {
            let aa = to_action_angle(x, y, 1.0).unwrap();
            assert!(
                (aa.angle - expected).abs() < 1e-13,
                "({x}, {y}) -> {}",
                aa.angle
            );
        }
    }

    #[test]
    fn omega0_examples() {
        let t = period_constant();
        assert!((omega0_action(t.powi(4) / 3.0).unwrap() - 1.0).abs() < 1e-14);
        let c: f64 = 1.7;
        assert!((omega0_action(t / 3.0 * c.powi(3)).unwrap() - c / t).abs() < 1e-14);
        let w = omega0_action(0.4).unwrap();
        assert!((omega0_action(3.2).unwrap() - 2.0 * w).abs() < 1e-14);
        assert!(omega0_action(0.0).is_err());
        assert!(omega0_action(-1.0).is_err());
    }

    #[test]
    fn frozen_energy_identity() {
        // sn^2 dn^2 / 2 + cn^4 / 4 = 1/4 for k = 1/sqrt 2.
        let t = period_constant();
        for i in 0..1000 {
            let alpha = TAU * i as f64 / 1000.0;
            let j = jacobi(t * alpha, EllipticModulus::QUARTIC).unwrap();
            let lhs = 0.5 * (j.sn * j.dn).powi(2) + 0.25 * j.cn.powi(4);
            assert!((lhs - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn h0_consistency() {
        let unforced = cos_forcing(0.0, 1.0);
        for &action in &[0.05, 0.8, 4.0] {
            for i in 0..64 {
                let alpha = TAU * i as f64 / 64.0;
                let (x, y) =
                    from_action_angle(ActionAngle::new(action, alpha).unwrap(), 1.0).unwrap();
                let h = unforced.hamiltonian(&PhaseState::new(x, y, 0.0).unwrap());
                assert!((h - h0_action(action)).abs() < 1e-10);
            }
        }
    }
}
