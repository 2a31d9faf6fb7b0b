//! Jacobi elliptic functions and elliptic integrals of the first kind.
//!
//! Everything is driven by the arithmetic-geometric mean (AGM) of `1` and
//! the complementary modulus `k' = sqrt(1 - k^2)`:
//!
//! ```text
//! a[n+1] = (a[n] + b[n]) / 2,   b[n+1] = sqrt(a[n] b[n]),   c[n+1] = (a[n] - b[n]) / 2
//! ```
//!
//! * `K(k) = pi / (2 a[N])`
//! * `sn, cn, dn` by the descending Landen transformation: start from
//!   `phi[N] = 2^N a[N] u` and recur `phi[n-1] = (phi[n] + asin(c[n]/a[n] sin phi[n])) / 2`.
//! * `F(phi, k) = phi[N] / (2^N a[N])` with `phi[n+1] = phi[n] + atan(b[n]/a[n] tan phi[n])`,
//!   taking the continuous branch of the arctangent.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{KamError, Result};

/// Stop the AGM once `|c[n]|` drops below this.
const AGM_TOL: f64 = 1e-15;

/// Quadratic convergence makes this unreachable for `k < 1 - 1e-16`.
const MAX_AGM_ITER: usize = 64;

/// Elliptic modulus `k` with `0 <= k < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    /// The modulus `1/sqrt(2)` of the quartic oscillator.
    pub const QUARTIC: EllipticModulus = EllipticModulus(FRAC_1_SQRT_2);

    pub fn new(k: f64) -> Result<Self> {
        if !k.is_finite() || !(0.0..1.0).contains(&k) {
            return Err(KamError::InvalidModulus(k));
        }
        Ok(EllipticModulus(k))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `k' = sqrt(1 - k^2)`.
    #[inline]
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

impl TryFrom<f64> for EllipticModulus {
    type Error = KamError;

    fn try_from(k: f64) -> Result<Self> {
        EllipticModulus::new(k)
    }
}

impl From<EllipticModulus> for f64 {
    fn from(k: EllipticModulus) -> f64 {
        k.0
    }
}

/// Values of `(sn, cn, dn)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// The AGM sequence `(a[n], c[n])`, `n = 0..=N`, for one modulus.
struct AgmChain {
    a: Vec<f64>,
    c: Vec<f64>,
}

impl AgmChain {
    fn new(k: EllipticModulus) -> Self {
        let mut a = vec![1.0];
        let mut c = vec![k.value()];
        let mut b = k.complementary();
        while c.last().unwrap().abs() > AGM_TOL && a.len() <= MAX_AGM_ITER {
            let an = *a.last().unwrap();
            a.push(0.5 * (an + b));
            c.push(0.5 * (an - b));
            b = (an * b).sqrt();
        }
        AgmChain { a, c }
    }

    fn depth(&self) -> usize {
        self.a.len() - 1
    }

    fn limit(&self) -> f64 {
        *self.a.last().unwrap()
    }
}

/// Complete elliptic integral of the first kind `K(k)`.
pub fn complete_elliptic_k(k: EllipticModulus) -> f64 {
    let mut a = 1.0_f64;
    let mut b = k.complementary();
    for _ in 0..MAX_AGM_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    PI / (a + b)
}

/// Jacobi elliptic functions `sn(u, k)`, `cn(u, k)`, `dn(u, k)`.
///
/// The argument is first reduced modulo the real period `4K`, so accuracy
/// does not degrade over many periods.
pub fn jacobi(u: f64, k: EllipticModulus) -> Result<JacobiTriple> {
    if !u.is_finite() {
        return Err(KamError::NonFinite("jacobi argument"));
    }
    if k.value() == 0.0 {
        let (s, c) = u.sin_cos();
        return Ok(JacobiTriple {
            sn: s,
            cn: c,
            dn: 1.0,
        });
    }
    let period = 4.0 * complete_elliptic_k(k);
    let r = u - period * (u / period).round();

    let chain = AgmChain::new(k);
    let n = chain.depth();
    let mut phi = (1u64 << n) as f64 * chain.limit() * r;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (chain.c[i] / chain.a[i] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let k2 = k.value() * k.value();
    let dn = (1.0 - k2 * sn * sn).sqrt();
    Ok(JacobiTriple { sn, cn, dn })
}

/// Incomplete elliptic integral of the first kind
/// `F(phi, k) = int_0^phi dtheta / sqrt(1 - k^2 sin^2 theta)`.
///
/// Valid for any finite `phi`; `F(phi + pi, k) = F(phi, k) + 2K(k)` holds by
/// construction.
pub fn incomplete_elliptic_f(phi: f64, k: EllipticModulus) -> Result<f64> {
    if !phi.is_finite() {
        return Err(KamError::NonFinite("elliptic amplitude"));
    }
    let mut a = 1.0_f64;
    let mut b = k.complementary();
    let mut phi_n = phi;
    let mut scale = 1.0_f64;
    for _ in 0..MAX_AGM_ITER {
        if 0.5 * (a - b).abs() <= AGM_TOL {
            break;
        }
        let principal = (b / a * phi_n.tan()).atan();
        let branch = ((phi_n - principal) / PI).round();
        phi_n += principal + PI * branch;
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
        scale *= 2.0;
    }
    Ok(phi_n / (scale * a))
}
