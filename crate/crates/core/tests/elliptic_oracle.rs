use std::f64::consts::{FRAC_PI_2, PI};

use kamlab_core::elliptic::{complete_elliptic_k, incomplete_elliptic_f, jacobi, EllipticModulus};
use proptest::prelude::*;

/// K(k) by the trapezoid rule on the periodic integrand over a full period,
/// which converges geometrically.
fn k_by_quadrature(k: f64) -> f64 {
    let n = 4096;
    let h = 2.0 * PI / n as f64;
    let sum: f64 = (0..n)
        .map(|i| {
            let s = (i as f64 * h).sin();
            1.0 / (1.0 - k * k * s * s).sqrt()
        })
        .sum();
    sum * h / 4.0
}

/// Classical RK4 on sn' = cn dn, cn' = -sn dn, dn' = -k^2 sn cn.
fn jacobi_by_ode(u: f64, k: f64, steps: usize) -> [f64; 3] {
    let f = |s: [f64; 3]| [s[1] * s[2], -s[0] * s[2], -k * k * s[0] * s[1]];
    let h = u / steps as f64;
    let mut s = [0.0, 1.0, 1.0];
    for _ in 0..steps {
        let add =
            |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
        let k1 = f(s);
        let k2 = f(add(s, k1, h / 2.0));
        let k3 = f(add(s, k2, h / 2.0));
        let k4 = f(add(s, k3, h));
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    s
}

#[test]
fn complete_integral_against_quadrature() {
    for &k in &[0.0, 0.1, 0.5, std::f64::consts::FRAC_1_SQRT_2, 0.9, 0.99] {
        let agm = complete_elliptic_k(EllipticModulus::new(k).unwrap());
        let quad = k_by_quadrature(k);
        assert!((agm - quad).abs() < 1e-13, "k={k}: {agm} vs {quad}");
    }
    let k = complete_elliptic_k(EllipticModulus::QUARTIC);
    assert!((k - 1.8540746773013719).abs() < 1e-13);
}

#[test]
fn jacobi_against_ode() {
    for &k in &[0.3, std::f64::consts::FRAC_1_SQRT_2, 0.95] {
        let m = EllipticModulus::new(k).unwrap();
        for &u in &[0.2, 1.0, 2.5, 4.0, 7.3] {
            let ode = jacobi_by_ode(u, k, 20_000);
            let j = jacobi(u, m).unwrap();
            for (got, want) in [j.sn, j.cn, j.dn].iter().zip(ode) {
                assert!((got - want).abs() < 1e-11, "k={k} u={u}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn identities_on_dense_grid() {
    let k = EllipticModulus::QUARTIC;
    let kk = complete_elliptic_k(k);
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let u = -8.0 * kk + 16.0 * kk * i as f64 / 9_999.0;
        let j = jacobi(u, k).unwrap();
        worst = worst
            .max((j.sn * j.sn + j.cn * j.cn - 1.0).abs())
            .max((j.dn * j.dn + 0.5 * j.sn * j.sn - 1.0).abs());
    }
    assert!(worst <= 1e-12, "worst identity residual {worst}");
}

#[test]
fn derivative_by_central_difference() {
    let k = EllipticModulus::QUARTIC;
    let h = 1e-5;
    for i in 0..50 {
        let u = -3.0 + 0.13 * i as f64;
        let p = jacobi(u + h, k).unwrap();
        let m = jacobi(u - h, k).unwrap();
        let c = jacobi(u, k).unwrap();
        let dsn = (p.sn - m.sn) / (2.0 * h);
        let dcn = (p.cn - m.cn) / (2.0 * h);
        assert!((dsn - c.cn * c.dn).abs() < 1e-9, "u={u}");
        assert!((dcn + c.sn * c.dn).abs() < 1e-9, "u={u}");
    }
}

proptest! {
    #[test]
    fn identities_hold(u in -1e3..1e3f64, k in 0.0..0.999f64) {
        let j = jacobi(u, EllipticModulus::new(k).unwrap()).unwrap();
        prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() <= 1e-12);
        prop_assert!((j.dn * j.dn + k * k * j.sn * j.sn - 1.0).abs() <= 1e-12);
        prop_assert!(j.dn > 0.0);
    }

    #[test]
    fn real_period(u in -50.0..50.0f64, k in 0.0..0.99f64, n in -20i32..20) {
        let m = EllipticModulus::new(k).unwrap();
        let p = 4.0 * complete_elliptic_k(m);
        let a = jacobi(u, m).unwrap();
        let b = jacobi(u + n as f64 * p, m).unwrap();
        prop_assert!((a.sn - b.sn).abs() < 1e-11);
        prop_assert!((a.cn - b.cn).abs() < 1e-11);
        prop_assert!((a.dn - b.dn).abs() < 1e-11);
    }

    #[test]
    fn symmetry(u in -20.0..20.0f64, k in 0.0..0.99f64) {
        let m = EllipticModulus::new(k).unwrap();
        let a = jacobi(u, m).unwrap();
        let b = jacobi(-u, m).unwrap();
        prop_assert!((a.sn + b.sn).abs() < 1e-13);
        prop_assert!((a.cn - b.cn).abs() < 1e-13);
        prop_assert!((a.dn - b.dn).abs() < 1e-13);
    }

    #[test]
    fn incomplete_integral_inverts_amplitude(frac in 0.0..1.0f64, k in 0.0..0.99f64) {
        let m = EllipticModulus::new(k).unwrap();
        let u = 2.0 * complete_elliptic_k(m) * frac;
        let j = jacobi(u, m).unwrap();
        let phi = j.sn.atan2(j.cn);
        let back = incomplete_elliptic_f(phi, m).unwrap();
        prop_assert!((back - u).abs() < 1e-11, "u={} back={}", u, back);
    }

    #[test]
    fn incomplete_integral_quasi_periodic(phi in -10.0..10.0f64, k in 0.0..0.99f64) {
        let m = EllipticModulus::new(k).unwrap();
        let f0 = incomplete_elliptic_f(phi, m).unwrap();
        let f1 = incomplete_elliptic_f(phi + PI, m).unwrap();
        prop_assert!((f1 - f0 - 2.0 * complete_elliptic_k(m)).abs() < 1e-11);
        let fq = incomplete_elliptic_f(FRAC_PI_2, m).unwrap();
        prop_assert!((fq - complete_elliptic_k(m)).abs() < 1e-12);
    }
}
