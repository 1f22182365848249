//! Scalar time-scale exponential, circle algebra and Hilger quantities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::timescale::{Piece, TimeScaleWindow, SNAP};
use crate::quadrature;

/// e_p(t,s) together with the scattered points where 1 + μp fell on the
/// negative real axis (the branch cut of the principal logarithm).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExp {
    pub value: Complex64,
    pub cut_points: Vec<f64>,
}

/// Principal cylinder transform ξ_μ(z) = Log(1 + μz)/μ, equal to z at μ = 0.
pub fn cylinder(z: Complex64, mu: f64) -> Complex64 {
    if mu == 0.0 {
        z
    } else {
        (1.0 + mu * z).ln() / mu
    }
}

pub fn scalar_exp<F>(p: &F, ts: &TimeScaleWindow, t: f64, s: f64, tol: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    Ok(scalar_exp_detailed(p, ts, t, s, tol)?.value)
}

/// e_p(t,s) = exp(∫_s^t ξ_{μ(τ)}(p(τ)) Δτ); for t < s the reciprocal of e_p(s,t).
pub fn scalar_exp_detailed<F>(p: &F, ts: &TimeScaleWindow, t: f64, s: f64, tol: f64) -> Result<ScalarExp>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let (lo, hi, invert) = if t >= s { (s, t, false) } else { (t, s, true) };
    let lo = ts.snap(lo)?;
    let hi = ts.snap(hi)?;
    let mut log = Complex64::new(0.0, 0.0);
    let mut cut_points = Vec::new();
    let mut budget = quadrature::DEFAULT_BUDGET;
    for piece in ts.pieces(lo, hi) {
        match piece {
            Piece::Jump(x, mu) => {
                let z = 1.0 + mu * p(x)?;
                if !(z.norm() > SNAP) {
                    return Err(Error::RegressivityViolation { t: x, modulus: z.norm() });
                }
                if z.im == 0.0 && z.re < 0.0 {
                    cut_points.push(x);
                }
                log += z.ln();
            }
            Piece::Dense(a, b) => log += quadrature::simpson(p, a, b, tol, &mut budget)?,
        }
    }
    let value = if invert { (-log).exp() } else { log.exp() };
    Ok(ScalarExp { value, cut_points })
}

fn check_regressive(a: Complex64, mu: f64) -> Result<()> {
    let m = (1.0 + mu * a).norm();
    if m > SNAP {
        Ok(())
    } else {
        Err(Error::RegressivityViolation { t: f64::NAN, modulus: m })
    }
}

/// a ⊕ b = a + b + μab.
pub fn circle_plus(a: Complex64, b: Complex64, mu: f64) -> Result<Complex64> {
    check_regressive(a, mu)?;
    check_regressive(b, mu)?;
    Ok(a + b + mu * a * b)
}

/// ⊖a = −a/(1 + μa).
pub fn circle_negate(a: Complex64, mu: f64) -> Result<Complex64> {
    check_regressive(a, mu)?;
    Ok(-a / (1.0 + mu * a))
}

/// a ⊖ b = a ⊕ (⊖b).
pub fn circle_minus(a: Complex64, b: Complex64, mu: f64) -> Result<Complex64> {
    circle_plus(a, circle_negate(b, mu)?, mu)
}

/// Hilger real part (|1 + μz| − 1)/μ, or Re z when μ = 0.
pub fn re_mu(z: Complex64, mu: f64) -> f64 {
    if mu == 0.0 {
        z.re
    } else {
        ((1.0 + mu * z).norm() - 1.0) / mu
    }
}

/// Hilger purely imaginary number i°ω = (e^{iωμ} − 1)/μ, iω when μ = 0.
pub fn hilger_imaginary(omega: f64, mu: f64) -> Result<Complex64> {
    if mu == 0.0 {
        return Ok(Complex64::new(0.0, omega));
    }
    let bound = std::f64::consts::PI / mu;
    if !(omega > -bound && omega <= bound * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::OmegaOutOfStrip { omega, mu });
    }
    Ok((Complex64::new(0.0, omega * mu).exp() - 1.0) / mu)
}

/// Membership in the Hilger circle: Re_μ z < 0.
pub fn in_hilger_circle(z: Complex64, mu: f64) -> bool {
    re_mu(z, mu) < 0.0
}

/// θ⁻¹ ≤ |1 + μz|.
pub fn uniformly_regressive(z: Complex64, mu: f64, theta: f64) -> bool {
    1.0 / theta <= (1.0 + mu * z).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_examples() {
        let q = TimeScaleWindow::q_scale(2.0, 1.0, 1024.0).unwrap();
        let zero = |_t: f64| Ok(c(0.0, 0.0));
        assert_eq!(scalar_exp(&zero, &q, 64.0, 2.0, 1e-10).unwrap(), c(1.0, 0.0));
        let inv = |t: f64| Ok(c(1.0 / t, 0.0));
        assert!((scalar_exp(&inv, &q, 4.0, 1.0, 1e-10).unwrap() - 4.0).norm() < 1e-14);
        let r = TimeScaleWindow::real(0.0, 5.0).unwrap();
        let two = |_t: f64| Ok(c(2.0, 0.0));
        let v = scalar_exp(&two, &r, 1.0, 0.0, 1e-12).unwrap();
        assert!((v - 2f64.exp()).norm() < 1e-10);
        assert_eq!(scalar_exp(&two, &r, 3.0, 3.0, 1e-12).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn regressivity_and_cut() {
        let z = TimeScaleWindow::integer(0.0, 10.0).unwrap();
        let minus_one = |_t: f64| Ok(c(-1.0, 0.0));
        assert!(matches!(scalar_exp(&minus_one, &z, 3.0, 0.0, 1e-10), Err(Error::RegressivityViolation { .. })));
        let minus_three = |_t: f64| Ok(c(-3.0, 0.0));
        let d = scalar_exp_detailed(&minus_three, &z, 2.0, 0.0, 1e-10).unwrap();
        assert_eq!(d.cut_points, vec![0.0, 1.0]);
        assert!((d.value - 4.0).norm() < 1e-12);
    }

    #[test]
    fn circle_examples() {
        assert_eq!(circle_plus(c(1.0, 0.0), c(2.0, 1.0), 0.0).unwrap(), c(3.0, 1.0));
        assert_eq!(circle_plus(c(1.0, 0.0), c(1.0, 0.0), 1.0).unwrap(), c(3.0, 0.0));
        assert_eq!(circle_negate(c(1.0, 0.0), 1.0).unwrap(), c(-0.5, 0.0));
        assert!(circle_negate(c(-1.0, 0.0), 1.0).is_err());
        let a = c(0.3, -0.2);
        assert!(circle_minus(a, a, 0.7).unwrap().norm() < 1e-15);
    }

    #[test]
    fn hilger_examples() {
        assert_eq!(re_mu(c(3.0, 4.0), 0.0), 3.0);
        for t in [1.0, 2.0, 8.0, 256.0] {
            assert!((re_mu(c(1.0 / t, 0.0), t) - 1.0 / t).abs() < 1e-15);
        }
        assert_eq!(re_mu(c(1.0, 0.0), 1.0), 1.0);
        assert_eq!(hilger_imaginary(5.0, 0.0).unwrap(), c(0.0, 5.0));
        assert!((hilger_imaginary(5.0, 1e-9).unwrap() - c(0.0, 5.0)).norm() < 1e-7);
        assert!((hilger_imaginary(std::f64::consts::PI, 1.0).unwrap() - c(-2.0, 0.0)).norm() < 1e-15);
        assert!(matches!(hilger_imaginary(4.0, 1.0), Err(Error::OmegaOutOfStrip { .. })));
        assert!(in_hilger_circle(c(-0.5, 0.0), 1.0));
        assert!(uniformly_regressive(c(-0.5, 0.0), 1.0, 2.0));
        assert!(!uniformly_regressive(c(-0.5, 0.0), 1.0, 1.5));
    }

    fn windows() -> Vec<TimeScaleWindow> {
        vec![
            TimeScaleWindow::real(0.0, 4.0).unwrap(),
            TimeScaleWindow::integer(0.0, 20.0).unwrap(),
            TimeScaleWindow::q_scale(2.0, 1.0, 512.0).unwrap(),
            TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 60.0).unwrap(),
        ]
    }

    fn pick(ts: &TimeScaleWindow, u: f64) -> f64 {
        let pts = ts.sample_points(ts.min(), ts.max(), 200);
        pts[((pts.len() - 1) as f64 * u) as usize]
    }

    proptest! {
        #[test]
        fn semigroup_reciprocal_jump(w in 0usize..4, u in 0.0f64..1.0, v in 0.0f64..1.0, x in 0.0f64..1.0,
                                     a in -0.4f64..0.4, b in -0.4f64..0.4) {
            let ts = &windows()[w];
            let p = move |t: f64| Ok(c(a / (1.0 + t), b * (t * 0.3).cos() / (1.0 + t)));
            let (t, s, r) = (pick(ts, u), pick(ts, v), pick(ts, x));
            let tol = 1e-11;
            let ets = scalar_exp(&p, ts, t, s, tol).unwrap();
            let esr = scalar_exp(&p, ts, s, r, tol).unwrap();
            let etr = scalar_exp(&p, ts, t, r, tol).unwrap();
            prop_assert!((ets * esr - etr).norm() <= 1e-8 * etr.norm());

            let neg = |x: f64| -> Result<Complex64> { circle_negate(p(x)?, ts.mu(x)?) };
            let inv = scalar_exp(&neg, ts, t, s, tol).unwrap();
            prop_assert!((ets * inv - 1.0).norm() <= 1e-8);

            let j = ts.jump_info(t).unwrap();
            if !j.at_edge && j.mu > 0.0 {
                let next = scalar_exp(&p, ts, j.sigma, s, tol).unwrap();
                prop_assert!((next - (1.0 + j.mu * p(j.t).unwrap()) * ets).norm() <= 1e-10 * next.norm());
            }
        }

        #[test]
        fn positive_for_positive_regressive(w in 0usize..4, u in 0.0f64..1.0, a in -0.4f64..2.0) {
            let ts = &windows()[w];
            let p = move |t: f64| Ok(c(a / (1.0 + t), 0.0));
            let t = pick(ts, u);
            let e = scalar_exp(&p, ts, t, ts.min(), 1e-10).unwrap();
            prop_assert!(e.re > 0.0 && e.im.abs() < 1e-12 * e.re);
        }

        #[test]
        fn re_mu_sign_matches_circle(re in -3.0f64..3.0, im in -3.0f64..3.0, mu in 0.01f64..5.0) {
            let z = c(re, im);
            prop_assert_eq!(re_mu(z, mu) < 0.0, (1.0 + mu * z).norm() < 1.0);
        }
    }
}
