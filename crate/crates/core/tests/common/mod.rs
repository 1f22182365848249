#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shiftfloquet::floquet::FloquetDecomposition;
use shiftfloquet::linalg::{self, CMatrix};
use shiftfloquet::shifts::{ShiftKind, ShiftSystem};
use shiftfloquet::timescale::TimeScaleWindow;
use shiftfloquet::transition::MatrixFunction;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    linalg::fro(&(a - b)) / linalg::fro(b).max(1e-300)
}

pub fn scalar_diag(n: usize, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> MatrixFunction {
    MatrixFunction::new(n, move |t| Ok(CMatrix::from_diagonal_element(n, n, c(f(t)))))
}

pub fn example1() -> FloquetDecomposition {
    let ts = TimeScaleWindow::q_scale(2.0, 1.0, 4096.0).unwrap();
    let sys = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
    FloquetDecomposition::new(scalar_diag(2, |t| 1.0 / t), ts, sys, 1e-12).unwrap()
}

pub fn example2() -> FloquetDecomposition {
    let ts = TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 486.0).unwrap();
    let sys = ShiftSystem::multiplicative(1.0, 3.0).unwrap();
    FloquetDecomposition::new(scalar_diag(2, |t| 1.0 / t), ts, sys, 1e-12).unwrap()
}

pub fn cosine_entry(t: f64) -> f64 {
    (PI * t.ln() / 2f64.ln()).cos() / t
}

pub fn cosine() -> FloquetDecomposition {
    let ts = TimeScaleWindow::real(1.0, 256.0).unwrap();
    let sys = ShiftSystem::multiplicative(1.0, 4.0).unwrap();
    FloquetDecomposition::new(scalar_diag(2, cosine_entry), ts, sys, 1e-12).unwrap()
}

/// Diagonal system on 2^ℤ whose entries c_i(k mod p)/t repeat every p
/// steps, so A is Δ-periodic under multiplicative shifts with T = 2^p.
pub struct RandomDiagonal {
    pub dec: FloquetDecomposition,
    pub coeffs: Vec<Vec<f64>>,
    pub p: usize,
}

pub fn random_diagonal(r: &mut ChaCha8Rng) -> RandomDiagonal {
    let n = r.gen_range(1..=3);
    let p = r.gen_range(1..=3);
    let coeffs: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| loop {
                    let v: f64 = r.gen_range(-2.5..2.5);
                    if (1.0 + v).abs() > 0.1 {
                        break v;
                    }
                })
                .collect()
        })
        .collect();
    let table = Arc::new(coeffs.clone());
    let a = MatrixFunction::new(n, move |t| {
        let k = t.log2().round() as i64;
        let idx = k.rem_euclid(p as i64) as usize;
        Ok(CMatrix::from_fn(n, n, |i, j| if i == j { c(table[i][idx] / t) } else { c(0.0) }))
    });
    let ts = TimeScaleWindow::q_scale(2.0, 1.0, 2f64.powi(14)).unwrap();
    let sys = ShiftSystem::multiplicative(1.0, 2f64.powi(p as i32)).unwrap();
    let dec = FloquetDecomposition::new(a, ts, sys, 1e-12).unwrap();
    RandomDiagonal { dec, coeffs, p }
}

pub fn random_real(r: &mut impl Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.gen_range(lo..hi))
}

/// Random S with condition number at most 4: Q·diag(d)·Q', d ∈ [1, 4] and Q orthogonal.
pub fn well_conditioned(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let q1 = random_real(r, n, -1.0, 1.0).qr().q();
    let q2 = random_real(r, n, -1.0, 1.0).qr().q();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| r.gen_range(1.0..4.0)));
    linalg::to_complex(&(q1 * d * q2))
}

/// Random nonsingular M = S·J·S⁻¹ with eigenvalue moduli in [0.3, 3]. About a
/// third of the draws contain a Jordan block.
pub fn random_nonsingular(r: &mut ChaCha8Rng, n: usize) -> CMatrix {
    let s = well_conditioned(r, n);
    let mut j = CMatrix::zeros(n, n);
    let draw = |r: &mut ChaCha8Rng| {
        let m: f64 = r.gen_range(0.3..3.0);
        let sign = if r.gen_bool(0.2) { -1.0 } else { 1.0 };
        c(sign * m)
    };
    for i in 0..n {
        j[(i, i)] = draw(r);
    }
    if r.gen_bool(0.35) {
        let block = r.gen_range(2..=n);
        let lam = draw(r);
        for i in 0..block {
            j[(i, i)] = lam;
            if i + 1 < block {
                j[(i, i + 1)] = c(1.0);
            }
        }
    } else if n >= 2 && r.gen_bool(0.3) {
        // Complex conjugate pair as a real 2×2 rotation-scaling block.
        let rho: f64 = r.gen_range(0.3..3.0);
        let th: f64 = r.gen_range(0.1..3.0);
        j[(0, 0)] = c(rho * th.cos());
        j[(0, 1)] = c(-rho * th.sin());
        j[(1, 0)] = c(rho * th.sin());
        j[(1, 1)] = c(rho * th.cos());
    }
    let s_inv = linalg::inverse(&s).unwrap();
    &s * j * s_inv
}

/// Catalog of builtin scales paired with their shifts, a function periodic
/// in shifts and its Δ-derivative (a Δ-periodic function).
pub struct CatalogEntry {
    pub name: &'static str,
    pub ts: TimeScaleWindow,
    pub sys: ShiftSystem,
    /// Whether δ₋(T, t) is defined at every point. ℕ^{1/2} under sqrt shifts
    /// carries valid shifts but has no backward step below t = T.
    pub scale_periodic: bool,
    pub periodic: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Closed-form Δ-periodic function on dense scales, absent on discrete ones.
    pub delta_periodic: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl CatalogEntry {
    /// A Δ-periodic function: the closed form when known, otherwise the
    /// exact difference quotient of `periodic`.
    pub fn delta_fn(&self) -> impl Fn(f64) -> shiftfloquet::error::Result<f64> + '_ {
        move |t: f64| match &self.delta_periodic {
            Some(f) => Ok(f(t)),
            None => {
                let j = self.ts.jump_info(t)?;
                if j.mu > 0.0 {
                    Ok(((self.periodic)(j.sigma) - (self.periodic)(j.t)) / j.mu)
                } else {
                    Ok(0.0)
                }
            }
        }
    }
}

fn logistic_point(q: f64, x: f64) -> f64 {
    q.powf(x) / (1.0 + q.powf(x))
}

pub fn catalog() -> Vec<CatalogEntry> {
    let ln2 = 2f64.ln();
    vec![
        CatalogEntry {
            name: "real/additive",
            ts: TimeScaleWindow::real(-20.0, 20.0).unwrap(),
            sys: ShiftSystem::additive(0.0, 2.5).unwrap(),
            scale_periodic: true,
            periodic: Arc::new(|t| (2.0 * PI * t / 2.5).sin()),
            delta_periodic: Some(Arc::new(|t| 0.4 + (2.0 * PI * t / 2.5).cos())),
        },
        CatalogEntry {
            name: "integer/additive",
            ts: TimeScaleWindow::integer(-150.0, 150.0).unwrap(),
            sys: ShiftSystem::additive(0.0, 3.0).unwrap(),
            scale_periodic: true,
            periodic: Arc::new(|t| [0.3, -1.2, 2.0][(t.round() as i64).rem_euclid(3) as usize]),
            delta_periodic: None,
        },
        CatalogEntry {
            name: "q_scale/multiplicative",
            ts: TimeScaleWindow::q_scale(2.0, 2f64.powi(-30), 2f64.powi(30)).unwrap(),
            sys: ShiftSystem::multiplicative(1.0, 4.0).unwrap(),
            scale_periodic: true,
            periodic: Arc::new(move |t| [1.0, -0.5][((t.ln() / ln2).round() as i64).rem_euclid(2) as usize]),
            delta_periodic: None,
        },
        CatalogEntry {
            name: "geometric_union/multiplicative",
            ts: TimeScaleWindow::geometric_union(3.0, 2.0, 3f64.powi(-6), 3f64.powi(6)).unwrap(),
            sys: ShiftSystem::multiplicative(1.0, 3.0).unwrap(),
            scale_periodic: true,
            periodic: Arc::new(|t| (2.0 * PI * t.ln() / 3f64.ln()).cos()),
            delta_periodic: Some(Arc::new(|t| (1.0 + 0.5 * (2.0 * PI * t.ln() / 3f64.ln()).cos()) / t)),
        },
        CatalogEntry {
            name: "positive reals/multiplicative",
            ts: TimeScaleWindow::real(1e-3, 1e3).unwrap(),
            sys: ShiftSystem::multiplicative(1.0, 2.0).unwrap(),
            scale_periodic: true,
            periodic: Arc::new(move |t| (2.0 * PI * t.ln() / ln2).cos()),
            delta_periodic: Some(Arc::new(move |t| (0.7 + (2.0 * PI * t.ln() / ln2).sin()) / t)),
        },
        CatalogEntry {
            name: "sqrt_naturals/sqrt",
            ts: TimeScaleWindow::sqrt_naturals(0.0, 40.0).unwrap(),
            sys: ShiftSystem::new(ShiftKind::Sqrt, 0.0, 2.0).unwrap(),
            scale_periodic: false,
            periodic: Arc::new(|t| (2.0 * PI * (t * t).round() / 4.0).cos() + 0.1),
            delta_periodic: None,
        },
        CatalogEntry {
            name: "signed_squares/signed_squares",
            ts: TimeScaleWindow::signed_squares(-900.0, 900.0).unwrap(),
            sys: ShiftSystem::new(ShiftKind::SignedSquares, 0.0, 4.0).unwrap(),
            scale_periodic: true,
            periodic: Arc::new(|t| {
                let n = t.signum() * t.abs().sqrt();
                [0.5, 2.0][(n.round() as i64).rem_euclid(2) as usize]
            }),
            delta_periodic: None,
        },
        CatalogEntry {
            name: "logistic/logistic",
            ts: TimeScaleWindow::logistic(2.0, logistic_point(2.0, -8.0), logistic_point(2.0, 8.0)).unwrap(),
            sys: ShiftSystem::new(ShiftKind::Logistic { q: 2.0 }, 0.5, logistic_point(2.0, 2.0)).unwrap(),
            scale_periodic: true,
            periodic: Arc::new(|t: f64| {
                let idx = (t / (1.0 - t)).ln() / 2f64.ln();
                [1.0, 3.0][(idx.round() as i64).rem_euclid(2) as usize]
            }),
            delta_periodic: None,
        },
    ]
}
