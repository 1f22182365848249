//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with adaptive step
//! control, generic over [`DeltaValue`] states.

use crate::error::{Error, Result};
use crate::linalg::DeltaValue;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, max_steps: 1_000_000 }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are the last row of A; these are 5th minus 4th.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates y' = f(t, y) from `t0` to `t1` (either direction).
pub fn integrate<V, F>(f: &F, t0: f64, t1: f64, y0: V, opts: OdeOptions) -> Result<V>
where
    V: DeltaValue,
    F: Fn(f64, &V) -> Result<V>,
{
    if t1 == t0 {
        return Ok(y0);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let fail = |reason: &str| Error::IntegrationFailure { a: t0.min(t1), b: t0.max(t1), reason: reason.to_string() };

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut h = initial_step(&y, &k1, span, opts);
    let mut steps = 0usize;

    while (t1 - t) * dir > 0.0 {
        steps += 1;
        if steps > opts.max_steps {
            return Err(fail("step budget exhausted"));
        }
        let last = (t1 - t) * dir <= h * (1.0 + 1e-12);
        if last {
            h = (t1 - t).abs();
        }
        let hs = h * dir;

        let mut k: Vec<V> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                if A[s][j] != 0.0 {
                    ys = ys.add(&kj.scale(hs * A[s][j]));
                }
            }
            let ts = if s == 6 { t + hs } else { t + C[s] * hs };
            k.push(f(ts, &ys)?);
            if s == 6 {
                // FSAL: stage 7 is evaluated at the fifth-order solution.
                let mut err = k[0].scale(E[0]);
                for (j, kj) in k.iter().enumerate().skip(1) {
                    if E[j] != 0.0 {
                        err = err.add(&kj.scale(E[j]));
                    }
                }
                let err_norm = err.scale(hs).norm_max() / (opts.atol + opts.rtol * y.norm_max().max(ys.norm_max()));
                if !err_norm.is_finite() {
                    return Err(fail("non-finite error estimate"));
                }
                if err_norm <= 1.0 {
                    t = if last { t1 } else { t + hs };
                    y = ys;
                    k1 = k[6].clone();
                    let factor = if err_norm == 0.0 { 5.0 } else { (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0) };
                    h *= factor;
                } else {
                    h *= (0.9 * err_norm.powf(-0.2)).clamp(0.1, 1.0);
                }
                if h < span * 1e-15 {
                    return Err(fail("step size underflow"));
                }
            }
        }
    }
    Ok(y)
}

fn initial_step<V: DeltaValue>(y: &V, dy: &V, span: f64, opts: OdeOptions) -> f64 {
    let sc = opts.atol + opts.rtol * y.norm_max();
    let d0 = y.norm_max() / sc;
    let d1 = dy.norm_max() / sc;
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1e-300) } else { 0.01 * d0 / d1 };
    h.min(span).max(span * 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, ONE, ZERO};

    #[test]
    fn scalar_exponential() {
        let y = integrate(&|_t, y: &f64| Ok(*y), 0.0, 1.0, 1.0, OdeOptions::default()).unwrap();
        assert!((y - std::f64::consts::E).abs() < 1e-9);
        let y = integrate(&|_t, y: &f64| Ok(*y), 1.0, 0.0, 1.0, OdeOptions::default()).unwrap();
        assert!((y - 1.0 / std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn matrix_rotation() {
        let a = CMatrix::from_row_slice(2, 2, &[ZERO, -ONE, ONE, ZERO]);
        let y0 = CMatrix::identity(2, 2);
        let y = integrate(&|_t, y: &CMatrix| Ok(&a * y), 0.0, std::f64::consts::PI, y0, OdeOptions::default()).unwrap();
        assert!((y[(0, 0)] + 1.0).norm() < 1e-9 && y[(0, 1)].norm() < 1e-9);
    }
}
