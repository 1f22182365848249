//! Transition matrices Φ_A(t,t₀) of x^Δ = A(t)x on hybrid windows, a
//! Peano–Baker series oracle, and variation of constants.

use std::fmt;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exprdsl::Expr;
use crate::linalg::{identity, CMatrix, CVector, DeltaValue};
use crate::ode::{self, OdeOptions};
use crate::timescale::{same_point, Piece, TimeScaleWindow};

/// Pass condition for |det(I + μA)| at scattered points.
pub const REGRESSIVITY_TOL: f64 = 1e-12;

type MatrixFn = dyn Fn(f64) -> Result<CMatrix> + Send + Sync;
type VectorFn = dyn Fn(f64) -> Result<CVector> + Send + Sync;

/// t ↦ n×n complex matrix.
#[derive(Clone)]
pub struct MatrixFunction {
    n: usize,
    f: Arc<MatrixFn>,
}

impl fmt::Debug for MatrixFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatrixFunction({}x{})", self.n, self.n)
    }
}

impl MatrixFunction {
    pub fn new(n: usize, f: impl Fn(f64) -> Result<CMatrix> + Send + Sync + 'static) -> Self {
        MatrixFunction { n, f: Arc::new(f) }
    }

    pub fn constant(m: CMatrix) -> Self {
        let n = m.nrows();
        Self::new(n, move |_| Ok(m.clone()))
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(CMatrix::zeros(n, n))
    }

    /// Real diagonal entries from scalar closures.
    pub fn diagonal(entries: Vec<Arc<dyn Fn(f64) -> f64 + Send + Sync>>) -> Self {
        let n = entries.len();
        Self::new(n, move |t| {
            let mut m = CMatrix::zeros(n, n);
            for (i, e) in entries.iter().enumerate() {
                m[(i, i)] = Complex64::new(e(t), 0.0);
            }
            Ok(m)
        })
    }

    /// Row-major DSL entries.
    pub fn from_exprs(n: usize, entries: Vec<Expr>, params: std::collections::HashMap<String, f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Config(format!("expected {} matrix entries, got {}", n * n, entries.len())));
        }
        Ok(Self::new(n, move |t| {
            let mut m = CMatrix::zeros(n, n);
            for (k, e) in entries.iter().enumerate() {
                m[(k / n, k % n)] = Complex64::new(e.eval(t, &params)?, 0.0);
            }
            Ok(m)
        }))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, t: f64) -> Result<CMatrix> {
        let m = (self.f)(t)?;
        if m.nrows() != self.n || m.ncols() != self.n {
            return Err(Error::Config(format!("matrix function returned {}x{}", m.nrows(), m.ncols())));
        }
        if !m.is_finite() {
            return Err(Error::NonFiniteValue { t });
        }
        Ok(m)
    }

    /// S A(t) S⁻¹ for a constant invertible S.
    pub fn similar(&self, s: &CMatrix) -> Result<Self> {
        let s_inv = crate::linalg::inverse(s)?;
        let s = s.clone();
        let inner = self.clone();
        Ok(Self::new(self.n, move |t| Ok(&s * inner.eval(t)? * &s_inv)))
    }
}

/// t ↦ complex n-vector.
#[derive(Clone)]
pub struct VectorFunction {
    n: usize,
    f: Arc<VectorFn>,
}

impl fmt::Debug for VectorFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VectorFunction({})", self.n)
    }
}

impl VectorFunction {
    pub fn new(n: usize, f: impl Fn(f64) -> Result<CVector> + Send + Sync + 'static) -> Self {
        VectorFunction { n, f: Arc::new(f) }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(n, move |_| Ok(CVector::zeros(n)))
    }

    pub fn from_exprs(entries: Vec<Expr>, params: std::collections::HashMap<String, f64>) -> Self {
        let n = entries.len();
        Self::new(n, move |t| {
            let mut v = CVector::zeros(n);
            for (i, e) in entries.iter().enumerate() {
                v[i] = Complex64::new(e.eval(t, &params)?, 0.0);
            }
            Ok(v)
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, t: f64) -> Result<CVector> {
        let v = (self.f)(t)?;
        if v.nrows() != self.n {
            return Err(Error::Config(format!("vector function returned length {}", v.nrows())));
        }
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { t });
        }
        Ok(v)
    }
}

/// I + μA(t), checked for regressivity.
pub fn jump_factor(a: &MatrixFunction, t: f64, mu: f64) -> Result<CMatrix> {
    let f = identity(a.dim()) + a.eval(t)? * Complex64::new(mu, 0.0);
    let det = f.clone().determinant().norm();
    if !(det > REGRESSIVITY_TOL) {
        return Err(Error::RegressivityViolation { t, modulus: det });
    }
    Ok(f)
}

fn dense_flow(a: &MatrixFunction, lo: f64, hi: f64, y: CMatrix, opts: OdeOptions) -> Result<CMatrix> {
    let rhs = |t: f64, y: &CMatrix| -> Result<CMatrix> { Ok(a.eval(t)? * y) };
    ode::integrate(&rhs, lo, hi, y, opts).map_err(|e| e.context(format!("transition: dense segment [{lo}, {hi}]")))
}

/// Time-ordered factors whose product is Φ_A(t, t₀).
#[derive(Debug, Clone)]
pub struct Propagation {
    /// Piece boundaries t₀ = b₀ < b₁ < … = t.
    pub breakpoints: Vec<f64>,
    /// `factors[k]` carries the state from `breakpoints[k]` to `breakpoints[k+1]`.
    pub factors: Vec<CMatrix>,
}

impl Propagation {
    pub fn product(&self, n: usize) -> CMatrix {
        self.factors.iter().fold(identity(n), |acc, f| f * acc)
    }
}

pub fn propagation(a: &MatrixFunction, ts: &TimeScaleWindow, t0: f64, t: f64, opts: OdeOptions) -> Result<Propagation> {
    let t0 = ts.snap(t0)?;
    let t = ts.snap(t)?;
    let n = a.dim();
    let mut breakpoints = vec![t0];
    let mut factors = Vec::new();
    for piece in ts.pieces(t0, t) {
        match piece {
            Piece::Jump(s, mu) => {
                factors.push(jump_factor(a, s, mu)?);
                breakpoints.push(s + mu);
            }
            Piece::Dense(lo, hi) => {
                factors.push(dense_flow(a, lo, hi, identity(n), opts)?);
                breakpoints.push(hi);
            }
        }
    }
    Ok(Propagation { breakpoints, factors })
}

/// Φ_A(t, t₀); for t < t₀ the inverse of the forward product.
pub fn transition_matrix(a: &MatrixFunction, ts: &TimeScaleWindow, t: f64, t0: f64, tol: f64) -> Result<CMatrix> {
    let opts = OdeOptions { rtol: tol, atol: tol * 1e-2, ..OdeOptions::default() };
    if t >= t0 || same_point(t, t0) {
        Ok(forward_product(a, ts, t0, t, identity(a.dim()), opts)?)
    } else {
        let fwd = forward_product(a, ts, t, t0, identity(a.dim()), opts)?;
        crate::linalg::inverse(&fwd)
    }
}

fn forward_product(a: &MatrixFunction, ts: &TimeScaleWindow, from: f64, to: f64, y0: CMatrix, opts: OdeOptions) -> Result<CMatrix> {
    let from = ts.snap(from)?;
    let to = ts.snap(to)?;
    let mut y = y0;
    for piece in ts.pieces(from, to) {
        y = match piece {
            Piece::Jump(s, mu) => jump_factor(a, s, mu)? * y,
            Piece::Dense(lo, hi) => dense_flow(a, lo, hi, y, opts)?,
        };
    }
    Ok(y)
}

/// Caches Φ_A(b, t₀) at piece boundaries so repeated queries only
/// integrate the last partial piece.
#[derive(Debug)]
pub struct Propagator {
    a: MatrixFunction,
    ts: TimeScaleWindow,
    t0: f64,
    opts: OdeOptions,
    cache: RwLock<Vec<(f64, CMatrix)>>,
}

impl Propagator {
    pub fn new(a: MatrixFunction, ts: TimeScaleWindow, t0: f64, tol: f64) -> Result<Self> {
        let t0 = ts.snap(t0)?;
        let n = a.dim();
        Ok(Propagator {
            a,
            ts,
            t0,
            opts: OdeOptions { rtol: tol, atol: tol * 1e-2, ..OdeOptions::default() },
            cache: RwLock::new(vec![(t0, identity(n))]),
        })
    }

    pub fn matrix(&self) -> &MatrixFunction {
        &self.a
    }

    pub fn window(&self) -> &TimeScaleWindow {
        &self.ts
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Φ_A(t, t₀).
    pub fn phi(&self, t: f64) -> Result<CMatrix> {
        let t = self.ts.snap(t)?;
        if t < self.t0 {
            return transition_matrix(&self.a, &self.ts, t, self.t0, self.opts.rtol);
        }
        let (start, y0) = {
            let cache = self.cache.read().unwrap_or_else(|e| e.into_inner());
            let k = cache.partition_point(|(b, _)| *b <= t) - 1;
            cache[k].clone()
        };
        if start == t {
            return Ok(y0);
        }
        let mut y = y0;
        let mut fresh = Vec::new();
        for piece in self.ts.pieces(start, t) {
            match piece {
                Piece::Jump(s, mu) => {
                    y = jump_factor(&self.a, s, mu)? * y;
                    fresh.push((s + mu, y.clone()));
                }
                Piece::Dense(lo, hi) => {
                    y = dense_flow(&self.a, lo, hi, y, self.opts)?;
                    let cell_end = self.ts.jump_info(hi).map(|j| j.class == crate::timescale::PointClass::RightScattered || j.at_edge);
                    if cell_end.unwrap_or(false) {
                        fresh.push((hi, y.clone()));
                    }
                }
            }
        }
        if !fresh.is_empty() {
            let mut cache = self.cache.write().unwrap_or_else(|e| e.into_inner());
            for (b, m) in fresh {
                let k = cache.partition_point(|(x, _)| *x < b);
                if cache.get(k).is_none_or(|(x, _)| *x != b) {
                    cache.insert(k, (b, m));
                }
            }
        }
        Ok(y)
    }

    /// Φ_A(t, s) = Φ_A(t, t₀)·Φ_A(s, t₀)⁻¹.
    pub fn between(&self, t: f64, s: f64) -> Result<CMatrix> {
        Ok(self.phi(t)? * crate::linalg::inverse(&self.phi(s)?)?)
    }
}

/// Truncated Peano–Baker series I + ∫A + ∫A∫A + … up to `order` terms,
/// evaluated on a fixed grid with fourth-order cumulative quadrature on
/// dense stretches and exact sums at jumps.
pub fn peano_baker(a: &MatrixFunction, ts: &TimeScaleWindow, t: f64, t0: f64, order: usize, tol: f64) -> Result<CMatrix> {
    let n = a.dim();
    if order == 0 {
        return Ok(identity(n));
    }
    if t < t0 && !same_point(t, t0) {
        let fwd = peano_baker(a, ts, t0, t, order, tol)?;
        return crate::linalg::inverse(&fwd);
    }
    let t0 = ts.snap(t0)?;
    let t = ts.snap(t)?;

    // Grid segments: jumps carry (μ), dense stretches carry uniform nodes.
    enum Seg {
        Jump { mu: f64, a: CMatrix },
        Dense { h: f64, a: Vec<CMatrix> },
    }
    let per_unit = tol.max(1e-16).powf(-0.25).ceil().max(16.0);
    let mut segs = Vec::new();
    for piece in ts.pieces(t0, t) {
        match piece {
            Piece::Jump(s, mu) => segs.push(Seg::Jump { mu, a: a.eval(s)? }),
            Piece::Dense(lo, hi) => {
                let m = ((hi - lo) * per_unit).ceil().max(8.0) as usize;
                let h = (hi - lo) / m as f64;
                let nodes = (0..=m).map(|j| a.eval(if j == m { hi } else { lo + h * j as f64 })).collect::<Result<Vec<_>>>()?;
                segs.push(Seg::Dense { h, a: nodes });
            }
        }
    }

    // Level k is stored by its values on the grid; at a jump the stored
    // value is the one at the jump point itself, before the jump.
    let mut prev_level: Vec<Vec<CMatrix>> = segs
        .iter()
        .map(|s| match s {
            Seg::Jump { .. } => vec![identity(n)],
            Seg::Dense { a, .. } => vec![identity(n); a.len()],
        })
        .collect();
    let mut total = identity(n);
    for _ in 1..=order {
        let mut level = Vec::with_capacity(segs.len());
        let mut run = CMatrix::zeros(n, n);
        for (seg, prev) in segs.iter().zip(&prev_level) {
            match seg {
                Seg::Jump { mu, a } => {
                    level.push(vec![run.clone()]);
                    run += a * &prev[0] * Complex64::new(*mu, 0.0);
                }
                Seg::Dense { h, a } => {
                    let f: Vec<CMatrix> = a.iter().zip(prev).map(|(ai, pi)| ai * pi).collect();
                    let m = f.len() - 1;
                    let mut vals = Vec::with_capacity(m + 1);
                    vals.push(run.clone());
                    for j in 0..m {
                        run += cumulative_step(&f, j, *h);
                        vals.push(run.clone());
                    }
                    level.push(vals);
                }
            }
        }
        total += &run;
        prev_level = level;
    }
    Ok(total)
}

/// ∫ over [x_j, x_{j+1}] of samples `f` on a uniform grid, fourth order.
fn cumulative_step(f: &[CMatrix], j: usize, h: f64) -> CMatrix {
    let m = f.len() - 1;
    let w = |c: f64| Complex64::new(c * h / 24.0, 0.0);
    if m < 3 {
        return (&f[j] + &f[j + 1]) * w(12.0);
    }
    if j == 0 {
        &f[0] * w(9.0) + &f[1] * w(19.0) - &f[2] * w(5.0) + &f[3] * w(1.0)
    } else if j == m - 1 {
        &f[m] * w(9.0) + &f[m - 1] * w(19.0) - &f[m - 2] * w(5.0) + &f[m - 3] * w(1.0)
    } else {
        -&f[j - 1] * w(1.0) + &f[j] * w(13.0) + &f[j + 1] * w(13.0) - &f[j + 2] * w(1.0)
    }
}

/// y(t) for y^Δ = A y + F, y(t₀) = x₀, propagated piecewise.
pub fn variation_of_constants(
    a: &MatrixFunction,
    f: &VectorFunction,
    ts: &TimeScaleWindow,
    t: f64,
    t0: f64,
    x0: &CVector,
    tol: f64,
) -> Result<CVector> {
    let opts = OdeOptions { rtol: tol, atol: tol * 1e-2, ..OdeOptions::default() };
    let forward = t >= t0 || same_point(t, t0);
    let (lo, hi) = if forward { (t0, t) } else { (t, t0) };
    let (lo, hi) = (ts.snap(lo)?, ts.snap(hi)?);
    let mut pieces = ts.pieces(lo, hi);
    if !forward {
        pieces.reverse();
    }
    let rhs = |s: f64, y: &CVector| -> Result<CVector> { Ok(a.eval(s)? * y + f.eval(s)?) };
    let mut y = x0.clone();
    for piece in pieces {
        y = match (piece, forward) {
            (Piece::Jump(s, mu), true) => jump_factor(a, s, mu)? * y + f.eval(s)? * Complex64::new(mu, 0.0),
            (Piece::Jump(s, mu), false) => {
                let j = jump_factor(a, s, mu)?;
                let rhs = y - f.eval(s)? * Complex64::new(mu, 0.0);
                j.lu().solve(&rhs).ok_or(Error::SingularMatrix { det: 0.0 })?
            }
            (Piece::Dense(p, q), true) => ode::integrate(&rhs, p, q, y, opts)?,
            (Piece::Dense(p, q), false) => ode::integrate(&rhs, q, p, y, opts)?,
        };
    }
    Ok(y)
}
