//! Bounded windows of a time scale: ordered closed cells, jump operators,
//! graininess, Δ-derivative and Δ-integral.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DeltaValue;
use crate::quadrature;

/// Absolute snap tolerance at unit scale; grows with |t|.
pub const SNAP: f64 = 1e-12;

#[inline]
pub fn snap_tol(t: f64) -> f64 {
    SNAP * t.abs().max(1.0)
}

#[inline]
pub fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= snap_tol(a.abs().max(b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeCell {
    pub lo: f64,
    pub hi: f64,
}

impl TimeCell {
    pub fn point(t: f64) -> Self {
        TimeCell { lo: t, hi: t }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        TimeCell { lo, hi }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    RightDense,
    RightScattered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpInfo {
    /// The point itself, snapped onto a stored cell endpoint when close.
    pub t: f64,
    pub sigma: f64,
    pub mu: f64,
    pub class: PointClass,
    /// `t` is the window maximum; `sigma` is clamped to `t`.
    pub at_edge: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeScaleWindow {
    cells: Vec<TimeCell>,
    name: String,
    params: BTreeMap<String, f64>,
}

impl TimeScaleWindow {
    pub fn new(cells: Vec<TimeCell>, name: impl Into<String>, params: BTreeMap<String, f64>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Config("time scale window has no cells".into()));
        }
        for c in &cells {
            if !(c.lo.is_finite() && c.hi.is_finite()) || c.lo > c.hi {
                return Err(Error::Config(format!("invalid cell [{}, {}]", c.lo, c.hi)));
            }
        }
        for w in cells.windows(2) {
            if !(w[0].hi < w[1].lo) || same_point(w[0].hi, w[1].lo) {
                return Err(Error::Config(format!(
                    "cells [{}, {}] and [{}, {}] overlap or touch",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(TimeScaleWindow { cells, name: name.into(), params })
    }

    /// The real line restricted to `[a, b]`.
    pub fn real(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![TimeCell::interval(a, b)], "real", BTreeMap::new())
    }

    /// Integers in `[a, b]`.
    pub fn integer(a: f64, b: f64) -> Result<Self> {
        let cells = (a.ceil() as i64..=b.floor() as i64).map(|k| TimeCell::point(k as f64)).collect();
        Self::new(cells, "integer", BTreeMap::new())
    }

    /// Powers q^k lying in `[a, b]` (a > 0).
    pub fn q_scale(q: f64, a: f64, b: f64) -> Result<Self> {
        if !(q > 1.0) || !(a > 0.0) {
            return Err(Error::Config("q_scale needs q > 1 and t_min > 0".into()));
        }
        let (k0, k1) = power_range(q, a, b);
        let cells = (k0..=k1).map(|k| TimeCell::point(q.powi(k))).collect();
        Self::new(cells, "q_scale", BTreeMap::from([("q".to_string(), q)]))
    }

    /// Union of cells [q^k, c·q^k] (1 < c < q) clipped to `[a, b]`.
    pub fn geometric_union(q: f64, c: f64, a: f64, b: f64) -> Result<Self> {
        if !(q > 1.0 && c > 1.0 && c < q && a > 0.0) {
            return Err(Error::Config("geometric_union needs 1 < c < q and t_min > 0".into()));
        }
        let (k0, k1) = power_range(q, a / c, b);
        let mut cells = Vec::new();
        for k in k0..=k1 {
            let (lo, hi) = (q.powi(k), c * q.powi(k));
            let (lo, hi) = (lo.max(a), hi.min(b));
            if lo <= hi && !(hi < a) {
                cells.push(TimeCell::interval(lo, hi));
            }
        }
        Self::new(cells, "geometric_union", BTreeMap::from([("q".to_string(), q), ("c".to_string(), c)]))
    }

    /// Points √n, n ∈ ℕ, lying in `[a, b]`.
    pub fn sqrt_naturals(a: f64, b: f64) -> Result<Self> {
        let n0 = (a.max(0.0) * a.max(0.0)).ceil() as u64;
        let n1 = (b * b).floor() as u64;
        let cells = (n0..=n1).map(|n| TimeCell::point((n as f64).sqrt())).collect();
        Self::new(cells, "sqrt_naturals", BTreeMap::new())
    }

    /// Points ±n², n ∈ ℤ, lying in `[a, b]`.
    pub fn signed_squares(a: f64, b: f64) -> Result<Self> {
        let lo = signed_root(a).ceil() as i64;
        let hi = signed_root(b).floor() as i64;
        let cells = (lo..=hi).map(|n| TimeCell::point(signed_square(n as f64))).collect();
        Self::new(cells, "signed_squares", BTreeMap::new())
    }

    /// Points q^n/(1+q^n), n ∈ ℤ, lying in `[a, b]` ⊂ (0, 1).
    pub fn logistic(q: f64, a: f64, b: f64) -> Result<Self> {
        if !(q > 1.0) || !(a > 0.0 && b < 1.0) {
            return Err(Error::Config("logistic needs q > 1 and a window inside (0, 1)".into()));
        }
        let idx = |x: f64| (x / (1.0 - x)).ln() / q.ln();
        let (n0, n1) = ((idx(a) - 1e-9).ceil() as i32, (idx(b) + 1e-9).floor() as i32);
        let cells = (n0..=n1)
            .map(|n| logistic_point(q, n as f64))
            .filter(|x| *x >= a - snap_tol(a) && *x <= b + snap_tol(b))
            .map(TimeCell::point)
            .collect();
        Self::new(cells, "logistic", BTreeMap::from([("q".to_string(), q)]))
    }

    pub fn explicit(cells: Vec<TimeCell>) -> Result<Self> {
        Self::new(cells, "explicit", BTreeMap::new())
    }

    pub fn cells(&self) -> &[TimeCell] {
        &self.cells
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn min(&self) -> f64 {
        self.cells[0].lo
    }

    pub fn max(&self) -> f64 {
        self.cells[self.cells.len() - 1].hi
    }

    pub fn is_discrete(&self) -> bool {
        self.cells.iter().all(TimeCell::is_point)
    }

    /// Index of the cell containing `t` (snap tolerance on boundaries).
    pub fn locate(&self, t: f64) -> Option<usize> {
        if !t.is_finite() {
            return None;
        }
        let tol = snap_tol(t);
        let i = self.cells.partition_point(|c| c.hi < t - tol);
        let c = self.cells.get(i)?;
        (t >= c.lo - tol && t <= c.hi + tol).then_some(i)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.locate(t).is_some()
    }

    /// Returns `t` replaced by the cell endpoint it snaps to, if any.
    pub fn snap(&self, t: f64) -> Result<f64> {
        let i = self.locate(t).ok_or(Error::PointNotInScale { t })?;
        let c = self.cells[i];
        Ok(if same_point(t, c.hi) {
            c.hi
        } else if same_point(t, c.lo) {
            c.lo
        } else {
            t.clamp(c.lo, c.hi)
        })
    }

    pub fn jump_info(&self, t: f64) -> Result<JumpInfo> {
        let i = self.locate(t).ok_or(Error::PointNotInScale { t })?;
        let c = self.cells[i];
        if !same_point(t, c.hi) {
            let t = if same_point(t, c.lo) { c.lo } else { t };
            return Ok(JumpInfo { t, sigma: t, mu: 0.0, class: PointClass::RightDense, at_edge: false });
        }
        match self.cells.get(i + 1) {
            Some(next) => Ok(JumpInfo {
                t: c.hi,
                sigma: next.lo,
                mu: next.lo - c.hi,
                class: PointClass::RightScattered,
                at_edge: false,
            }),
            None => Ok(JumpInfo { t: c.hi, sigma: c.hi, mu: 0.0, class: PointClass::RightDense, at_edge: true }),
        }
    }

    /// σ(t), failing at the window maximum.
    pub fn sigma(&self, t: f64) -> Result<f64> {
        let j = self.jump_info(t)?;
        if j.at_edge {
            return Err(Error::WindowEdge { t });
        }
        Ok(j.sigma)
    }

    pub fn mu(&self, t: f64) -> Result<f64> {
        Ok(self.jump_info(t)?.mu)
    }

    /// Backward jump ρ(t), clamped to `t` at the window minimum.
    pub fn rho(&self, t: f64) -> Result<f64> {
        let i = self.locate(t).ok_or(Error::PointNotInScale { t })?;
        let c = self.cells[i];
        if same_point(t, c.lo) && i > 0 {
            Ok(self.cells[i - 1].hi)
        } else {
            Ok(t)
        }
    }

    /// Δ-derivative of `f` at `t`. `h` defaults to 1e-6·max(1,|t|) on dense points.
    pub fn delta_derivative<V, F>(&self, f: &F, t: f64, h: Option<f64>) -> Result<V>
    where
        V: DeltaValue,
        F: Fn(f64) -> Result<V>,
    {
        let j = self.jump_info(t)?;
        if j.at_edge {
            return Err(Error::WindowEdge { t });
        }
        let checked = |x: f64| -> Result<V> {
            let v = f(x)?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFiniteValue { t: x })
            }
        };
        if j.class == PointClass::RightScattered {
            return Ok(checked(j.sigma)?.sub(&checked(j.t)?).scale(1.0 / j.mu));
        }
        let cell = self.cells[self.locate(j.t).expect("located above")];
        let h = h.unwrap_or(1e-6 * t.abs().max(1.0));
        let right = (j.t + h).min(cell.hi);
        let left = (j.t - h).max(cell.lo);
        if left < j.t {
            Ok(checked(right)?.sub(&checked(left)?).scale(1.0 / (right - left)))
        } else {
            // One-sided second-order difference at a left cell edge.
            let h = right - j.t;
            let (f0, f1, f2) = (checked(j.t)?, checked(j.t + h)?, checked(j.t + 2.0 * h.min((cell.hi - j.t) / 2.0))?);
            if 2.0 * h <= cell.hi - j.t {
                Ok(f1.scale(4.0).sub(&f0.scale(3.0)).sub(&f2).scale(1.0 / (2.0 * h)))
            } else {
                Ok(f1.sub(&f0).scale(1.0 / h))
            }
        }
    }

    /// Δ-integral of `f` over `[a, b)`: exact sum over right-scattered
    /// points plus adaptive Simpson on dense stretches.
    pub fn delta_integral<V, F>(&self, f: &F, a: f64, b: f64, tol: f64) -> Result<V>
    where
        V: DeltaValue,
        F: Fn(f64) -> Result<V>,
    {
        self.delta_integral_budget(f, a, b, tol, quadrature::DEFAULT_BUDGET)
    }

    pub fn delta_integral_budget<V, F>(&self, f: &F, a: f64, b: f64, tol: f64, budget: usize) -> Result<V>
    where
        V: DeltaValue,
        F: Fn(f64) -> Result<V>,
    {
        if a > b && !same_point(a, b) {
            return Err(Error::ReversedBounds { a, b });
        }
        let a = self.snap(a)?;
        let b = self.snap(b)?;
        let mut budget = budget;
        let mut acc: Option<V> = None;
        let mut push = |v: V| {
            acc = Some(match acc.take() {
                Some(s) => s.add(&v),
                None => v,
            })
        };
        if a < b {
            for piece in self.pieces(a, b) {
                match piece {
                    Piece::Dense(lo, hi) => push(quadrature::simpson(f, lo, hi, tol, &mut budget)?),
                    Piece::Jump(s, mu) => {
                        let v = f(s)?;
                        if !v.is_finite() {
                            return Err(Error::NonFiniteValue { t: s });
                        }
                        push(v.scale(mu))
                    }
                }
            }
        }
        match acc {
            Some(v) => Ok(v),
            None => Ok(f(a)?.zero_like()),
        }
    }

    /// Decomposes `[a, b)` into dense stretches and right-scattered points, in time order.
    pub fn pieces(&self, a: f64, b: f64) -> Vec<Piece> {
        let mut out = Vec::new();
        let start = self.cells.partition_point(|c| c.hi < a - snap_tol(a));
        for i in start..self.cells.len() {
            let c = self.cells[i];
            if c.lo >= b && !same_point(c.lo, a) {
                break;
            }
            let lo = c.lo.max(a);
            let hi = c.hi.min(b);
            if hi > lo {
                out.push(Piece::Dense(lo, hi));
            }
            if c.hi < b && !same_point(c.hi, b) && c.hi >= a - snap_tol(a) {
                if let Some(next) = self.cells.get(i + 1) {
                    out.push(Piece::Jump(c.hi, next.lo - c.hi));
                }
            }
        }
        out
    }

    /// All right-scattered points in `[a, b)`.
    pub fn scattered_points(&self, a: f64, b: f64) -> Vec<f64> {
        self.pieces(a, b)
            .into_iter()
            .filter_map(|p| match p {
                Piece::Jump(s, _) => Some(s),
                Piece::Dense(..) => None,
            })
            .collect()
    }

    /// Up to `n` deterministic sample points of the window inside `[a, b]`,
    /// excluding the window maximum. Discrete stretches contribute their
    /// points, dense cells a uniform grid; the result is thinned evenly.
    pub fn sample_points(&self, a: f64, b: f64, n: usize) -> Vec<f64> {
        if n == 0 {
            return Vec::new();
        }
        let b = b.min(self.max());
        let mut cand: Vec<f64> = Vec::new();
        let dense_len: f64 = self
            .cells
            .iter()
            .map(|c| (c.hi.min(b) - c.lo.max(a)).max(0.0))
            .sum();
        let grid_total = (4 * n).max(64) as f64;
        for c in &self.cells {
            let (lo, hi) = (c.lo.max(a), c.hi.min(b));
            if lo > hi || c.hi < a || c.lo > b {
                continue;
            }
            if c.lo >= a {
                cand.push(c.lo);
            }
            if hi > lo && dense_len > 0.0 {
                let k = ((hi - lo) / dense_len * grid_total).ceil().max(1.0) as usize;
                for j in 1..k {
                    cand.push(lo + (hi - lo) * j as f64 / k as f64);
                }
            }
            if c.hi <= b {
                cand.push(c.hi);
            }
        }
        cand.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        cand.dedup_by(|x, y| same_point(*x, *y));
        let max = self.max();
        cand.retain(|x| !same_point(*x, max));
        if cand.len() <= n {
            return cand;
        }
        if n == 1 {
            return vec![cand[0]];
        }
        (0..n)
            .map(|i| cand[((i as f64) * (cand.len() - 1) as f64 / (n - 1) as f64).round() as usize])
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Dense(f64, f64),
    Jump(f64, f64),
}

fn power_range(q: f64, a: f64, b: f64) -> (i32, i32) {
    let k0 = (a.ln() / q.ln() - 1e-9).ceil() as i32;
    let k1 = (b.ln() / q.ln() + 1e-9).floor() as i32;
    let k0 = if q.powi(k0) < a - snap_tol(a) { k0 + 1 } else { k0 };
    let k1 = if q.powi(k1) > b + snap_tol(b) { k1 - 1 } else { k1 };
    (k0, k1)
}

pub(crate) fn signed_square(x: f64) -> f64 {
    x.signum() * x * x
}

pub(crate) fn signed_root(t: f64) -> f64 {
    t.signum() * t.abs().sqrt()
}

pub(crate) fn logistic_point(q: f64, y: f64) -> f64 {
    // q^y / (1 + q^y), written to stay accurate for large |y|.
    1.0 / (1.0 + q.powf(-y))
}
