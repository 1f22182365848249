//! Shift operators δ±(s,t), periodicity-in-shifts checks, iterated shifts
//! and the Θ clock that turns shift periodicity into an additive one.
//!
//! Θ(t) = Σ_{j=1}^{m(t)} δ₋(a_{j−1}, a_j) + G(t), where a_k = δ₊^{(k)}(T,t₀),
//! m(t) = min{k : a_k ≥ t}, and G(t) = −δ₋(t, a_{m(t)}) off the anchor set
//! (zero on it).

use std::collections::HashMap;
use std::sync::RwLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exprdsl::Expr;
use crate::linalg::DeltaValue;
use crate::timescale::{same_point, signed_root, signed_square, snap_tol, PointClass, TimeScaleWindow};

pub const DEFAULT_ITERATION_CAP: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }

    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CustomShift {
    pub forward: Expr,
    pub backward: Expr,
    pub params: HashMap<String, f64>,
}

#[derive(Debug, Clone)]
pub enum ShiftKind {
    /// δ±(s,t) = t ± s.
    Additive,
    /// δ±(s,t) = t·s^{±1} for t > 0 and t/s^{±1} for t < 0.
    Multiplicative,
    /// δ±(s,t) = (t² ± s²)^{1/2} on ℕ^{1/2}.
    Sqrt,
    /// δ±(s,t) = g(n(t) ± √s) with n(t) = sgn(t)√|t| and g(x) = sgn(x)x².
    SignedSquares,
    /// δ±(s,t) = L(ℓ(t) ± ℓ(s)) with ℓ(x) = log_q(x/(1−x)) and L = ℓ⁻¹.
    Logistic { q: f64 },
    Custom(CustomShift),
}

impl ShiftKind {
    pub fn name(&self) -> &'static str {
        match self {
            ShiftKind::Additive => "additive",
            ShiftKind::Multiplicative => "multiplicative",
            ShiftKind::Sqrt => "sqrt",
            ShiftKind::SignedSquares => "signed_squares",
            ShiftKind::Logistic { .. } => "logistic",
            ShiftKind::Custom(_) => "custom",
        }
    }
}

/// Anchor points a_k and prefix sums of the Θ increments.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaTable {
    pub anchors: Vec<f64>,
    /// `cumulative[k]` = Σ_{j=1}^{k} δ₋(a_{j−1}, a_j).
    pub cumulative: Vec<f64>,
}

impl ThetaTable {
    pub fn increments(&self) -> Vec<f64> {
        self.cumulative.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#[derive(Debug)]
pub struct ShiftSystem {
    kind: ShiftKind,
    t0: f64,
    period: f64,
    cap: usize,
    table: RwLock<ThetaTable>,
}

impl Clone for ShiftSystem {
    fn clone(&self) -> Self {
        ShiftSystem {
            kind: self.kind.clone(),
            t0: self.t0,
            period: self.period,
            cap: self.cap,
            table: RwLock::new(self.table()),
        }
    }
}

impl ShiftSystem {
    pub fn new(kind: ShiftKind, t0: f64, period: f64) -> Result<Self> {
        if !(t0.is_finite() && period.is_finite()) {
            return Err(Error::Config("t0 and T must be finite".into()));
        }
        let sys = ShiftSystem {
            kind,
            t0,
            period,
            cap: DEFAULT_ITERATION_CAP,
            table: RwLock::new(ThetaTable { anchors: vec![t0], cumulative: vec![0.0] }),
        };
        Ok(sys)
    }

    pub fn with_iteration_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    pub fn additive(t0: f64, period: f64) -> Result<Self> {
        Self::new(ShiftKind::Additive, t0, period)
    }

    pub fn multiplicative(t0: f64, period: f64) -> Result<Self> {
        Self::new(ShiftKind::Multiplicative, t0, period)
    }

    pub fn kind(&self) -> &ShiftKind {
        &self.kind
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// δ₊^T(t₀), the end of the first period.
    pub fn t1(&self) -> Result<f64> {
        self.forward(self.period, self.t0)
    }

    pub fn in_domain(&self, dir: Direction, s: f64, t: f64) -> bool {
        self.raw(dir, s, t).is_some_and(f64::is_finite)
    }

    pub fn shift(&self, dir: Direction, s: f64, t: f64) -> Result<f64> {
        match self.raw(dir, s, t) {
            Some(v) if v.is_finite() => Ok(v),
            _ => Err(Error::OutOfDomain { direction: dir.name(), s, t, step: None }),
        }
    }

    pub fn forward(&self, s: f64, t: f64) -> Result<f64> {
        self.shift(Direction::Forward, s, t)
    }

    pub fn backward(&self, s: f64, t: f64) -> Result<f64> {
        self.shift(Direction::Backward, s, t)
    }

    fn raw(&self, dir: Direction, s: f64, t: f64) -> Option<f64> {
        let sg = dir.sign();
        match &self.kind {
            ShiftKind::Additive => Some(t + sg * s),
            ShiftKind::Multiplicative => {
                if !(s > 0.0) || t == 0.0 {
                    return None;
                }
                let f = if sg > 0.0 { s } else { 1.0 / s };
                Some(if t > 0.0 { t * f } else { t / f })
            }
            ShiftKind::Sqrt => {
                let v = t * t + sg * s * s;
                // Round-off can push an exact zero slightly negative.
                let v = if v < 0.0 && v >= -4.0 * f64::EPSILON * t * t { 0.0 } else { v };
                (t >= 0.0 && s >= 0.0 && v >= 0.0).then(|| v.sqrt())
            }
            ShiftKind::SignedSquares => (s >= 0.0).then(|| signed_square(signed_root(t) + sg * s.sqrt())),
            ShiftKind::Logistic { q } => {
                let inside = |x: f64| x > 0.0 && x < 1.0;
                (inside(s) && inside(t)).then(|| {
                    let ell = |x: f64| (x / (1.0 - x)).ln() / q.ln();
                    crate::timescale::logistic_point(*q, ell(t) + sg * ell(s))
                })
            }
            ShiftKind::Custom(c) => {
                let e = if sg > 0.0 { &c.forward } else { &c.backward };
                e.eval_st(s, t, &c.params).ok()
            }
        }
    }

    /// ∂_t δ±(s,t) in closed form, when the catalog provides one.
    fn dt_analytic(&self, dir: Direction, s: f64, t: f64) -> Option<f64> {
        let sg = dir.sign();
        match &self.kind {
            ShiftKind::Additive => Some(1.0),
            ShiftKind::Multiplicative => {
                let f = if sg > 0.0 { s } else { 1.0 / s };
                Some(if t > 0.0 { f } else { 1.0 / f })
            }
            ShiftKind::Sqrt => {
                let v = self.raw(dir, s, t)?;
                (v > 0.0).then(|| t / v)
            }
            ShiftKind::SignedSquares => (t != 0.0).then(|| (signed_root(t) + sg * s.sqrt()).abs() / t.abs().sqrt()),
            ShiftKind::Logistic { .. } => {
                let v = self.raw(dir, s, t)?;
                Some(v * (1.0 - v) / (t * (1.0 - t)))
            }
            ShiftKind::Custom(_) => None,
        }
    }

    /// ∂_s δ₋(s, a) in closed form, when available.
    fn ds_backward_analytic(&self, s: f64, a: f64) -> Option<f64> {
        match &self.kind {
            ShiftKind::Additive => Some(-1.0),
            ShiftKind::Multiplicative => Some(if a > 0.0 { -a / (s * s) } else { a }),
            ShiftKind::Sqrt => {
                let v = (a * a - s * s).sqrt();
                (v > 0.0).then(|| -s / v)
            }
            ShiftKind::SignedSquares => {
                (s > 0.0).then(|| -(signed_root(a) - s.sqrt()).abs() / s.sqrt())
            }
            ShiftKind::Logistic { .. } => {
                let v = self.raw(Direction::Backward, s, a)?;
                Some(-v * (1.0 - v) / (s * (1.0 - s)))
            }
            ShiftKind::Custom(_) => None,
        }
    }

    /// δ±^{(k)}(T, t): k-fold composition of t ↦ δ±(T, t).
    pub fn iterate(&self, dir: Direction, period: f64, k: usize, t: f64) -> Result<f64> {
        let mut x = t;
        for step in 0..k {
            x = self.shift(dir, period, x).map_err(|_| Error::OutOfDomain {
                direction: dir.name(),
                s: period,
                t: x,
                step: Some(step),
            })?;
        }
        Ok(x)
    }

    /// Snapshot of the anchor cache.
    pub fn table(&self) -> ThetaTable {
        self.table.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Smallest k with a_k satisfying `pred`, extending the anchor cache as needed.
    fn first_anchor(&self, t: f64, pred: impl Fn(f64) -> bool) -> Result<(usize, f64, f64)> {
        {
            let tab = self.table.read().unwrap_or_else(|e| e.into_inner());
            let last = *tab.anchors.last().expect("t0 anchor");
            if pred(last) {
                let k = tab.anchors.partition_point(|a| !pred(*a));
                return Ok((k, tab.anchors[k], tab.cumulative[k]));
            }
        }
        let mut tab = self.table.write().unwrap_or_else(|e| e.into_inner());
        loop {
            let k = tab.anchors.len() - 1;
            let last = tab.anchors[k];
            if pred(last) {
                let k = tab.anchors.partition_point(|a| !pred(*a));
                return Ok((k, tab.anchors[k], tab.cumulative[k]));
            }
            if k >= self.cap {
                return Err(Error::IterationCapExceeded { cap: self.cap, t });
            }
            let next = self.forward(self.period, last).map_err(|e| match e {
                Error::OutOfDomain { direction, s, t, .. } => Error::OutOfDomain { direction, s, t, step: Some(k) },
                other => other,
            })?;
            if !(next > last) {
                return Err(Error::Periodicity(format!("δ₊(T, {last}) = {next} does not advance")));
            }
            let inc = self.backward(last, next)?;
            if !(inc > 0.0) {
                return Err(Error::Periodicity(format!("Θ increment δ₋({last}, {next}) = {inc} is not positive")));
            }
            let c = tab.cumulative[k] + inc;
            tab.anchors.push(next);
            tab.cumulative.push(c);
        }
    }

    /// m(t) = min{k : δ₊^{(k)}(T,t₀) ≥ t}.
    pub fn m(&self, t: f64) -> Result<usize> {
        self.check_after_t0(t)?;
        Ok(self.first_anchor(t, |a| a >= t - snap_tol(t))?.0)
    }

    /// Whether `t` is an anchor δ₊^{(k)}(T,t₀) (within the snap tolerance).
    pub fn is_anchor(&self, t: f64) -> Result<bool> {
        let (_, a, _) = self.first_anchor(t, |a| a >= t - snap_tol(t))?;
        Ok(same_point(a, t))
    }

    fn check_after_t0(&self, t: f64) -> Result<()> {
        if t < self.t0 - snap_tol(self.t0) {
            return Err(Error::OutOfDomain { direction: "theta", s: self.t0, t, step: None });
        }
        Ok(())
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        self.check_after_t0(t)?;
        let (_, a, c) = self.first_anchor(t, |a| a >= t - snap_tol(t))?;
        if same_point(a, t) {
            return Ok(c);
        }
        Ok(c - self.backward(t, a)?)
    }

    /// Right derivative of Θ at a dense point: −∂_s δ₋(s, a)|_{s=t} with a
    /// the first anchor strictly beyond t.
    pub fn theta_derivative(&self, t: f64) -> Result<f64> {
        self.check_after_t0(t)?;
        let (_, a, _) = self.first_anchor(t, |a| a > t + snap_tol(t))?;
        if let Some(d) = self.ds_backward_analytic(t, a) {
            return Ok(-d);
        }
        let h = 1e-6 * t.abs().max(1.0);
        let h = h.min(0.5 * (a - t));
        let fwd = self.backward(t + h, a)?;
        let bwd = self.backward(t - h, a)?;
        Ok(-(fwd - bwd) / (2.0 * h))
    }

    /// Δ-derivative of t ↦ δ±(s, t) along the window.
    pub fn shift_delta_derivative_dir(&self, ts: &TimeScaleWindow, dir: Direction, s: f64, t: f64) -> Result<f64> {
        let j = ts.jump_info(t)?;
        if j.at_edge {
            return Err(Error::WindowEdge { t });
        }
        if j.class == PointClass::RightScattered {
            return Ok((self.shift(dir, s, j.sigma)? - self.shift(dir, s, j.t)?) / j.mu);
        }
        if let Some(d) = self.dt_analytic(dir, s, j.t) {
            return Ok(d);
        }
        ts.delta_derivative(&|x: f64| self.shift(dir, s, x), j.t, None)
    }

    /// δ₊^{Δ}(T, t).
    pub fn shift_delta_derivative(&self, ts: &TimeScaleWindow, period: f64, t: f64) -> Result<f64> {
        self.shift_delta_derivative_dir(ts, Direction::Forward, period, t)
    }

    /// Checks periodicity of the scale or of a function at `samples`.
    pub fn verify_periodicity<V, F>(
        &self,
        ts: &TimeScaleWindow,
        f: Option<&F>,
        mode: PeriodicityMode,
        samples: &[f64],
        tol: f64,
    ) -> PeriodicityReport
    where
        V: DeltaValue,
        F: Fn(f64) -> Result<V>,
    {
        let mut rep = PeriodicityReport::new(mode);
        match mode {
            PeriodicityMode::Scale => self.check_scale(ts, samples, tol, &mut rep),
            PeriodicityMode::Axioms => self.check_axioms(ts, samples, tol, &mut rep),
            PeriodicityMode::Function | PeriodicityMode::DeltaFunction => match f {
                Some(f) => self.check_function(ts, f, mode == PeriodicityMode::DeltaFunction, samples, tol, &mut rep),
                None => rep.violation("function", f64::NAN, f64::NAN, f64::INFINITY, "no function supplied".into()),
            },
        }
        rep.pass = rep.violations.is_empty();
        rep
    }

    /// [`Self::verify_periodicity`] for the modes that need no function.
    pub fn verify_scale(&self, ts: &TimeScaleWindow, samples: &[f64], tol: f64) -> PeriodicityReport {
        self.verify_periodicity::<f64, fn(f64) -> Result<f64>>(ts, None, PeriodicityMode::Scale, samples, tol)
    }

    pub fn verify_axioms(&self, ts: &TimeScaleWindow, samples: &[f64], tol: f64) -> PeriodicityReport {
        self.verify_periodicity::<f64, fn(f64) -> Result<f64>>(ts, None, PeriodicityMode::Axioms, samples, tol)
    }

    fn check_scale(&self, ts: &TimeScaleWindow, samples: &[f64], tol: f64, rep: &mut PeriodicityReport) {
        let p = self.period;
        for &t in samples {
            for dir in [Direction::Forward, Direction::Backward] {
                let img = match self.shift(dir, p, t) {
                    Ok(v) => v,
                    Err(_) => {
                        rep.violation("domain", p, t, f64::INFINITY, format!("(T, t) outside the {} domain", dir.name()));
                        continue;
                    }
                };
                if img < ts.min() - snap_tol(img) || img > ts.max() + snap_tol(img) {
                    rep.skipped += 1;
                    continue;
                }
                rep.checked += 1;
                if !ts.contains(img) {
                    rep.violation("membership", p, t, f64::INFINITY, format!("{} shift {img} is not in the scale", dir.name()));
                    continue;
                }
                // σ commutes with the shift: δ(P, σ(t)) = σ(δ(P, t)).
                let (Ok(jt), Ok(ji)) = (ts.jump_info(t), ts.jump_info(img)) else { continue };
                if jt.at_edge || ji.at_edge {
                    continue;
                }
                let lhs = match self.shift(dir, p, jt.sigma) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if lhs > ts.max() + snap_tol(lhs) {
                    continue;
                }
                rep.compare("sigma-commutation", p, t, lhs, ji.sigma, tol);
            }
        }
    }

    fn check_axioms(&self, ts: &TimeScaleWindow, samples: &[f64], tol: f64, rep: &mut PeriodicityReport) {
        use Direction::{Backward as B, Forward as F};
        let t0 = self.t0;
        let n = samples.len();
        if n == 0 {
            return;
        }
        let amounts: Vec<f64> = samples.iter().copied().filter(|s| *s >= t0 - snap_tol(t0)).collect();
        let get = |d: Direction, s: f64, t: f64| self.shift(d, s, t).ok();
        for i in 0..n {
            let t = samples[i];
            let u = samples[(7 * i + 3) % n];
            let (s, v) = if amounts.is_empty() {
                (t0, t0)
            } else {
                (amounts[(11 * i + 1) % amounts.len()], amounts[(13 * i + 5) % amounts.len()])
            };

            // Def items 1 and 2: monotonicity.
            for d in [F, B] {
                if let (Some(x), Some(y)) = (get(d, s, t.min(u)), get(d, s, t.max(u))) {
                    if t != u && s <= t.min(u) {
                        rep.check_bool("strict-increase-in-t", s, t, x < y);
                    }
                }
            }
            if s != v {
                let (lo, hi) = (s.min(v), s.max(v));
                if let (Some(x), Some(y)) = (get(F, lo, t), get(F, hi, t)) {
                    rep.check_bool("forward-increase-in-s", lo, t, x < y);
                }
                if let (Some(x), Some(y)) = (get(B, lo, t), get(B, hi, t)) {
                    rep.check_bool("backward-decrease-in-s", lo, t, x > y);
                }
            }
            // Def item 3.
            if t >= t0 {
                if let Some(x) = get(F, t, t0) {
                    rep.compare("forward-from-t0", t, t0, x, t, tol);
                }
            }
            if let Some(x) = get(F, t0, t) {
                rep.compare("forward-by-t0", t0, t, x, t, tol);
            }
            // Def item 4: round trip.
            for d in [F, B] {
                if let Some(x) = get(d, s, t) {
                    if let Some(y) = get(d.opposite(), s, x) {
                        rep.compare("round-trip", s, t, y, t, tol);
                    }
                }
            }
            // Def item 5: δ∓(v, δ±(s,t)) = δ±(s, δ∓(v,t)).
            for d in [F, B] {
                if let (Some(x), Some(y)) = (get(d, s, t), get(d.opposite(), v, t)) {
                    if let (Some(l), Some(r)) = (get(d.opposite(), v, x), get(d, s, y)) {
                        rep.compare("shift-exchange", s, t, l, r, tol);
                    }
                }
            }
            if t >= t0 {
                // Lemma items 1, 6, 7.
                if let Some(x) = get(B, t, t) {
                    rep.compare("backward-self-is-t0", t, t, x, t0, tol);
                }
                if let Some(x) = get(F, s, t) {
                    rep.check_bool("forward-stays-after-t0", s, t, x >= t0 - snap_tol(t0));
                }
                if t >= s {
                    if let Some(x) = get(B, s, t) {
                        rep.check_bool("backward-stays-after-t0", s, t, x >= t0 - snap_tol(t0));
                        // Lemma item 10.
                        if same_point(x, t0) {
                            rep.compare("backward-to-t0-identifies", s, t, s, t, tol);
                        }
                    }
                }
                // Lemma item 4: δ₊(t, δ₋(s,t₀)) = δ₋(s,t).
                if let Some(y) = get(B, s, t0) {
                    if let (Some(l), Some(r)) = (get(F, t, y), get(B, s, t)) {
                        rep.compare("forward-of-backward-t0", s, t, l, r, tol);
                    }
                }
                // Lemma item 5: commutativity on [t0, ∞).
                if u >= t0 {
                    if let (Some(l), Some(r)) = (get(F, u, t), get(F, t, u)) {
                        rep.compare("forward-commutes", u, t, l, r, tol);
                    }
                }
                // Lemma item 9.
                let (a, b, c) = sorted3(s, t, v);
                if a >= t0 {
                    if let (Some(x), Some(y)) = (get(B, a, b), get(B, b, c)) {
                        if let (Some(l), Some(r)) = (get(F, x, y), get(B, a, c)) {
                            rep.compare("backward-chain", a, c, l, r, tol);
                        }
                    }
                }
            }
            // Lemma item 2.
            if let Some(x) = get(B, t0, t) {
                rep.compare("backward-by-t0", t0, t, x, t, tol);
            }
            // Lemma item 8.
            if let Ok(j) = ts.jump_info(t) {
                if !j.at_edge && self.in_domain(F, s, t) {
                    if let Ok(d) = self.shift_delta_derivative(ts, s, t) {
                        rep.check_bool("shift-derivative-positive", s, t, d > 0.0);
                    }
                }
            }
        }
    }

    fn check_function<V, F>(&self, ts: &TimeScaleWindow, f: &F, delta: bool, samples: &[f64], tol: f64, rep: &mut PeriodicityReport)
    where
        V: DeltaValue,
        F: Fn(f64) -> Result<V>,
    {
        let p = self.period;
        for &t in samples {
            for dir in [Direction::Forward, Direction::Backward] {
                let img = match self.shift(dir, p, t) {
                    Ok(v) => v,
                    Err(_) => {
                        rep.violation("domain", p, t, f64::INFINITY, format!("(T, t) outside the {} domain", dir.name()));
                        continue;
                    }
                };
                if !ts.contains(img) {
                    rep.skipped += 1;
                    continue;
                }
                let (ft, fi) = match (f(t), f(img)) {
                    (Ok(a), Ok(b)) => (a, b),
                    (Err(e), _) | (_, Err(e)) => {
                        rep.violation("evaluation", p, t, f64::INFINITY, e.to_string());
                        continue;
                    }
                };
                let lhs = if delta {
                    match self.shift_delta_derivative_dir(ts, dir, p, t) {
                        Ok(d) => fi.scale(d),
                        Err(Error::WindowEdge { .. }) => {
                            rep.skipped += 1;
                            continue;
                        }
                        Err(e) => {
                            rep.violation("shift-derivative", p, t, f64::INFINITY, e.to_string());
                            continue;
                        }
                    }
                } else {
                    fi
                };
                let diff = lhs.sub(&ft).norm_max();
                let scale = lhs.norm_max().max(ft.norm_max());
                rep.checked += 1;
                if !(diff <= tol * scale + ABS_FLOOR) {
                    let check = if delta { "delta-periodicity" } else { "periodicity" };
                    rep.violation(check, p, t, diff, format!("{} shift to {img}", dir.name()));
                }
            }
        }
    }
}

/// Absolute slack for comparisons whose exact value is zero.
const ABS_FLOOR: f64 = 1e-13;

fn sorted3(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let mut v = [a, b, c];
    v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    (v[0], v[1], v[2])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodicityMode {
    Scale,
    Axioms,
    Function,
    DeltaFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub s: f64,
    pub t: f64,
    pub residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityReport {
    pub mode: PeriodicityMode,
    pub pass: bool,
    pub checked: usize,
    pub skipped: usize,
    pub violations: Vec<Violation>,
}

impl PeriodicityReport {
    fn new(mode: PeriodicityMode) -> Self {
        PeriodicityReport { mode, pass: true, checked: 0, skipped: 0, violations: Vec::new() }
    }

    fn violation(&mut self, check: &str, s: f64, t: f64, residual: f64, detail: String) {
        self.violations.push(Violation { check: check.to_string(), s, t, residual, detail });
    }

    fn compare(&mut self, check: &str, s: f64, t: f64, lhs: f64, rhs: f64, tol: f64) {
        self.checked += 1;
        let diff = (lhs - rhs).abs();
        if !(diff <= tol * lhs.abs().max(rhs.abs()) + ABS_FLOOR) {
            self.violation(check, s, t, diff, format!("{lhs} vs {rhs}"));
        }
    }

    fn check_bool(&mut self, check: &str, s: f64, t: f64, ok: bool) {
        self.checked += 1;
        if !ok {
            self.violation(check, s, t, f64::INFINITY, String::new());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> (TimeScaleWindow, ShiftSystem) {
        (TimeScaleWindow::q_scale(2.0, 1.0, 4096.0).unwrap(), ShiftSystem::multiplicative(1.0, 2.0).unwrap())
    }

    #[test]
    fn shift_examples() {
        let (_, sys) = q2();
        assert_eq!(sys.forward(2.0, 8.0).unwrap(), 16.0);
        assert_eq!(sys.forward(1.0, 8.0).unwrap(), 8.0);
        let sq = ShiftSystem::new(ShiftKind::Sqrt, 0.0, 1.0).unwrap();
        assert_eq!(sq.forward(4.0, 3.0).unwrap(), 5.0);
        assert_eq!(sq.backward(4.0, 5.0).unwrap(), 3.0);
        assert!(matches!(sq.backward(5.0, 3.0), Err(Error::OutOfDomain { .. })));
        assert!(matches!(sys.forward(2.0, 0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn iterate_examples() {
        let (_, sys) = q2();
        assert_eq!(sys.iterate(Direction::Forward, 2.0, 3, 1.0).unwrap(), 8.0);
        assert_eq!(sys.iterate(Direction::Backward, 2.0, 0, 5.0).unwrap(), 5.0);
        let g = ShiftSystem::multiplicative(1.0, 3.0).unwrap();
        assert_eq!(g.iterate(Direction::Forward, 3.0, 2, 1.0).unwrap(), 9.0);
        let sq = ShiftSystem::new(ShiftKind::Sqrt, 0.0, 1.0).unwrap();
        match sq.iterate(Direction::Backward, 1.0, 5, 2.0) {
            Err(Error::OutOfDomain { step: Some(4), .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn theta_examples() {
        let (_, sys) = q2();
        assert_eq!(sys.theta(1.0).unwrap(), 0.0);
        assert_eq!(sys.theta(8.0).unwrap(), 6.0);
        assert_eq!(sys.m(8.0).unwrap(), 3);
        assert_eq!(sys.theta(4.0).unwrap(), 4.0);
        assert_eq!(sys.theta(2.0).unwrap(), 2.0);
        assert_eq!(sys.theta(32.0).unwrap(), 10.0);

        let g = ShiftSystem::multiplicative(1.0, 3.0).unwrap();
        assert!((g.theta(4.0).unwrap() - 3.75).abs() < 1e-15);
        for t in [1.5, 2.0, 4.0, 5.5, 13.0, 18.0] {
            let m = g.m(t).unwrap() as f64;
            let closed = 3.0 * m - 3f64.powf(m) / t;
            assert!((g.theta(t).unwrap() - closed).abs() < 1e-12);
            assert!((g.theta_derivative(t).unwrap() - 3f64.powf(m) / (t * t)).abs() < 1e-12);
        }

        let add = ShiftSystem::additive(0.5, 2.0).unwrap();
        for t in [0.5, 0.7, 2.5, 3.0, 9.25] {
            assert!((add.theta(t).unwrap() - (t - 0.5)).abs() < 1e-12);
            assert_eq!(add.theta_derivative(t).unwrap(), 1.0);
        }
        assert!(matches!(add.theta(0.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn theta_cap() {
        let sys = ShiftSystem::additive(0.0, 1.0).unwrap().with_iteration_cap(10);
        assert!(sys.theta(9.5).is_ok());
        assert!(matches!(sys.theta(20.0), Err(Error::IterationCapExceeded { cap: 10, .. })));
    }

    #[test]
    fn shift_derivative_examples() {
        let g = TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 500.0).unwrap();
        let sys = ShiftSystem::multiplicative(1.0, 3.0).unwrap();
        for t in [1.0, 1.5, 2.0, 6.0, 9.0] {
            assert!((sys.shift_delta_derivative(&g, 3.0, t).unwrap() - 3.0).abs() < 1e-12);
        }
        let z = TimeScaleWindow::integer(0.0, 50.0).unwrap();
        let add = ShiftSystem::additive(0.0, 4.0).unwrap();
        assert_eq!(add.shift_delta_derivative(&z, 4.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn periodicity_examples() {
        let (ts, sys) = q2();
        let sys_q = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
        let samples = ts.sample_points(1.0, 4096.0, 20);
        let f = |t: f64| Ok(1.0 / t);
        let rep = sys_q.verify_periodicity(&ts, Some(&f), PeriodicityMode::DeltaFunction, &samples, 1e-10);
        assert!(rep.pass && rep.checked > 0, "{rep:?}");
        assert!(sys.verify_scale(&ts, &samples, 1e-10).pass);

        let r = TimeScaleWindow::real(1.0 / 4096.0, 4096.0).unwrap();
        let cosys = ShiftSystem::multiplicative(1.0, 4.0).unwrap();
        let s: Vec<f64> = (0..50).map(|k| 0.01 * 1.2f64.powi(k)).collect();
        let f = |t: f64| Ok((t.abs().ln() / 0.5f64.ln() * std::f64::consts::PI).sin());
        let rep = cosys.verify_periodicity(&r, Some(&f), PeriodicityMode::Function, &s, 1e-10);
        assert!(rep.pass, "{rep:?}");

        let bad = TimeScaleWindow::explicit(vec![
            crate::timescale::TimeCell::interval(-10.0, 0.0),
            crate::timescale::TimeCell::interval(1.0, 10.0),
        ])
        .unwrap();
        let add = ShiftSystem::additive(0.0, 1.0).unwrap();
        let pts = bad.sample_points(-10.0, 10.0, 40);
        let rep = add.verify_scale(&bad, &pts, 1e-10);
        assert!(!rep.pass && !rep.violations.is_empty());
        let mul = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
        let pts: Vec<f64> = pts.into_iter().filter(|t| *t != 0.0).collect();
        assert!(!mul.verify_scale(&bad, &pts, 1e-10).pass);
    }

    #[test]
    fn anchor_cache_is_consistent() {
        let sys = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
        sys.theta(1024.0).unwrap();
        let tab = sys.table();
        assert_eq!(tab.anchors.len(), 11);
        assert!(tab.increments().iter().all(|d| *d == 2.0));
        let copy = sys.clone();
        assert_eq!(copy.table(), tab);
    }
}
