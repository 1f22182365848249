//! Adaptive composite Simpson quadrature over a real interval for any
//! [`DeltaValue`].

use crate::error::{Error, Result};
use crate::linalg::DeltaValue;

pub const DEFAULT_BUDGET: usize = 1 << 20;
const INITIAL_PANELS: usize = 8;
const MAX_DEPTH: u32 = 48;

struct Panel<V> {
    a: f64,
    b: f64,
    fa: V,
    fm: V,
    fb: V,
    whole: V,
    eps: f64,
    depth: u32,
}

/// Integrates `f` over `[a, b]` to relative tolerance `tol`, measured
/// against the integral of |f|. `budget` is decremented per evaluation.
pub fn simpson<V, F>(f: &F, a: f64, b: f64, tol: f64, budget: &mut usize) -> Result<V>
where
    V: DeltaValue,
    F: Fn(f64) -> Result<V>,
{
    if b < a {
        return Err(Error::ReversedBounds { a, b });
    }
    let mut eval = |x: f64| -> Result<V> {
        if *budget == 0 {
            return Err(Error::QuadratureFailure { a, b });
        }
        *budget -= 1;
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::NonFiniteValue { t: x });
        }
        Ok(v)
    };

    let fa0 = eval(a)?;
    if b == a {
        return Ok(fa0.zero_like());
    }
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut nodes = Vec::with_capacity(2 * INITIAL_PANELS + 1);
    nodes.push(fa0);
    for k in 1..=2 * INITIAL_PANELS {
        let x = if k == 2 * INITIAL_PANELS { b } else { a + 0.5 * h * k as f64 };
        nodes.push(eval(x)?);
    }

    let mut stack = Vec::new();
    let mut scale = 0.0;
    for p in 0..INITIAL_PANELS {
        let pa = a + h * p as f64;
        let pb = if p + 1 == INITIAL_PANELS { b } else { pa + h };
        let (fa, fm, fb) = (nodes[2 * p].clone(), nodes[2 * p + 1].clone(), nodes[2 * p + 2].clone());
        let whole = simpson_rule(pa, pb, &fa, &fm, &fb);
        scale += (pb - pa) * (fa.norm_max() + 4.0 * fm.norm_max() + fb.norm_max()) / 6.0;
        stack.push(Panel { a: pa, b: pb, fa, fm, fb, whole, eps: 0.0, depth: 0 });
    }
    let total_eps = tol * scale.max(f64::MIN_POSITIVE);
    for panel in &mut stack {
        panel.eps = total_eps * (panel.b - panel.a) / (b - a);
    }

    let mut acc = nodes[0].zero_like();
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = eval(lm)?;
        let frm = eval(rm)?;
        let left = simpson_rule(p.a, m, &p.fa, &flm, &p.fm);
        let right = simpson_rule(m, p.b, &p.fm, &frm, &p.fb);
        let refined = left.add(&right);
        let err = refined.sub(&p.whole).norm_max();
        if err <= 15.0 * p.eps || err <= 1e-15 * refined.norm_max() || (m - p.a) <= f64::EPSILON * m.abs() {
            acc = acc.add(&refined).add(&refined.sub(&p.whole).scale(1.0 / 15.0));
            continue;
        }
        if p.depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure { a, b });
        }
        let half = 0.5 * p.eps;
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm.clone(), whole: left, eps: half, depth: p.depth + 1 });
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, eps: half, depth: p.depth + 1 });
    }
    Ok(acc)
}

fn simpson_rule<V: DeltaValue>(a: f64, b: f64, fa: &V, fm: &V, fb: &V) -> V {
    fa.add(&fm.scale(4.0)).add(fb).scale((b - a) / 6.0)
}
