//! Λ-ratio, time-scale monomials, eigenvalue paths of R(t) and the two
//! stability classifiers: sampled exponent conditions and multiplier moduli.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::FloquetDecomposition;
use crate::hilger::re_mu;
use crate::linalg;
use crate::ode::{self, OdeOptions};
use crate::shifts::ShiftSystem;
use crate::timescale::{same_point, Piece, PointClass, TimeScaleWindow};

/// Label attached to every verdict.
pub const FINITE_HORIZON_LABEL: &str = "finite-horizon numerical verdicts";

/// lim_{s→t} Λ(t,s)/(σ(t) − s): (Θ(σ(t)) − Θ(t))/μ(t) at right-scattered t, Θ'(t) otherwise.
pub fn lambda_ratio(sys: &ShiftSystem, ts: &TimeScaleWindow, t: f64) -> Result<f64> {
    let j = ts.jump_info(t)?;
    if j.class == PointClass::RightScattered {
        return Ok((sys.theta(j.sigma)? - sys.theta(j.t)?) / j.mu);
    }
    if j.at_edge && ts.cells().last().is_some_and(|c| c.is_point()) {
        return Err(Error::WindowEdge { t });
    }
    sys.theta_derivative(j.t)
}

/// h₀(t,t₀), …, h_k(t,t₀) with h_{j+1}(t,t₀) = ∫_{t₀}^{t} Λ(τ)h_j(τ,t₀) Δτ,
/// swept forward piece by piece.
pub fn monomials(sys: &ShiftSystem, ts: &TimeScaleWindow, k: usize, t: f64, t0: f64, tol: f64) -> Result<Vec<f64>> {
    if t < t0 && !same_point(t, t0) {
        return Err(Error::ReversedBounds { a: t0, b: t });
    }
    let (t0, t) = (ts.snap(t0)?, ts.snap(t)?);
    let mut h = DVector::zeros(k + 1);
    h[0] = 1.0;
    let opts = OdeOptions { rtol: tol, atol: tol * 1e-2, ..OdeOptions::default() };
    for piece in ts.pieces(t0, t) {
        match piece {
            Piece::Jump(s, mu) => {
                let rate = lambda_ratio(sys, ts, s)?;
                for j in (1..=k).rev() {
                    h[j] += mu * rate * h[j - 1];
                }
            }
            Piece::Dense(a, b) => {
                let rhs = |x: f64, y: &DVector<f64>| -> Result<DVector<f64>> {
                    let rate = sys.theta_derivative(x)?;
                    let mut d = DVector::zeros(k + 1);
                    for j in 1..=k {
                        d[j] = rate * y[j - 1];
                    }
                    Ok(d)
                };
                h = ode::integrate(&rhs, a, b, h, opts).map_err(|e| match e {
                    Error::IntegrationFailure { a, b, .. } => Error::QuadratureFailure { a, b },
                    other => other,
                })?;
            }
        }
    }
    Ok(h.iter().copied().collect())
}

/// h_k(t, t₀).
pub fn monomial_h(sys: &ShiftSystem, ts: &TimeScaleWindow, k: usize, t: f64, t0: f64, tol: f64) -> Result<f64> {
    Ok(monomials(sys, ts, k, t, t0, tol)?[k])
}

/// γᵢ(t) = (λᵢ^{[Θ(σ(t))−Θ(t)]/T} − 1)/μ(t), or (Θ'(t)/T)·Log λᵢ at right-dense t,
/// one per entry of `lambdas`.
pub fn paths_for(dec: &FloquetDecomposition, lambdas: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
    let ts = dec.window();
    let sys = dec.shifts();
    let j = ts.jump_info(t)?;
    if j.class == PointClass::RightScattered {
        let step = (sys.theta(j.sigma)? - sys.theta(j.t)?) / dec.period();
        return Ok(lambdas.iter().map(|l| ((l.ln() * step).exp() - 1.0) / j.mu).collect());
    }
    let rate = lambda_ratio(sys, ts, t)? / dec.period();
    Ok(lambdas.iter().map(|l| l.ln() * rate).collect())
}

/// Eigenvalue paths of R(t), repeated by algebraic multiplicity.
pub fn eigenvalue_paths(dec: &FloquetDecomposition, t: f64) -> Result<Vec<Complex64>> {
    let sd = dec.spectral();
    let lambdas: Vec<Complex64> = sd
        .eigenvalues
        .iter()
        .zip(&sd.multiplicities)
        .flat_map(|(l, &m)| std::iter::repeat_n(*l, m))
        .collect();
    paths_for(dec, &lambdas, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegressivityCertificate {
    pub theta_inv: f64,
    pub min_observed: f64,
    pub pass: bool,
}

/// Checks |1 + μ(t)γᵢ(t)| ≥ min{1, minᵢ|λᵢ|} − tol at every sample.
pub fn uniform_regressivity_certificate(dec: &FloquetDecomposition, samples: &[f64], tol: f64) -> Result<RegressivityCertificate> {
    let bound = dec.spectral().eigenvalues.iter().map(|l| l.norm()).fold(1.0, f64::min);
    let mut min_observed = f64::INFINITY;
    for &t in samples {
        let mu = dec.window().mu(t)?;
        for g in eigenvalue_paths(dec, t)? {
            min_observed = min_observed.min((1.0 + mu * g).norm());
        }
    }
    Ok(RegressivityCertificate { theta_inv: bound, min_observed, pass: min_observed >= bound - tol })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ExponentiallyStable,
    AsymptoticallyStable,
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multiplicity {
    pub multiplier: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenTrack {
    pub multiplier: Complex64,
    pub gamma: Vec<Complex64>,
    pub re_mu: Vec<f64>,
    /// min over samples of −Re_μγ/Λ.
    pub inf_statistic: f64,
    /// min over samples of −Re_μγ.
    pub eps_statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub horizon: [f64; 2],
    pub samples: Vec<f64>,
    pub lambda_ratio: Vec<f64>,
    pub tracks: Vec<EigenTrack>,
    pub multiplicities: Vec<Multiplicity>,
    pub certificate: RegressivityCertificate,
    pub verdict_theorem: Verdict,
    pub verdict_corollary: Verdict,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub horizon: f64,
    pub t_max: f64,
    pub sample_count: usize,
    pub eps_tol: f64,
    /// ε of the exponential condition; 0 disables the upgrade.
    pub epsilon: f64,
    /// Tolerance on multiplier moduli near 1.
    pub modulus_tol: f64,
}

impl ClassifyOptions {
    pub fn new(horizon: f64, t_max: f64) -> Self {
        ClassifyOptions { horizon, t_max, sample_count: 200, eps_tol: 1e-9, epsilon: 0.0, modulus_tol: 1e-8 }
    }
}

/// Geometric multiplicity n − rank(M − λI) at tolerance 1e-10·‖M‖.
pub fn geometric_multiplicity(m: &linalg::CMatrix, lambda: Complex64) -> usize {
    let n = m.nrows();
    let tol = 1e-10 * linalg::fro(m).max(1.0);
    n - linalg::rank(&(m - linalg::identity(n) * lambda), tol)
}

pub fn multiplicity_table(dec: &FloquetDecomposition) -> Vec<Multiplicity> {
    let sd = dec.spectral();
    sd.eigenvalues
        .iter()
        .zip(&sd.multiplicities)
        .map(|(&l, &m)| Multiplicity {
            multiplier: l,
            algebraic: m,
            geometric: geometric_multiplicity(dec.monodromy(), l).min(m),
        })
        .collect()
}

/// Sampled version of the exponent conditions on [H, t_max] and the
/// multiplier-modulus classification.
pub fn classify(dec: &FloquetDecomposition, opts: ClassifyOptions) -> Result<StabilityReport> {
    let ts = dec.window();
    let lo = opts.horizon.max(dec.t0());
    let samples: Vec<f64> = if opts.t_max >= lo {
        ts.sample_points(lo, opts.t_max, opts.sample_count)
            .into_iter()
            .filter(|&t| t >= lo || same_point(t, lo))
            .collect()
    } else {
        Vec::new()
    };
    if samples.is_empty() {
        return Err(Error::EmptyHorizon { h: opts.horizon, t_max: opts.t_max });
    }
    let lambdas = dec.spectral().eigenvalues.clone();
    let mut ratio = Vec::with_capacity(samples.len());
    let mut tracks: Vec<EigenTrack> = lambdas
        .iter()
        .map(|&l| EigenTrack {
            multiplier: l,
            gamma: Vec::new(),
            re_mu: Vec::new(),
            inf_statistic: f64::INFINITY,
            eps_statistic: f64::INFINITY,
        })
        .collect();
    for &t in &samples {
        let rate = lambda_ratio(dec.shifts(), ts, t)?;
        let mu = ts.mu(t)?;
        ratio.push(rate);
        for (track, g) in tracks.iter_mut().zip(paths_for(dec, &lambdas, t)?) {
            let r = re_mu(g, mu);
            if !(g.re.is_finite() && g.im.is_finite() && r.is_finite()) {
                return Err(Error::NonFiniteValue { t });
            }
            track.gamma.push(g);
            track.re_mu.push(r);
            track.inf_statistic = track.inf_statistic.min(-r / rate);
            track.eps_statistic = track.eps_statistic.min(-r);
        }
    }
    let multiplicities = multiplicity_table(dec);
    let certificate = uniform_regressivity_certificate(dec, &samples, opts.eps_tol.max(1e-12))?;

    let mut notes = vec![FINITE_HORIZON_LABEL.to_string()];
    let verdict_theorem = theorem_verdict(&tracks, &multiplicities, opts, &mut notes);
    let verdict_corollary = corollary_verdict(&multiplicities, opts.modulus_tol);
    if verdict_theorem != verdict_corollary {
        notes.push(format!(
            "verdicts disagree: exponent conditions give {verdict_theorem:?}, multiplier moduli give {verdict_corollary:?}"
        ));
    }
    if !certificate.pass {
        notes.push(format!(
            "uniform regressivity bound {} not met (observed {})",
            certificate.theta_inv, certificate.min_observed
        ));
    }
    Ok(StabilityReport {
        horizon: [lo, opts.t_max],
        samples,
        lambda_ratio: ratio,
        tracks,
        multiplicities,
        certificate,
        verdict_theorem,
        verdict_corollary,
        notes,
    })
}

fn theorem_verdict(tracks: &[EigenTrack], mult: &[Multiplicity], opts: ClassifyOptions, notes: &mut Vec<String>) -> Verdict {
    let inf = tracks.iter().map(|t| t.inf_statistic).fold(f64::INFINITY, f64::min);
    if inf > opts.eps_tol {
        let eps = tracks.iter().map(|t| t.eps_statistic).fold(f64::INFINITY, f64::min);
        if opts.epsilon > 0.0 && eps >= opts.epsilon {
            return Verdict::ExponentiallyStable;
        }
        if opts.epsilon > 0.0 {
            notes.push(format!("ε-condition fails: min −Re_μγ = {eps} < ε = {}", opts.epsilon));
        }
        return Verdict::AsymptoticallyStable;
    }
    if inf >= -opts.eps_tol {
        let defective_neutral = tracks.iter().zip(mult).any(|(t, m)| {
            t.re_mu.iter().any(|r| r.abs() <= opts.eps_tol) && m.geometric < m.algebraic
        });
        return if defective_neutral { Verdict::Unstable } else { Verdict::Stable };
    }
    if tracks.iter().any(|t| t.re_mu.iter().all(|&r| r > opts.eps_tol)) {
        return Verdict::Unstable;
    }
    Verdict::Inconclusive
}

fn corollary_verdict(mult: &[Multiplicity], tol: f64) -> Verdict {
    if mult.iter().any(|m| m.multiplier.norm() > 1.0 + tol) {
        return Verdict::Unstable;
    }
    if mult.iter().all(|m| m.multiplier.norm() < 1.0 - tol) {
        return Verdict::ExponentiallyStable;
    }
    let defective_unit = mult
        .iter()
        .any(|m| (m.multiplier.norm() - 1.0).abs() <= tol && m.geometric < m.algebraic);
    if defective_unit {
        Verdict::Unstable
    } else {
        Verdict::Stable
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, CMatrix, ONE};
    use crate::transition::MatrixFunction;

    fn scaled_inv_t(c: f64) -> MatrixFunction {
        MatrixFunction::new(2, move |t| Ok(CMatrix::from_diagonal_element(2, 2, ONE * (c / t))))
    }

    fn q_dec(c: f64) -> FloquetDecomposition {
        let ts = TimeScaleWindow::q_scale(2.0, 1.0, 1024.0).unwrap();
        let sys = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
        FloquetDecomposition::new(scaled_inv_t(c), ts, sys, 1e-12).unwrap()
    }

    #[test]
    fn lambda_ratio_examples() {
        let r = TimeScaleWindow::real(0.0, 10.0).unwrap();
        let add = ShiftSystem::additive(0.0, 2.0).unwrap();
        assert!((lambda_ratio(&add, &r, 3.3).unwrap() - 1.0).abs() < 1e-9);
        let q = TimeScaleWindow::q_scale(2.0, 1.0, 64.0).unwrap();
        let mul = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
        for t in [1.0, 4.0, 16.0] {
            assert!((lambda_ratio(&mul, &q, t).unwrap() - 2.0 / t).abs() < 1e-15);
        }
        let g = TimeScaleWindow::geometric_union(3.0, 2.0, 1.0, 100.0).unwrap();
        let mul3 = ShiftSystem::multiplicative(1.0, 3.0).unwrap();
        let t: f64 = 4.5;
        assert!((lambda_ratio(&mul3, &g, t).unwrap() - 9.0 / (t * t)).abs() < 1e-9);
    }

    #[test]
    fn monomial_examples() {
        let r = TimeScaleWindow::real(0.0, 10.0).unwrap();
        let add = ShiftSystem::additive(0.0, 2.0).unwrap();
        let h = monomials(&add, &r, 2, 3.0, 1.0, 1e-12).unwrap();
        assert_eq!(h[0], 1.0);
        assert!((h[1] - 2.0).abs() < 1e-10 && (h[2] - 2.0).abs() < 1e-10);
        let q = TimeScaleWindow::q_scale(2.0, 1.0, 1024.0).unwrap();
        let mul = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
        for n in 0..6 {
            let t = 2f64.powi(n);
            assert!((monomial_h(&mul, &q, 1, t, 1.0, 1e-12).unwrap() - 2.0 * n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn paths_match_r_eigenvalues() {
        let d = q_dec(1.0);
        for t in [1.0, 2.0, 8.0] {
            let p = eigenvalue_paths(&d, t).unwrap();
            assert!(p.iter().all(|g| (g - 1.0 / t).norm() < 1e-12));
            let eig = linalg::eigenvalues(&d.r(t).unwrap());
            assert!(linalg::multiset_distance(&p, &eig) < 1e-12);
        }
    }

    #[test]
    fn classify_examples() {
        let d = q_dec(1.0);
        let rep = classify(&d, ClassifyOptions::new(1.0, 1024.0)).unwrap();
        assert_eq!(rep.verdict_theorem, Verdict::Unstable);
        assert_eq!(rep.verdict_corollary, Verdict::Unstable);

        let d = q_dec(-0.5);
        let rep = classify(&d, ClassifyOptions::new(1.0, 1024.0)).unwrap();
        assert_eq!(rep.verdict_corollary, Verdict::ExponentiallyStable);
        assert_eq!(rep.verdict_theorem, Verdict::AsymptoticallyStable);
        assert!((rep.tracks[0].inf_statistic - 0.25).abs() < 1e-12);
        for (t, r) in rep.samples.iter().zip(&rep.tracks[0].re_mu) {
            assert!((-r - 0.5 / t).abs() < 1e-14);
        }
        assert!(rep.notes.iter().any(|n| n.contains("disagree")));
        assert!(rep.certificate.pass && (rep.certificate.theta_inv - 0.5).abs() < 1e-12);

        let ts = TimeScaleWindow::q_scale(2.0, 1.0, 64.0).unwrap();
        let sys = ShiftSystem::multiplicative(1.0, 2.0).unwrap();
        let zero = FloquetDecomposition::new(MatrixFunction::zero(2), ts, sys, 1e-12).unwrap();
        let rep = classify(&zero, ClassifyOptions::new(1.0, 64.0)).unwrap();
        assert_eq!(rep.verdict_theorem, Verdict::Stable);
        assert_eq!(rep.verdict_corollary, Verdict::Stable);
        assert!(rep.certificate.pass && rep.certificate.theta_inv == 1.0);
        assert!(matches!(classify(&zero, ClassifyOptions::new(100.0, 64.0)), Err(Error::EmptyHorizon { .. })));
    }

    #[test]
    fn defective_unit_multiplier_is_unstable() {
        let z = TimeScaleWindow::integer(0.0, 40.0).unwrap();
        let sys = ShiftSystem::additive(0.0, 1.0).unwrap();
        let a = MatrixFunction::constant(CMatrix::from_row_slice(2, 2, &[ONE * 0.0, ONE, ONE * 0.0, ONE * 0.0]));
        let d = FloquetDecomposition::new(a, z, sys, 1e-12).unwrap();
        assert!(linalg::fro(&(d.monodromy() - (identity(2) + CMatrix::from_row_slice(2, 2, &[ONE * 0.0, ONE, ONE * 0.0, ONE * 0.0])))) < 1e-15);
        let rep = classify(&d, ClassifyOptions::new(0.0, 39.0)).unwrap();
        assert_eq!(rep.multiplicities[0].algebraic, 2);
        assert_eq!(rep.multiplicities[0].geometric, 1);
        assert_eq!(rep.verdict_corollary, Verdict::Unstable);
        assert_eq!(rep.verdict_theorem, Verdict::Unstable);
    }
}
