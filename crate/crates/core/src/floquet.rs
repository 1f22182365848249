//! Monodromy, the Floquet decomposition Φ_A(t,t₀) = L(t)·e_R(t,t₀),
//! Floquet exponents and periodic solutions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, identity, CMatrix, CVector};
use crate::matpow::{self, ClusterOptions, SpectralData};
use crate::shifts::ShiftSystem;
use crate::timescale::{Piece, PointClass, TimeScaleWindow, SNAP};
use crate::transition::{variation_of_constants, MatrixFunction, Propagator, VectorFunction};

pub const DEFAULT_RESONANCE_TOL: f64 = 1e-8;

/// M = Φ_A(δ₊^T(t₀), t₀) and its eigenvalues.
pub fn monodromy(a: &MatrixFunction, ts: &TimeScaleWindow, sys: &ShiftSystem, tol: f64) -> Result<(CMatrix, Vec<Complex64>)> {
    let t0 = sys.t0();
    let t1 = sys.t1()?;
    let m = crate::transition::transition_matrix(a, ts, t1, t0, tol)?;
    let mult = checked_multipliers(&m)?;
    Ok((m, mult))
}

fn checked_multipliers(m: &CMatrix) -> Result<Vec<Complex64>> {
    let mult = linalg::eigenvalues(m);
    if let Some(z) = mult.iter().find(|z| z.norm() < SNAP) {
        return Err(Error::DegenerateMultiplier { modulus: z.norm() });
    }
    Ok(mult)
}

/// Constant exponent γ₀ shifted by the Hilger imaginary i°ω, ω = 2πk/(t₁ − t₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent {
    pub multiplier: Complex64,
    pub gamma0: Complex64,
    pub branch: i64,
    pub omega: f64,
    /// Whether −π/μ < ω ≤ π/μ at every scattered point of the period.
    pub in_strip: bool,
}

impl Exponent {
    /// γ(t) = γ₀ ⊕ i°ω at graininess μ, i.e. (e^{iωμ}(1 + μγ₀) − 1)/μ.
    pub fn value(&self, mu: f64) -> Complex64 {
        if mu == 0.0 {
            self.gamma0 + Complex64::new(0.0, self.omega)
        } else {
            (Complex64::new(0.0, self.omega * mu).exp() * (1.0 + mu * self.gamma0) - 1.0) / mu
        }
    }

    /// e_γ(t, s).
    pub fn exp(&self, ts: &TimeScaleWindow, t: f64, s: f64, tol: f64) -> Result<Complex64> {
        let p = |x: f64| Ok(self.value(ts.mu(x)?));
        crate::hilger::scalar_exp(&p, ts, t, s, tol)
    }
}

/// Exponent γ with e_γ(t₁, t₀) = λ, t₁ = δ₊^T(t₀), on branch k.
pub fn exponent_from_multiplier(lambda: Complex64, sys: &ShiftSystem, ts: &TimeScaleWindow, k: i64) -> Result<Exponent> {
    if !(lambda.norm() > SNAP) {
        return Err(Error::DegenerateMultiplier { modulus: lambda.norm() });
    }
    let t0 = ts.snap(sys.t0())?;
    let t1 = ts.snap(sys.t1()?)?;
    let mut jumps = Vec::new();
    let mut dense = 0.0;
    for piece in ts.pieces(t0, t1) {
        match piece {
            Piece::Jump(_, mu) => jumps.push(mu),
            Piece::Dense(a, b) => dense += b - a,
        }
    }
    let gamma0 = solve_exponent(lambda, &jumps, dense, t1 - t0)?;
    for (&mu, s) in jumps.iter().zip(ts.scattered_points(t0, t1)) {
        let z = (1.0 + mu * gamma0).norm();
        if !(z > SNAP) {
            return Err(Error::RegressivityViolation { t: s, modulus: z });
        }
    }
    let omega = 2.0 * std::f64::consts::PI * k as f64 / (t1 - t0);
    let pi = std::f64::consts::PI;
    let in_strip = jumps.iter().all(|&mu| omega > -pi / mu && omega <= pi / mu);
    Ok(Exponent { multiplier: lambda, gamma0, branch: k, omega, in_strip })
}

/// Damped Newton on G(γ) = Σ Log(1+μⱼγ) + γD − Log λ modulo 2πi, with
/// continuation along λ^s, s ∈ (0,1], as the fallback.
fn solve_exponent(lambda: Complex64, jumps: &[f64], dense: f64, span: f64) -> Result<Complex64> {
    let guess = (lambda - 1.0) / span;
    match newton(lambda, jumps, dense, guess) {
        Ok(g) => Ok(g),
        Err(_) => {
            let log = lambda.ln();
            let mut g = Complex64::new(0.0, 0.0);
            let steps = 64;
            for i in 1..=steps {
                let target = (log * (i as f64 / steps as f64)).exp();
                g = newton(target, jumps, dense, g)?;
            }
            Ok(g)
        }
    }
}

fn residual(lambda: Complex64, jumps: &[f64], dense: f64, g: Complex64) -> Option<(Complex64, Complex64)> {
    let mut val = g * dense - lambda.ln();
    let mut der = Complex64::new(dense, 0.0);
    for &mu in jumps {
        let z = 1.0 + mu * g;
        if !(z.norm() > SNAP) {
            return None;
        }
        val += z.ln();
        der += mu / z;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    val.im -= two_pi * (val.im / two_pi).round();
    Some((val, der))
}

fn newton(lambda: Complex64, jumps: &[f64], dense: f64, start: Complex64) -> Result<Complex64> {
    let mut g = start;
    let (mut r, mut d) = residual(lambda, jumps, dense, g).ok_or(Error::RootFindFailure { residual: f64::INFINITY })?;
    for _ in 0..200 {
        if r.norm() <= 1e-15 {
            return Ok(g);
        }
        if d.norm() == 0.0 {
            break;
        }
        let step = r / d;
        let mut damp = 1.0;
        let mut accepted = false;
        while damp > 1e-6 {
            let cand = g - step * damp;
            if let Some((rc, dc)) = residual(lambda, jumps, dense, cand) {
                if rc.norm() < r.norm() {
                    g = cand;
                    r = rc;
                    d = dc;
                    accepted = true;
                    break;
                }
            }
            damp *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if r.norm() <= 1e-12 {
        Ok(g)
    } else {
        Err(Error::RootFindFailure { residual: r.norm() })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize)]
pub struct DecompositionResiduals {
    /// max ‖Φ − L·e_R‖/max(1,‖Φ‖).
    pub decomposition: f64,
    /// max ‖L(δ₊^T(t)) − L(t)‖/max(1,‖L(t)‖) over samples whose image is in the window.
    pub l_periodicity: f64,
    /// ‖e_R(t₁,t₀) − M‖/max(1,‖M‖).
    pub monodromy: f64,
    /// Bounds on L over the samples.
    pub l_norm_max: f64,
    pub l_det_min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSolution {
    pub exists: bool,
    pub x0: Option<CVector>,
}

/// Floquet data of x^Δ = A(t)x for an A that is Δ-periodic in shifts.
#[derive(Debug)]
pub struct FloquetDecomposition {
    sys: ShiftSystem,
    prop: Propagator,
    t1: f64,
    tol: f64,
    monodromy: CMatrix,
    multipliers: Vec<Complex64>,
    spectral: SpectralData,
    log_m: CMatrix,
}

impl FloquetDecomposition {
    pub fn new(a: MatrixFunction, ts: TimeScaleWindow, sys: ShiftSystem, tol: f64) -> Result<Self> {
        Self::with_clustering(a, ts, sys, tol, ClusterOptions::default())
    }

    pub fn with_clustering(a: MatrixFunction, ts: TimeScaleWindow, sys: ShiftSystem, tol: f64, opts: ClusterOptions) -> Result<Self> {
        let t0 = ts.snap(sys.t0())?;
        let t1 = ts.snap(sys.t1()?)?;
        let prop = Propagator::new(a, ts, t0, tol)?;
        let monodromy = prop.phi(t1)?;
        let multipliers = checked_multipliers(&monodromy)?;
        let spectral = matpow::spectral_decompose_with(&monodromy, opts)?;
        let log_m = spectral.log();
        Ok(FloquetDecomposition { sys, prop, t1, tol, monodromy, multipliers, spectral, log_m })
    }

    pub fn monodromy(&self) -> &CMatrix {
        &self.monodromy
    }

    /// Eigenvalues of M, repeated by multiplicity.
    pub fn multipliers(&self) -> &[Complex64] {
        &self.multipliers
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn log_monodromy(&self) -> &CMatrix {
        &self.log_m
    }

    pub fn shifts(&self) -> &ShiftSystem {
        &self.sys
    }

    pub fn window(&self) -> &TimeScaleWindow {
        self.prop.window()
    }

    pub fn matrix(&self) -> &MatrixFunction {
        self.prop.matrix()
    }

    pub fn dim(&self) -> usize {
        self.monodromy.nrows()
    }

    pub fn t0(&self) -> f64 {
        self.prop.t0()
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn period(&self) -> f64 {
        self.sys.period()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Φ_A(t, t₀).
    pub fn phi(&self, t: f64) -> Result<CMatrix> {
        self.prop.phi(t)
    }

    /// Θ(t)/T.
    pub fn clock(&self, t: f64) -> Result<f64> {
        Ok(self.sys.theta(t)? / self.period())
    }

    /// e_R(t, t₀) = M^{Θ(t)/T}.
    pub fn exponential(&self, t: f64) -> Result<CMatrix> {
        let t = self.window().snap(t)?;
        Ok(self.spectral.power(self.clock(t)?))
    }

    /// e_R(t, t₀)⁻¹ = M^{−Θ(t)/T}.
    pub fn exponential_inverse(&self, t: f64) -> Result<CMatrix> {
        let t = self.window().snap(t)?;
        Ok(self.spectral.power(-self.clock(t)?))
    }

    /// R(t): (M^{[Θ(σ(t))−Θ(t)]/T} − I)/μ at right-scattered t, (Θ'(t)/T)·Log M otherwise.
    pub fn r(&self, t: f64) -> Result<CMatrix> {
        let j = self.window().jump_info(t)?;
        if j.class == PointClass::RightScattered {
            let step = (self.sys.theta(j.sigma)? - self.sys.theta(j.t)?) / self.period();
            let n = self.dim();
            return Ok((self.spectral.power(step) - identity(n)) / Complex64::new(j.mu, 0.0));
        }
        if j.at_edge && self.window().cells().last().is_some_and(|c| c.is_point()) {
            return Err(Error::WindowEdge { t });
        }
        let rate = self.sys.theta_derivative(j.t)? / self.period();
        Ok(&self.log_m * Complex64::new(rate, 0.0))
    }

    /// L(t) = Φ_A(t, t₀)·e_R(t, t₀)⁻¹.
    pub fn lyapunov(&self, t: f64) -> Result<CMatrix> {
        Ok(self.phi(t)? * self.exponential_inverse(t)?)
    }

    /// Exponents on the principal branch, one per distinct multiplier cluster.
    pub fn exponents(&self) -> Result<Vec<Exponent>> {
        self.spectral
            .eigenvalues
            .iter()
            .map(|&l| exponent_from_multiplier(l, &self.sys, self.window(), 0))
            .collect()
    }

    pub fn exponent(&self, lambda: Complex64, k: i64) -> Result<Exponent> {
        exponent_from_multiplier(lambda, &self.sys, self.window(), k)
    }

    /// Residuals of the decomposition at `samples` (points ≥ t₀).
    pub fn residuals(&self, samples: &[f64]) -> Result<DecompositionResiduals> {
        let mut res = DecompositionResiduals { l_det_min: f64::INFINITY, ..Default::default() };
        let er1 = self.exponential(self.t1)?;
        res.monodromy = linalg::fro(&(er1 - &self.monodromy)) / linalg::fro(&self.monodromy).max(1.0);
        let period = self.period();
        for &t in samples {
            let phi = self.phi(t)?;
            let er = self.exponential(t)?;
            let l = &phi * self.exponential_inverse(t)?;
            res.decomposition = res.decomposition.max(linalg::fro(&(&phi - &l * &er)) / linalg::fro(&phi).max(1.0));
            res.l_norm_max = res.l_norm_max.max(linalg::fro(&l));
            res.l_det_min = res.l_det_min.min(l.clone().determinant().norm());
            if let Ok(next) = self.sys.forward(period, t) {
                if self.window().contains(next) && !crate::timescale::same_point(next, self.window().max()) {
                    let ln = self.lyapunov(next)?;
                    res.l_periodicity = res.l_periodicity.max(linalg::fro(&(ln - &l)) / linalg::fro(&l).max(1.0));
                }
            }
        }
        if samples.is_empty() {
            res.l_det_min = 0.0;
        }
        Ok(res)
    }

    /// A T-periodic solution exists iff some multiplier equals 1; x₀ = L(t₀)z₀ with Mz₀ = z₀.
    pub fn homogeneous_periodic_solution(&self, tol: f64) -> Result<PeriodicSolution> {
        if !self.multipliers.iter().any(|l| (l - 1.0).norm() < tol) {
            return Ok(PeriodicSolution { exists: false, x0: None });
        }
        let n = self.dim();
        let z0 = linalg::null_vector(&(&self.monodromy - identity(n)));
        let x0 = self.lyapunov(self.t0())? * z0;
        Ok(PeriodicSolution { exists: true, x0: Some(x0) })
    }

    /// x(t) = Φ_A(t, t₀)x₀.
    pub fn solution(&self, x0: &CVector, t: f64) -> Result<CVector> {
        Ok(self.phi(t)? * x0)
    }

    /// Unit eigenvector of M for the multiplier closest to `lambda`.
    pub fn eigenvector(&self, lambda: Complex64) -> CVector {
        linalg::null_vector(&(&self.monodromy - identity(self.dim()) * lambda))
    }

    /// e_{γ}(t, t₀) = λ^{Θ(t)/T} for the eigenvalue path γ of R belonging to λ.
    pub fn path_exponential(&self, lambda: Complex64, t: f64) -> Result<Complex64> {
        Ok((lambda.ln() * self.clock(t)?).exp())
    }

    /// Bloch solution x(t) = e_γ(t,t₀)·L(t)u with Mu = λu.
    pub fn bloch_solution(&self, lambda: Complex64, u: &CVector, t: f64) -> Result<CVector> {
        Ok(self.lyapunov(t)? * u * self.path_exponential(lambda, t)?)
    }
}

/// x₀ = [I − M]⁻¹ ∫_{t₀}^{t₁} Φ_A(t₁, σ(s))F(s) Δs, the initial state of the
/// unique T-periodic solution of x^Δ = A x + F.
pub fn nonhomogeneous_periodic_state(
    a: &MatrixFunction,
    f: &VectorFunction,
    ts: &TimeScaleWindow,
    sys: &ShiftSystem,
    tol: f64,
    resonance_tol: f64,
) -> Result<CVector> {
    let n = a.dim();
    if f.dim() != n {
        return Err(Error::Config(format!("forcing has length {} but the system has dimension {n}", f.dim())));
    }
    let t0 = ts.snap(sys.t0())?;
    let t1 = ts.snap(sys.t1()?)?;
    let (m, _) = monodromy(a, ts, sys, tol)?;
    let i_m = identity(n) - &m;
    let det = i_m.clone().determinant();
    if det.norm() < resonance_tol {
        return Err(Error::ResonantSystem { det: det.norm() });
    }
    let forced = variation_of_constants(a, f, ts, t1, t0, &CVector::zeros(n), tol)?;
    i_m.lu().solve(&forced).ok_or(Error::ResonantSystem { det: det.norm() })
}

/// Solution of x^Δ = A x + F from x(t₀) = x₀.
pub fn forced_solution(a: &MatrixFunction, f: &VectorFunction, ts: &TimeScaleWindow, t0: f64, x0: &CVector, t: f64, tol: f64) -> Result<CVector> {
    variation_of_constants(a, f, ts, t, t0, x0, tol)
}
