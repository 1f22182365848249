//! End-to-end pipeline behind the `floquet` binary: config in, JSON report
//! and CSV sample tracks out.

pub mod config;

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::floquet::{self, DecompositionResiduals, FloquetDecomposition};
use crate::linalg::{CMatrix, CVector};
use crate::shifts::{PeriodicityMode, PeriodicityReport};
use crate::stability::{self, ClassifyOptions, StabilityReport};
use crate::timescale::same_point;

pub use config::{AnalysisConfig, Built, Tolerances};

pub const SCHEMA_VERSION: &str = "1.0.0";

/// Process exit codes of the binary.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const PERIODICITY: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

/// Maps an error to its exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Config(_)
        | Error::Io(_)
        | Error::SyntaxError { .. }
        | Error::UnknownFunction { .. }
        | Error::UnboundVariable { .. } => exit::CONFIG,
        Error::Periodicity(_) => exit::PERIODICITY,
        _ => exit::NUMERIC,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub scale: PeriodicityReport,
    #[serde(rename = "A")]
    pub a: PeriodicityReport,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<PeriodicityReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixJson {
    fn from(m: &CMatrix) -> Self {
        let rows = |f: fn(&Complex64) -> f64| (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect();
        MatrixJson { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentJson {
    pub multiplier: Complex64,
    pub gamma0: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeriodicSolutionJson {
    pub exists: bool,
    pub x0: Option<Vec<Complex64>>,
    /// max ‖x(δ₊^T(t)) − x(t)‖ over samples.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NonhomogeneousStatus {
    Solved,
    Resonant,
    NotPeriodic,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonhomogeneousJson {
    pub status: NonhomogeneousStatus,
    pub x0: Option<Vec<Complex64>>,
    /// ‖x(t₁) − x₀‖ after one period.
    pub residual: Option<f64>,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScaleInfo {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub window: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiftInfo {
    pub kind: String,
    pub t0: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub t1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryJson {
    pub x0: Vec<f64>,
    pub t: f64,
    pub x: Vec<Complex64>,
}

/// One CSV row.
#[derive(Debug, Clone)]
pub struct SampleRow {
    pub t: f64,
    pub sigma: f64,
    pub mu: f64,
    pub theta: f64,
    pub phi: CMatrix,
    pub e_r: CMatrix,
    pub l: CMatrix,
    pub re_mu: Vec<f64>,
    pub lambda_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema_version: &'static str,
    pub timescale: ScaleInfo,
    pub shifts: ShiftInfo,
    pub verification: VerificationReport,
    pub monodromy: MatrixJson,
    pub multipliers: Vec<Complex64>,
    pub exponents: Vec<ExponentJson>,
    pub decomposition_residuals: DecompositionResiduals,
    pub periodic_solution: PeriodicSolutionJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonhomogeneous: Option<NonhomogeneousJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryJson>,
    pub stability: StabilityReport,
    #[serde(skip)]
    pub rows: Vec<SampleRow>,
}

/// A config whose objects have been built and whose tolerances are final.
#[derive(Debug)]
pub struct Prepared {
    pub config: AnalysisConfig,
    pub built: Built,
}

impl Prepared {
    pub fn new(config: AnalysisConfig) -> Result<Self> {
        let built = config.build()?;
        Ok(Prepared { config, built })
    }

    fn tol(&self) -> Tolerances {
        self.config.analysis.tolerances
    }

    /// Periodicity of the scale, Δ-periodicity of A and of F.
    pub fn verify(&self) -> VerificationReport {
        let b = &self.built;
        let tol = self.tol().periodicity;
        let samples = b.window.sample_points(b.window.min(), b.window.max(), self.config.analysis.verify_samples);
        let scale = b.shifts.verify_scale(&b.window, &samples, tol);
        let a_fn = |t: f64| b.a.eval(t);
        let a = b.shifts.verify_periodicity(&b.window, Some(&a_fn), PeriodicityMode::DeltaFunction, &samples, tol);
        let f = b.f.as_ref().map(|f| {
            let f_fn = |t: f64| f.eval(t);
            b.shifts.verify_periodicity(&b.window, Some(&f_fn), PeriodicityMode::DeltaFunction, &samples, tol)
        });
        VerificationReport { pass: scale.pass && a.pass, scale, a, f }
    }

    /// Full pipeline; fails with `Periodicity` when the scale or A fails verification.
    pub fn analyze(&self) -> Result<AnalysisReport> {
        let verification = self.verify();
        if !verification.pass {
            let count = verification.scale.violations.len() + verification.a.violations.len();
            return Err(Error::Periodicity(format!("{count} periodicity violations")));
        }
        self.analyze_verified(verification)
    }

    pub fn analyze_verified(&self, verification: VerificationReport) -> Result<AnalysisReport> {
        let b = &self.built;
        let tol = self.tol();
        let settings = &self.config.analysis;
        let dec = FloquetDecomposition::new(b.a.clone(), b.window.clone(), b.shifts.clone(), tol.ode)
            .map_err(|e| e.context("floquet decomposition"))?;
        let t0 = dec.t0();

        let samples = b.window.sample_points(t0, b.t_max, settings.samples);
        let residuals = dec.residuals(&samples).map_err(|e| e.context("decomposition residuals"))?;

        let mut exponents = Vec::new();
        for ex in dec.exponents().map_err(|e| e.context("floquet exponents"))? {
            let v = ex.exp(&b.window, dec.t1(), t0, tol.quadrature)?;
            exponents.push(ExponentJson { multiplier: ex.multiplier, gamma0: ex.gamma0, residual: (v - ex.multiplier).norm() });
        }

        let periodic = dec.homogeneous_periodic_solution(tol.eigen)?;
        let periodic_solution = match &periodic.x0 {
            Some(x0) => PeriodicSolutionJson {
                exists: true,
                x0: Some(x0.iter().copied().collect()),
                residual: Some(self.periodic_residual(&dec, x0, &samples)?),
            },
            None => PeriodicSolutionJson { exists: false, x0: None, residual: None },
        };

        let nonhomogeneous = match (&b.f, &verification.f) {
            (Some(_), Some(rep)) if !rep.pass => Some(NonhomogeneousJson {
                status: NonhomogeneousStatus::NotPeriodic,
                x0: None,
                residual: None,
                detail: Some(format!("F failed the Δ-periodicity check with {} violations", rep.violations.len())),
            }),
            (Some(f), _) => Some(
                match floquet::nonhomogeneous_periodic_state(&b.a, f, &b.window, &b.shifts, tol.ode, tol.resonance) {
                    Ok(x0) => {
                        let x1 = floquet::forced_solution(&b.a, f, &b.window, t0, &x0, dec.t1(), tol.ode)?;
                        NonhomogeneousJson {
                            status: NonhomogeneousStatus::Solved,
                            residual: Some((x1 - &x0).norm()),
                            x0: Some(x0.iter().copied().collect()),
                            detail: None,
                        }
                    }
                    Err(Error::ResonantSystem { det }) => NonhomogeneousJson {
                        status: NonhomogeneousStatus::Resonant,
                        x0: None,
                        residual: None,
                        detail: Some(format!("|det(I − M)| = {det:e}; a homogeneous periodic solution exists")),
                    },
                    Err(e) => return Err(e.context("nonhomogeneous periodic state")),
                },
            ),
            (None, _) => None,
        };

        let trajectory = match &b.x0 {
            Some(x0) => {
                let x0c: CVector = CVector::from_iterator(x0.len(), x0.iter().map(|v| Complex64::new(*v, 0.0)));
                let x = match &b.f {
                    Some(f) => floquet::forced_solution(&b.a, f, &b.window, t0, &x0c, b.t_max, tol.ode)?,
                    None => dec.solution(&x0c, b.t_max)?,
                };
                Some(TrajectoryJson { x0: x0.clone(), t: b.t_max, x: x.iter().copied().collect() })
            }
            None => None,
        };

        let opts = ClassifyOptions {
            horizon: b.horizon,
            t_max: b.t_max,
            sample_count: settings.samples,
            eps_tol: tol.eps_tol,
            epsilon: tol.epsilon,
            modulus_tol: tol.eigen,
        };
        let stability = stability::classify(&dec, opts).map_err(|e| e.context("stability"))?;
        let rows = sample_rows(&dec, &samples).map_err(|e| e.context("sample tracks"))?;

        Ok(AnalysisReport {
            schema_version: SCHEMA_VERSION,
            timescale: ScaleInfo {
                name: b.window.name().to_string(),
                params: b.window.params().clone(),
                window: [b.window.min(), b.window.max()],
            },
            shifts: ShiftInfo { kind: b.shifts.kind().name().to_string(), t0, period: dec.period(), t1: dec.t1() },
            verification,
            monodromy: MatrixJson::from(dec.monodromy()),
            multipliers: dec.multipliers().to_vec(),
            exponents,
            decomposition_residuals: residuals,
            periodic_solution,
            nonhomogeneous,
            trajectory,
            stability,
            rows,
        })
    }

    fn periodic_residual(&self, dec: &FloquetDecomposition, x0: &CVector, samples: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in samples {
            let next = match dec.shifts().forward(dec.period(), t) {
                Ok(v) if v < dec.window().max() && !same_point(v, dec.window().max()) => v,
                _ => continue,
            };
            worst = worst.max((dec.solution(x0, next)? - dec.solution(x0, t)?).norm());
        }
        Ok(worst)
    }
}

fn sample_rows(dec: &FloquetDecomposition, samples: &[f64]) -> Result<Vec<SampleRow>> {
    let lambdas = dec.spectral().eigenvalues.clone();
    samples
        .iter()
        .map(|&t| {
            let j = dec.window().jump_info(t)?;
            let phi = dec.phi(t)?;
            let e_r = dec.exponential(t)?;
            let l = &phi * dec.exponential_inverse(t)?;
            let gammas = stability::paths_for(dec, &lambdas, t)?;
            Ok(SampleRow {
                t: j.t,
                sigma: j.sigma,
                mu: j.mu,
                theta: dec.shifts().theta(j.t)?,
                phi,
                e_r,
                l,
                re_mu: gammas.iter().map(|g| crate::hilger::re_mu(*g, j.mu)).collect(),
                lambda_ratio: stability::lambda_ratio(dec.shifts(), dec.window(), t)?,
            })
        })
        .collect()
}

/// Reads, overrides and runs a config in one call.
pub fn run_analysis(config: AnalysisConfig) -> Result<AnalysisReport> {
    Prepared::new(config)?.analyze()
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn matrix_headers(prefix: &str, n: usize, out: &mut Vec<String>) {
    for i in 0..n {
        for j in 0..n {
            out.push(format!("{prefix}_{i}{j}_re"));
            out.push(format!("{prefix}_{i}{j}_im"));
        }
    }
}

fn matrix_cells(m: &CMatrix, out: &mut Vec<String>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)].re.to_string());
            out.push(m[(i, j)].im.to_string());
        }
    }
}

/// Writes the sample tracks as CSV.
pub fn emit_samples<W: std::io::Write>(report: &AnalysisReport, out: W) -> Result<()> {
    let n = report.monodromy.re.len();
    let k = report.stability.tracks.len();
    let mut header: Vec<String> = ["t", "sigma", "mu", "theta"].iter().map(|s| s.to_string()).collect();
    matrix_headers("phi", n, &mut header);
    matrix_headers("e_r", n, &mut header);
    matrix_headers("l", n, &mut header);
    for i in 0..k {
        header.push(format!("re_mu_{i}"));
    }
    header.push("lambda_ratio".into());
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(io)?;
    for row in &report.rows {
        let mut rec = vec![row.t.to_string(), row.sigma.to_string(), row.mu.to_string(), row.theta.to_string()];
        matrix_cells(&row.phi, &mut rec);
        matrix_cells(&row.e_r, &mut rec);
        matrix_cells(&row.l, &mut rec);
        rec.extend(row.re_mu.iter().map(|v| v.to_string()));
        rec.push(row.lambda_ratio.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_samples(report: &AnalysisReport, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    emit_samples(report, std::io::BufWriter::new(file))
}
