//! Real and complex powers, and the principal logarithm, of a nonsingular
//! matrix via spectral projections.
//!
//! With distinct eigenvalues λᵢ of algebraic multiplicity mᵢ, the
//! projections are Pᵢ = aᵢ(M)·bᵢ(M), where bᵢ(λ) = Π_{j≠i}(λ − λⱼ)^{mⱼ} and
//! aᵢ is the Taylor polynomial of 1/bᵢ about λᵢ of degree mᵢ − 1. Then
//!
//! M^r = Σᵢ Pᵢ λᵢ^r Σ_{j<mᵢ} C(r, j) ((M − λᵢI)/λᵢ)^j
//!
//! where C(r, j) = r(r−1)…(r−j+1)/j! and λᵢ^r uses the principal branch.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, identity, CMatrix, ONE, ZERO};
use crate::timescale::SNAP;

#[derive(Debug, Clone, Copy)]
pub struct ClusterOptions {
    /// Eigenvalues closer than `merge·‖M‖` are one cluster.
    pub merge: f64,
    /// Clusters closer than `ambiguous·‖M‖` cannot be told apart reliably.
    pub ambiguous: f64,
    /// Fail with `ClusteringAmbiguous` instead of merging.
    pub strict: bool,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions { merge: 1e-8, ambiguous: 1e-5, strict: false }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralData {
    matrix: CMatrix,
    pub eigenvalues: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
    pub projections: Vec<CMatrix>,
    pub logs: Vec<Complex64>,
    /// Set when ambiguous clusters were merged into one.
    pub merged_ambiguous: bool,
}

pub fn spectral_decompose(m: &CMatrix) -> Result<SpectralData> {
    spectral_decompose_with(m, ClusterOptions::default())
}

pub fn spectral_decompose_with(m: &CMatrix, opts: ClusterOptions) -> Result<SpectralData> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Config("spectral decomposition needs a nonempty square matrix".into()));
    }
    let scale = linalg::fro(m);
    let det = m.clone().determinant().norm();
    if !(det > SNAP * scale.max(1.0).powi(n as i32)) {
        return Err(Error::SingularMatrix { det });
    }
    let raw = linalg::eigenvalues(m);
    let (groups, merged_ambiguous) = cluster(&raw, scale, opts)?;

    let eigenvalues: Vec<Complex64> = groups
        .iter()
        .map(|g| g.iter().map(|&k| raw[k]).sum::<Complex64>() / g.len() as f64)
        .collect();
    let multiplicities: Vec<usize> = groups.iter().map(Vec::len).collect();
    if let Some(z) = eigenvalues.iter().find(|z| z.norm() <= SNAP * scale.max(1.0)) {
        return Err(Error::SingularMatrix { det: z.norm() });
    }

    let mut projections = Vec::with_capacity(eigenvalues.len());
    for i in 0..eigenvalues.len() {
        projections.push(projection(m, &eigenvalues, &multiplicities, i));
    }
    let logs = eigenvalues.iter().map(|z| z.ln()).collect();
    Ok(SpectralData { matrix: m.clone(), eigenvalues, multiplicities, projections, logs, merged_ambiguous })
}

fn cluster(raw: &[Complex64], scale: f64, opts: ClusterOptions) -> Result<(Vec<Vec<usize>>, bool)> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let next = p[y];
            p[y] = r;
            y = next;
        }
        r
    }
    let merge_tol = opts.merge * scale;
    for i in 0..n {
        for j in i + 1..n {
            if (raw[i] - raw[j]).norm() <= merge_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    // Second pass: clusters closer than the ambiguity band.
    let amb_tol = opts.ambiguous * scale;
    let mut merged = false;
    for i in 0..n {
        for j in i + 1..n {
            let d = (raw[i] - raw[j]).norm();
            if d > merge_tol && d <= amb_tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    if opts.strict {
                        return Err(Error::ClusteringAmbiguous { separation: d });
                    }
                    parent[a] = b;
                    merged = true;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    Ok((groups, merged))
}

/// Taylor coefficients of 1/bᵢ about λᵢ up to degree mᵢ − 1, evaluated at M and
/// multiplied by bᵢ(M).
fn projection(m: &CMatrix, lambdas: &[Complex64], mults: &[usize], i: usize) -> CMatrix {
    let n = m.nrows();
    let deg = mults[i];
    // Series of Π_{j≠i} (dⱼ + x)^{−mⱼ}, dⱼ = λᵢ − λⱼ, truncated at x^{deg−1}.
    let mut coeffs = vec![ZERO; deg];
    coeffs[0] = ONE;
    for (j, (&lj, &mj)) in lambdas.iter().zip(mults).enumerate() {
        if j == i {
            continue;
        }
        let d = lambdas[i] - lj;
        // (d + x)^{−m} = d^{−m} Σ_k C(−m, k) (x/d)^k
        let mut factor = vec![ZERO; deg];
        let mut c = d.powi(-(mj as i32));
        for (k, slot) in factor.iter_mut().enumerate() {
            *slot = c;
            c = c * (-(mj as f64) - k as f64) / ((k + 1) as f64) / d;
        }
        let mut next = vec![ZERO; deg];
        for (p, &cp) in coeffs.iter().enumerate() {
            for (q, &fq) in factor.iter().enumerate().take(deg - p) {
                next[p + q] += cp * fq;
            }
        }
        coeffs = next;
    }
    let shifted = m - identity(n) * lambdas[i];
    let mut a = CMatrix::zeros(n, n);
    let mut pow = identity(n);
    for &c in &coeffs {
        a += &pow * c;
        pow = &pow * &shifted;
    }
    let mut b = identity(n);
    for (j, (&lj, &mj)) in lambdas.iter().zip(mults).enumerate() {
        if j != i {
            let f = m - identity(n) * lj;
            for _ in 0..mj {
                b = &b * &f;
            }
        }
    }
    a * b
}

/// C(z, j) = z(z−1)…(z−j+1)/j!, finite for every z.
pub fn falling_binomial(z: Complex64, j: usize) -> Complex64 {
    let mut c = ONE;
    for k in 0..j {
        c = c * (z - k as f64) / (k + 1) as f64;
    }
    c
}

impl SpectralData {
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// (M − λᵢI)/λᵢ.
    fn nilpotent(&self, i: usize) -> CMatrix {
        (&self.matrix - identity(self.dim()) * self.eigenvalues[i]) / self.eigenvalues[i]
    }

    /// M^z on the principal branch.
    pub fn power_complex(&self, z: Complex64) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..self.eigenvalues.len() {
            let lam_z = (z * self.logs[i]).exp();
            let nil = self.nilpotent(i);
            let mut series = identity(n);
            let mut pow = identity(n);
            for j in 1..self.multiplicities[i] {
                pow = &pow * &nil;
                series += &pow * falling_binomial(z, j);
            }
            out += &self.projections[i] * series * lam_z;
        }
        out
    }

    pub fn power(&self, r: f64) -> CMatrix {
        if r == 0.0 {
            return identity(self.dim());
        }
        self.power_complex(Complex64::new(r, 0.0))
    }

    /// Principal matrix logarithm Σᵢ Pᵢ[Log λᵢ I + Σ_{j=1}^{mᵢ−1} (−1)^{j+1}/j Nᵢ^j].
    pub fn log(&self) -> CMatrix {
        let n = self.dim();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..self.eigenvalues.len() {
            let nil = self.nilpotent(i);
            let mut series = identity(n) * self.logs[i];
            let mut pow = identity(n);
            for j in 1..self.multiplicities[i] {
                pow = &pow * &nil;
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                series += &pow * Complex64::new(sign / j as f64, 0.0);
            }
            out += &self.projections[i] * series;
        }
        out
    }

    /// (‖ΣPᵢ − I‖, max_{i≠j} ‖PᵢPⱼ‖, max ‖Pᵢ² − Pᵢ‖), Frobenius norms.
    pub fn projection_residuals(&self) -> (f64, f64, f64) {
        let n = self.dim();
        let sum = self.projections.iter().fold(CMatrix::zeros(n, n), |acc, p| acc + p);
        let completeness = linalg::fro(&(sum - identity(n)));
        let mut ortho: f64 = 0.0;
        let mut idem: f64 = 0.0;
        for (i, p) in self.projections.iter().enumerate() {
            idem = idem.max(linalg::fro(&(p * p - p)));
            for (j, q) in self.projections.iter().enumerate() {
                if i != j {
                    ortho = ortho.max(linalg::fro(&(p * q)));
                }
            }
        }
        (completeness, ortho, idem)
    }
}

/// M^r for real r.
pub fn real_power(m: &CMatrix, r: f64) -> Result<CMatrix> {
    Ok(spectral_decompose(m)?.power(r))
}

/// Principal logarithm Log M.
pub fn log_matrix(m: &CMatrix) -> Result<CMatrix> {
    Ok(spectral_decompose(m)?.log())
}
