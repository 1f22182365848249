//! Dense complex linear algebra helpers and the value trait used by the
//! quadrature and ODE routines.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Anything that can be integrated or differentiated along a time scale:
/// scalars, complex numbers, vectors and matrices.
pub trait DeltaValue: Clone {
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, k: f64) -> Self;
    /// Max-modulus norm.
    fn norm_max(&self) -> f64;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    fn is_finite(&self) -> bool {
        self.norm_max().is_finite()
    }

    fn zero_like(&self) -> Self {
        self.scale(0.0)
    }
}

impl DeltaValue for f64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn norm_max(&self) -> f64 {
        self.abs()
    }
}

impl DeltaValue for Complex64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn norm_max(&self) -> f64 {
        self.norm()
    }
}

impl DeltaValue for CMatrix {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, k: f64) -> Self {
        self * Complex64::new(k, 0.0)
    }
    fn norm_max(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
    fn zero_like(&self) -> Self {
        CMatrix::zeros(self.nrows(), self.ncols())
    }
}

impl DeltaValue for CVector {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, k: f64) -> Self {
        self * Complex64::new(k, 0.0)
    }
    fn norm_max(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
    fn zero_like(&self) -> Self {
        CVector::zeros(self.nrows())
    }
}

impl DeltaValue for DVector<f64> {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn norm_max(&self) -> f64 {
        self.amax()
    }
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.norm_max()
}

/// Spectral-ish scale used for relative tolerances: Frobenius norm.
pub fn fro(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    let det = m.clone().determinant();
    m.clone().try_inverse().ok_or(Error::SingularMatrix { det: det.norm() })
}

/// Eigenvalues of a complex square matrix from its complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![m[(0, 0)]];
    }
    let scale = fro(m).max(f64::MIN_POSITIVE);
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON * 0.5, 10_000)
        .unwrap_or_else(|| nalgebra::linalg::Schur::new(m.clone()));
    let (_, t) = schur.unpack();
    let mut out: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    // Complex Schur forms are triangular; guard against a stray 2x2 bump.
    for i in 0..n - 1 {
        if t[(i + 1, i)].norm() > 1e-10 * scale {
            let a = t[(i, i)];
            let b = t[(i, i + 1)];
            let c = t[(i + 1, i)];
            let d = t[(i + 1, i + 1)];
            let tr = a + d;
            let disc = ((a - d) * (a - d) + 4.0 * b * c).sqrt();
            out[i] = (tr + disc) / 2.0;
            out[i + 1] = (tr - disc) / 2.0;
        }
    }
    out
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Numerical rank: count of singular values above `tol`.
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    singular_values(m).into_iter().filter(|s| *s > tol).count()
}

/// Unit vector spanning (approximately) the null space direction of `m`
/// with the smallest singular value.
pub fn null_vector(m: &CMatrix) -> CVector {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bs), (i, s)| if *s < bs { (i, *s) } else { (bi, bs) });
    let mut v = CVector::zeros(n);
    for j in 0..n {
        v[j] = v_t[(idx, j)].conj();
    }
    normalize_phase(v)
}

/// Scales a vector to unit 2-norm and rotates it so its largest entry is real positive.
pub fn normalize_phase(v: CVector) -> CVector {
    let norm = v.norm();
    if norm == 0.0 {
        return v;
    }
    let (mut best, mut idx) = (0.0, 0);
    for (i, z) in v.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            idx = i;
        }
    }
    let phase = v[idx] / v[idx].norm();
    v.map(|z| z / phase / norm)
}

/// Greedy multiset matching distance: max over `a` of the distance to its
/// matched partner in `b` (each element of `b` used once).
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, y) in b.iter().enumerate() {
            if !used[j] && (x - y).norm() < best.1 {
                best = (j, (x - y).norm());
            }
        }
        if best.0 == usize::MAX {
            return f64::INFINITY;
        }
        used[best.0] = true;
        worst = worst.max(best.1);
    }
    worst
}
