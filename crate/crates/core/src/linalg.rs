//! Small dense linear-algebra helpers shared by the estimators and detectors.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub(crate) const J: Complex64 = Complex64::new(0.0, 1.0);

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(A + Aᴴ) / 2`.
pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c(0.5)
}

/// `(A + Aᵀ) / 2`.
pub fn symmetrize(a: &CMatrix) -> CMatrix {
    (a + a.transpose()) * c(0.5)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn max_abs_real(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.abs()))
}

pub fn hermitian_residual(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn symmetry_residual(a: &CMatrix) -> f64 {
    max_abs(&(a - a.transpose()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), CMatrix::zeros(0, 0));
    }
    let eig = hermitize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

/// Eigen-decomposition of a real symmetric matrix, eigenvalues ascending.
pub fn eigh_real(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn min_eigenvalue(a: &CMatrix) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    eigh(a).0[0]
}

/// Applies a scalar function to the spectrum of a Hermitian matrix.
pub fn hermitian_fn(a: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(a);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, k| {
        vectors[(r, k)] * f(values[k])
    });
    scaled * vectors.adjoint()
}

/// Trace of a Hermitian matrix (real part).
pub fn trace_re(a: &CMatrix) -> f64 {
    (0..a.nrows()).map(|i| a[(i, i)].re).sum()
}

/// Relative eigenvalue floor `scale * trace / n`, used before inversion.
pub fn relative_floor(a: &CMatrix, scale: f64) -> f64 {
    let n = a.nrows().max(1) as f64;
    scale * trace_re(a).abs() / n
}

/// Inverse of a Hermitian matrix with eigenvalues floored at `floor`.
pub fn floored_inverse(a: &CMatrix, floor: f64) -> CMatrix {
    hermitian_fn(a, |l| 1.0 / l.max(floor))
}

/// `ln det` of a Hermitian matrix with eigenvalues floored at `floor`.
pub fn floored_logdet(a: &CMatrix, floor: f64) -> f64 {
    eigh(a).0.iter().map(|l| l.max(floor).ln()).sum()
}

/// Largest singular value.
pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |m, &s| m.max(s))
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
/// Returns the pseudo-inverse and whether any singular value was cut.
pub fn pinv(a: &CMatrix, rel_tol: f64) -> (CMatrix, bool) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, &s| m.max(s));
    let cutoff = rel_tol * smax.max(f64::MIN_POSITIVE);
    let mut deficient = false;
    let inv_s: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| {
            if s > cutoff {
                1.0 / s
            } else {
                deficient = true;
                0.0
            }
        })
        .collect();
    let k = inv_s.len();
    let v_scaled = CMatrix::from_fn(a.ncols(), k, |r, i| v_t[(i, r)].conj() * inv_s[i]);
    (v_scaled * u.adjoint(), deficient)
}

pub fn to_complex(a: &DMatrix<f64>) -> CMatrix {
    a.map(c)
}
