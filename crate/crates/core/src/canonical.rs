//! Canonical time-frequency coordinates: spectral coherence, Takagi
//! factorisation, the strong uncorrelating transform and the MMSE
//! time-spectrum in the elliptic basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::moments::SpectralModel;
use crate::spectral::{basis_at, expand, AugmentedVector, FrameConfig, PSD_SLACK};

/// Relative eigenvalue floor applied to `R` before the inverse square root.
pub const COHERENCE_FLOOR: f64 = 1e-10;
/// Slack above 1 tolerated (and clipped) for circularity coefficients.
pub const KAPPA_SLACK: f64 = 1e-8;

/// `R^{-1/2}` and `R^{1/2}` with eigenvalues floored; `floored` reports
/// whether any eigenvalue was raised.
struct RootPair {
    inv_sqrt: CMatrix,
    sqrt: CMatrix,
    floored: bool,
}

fn roots(r: &CMatrix) -> Result<RootPair> {
    let (values, vectors) = linalg::eigh(r);
    let lmax = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tolerance = PSD_SLACK * lmax.max(1.0);
    let lmin = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if lmin < -tolerance {
        return Err(Error::NotPsd {
            min_eigenvalue: lmin,
            tolerance,
        });
    }
    let mut floor = linalg::relative_floor(r, COHERENCE_FLOOR);
    if floor <= 0.0 {
        floor = f64::MIN_POSITIVE.sqrt();
    }
    let floored = values.iter().any(|&v| v < floor);
    let apply = |f: &dyn Fn(f64) -> f64| {
        let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, k| {
            vectors[(i, k)] * f(values[k].max(floor))
        });
        scaled * vectors.adjoint()
    };
    Ok(RootPair {
        inv_sqrt: apply(&|v| 1.0 / v.sqrt()),
        sqrt: apply(&|v| v.sqrt()),
        floored,
    })
}

/// Spectral coherence `C = R^{-1/2} P R^{-T/2}`.
pub fn coherence(r: &CMatrix, p: &CMatrix) -> Result<CMatrix> {
    let w = roots(r)?.inv_sqrt;
    Ok(linalg::symmetrize(&(&w * p * w.transpose())))
}

/// Takagi factorisation `C = V K Vᵀ` of a complex symmetric matrix, with
/// `V` unitary and `K` real, nonnegative and descending.
///
/// For `C = A + jB`, an eigenvector `[x; y]` of the real symmetric
/// `[[A, B], [B, -A]]` with eigenvalue `σ` yields `v = x + jy` satisfying
/// `C v* = σ v`. Eigenvectors with positive eigenvalues are mutually
/// orthonormal as complex vectors; the null space is completed by complex
/// Gram-Schmidt.
pub fn takagi(cm: &CMatrix) -> Result<(CMatrix, Vec<f64>)> {
    let n = cm.nrows();
    if !cm.is_square() {
        return Err(Error::InvalidArgument("Takagi input must be square".into()));
    }
    let scale = linalg::max_abs(cm).max(1.0);
    let asym = linalg::symmetry_residual(cm);
    if asym > 1e-8 * scale {
        return Err(Error::Structure(format!(
            "Takagi input is not symmetric (residual {asym:.3e})"
        )));
    }
    let sym = linalg::symmetrize(cm);
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for k in 0..n {
            let z = sym[(i, k)];
            h[(i, k)] = z.re;
            h[(i, n + k)] = z.im;
            h[(n + i, k)] = z.im;
            h[(n + i, n + k)] = -z.re;
        }
    }
    let (values, vectors) = linalg::eigh_real(&h);
    let mut v = CMatrix::zeros(n, n);
    let mut kappa = Vec::with_capacity(n);
    for idx in (0..2 * n).rev() {
        if kappa.len() == n {
            break;
        }
        let mut cand = CVector::from_fn(n, |i, _| {
            Complex64::new(vectors[(i, idx)], vectors[(n + i, idx)])
        });
        for k in 0..kappa.len() {
            let col = v.column(k);
            let proj = col.dotc(&cand);
            cand -= col * proj;
        }
        let norm = cand.norm();
        if norm > 0.5 {
            v.set_column(kappa.len(), &(cand / c(norm)));
            kappa.push(values[idx].max(0.0));
        }
    }
    if kappa.len() < n {
        return Err(Error::Numerical(
            "Takagi factorisation failed to span the space".into(),
        ));
    }
    Ok((v, kappa))
}

/// `V K Vᵀ`.
pub fn takagi_reconstruct(v: &CMatrix, kappa: &[f64]) -> CMatrix {
    let scaled = CMatrix::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * kappa[k]);
    scaled * v.transpose()
}

/// Strong uncorrelating transform `Ψ = Vᴴ R^{-1/2}` with its inverse,
/// Takagi vectors and circularity coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalDecomposition {
    pub psi: CMatrix,
    pub psi_inv: CMatrix,
    pub v: CMatrix,
    pub kappa: Vec<f64>,
    pub coherence: CMatrix,
    /// `R` was singular and had eigenvalues floored before whitening.
    pub regularised: bool,
}

pub fn sut(r: &CMatrix, p: &CMatrix) -> Result<CanonicalDecomposition> {
    let rp = roots(r)?;
    let coh = linalg::symmetrize(&(&rp.inv_sqrt * p * rp.inv_sqrt.transpose()));
    let (v, mut kappa) = takagi(&coh)?;
    for k in kappa.iter_mut() {
        if *k > 1.0 + KAPPA_SLACK {
            return Err(Error::InvalidArgument(format!(
                "circularity coefficient {k} exceeds 1; (R, P) is not a valid covariance pair"
            )));
        }
        *k = k.min(1.0);
    }
    Ok(CanonicalDecomposition {
        psi: v.adjoint() * &rp.inv_sqrt,
        psi_inv: &rp.sqrt * &v,
        v,
        kappa,
        coherence: coh,
        regularised: rp.floored,
    })
}

/// Circularity coefficients of a model, descending.
pub fn circularity_spectrum(model: &SpectralModel) -> Result<Vec<f64>> {
    Ok(sut(model.cov().r(), model.cov().p())?.kappa)
}

/// `c = Ψ s`.
pub fn canonical_coords(
    decomp: &CanonicalDecomposition,
    s: &AugmentedVector,
) -> Result<AugmentedVector> {
    if s.dim() != decomp.psi.ncols() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    Ok(AugmentedVector::from_top(&decomp.psi * s.top()))
}

/// `s = Ψ⁻¹ c`.
pub fn canonical_inverse(
    decomp: &CanonicalDecomposition,
    cv: &AugmentedVector,
) -> Result<AugmentedVector> {
    if decomp.regularised {
        return Err(Error::Numerical(
            "strong uncorrelating transform is singular for this covariance".into(),
        ));
    }
    if cv.dim() != decomp.psi_inv.ncols() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    Ok(AugmentedVector::from_top(&decomp.psi_inv * cv.top()))
}

/// `Φ̄(t) Ψ̄⁻¹ c̄`.
pub fn canonical_expand(
    decomp: &CanonicalDecomposition,
    cfg: &FrameConfig,
    cv: &AugmentedVector,
    t: i64,
) -> Result<nalgebra::DVector<f64>> {
    expand(cfg, &canonical_inverse(decomp, cv)?, t)
}

/// Least-squares time-spectrum under the elliptic forward model.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseEstimate {
    pub coefficients: CVector,
    /// The stacked system was rank deficient; the minimum-norm solution is returned.
    pub rank_deficient: bool,
}

/// Solves `s(t) = (Φ(t) + Φ*(t) P* R⁻¹) b` for `b` jointly over one frame
/// (`L·N` equations, `MN` unknowns) by pseudo-inverse.
pub fn mmse_tfr_complex(model: &SpectralModel, frame: &CMatrix) -> Result<MmseEstimate> {
    let cfg = model.cfg();
    let (l, n, d) = (cfg.frame_len(), cfg.num_channels(), cfg.dim());
    if frame.nrows() != l || frame.ncols() != n {
        return Err(Error::InvalidArgument(format!(
            "frame must be {l} × {n}, got {:?}",
            frame.shape()
        )));
    }
    let (r, p) = (model.cov().r(), model.cov().p());
    let (values, _) = linalg::eigh(r);
    let lmin = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let lmax = values.iter().fold(0.0_f64, |m, &v| m.max(v));
    if !(lmin > COHERENCE_FLOOR * lmax) {
        return Err(Error::Numerical(
            "MMSE time-spectrum requires a positive definite R".into(),
        ));
    }
    let w = p.conjugate() * linalg::floored_inverse(r, 0.0);
    let mut a = CMatrix::zeros(l * n, d);
    let mut y = CVector::zeros(l * n);
    for t in 0..l {
        let phi_bar = basis_at(cfg, t as i64).matrix;
        let phi = phi_bar.columns(0, d);
        let phi_c = phi_bar.columns(d, d);
        let block = phi + phi_c * &w;
        a.view_mut((t * n, 0), (n, d)).copy_from(&block);
        for ch in 0..n {
            y[t * n + ch] = frame[(t, ch)];
        }
    }
    let (pinv, rank_deficient) = linalg::pinv(&a, 1e-12);
    Ok(MmseEstimate {
        coefficients: pinv * y,
        rank_deficient,
    })
}

/// [`mmse_tfr_complex`] for a real frame.
pub fn mmse_tfr(model: &SpectralModel, frame: &DMatrix<f64>) -> Result<MmseEstimate> {
    mmse_tfr_complex(model, &linalg::to_complex(frame))
}
