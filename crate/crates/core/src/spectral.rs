//! Frequency grid, the normalised augmented Fourier basis and the augmented
//! vector/matrix types.
//!
//! A signal with `N` channels is described on `M` positive frequency bins
//! `ω_m = 2πm/L`, `m = 1..M`, with frame length `L = 2M + 1`. The
//! time-spectrum vector stacks the `N` channel coefficients of each bin,
//! bin-major: entry `m·N + n` holds bin `m + 1`, channel `n`. Its augmented
//! form appends the elementwise conjugate.
//!
//! The basis at sample `t` is the `N × 2MN` matrix
//! `Φ̄(t) = (1/√(2M)) [e^{jω₁t}I, …, e^{jω_M t}I, e^{-jω₁t}I, …]`, which has
//! orthonormal rows. Averaged over one frame, `Φ̄ᴴ(t)Φ̄(t)` equals `I/(2M)`,
//! so [`project_frame`] is an exact left inverse of [`expand`] for
//! frame-constant coefficients.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};

/// Tolerance used when checking Hermitian/complex symmetry of blocks.
pub const STRUCTURE_TOL: f64 = 1e-10;
/// Relative slack on the minimum eigenvalue when testing PSD-ness.
pub const PSD_SLACK: f64 = 1e-10;

/// Frame length, number of positive frequency bins and number of channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameConfig {
    frame_len: usize,
    num_bins: usize,
    num_channels: usize,
}

impl FrameConfig {
    pub fn new(num_bins: usize, num_channels: usize) -> Result<Self> {
        if num_bins == 0 {
            return invalid("number of frequency bins must be at least 1");
        }
        if num_channels == 0 {
            return invalid("number of channels must be at least 1");
        }
        Ok(Self {
            frame_len: 2 * num_bins + 1,
            num_bins,
            num_channels,
        })
    }

    /// Samples per frame, `L = 2M + 1`.
    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    pub fn num_channels(&self) -> usize {
        self.num_channels
    }

    /// Length of the (non-augmented) time-spectrum vector, `MN`.
    pub fn dim(&self) -> usize {
        self.num_bins * self.num_channels
    }

    /// Length of the augmented time-spectrum vector, `2MN`.
    pub fn aug_dim(&self) -> usize {
        2 * self.dim()
    }

    pub fn grid(&self) -> FrequencyGrid {
        FrequencyGrid {
            omegas: (1..=self.num_bins)
                .map(|m| 2.0 * PI * m as f64 / self.frame_len as f64)
                .collect(),
        }
    }

    /// Frame index containing sample `t` (frames start at `t = 0`).
    pub fn frame_of(&self, t: i64) -> i64 {
        t.div_euclid(self.frame_len as i64)
    }

    /// `1/√(2M)`.
    pub(crate) fn norm(&self) -> f64 {
        1.0 / ((2 * self.num_bins) as f64).sqrt()
    }

    /// `e^{jω_{bin+1} t}` with the phase reduced modulo `L` so that the value
    /// is bit-identical across periods.
    pub(crate) fn phasor(&self, bin: usize, t: i64) -> Complex64 {
        let l = self.frame_len as i64;
        let k = ((bin as i64 + 1) * t.rem_euclid(l)).rem_euclid(l);
        let angle = 2.0 * PI * k as f64 / l as f64;
        Complex64::new(angle.cos(), angle.sin())
    }

    /// Phasor table `table[t·M + m] = e^{jω_{m+1}t}` for one frame.
    pub(crate) fn phasor_table(&self) -> Vec<Complex64> {
        let mut table = Vec::with_capacity(self.frame_len * self.num_bins);
        for t in 0..self.frame_len as i64 {
            for m in 0..self.num_bins {
                table.push(self.phasor(m, t));
            }
        }
        table
    }
}

/// Convenience constructor mirroring [`FrameConfig::new`].
pub fn make_frame_config(num_bins: usize, num_channels: usize) -> Result<FrameConfig> {
    FrameConfig::new(num_bins, num_channels)
}

/// Angular frequencies of the positive bins, radians per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub omegas: Vec<f64>,
}

/// The augmented basis `Φ̄(t)` evaluated at one sample index.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    pub t: i64,
    pub matrix: CMatrix,
}

pub fn basis_at(cfg: &FrameConfig, t: i64) -> SpectralBasis {
    let n = cfg.num_channels;
    let d = cfg.dim();
    let norm = cfg.norm();
    let mut matrix = CMatrix::zeros(n, 2 * d);
    for m in 0..cfg.num_bins {
        let z = cfg.phasor(m, t) * norm;
        for ch in 0..n {
            matrix[(ch, m * n + ch)] = z;
            matrix[(ch, d + m * n + ch)] = z.conj();
        }
    }
    SpectralBasis { t, matrix }
}

/// Augmented vector `[a; a*]`; the conjugate pair holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedVector {
    top: CVector,
}

impl AugmentedVector {
    pub fn from_top(top: CVector) -> Self {
        Self { top }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            top: CVector::zeros(dim),
        }
    }

    /// Builds from a full `2MN` vector, rejecting conjugate-pair violations.
    pub fn from_full(full: &CVector) -> Result<Self> {
        if !full.len().is_multiple_of(2) {
            return Err(Error::Structure(format!(
                "augmented vector has odd length {}",
                full.len()
            )));
        }
        let d = full.len() / 2;
        let scale = full.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
        for i in 0..d {
            let gap = (full[d + i] - full[i].conj()).norm();
            if gap > STRUCTURE_TOL * scale {
                return Err(Error::Structure(format!(
                    "bottom half is not the conjugate of the top half at index {i} (gap {gap:.3e})"
                )));
            }
        }
        Ok(Self {
            top: full.rows(0, d).into_owned(),
        })
    }

    pub fn top(&self) -> &CVector {
        &self.top
    }

    pub fn dim(&self) -> usize {
        self.top.len()
    }

    pub fn full(&self) -> CVector {
        let d = self.top.len();
        CVector::from_fn(2 * d, |i, _| {
            if i < d {
                self.top[i]
            } else {
                self.top[i - d].conj()
            }
        })
    }
}

/// Augmented covariance `[R P; P* R*]` stored through its two blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMatrix {
    r: CMatrix,
    p: CMatrix,
}

impl AugmentedMatrix {
    /// Checks shapes, Hermitian symmetry of `R` and complex symmetry of `P`.
    /// Positive semi-definiteness is reported by [`validate_augmented`].
    pub fn new(r: CMatrix, p: CMatrix) -> Result<Self> {
        if !r.is_square() || r.shape() != p.shape() {
            return invalid(format!(
                "augmented blocks must be square and equal-sized, got {:?} and {:?}",
                r.shape(),
                p.shape()
            ));
        }
        let scale = linalg::max_abs(&r).max(linalg::max_abs(&p)).max(1.0);
        let h = linalg::hermitian_residual(&r);
        if h > STRUCTURE_TOL * scale {
            return Err(Error::Structure(format!(
                "Hermitian block is not Hermitian (residual {h:.3e})"
            )));
        }
        let s = linalg::symmetry_residual(&p);
        if s > STRUCTURE_TOL * scale {
            return Err(Error::Structure(format!(
                "complementary block is not symmetric (residual {s:.3e})"
            )));
        }
        Ok(Self {
            r: linalg::hermitize(&r),
            p: linalg::symmetrize(&p),
        })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            r: CMatrix::zeros(dim, dim),
            p: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            r: CMatrix::identity(dim, dim),
            p: CMatrix::zeros(dim, dim),
        }
    }

    /// Builds from a full `2d × 2d` matrix, enforcing the block pattern.
    pub fn from_full(full: &CMatrix) -> Result<Self> {
        let n = full.nrows();
        if !full.is_square() || !n.is_multiple_of(2) {
            return invalid("augmented matrix must be square with even size");
        }
        let d = n / 2;
        let r = full.view((0, 0), (d, d)).into_owned();
        let p = full.view((0, d), (d, d)).into_owned();
        let scale = linalg::max_abs(full).max(1.0);
        let gap_pc = linalg::max_abs(&(full.view((d, 0), (d, d)) - p.conjugate()));
        let gap_rc = linalg::max_abs(&(full.view((d, d), (d, d)) - r.conjugate()));
        if gap_pc.max(gap_rc) > STRUCTURE_TOL * scale {
            return Err(Error::Structure(format!(
                "matrix does not follow the [R P; P* R*] pattern (gap {:.3e})",
                gap_pc.max(gap_rc)
            )));
        }
        Self::new(r, p)
    }

    pub fn r(&self) -> &CMatrix {
        &self.r
    }

    pub fn p(&self) -> &CMatrix {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.r.nrows()
    }

    pub fn full(&self) -> CMatrix {
        let d = self.dim();
        let mut out = CMatrix::zeros(2 * d, 2 * d);
        out.view_mut((0, 0), (d, d)).copy_from(&self.r);
        out.view_mut((0, d), (d, d)).copy_from(&self.p);
        out.view_mut((d, 0), (d, d)).copy_from(&self.p.conjugate());
        out.view_mut((d, d), (d, d)).copy_from(&self.r.conjugate());
        out
    }

    /// Adds `delta` to the diagonal of the Hermitian block (and hence of the
    /// full augmented matrix).
    pub fn with_diagonal_loading(&self, delta: f64) -> Self {
        let d = self.dim();
        Self {
            r: &self.r + CMatrix::identity(d, d) * c(delta),
            p: self.p.clone(),
        }
    }

    /// Congruence `T̄ Ā T̄ᴴ` with the widely linear map `T̄ = [A B; B* A*]`.
    pub fn congruence(&self, a: &CMatrix, b: &CMatrix) -> Result<Self> {
        let d = self.dim();
        let mut t = CMatrix::zeros(2 * d, 2 * d);
        t.view_mut((0, 0), (d, d)).copy_from(a);
        t.view_mut((0, d), (d, d)).copy_from(b);
        t.view_mut((d, 0), (d, d)).copy_from(&b.conjugate());
        t.view_mut((d, d), (d, d)).copy_from(&a.conjugate());
        let full = &t * self.full() * t.adjoint();
        Self::from_full(&linalg::hermitize(&full))
    }
}

/// Multichannel real time series made of whole frames.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSignal {
    samples: DMatrix<f64>,
    cfg: FrameConfig,
}

impl RealSignal {
    /// `samples` is `T × N`, one row per time sample.
    pub fn new(samples: DMatrix<f64>, cfg: FrameConfig) -> Result<Self> {
        let (rows, cols) = samples.shape();
        if cols != cfg.num_channels() {
            return invalid(format!(
                "signal has {cols} channel(s), configuration expects {}",
                cfg.num_channels()
            ));
        }
        if rows == 0 || rows % cfg.frame_len() != 0 {
            return invalid(format!(
                "signal length {rows} is not a positive multiple of the frame length {}",
                cfg.frame_len()
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return invalid("signal contains non-finite samples");
        }
        Ok(Self { samples, cfg })
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn cfg(&self) -> &FrameConfig {
        &self.cfg
    }

    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    pub fn num_frames(&self) -> usize {
        self.samples.nrows() / self.cfg.frame_len()
    }

    pub fn frame(&self, f: usize) -> DMatrix<f64> {
        let l = self.cfg.frame_len();
        self.samples.rows(f * l, l).into_owned()
    }

    pub fn into_samples(self) -> DMatrix<f64> {
        self.samples
    }
}

/// `x(t) = Φ̄(t) x̄`; the imaginary residue is checked and discarded.
pub fn expand(cfg: &FrameConfig, ubx: &AugmentedVector, t: i64) -> Result<DVector<f64>> {
    if ubx.dim() != cfg.dim() {
        return invalid(format!(
            "augmented vector has dimension {}, expected {}",
            ubx.dim(),
            cfg.dim()
        ));
    }
    let complex = basis_at(cfg, t).matrix * ubx.full();
    let scale = complex.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    let residue = complex.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    if residue > STRUCTURE_TOL * scale {
        return Err(Error::Structure(format!(
            "expansion is not real (imaginary residue {residue:.3e})"
        )));
    }
    Ok(complex.map(|z| z.re))
}

/// Writes one frame of `Φ̄(t) [a; a*]` for `t = 0..L-1` into `out`
/// (row-major `L × N`).
pub(crate) fn expand_frame_into(
    cfg: &FrameConfig,
    table: &[Complex64],
    top: &[Complex64],
    out: &mut [f64],
) {
    let (m_bins, n) = (cfg.num_bins, cfg.num_channels);
    let gain = 2.0 * cfg.norm();
    for t in 0..cfg.frame_len {
        let phases = &table[t * m_bins..(t + 1) * m_bins];
        for ch in 0..n {
            let mut acc = 0.0;
            for (m, z) in phases.iter().enumerate() {
                let a = top[m * n + ch];
                acc += z.re * a.re - z.im * a.im;
            }
            out[t * n + ch] = gain * acc;
        }
    }
}

/// `(2M/L) Σ_t Φᴴ(t) x(t)` for one frame given by `sample(t, ch)`; only the
/// analytic half is written since the other half is its conjugate.
pub(crate) fn project_frame_into(
    cfg: &FrameConfig,
    table: &[Complex64],
    sample: impl Fn(usize, usize) -> f64,
    out: &mut [Complex64],
) {
    let (m_bins, n) = (cfg.num_bins, cfg.num_channels);
    let gain = (2 * m_bins) as f64 / cfg.frame_len as f64 * cfg.norm();
    out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    for t in 0..cfg.frame_len {
        let phases = &table[t * m_bins..(t + 1) * m_bins];
        for ch in 0..n {
            let x = sample(t, ch);
            for (m, z) in phases.iter().enumerate() {
                out[m * n + ch] += z.conj() * x;
            }
        }
    }
    out.iter_mut().for_each(|z| *z *= gain);
}

/// Per-frame least-squares projection `(2M/L) Σ_{t=0}^{L-1} Φ̄ᴴ(t) x(t)`.
pub fn project_frame(cfg: &FrameConfig, frame: &DMatrix<f64>) -> Result<AugmentedVector> {
    if frame.nrows() != cfg.frame_len() || frame.ncols() != cfg.num_channels() {
        return invalid(format!(
            "frame must be {} × {}, got {:?}",
            cfg.frame_len(),
            cfg.num_channels(),
            frame.shape()
        ));
    }
    let table = cfg.phasor_table();
    let mut top = vec![Complex64::new(0.0, 0.0); cfg.dim()];
    project_frame_into(cfg, &table, |t, ch| frame[(t, ch)], &mut top);
    Ok(AugmentedVector::from_top(CVector::from_vec(top)))
}

/// Structural diagnostics of an augmented covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedDiagnostics {
    pub hermitian_residual: f64,
    pub symmetry_residual: f64,
    pub min_eigenvalue: f64,
    pub r_norm: f64,
    pub p_norm: f64,
    /// `‖P‖₂ ≤ ‖R‖₂` (with relative slack).
    pub norm_bound_ok: bool,
    /// Full augmented matrix PSD up to `-PSD_SLACK·‖R‖₂`.
    pub psd_ok: bool,
}

impl AugmentedDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.norm_bound_ok && self.psd_ok
    }
}

pub fn validate_augmented(aug: &AugmentedMatrix) -> AugmentedDiagnostics {
    let full = aug.full();
    let r_norm = linalg::spectral_norm(aug.r());
    let p_norm = linalg::spectral_norm(aug.p());
    let min_eigenvalue = linalg::min_eigenvalue(&full);
    let slack = PSD_SLACK * r_norm.max(f64::MIN_POSITIVE);
    AugmentedDiagnostics {
        hermitian_residual: linalg::hermitian_residual(aug.r()),
        symmetry_residual: linalg::symmetry_residual(aug.p()),
        min_eigenvalue,
        r_norm,
        p_norm,
        norm_bound_ok: p_norm <= r_norm + slack,
        psd_ok: min_eigenvalue >= -slack,
    }
}

/// Covariance of the stacked real vector `[Re s; Im s]` for a TFR `s` with
/// augmented covariance `aug`.
pub fn to_real_composite(aug: &AugmentedMatrix) -> DMatrix<f64> {
    let d = aug.dim();
    let (r, p) = (aug.r(), aug.p());
    let mut out = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        for k in 0..d {
            let (rr, pp) = (r[(i, k)], p[(i, k)]);
            out[(i, k)] = 0.5 * (rr.re + pp.re);
            out[(i, d + k)] = 0.5 * (pp.im - rr.im);
            out[(d + i, k)] = 0.5 * (pp.im + rr.im);
            out[(d + i, d + k)] = 0.5 * (rr.re - pp.re);
        }
    }
    out
}

/// Inverse of [`to_real_composite`].
pub fn from_real_composite(real: &DMatrix<f64>) -> Result<AugmentedMatrix> {
    let n = real.nrows();
    if !real.is_square() || !n.is_multiple_of(2) {
        return invalid("real composite must be square with even size");
    }
    let d = n / 2;
    let r = CMatrix::from_fn(d, d, |i, k| {
        Complex64::new(
            real[(i, k)] + real[(d + i, d + k)],
            real[(d + i, k)] - real[(i, d + k)],
        )
    });
    let p = CMatrix::from_fn(d, d, |i, k| {
        Complex64::new(
            real[(i, k)] - real[(d + i, d + k)],
            real[(i, d + k)] + real[(d + i, k)],
        )
    });
    AugmentedMatrix::new(r, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::J;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn frame_config_follows_odd_length_convention() {
        let cfg = make_frame_config(1, 1).unwrap();
        assert_eq!(cfg.frame_len(), 3);
        assert!(close(cfg.grid().omegas[0], 2.0 * PI / 3.0, 1e-15));
        let cfg = make_frame_config(2, 1).unwrap();
        assert_eq!(cfg.frame_len(), 5);
        let w = cfg.grid().omegas;
        assert!(close(w[0], 2.0 * PI / 5.0, 1e-15) && close(w[1], 4.0 * PI / 5.0, 1e-15));
        assert!(matches!(
            make_frame_config(0, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            make_frame_config(1, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn basis_at_zero_and_one() {
        let cfg = make_frame_config(1, 1).unwrap();
        let b0 = basis_at(&cfg, 0).matrix;
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b0[(0, 0)] - c(h)).norm() < 1e-15 && (b0[(0, 1)] - c(h)).norm() < 1e-15);
        let b1 = basis_at(&cfg, 1).matrix;
        let w = 2.0 * PI / 3.0;
        let e = Complex64::new(w.cos(), w.sin()) * h;
        assert!((b1[(0, 0)] - e).norm() < 1e-15 && (b1[(0, 1)] - e.conj()).norm() < 1e-15);
        let g = &b1 * b1.adjoint();
        assert!((g[(0, 0)] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn basis_is_periodic_in_frame_length() {
        for &(m, n) in &[(1, 1), (3, 2), (5, 4)] {
            let cfg = make_frame_config(m, n).unwrap();
            for t in -7..20_i64 {
                let a = basis_at(&cfg, t).matrix;
                let b = basis_at(&cfg, t + cfg.frame_len() as i64).matrix;
                assert!(linalg::max_abs(&(a - b)) <= 1e-12);
            }
        }
    }

    #[test]
    fn frame_average_projector_is_scaled_identity() {
        let cfg = make_frame_config(3, 2).unwrap();
        let l = cfg.frame_len();
        let mut acc = CMatrix::zeros(cfg.aug_dim(), cfg.aug_dim());
        for t in 0..l as i64 {
            let phi = basis_at(&cfg, t).matrix;
            acc += phi.adjoint() * phi;
        }
        acc /= c(l as f64);
        let target = CMatrix::identity(cfg.aug_dim(), cfg.aug_dim()) * c(1.0 / 6.0);
        assert!(linalg::max_abs(&(acc - target)) <= 1e-10);
    }

    #[test]
    fn expand_closed_forms() {
        let cfg = make_frame_config(1, 1).unwrap();
        let w = 2.0 * PI / 3.0;
        let zero = AugmentedVector::zeros(1);
        assert_eq!(expand(&cfg, &zero, 5).unwrap()[0], 0.0);
        let h = 2.0_f64.sqrt() / 2.0;
        let real = AugmentedVector::from_top(CVector::from_vec(vec![c(h)]));
        let quad = AugmentedVector::from_top(CVector::from_vec(vec![J * h]));
        for t in 0..9_i64 {
            let x = expand(&cfg, &real, t).unwrap()[0];
            assert!(close(x, (w * t as f64).cos(), 1e-12));
            let y = expand(&cfg, &quad, t).unwrap()[0];
            assert!(close(y, (w * t as f64 + PI / 2.0).cos(), 1e-12));
        }
    }

    #[test]
    fn from_full_rejects_broken_pairs() {
        let ok = CVector::from_vec(vec![Complex64::new(1.0, 2.0), Complex64::new(1.0, -2.0)]);
        assert!(AugmentedVector::from_full(&ok).is_ok());
        let bad = CVector::from_vec(vec![Complex64::new(1.0, 2.0), Complex64::new(1.0, 2.0)]);
        assert!(matches!(
            AugmentedVector::from_full(&bad),
            Err(Error::Structure(_))
        ));
        let odd = CVector::from_vec(vec![c(1.0)]);
        assert!(AugmentedVector::from_full(&odd).is_err());
    }

    #[test]
    fn project_frame_closed_forms() {
        let cfg = make_frame_config(1, 1).unwrap();
        let zero = DMatrix::zeros(3, 1);
        assert_eq!(project_frame(&cfg, &zero).unwrap().top()[0], c(0.0));
        let w = 2.0 * PI / 3.0;
        let frame = DMatrix::from_fn(3, 1, |t, _| (w * t as f64).cos());
        let a = project_frame(&cfg, &frame).unwrap();
        assert!((a.top()[0] - c(2.0_f64.sqrt() / 2.0)).norm() < 1e-12);
        assert!(matches!(
            project_frame(&cfg, &DMatrix::zeros(4, 1)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn validate_examples() {
        let one = |v: f64| CMatrix::from_element(1, 1, c(v));
        let d = validate_augmented(&AugmentedMatrix::identity(3));
        assert_eq!(d.hermitian_residual, 0.0);
        assert_eq!(d.symmetry_residual, 0.0);
        assert!(close(d.min_eigenvalue, 1.0, 1e-12) && d.p_norm == 0.0 && d.is_valid());

        let rect = validate_augmented(&AugmentedMatrix::new(one(1.0), one(1.0)).unwrap());
        assert!(close(rect.min_eigenvalue, 0.0, 1e-12));
        assert!(rect.is_valid());
        assert!(close(rect.p_norm, rect.r_norm, 1e-12));

        let bad = validate_augmented(&AugmentedMatrix::new(one(1.0), one(1.5)).unwrap());
        assert!(!bad.norm_bound_ok && !bad.psd_ok);
    }

    #[test]
    fn augmented_matrix_rejects_asymmetric_blocks() {
        let mut r = CMatrix::identity(2, 2);
        r[(0, 1)] = Complex64::new(0.3, 0.1);
        let p = CMatrix::zeros(2, 2);
        assert!(matches!(
            AugmentedMatrix::new(r, p),
            Err(Error::Structure(_))
        ));
        let mut p = CMatrix::zeros(2, 2);
        p[(0, 1)] = c(0.2);
        assert!(matches!(
            AugmentedMatrix::new(CMatrix::identity(2, 2), p),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn real_composite_examples() {
        let one = |v: f64| CMatrix::from_element(1, 1, c(v));
        let circ = to_real_composite(&AugmentedMatrix::identity(2));
        assert!(linalg::max_abs_real(&(circ - DMatrix::identity(4, 4) * 0.5)) < 1e-15);
        let rect = to_real_composite(&AugmentedMatrix::new(one(1.0), one(1.0)).unwrap());
        assert!(
            linalg::max_abs_real(&(rect - DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])))
                < 1e-15
        );
        let half = to_real_composite(&AugmentedMatrix::new(one(1.0), one(0.5)).unwrap());
        assert!(
            linalg::max_abs_real(&(half - DMatrix::from_row_slice(2, 2, &[0.75, 0.0, 0.0, 0.25])))
                < 1e-15
        );
    }
}
