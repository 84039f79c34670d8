//! Estimation of the augmented spectral mean and covariance, the time-varying
//! statistics they induce, and Monte Carlo consistency diagnostics.
//!
//! The time-spectrum is modelled constant within each frame and independent
//! across frames, so the estimator index runs over frames: with `F` frames the
//! approximate ML estimates are the sample mean of the per-frame projections
//! and the (biased, `1/F`) sample Hermitian and complementary covariances of
//! the centred projections.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::spectral::{
    basis_at, project_frame_into, AugmentedMatrix, AugmentedVector, FrameConfig, RealSignal,
    STRUCTURE_TOL,
};
use crate::synthesis::{Sampler, SamplerSeed};

/// Mean and augmented covariance of the time-spectrum distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    cfg: FrameConfig,
    mean: AugmentedVector,
    cov: AugmentedMatrix,
}

impl SpectralModel {
    pub fn new(cfg: FrameConfig, mean: AugmentedVector, cov: AugmentedMatrix) -> Result<Self> {
        if mean.dim() != cfg.dim() || cov.dim() != cfg.dim() {
            return invalid(format!(
                "model dimensions (mean {}, covariance {}) do not match MN = {}",
                mean.dim(),
                cov.dim(),
                cfg.dim()
            ));
        }
        Ok(Self { cfg, mean, cov })
    }

    pub fn zero(cfg: FrameConfig) -> Self {
        Self {
            cfg,
            mean: AugmentedVector::zeros(cfg.dim()),
            cov: AugmentedMatrix::zeros(cfg.dim()),
        }
    }

    pub fn cfg(&self) -> &FrameConfig {
        &self.cfg
    }

    pub fn mean(&self) -> &AugmentedVector {
        &self.mean
    }

    pub fn cov(&self) -> &AugmentedMatrix {
        &self.cov
    }

    pub fn with_mean(&self, mean: AugmentedVector) -> Result<Self> {
        Self::new(self.cfg, mean, self.cov.clone())
    }

    pub fn with_cov(&self, cov: AugmentedMatrix) -> Result<Self> {
        Self::new(self.cfg, self.mean.clone(), cov)
    }

    /// Model of the sum of two independent signals.
    pub fn superpose(&self, other: &SpectralModel) -> Result<Self> {
        if self.cfg != other.cfg {
            return invalid("cannot superpose models with different frame configurations");
        }
        let mean = AugmentedVector::from_top(self.mean.top() + other.mean.top());
        let cov = AugmentedMatrix::new(self.cov.r() + other.cov.r(), self.cov.p() + other.cov.p())?;
        Self::new(self.cfg, mean, cov)
    }
}

/// Per-sample mean `m(t) = Φ̄(t)m̄` and covariance `R(t) = Φ̄(t)R̄Φ̄ᴴ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingStats {
    pub times: Vec<i64>,
    pub means: Vec<DVector<f64>>,
    pub covs: Vec<DMatrix<f64>>,
}

fn real_part_checked(z: &CMatrix, what: &str) -> Result<DMatrix<f64>> {
    let scale = linalg::max_abs(z).max(1.0);
    let residue = z.iter().fold(0.0_f64, |m, v| m.max(v.im.abs()));
    if residue > STRUCTURE_TOL * scale {
        return Err(Error::Structure(format!(
            "{what} has imaginary residue {residue:.3e}"
        )));
    }
    Ok(z.map(|v| v.re))
}

pub fn time_varying_stats(model: &SpectralModel, times: Range<i64>) -> Result<TimeVaryingStats> {
    let mean_full = model.mean.full();
    let cov_full = model.cov.full();
    let mut out = TimeVaryingStats {
        times: Vec::new(),
        means: Vec::new(),
        covs: Vec::new(),
    };
    for t in times {
        let phi = basis_at(&model.cfg, t).matrix;
        let m = &phi * &mean_full;
        let m = real_part_checked(
            &CMatrix::from_column_slice(m.len(), 1, m.as_slice()),
            "mean",
        )?;
        let r = real_part_checked(&(&phi * &cov_full * phi.adjoint()), "covariance")?;
        out.times.push(t);
        out.means.push(m.column(0).into_owned());
        out.covs.push((&r + r.transpose()) * 0.5);
    }
    Ok(out)
}

/// `R(t₁, t₂) = E[s(t₁)sᵀ(t₂)]`. Samples in different frames are
/// uncorrelated under the frame model, so such requests are rejected.
pub fn temporal_autocovariance(model: &SpectralModel, t1: i64, t2: i64) -> Result<DMatrix<f64>> {
    let cfg = &model.cfg;
    if cfg.frame_of(t1) != cfg.frame_of(t2) {
        return Err(Error::Domain(format!(
            "samples {t1} and {t2} lie in different frames; their covariance is zero by construction"
        )));
    }
    let a = basis_at(cfg, t1).matrix;
    let b = basis_at(cfg, t2).matrix;
    real_part_checked(&(a * model.cov.full() * b.adjoint()), "autocovariance")
}

/// `P(t₁, t₂) = E[s(t₁)sᵀ(-t₂)]`.
pub fn temporal_autoconvolution(model: &SpectralModel, t1: i64, t2: i64) -> Result<DMatrix<f64>> {
    temporal_autocovariance(model, t1, -t2)
}

/// Non-centred spectra `(m mᴴ + R, m mᵀ + P)`.
pub fn absolute_moments(model: &SpectralModel) -> (CMatrix, CMatrix) {
    let m = model.mean.top();
    (
        m * m.adjoint() + model.cov.r(),
        m * m.transpose() + model.cov.p(),
    )
}

/// Projects every frame; returns `F × MN` analytic coefficients, frame-major.
pub fn project_frames(signal: &RealSignal) -> Vec<Complex64> {
    let cfg = signal.cfg();
    let (l, d) = (cfg.frame_len(), cfg.dim());
    let table = cfg.phasor_table();
    let samples = signal.samples();
    let frames = signal.num_frames();
    let mut out = vec![Complex64::new(0.0, 0.0); frames * d];
    for (f, chunk) in out.chunks_mut(d).enumerate() {
        let base = f * l;
        project_frame_into(cfg, &table, |t, ch| samples[(base + t, ch)], chunk);
    }
    out
}

/// Two-pass sample moments of per-frame coefficients.
pub(crate) fn moments_from_projections(
    cfg: FrameConfig,
    tops: &[Complex64],
) -> Result<SpectralModel> {
    let d = cfg.dim();
    let frames = tops.len() / d;
    if frames < 2 {
        return Err(Error::InsufficientData {
            frames,
            required: 2,
        });
    }
    let inv = 1.0 / frames as f64;
    let mut mean = vec![Complex64::new(0.0, 0.0); d];
    for frame in tops.chunks(d) {
        for (acc, z) in mean.iter_mut().zip(frame) {
            *acc += z;
        }
    }
    mean.iter_mut().for_each(|z| *z *= inv);

    let mut r = CMatrix::zeros(d, d);
    let mut p = CMatrix::zeros(d, d);
    let mut centred = vec![Complex64::new(0.0, 0.0); d];
    for frame in tops.chunks(d) {
        for i in 0..d {
            centred[i] = frame[i] - mean[i];
        }
        for i in 0..d {
            let si = centred[i];
            for k in i..d {
                let sk = centred[k];
                r[(i, k)] += si * sk.conj();
                p[(i, k)] += si * sk;
            }
        }
    }
    for i in 0..d {
        r[(i, i)] = c(r[(i, i)].re);
        for k in i..d {
            r[(i, k)] *= inv;
            p[(i, k)] *= inv;
            r[(k, i)] = r[(i, k)].conj();
            p[(k, i)] = p[(i, k)];
        }
    }
    SpectralModel::new(
        cfg,
        AugmentedVector::from_top(CVector::from_vec(mean)),
        AugmentedMatrix::new(r, p)?,
    )
}

/// Approximate ML estimates of the augmented spectral mean and covariance.
pub fn estimate_moments(signal: &RealSignal) -> Result<SpectralModel> {
    let frames = signal.num_frames();
    if frames < 2 {
        return Err(Error::InsufficientData {
            frames,
            required: 2,
        });
    }
    moments_from_projections(*signal.cfg(), &project_frames(signal))
}

/// Closed-form estimator covariances for i.i.d. frames.
///
/// `mean_cov`, `r_cov` and `p_cov` are the matrix forms `R/F`,
/// `(P P* + R R)/F` and `2 R R/F`. The `*_var` fields are exact per-entry
/// variances from the Gaussian fourth-moment expansion:
/// `var m̂ᵢ = Rᵢᵢ/F`, `var R̂ᵢₖ = (RᵢᵢRₖₖ + |Pᵢₖ|²)/F`,
/// `var P̂ᵢₖ = (RᵢᵢRₖₖ + |Rᵢₖ|²)/F`. For a single bin and channel the two
/// descriptions coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorCovariance {
    pub frames: usize,
    pub mean_cov: CMatrix,
    pub r_cov: CMatrix,
    pub p_cov: CMatrix,
    pub mean_var: DVector<f64>,
    pub r_var: DMatrix<f64>,
    pub p_var: DMatrix<f64>,
}

impl EstimatorCovariance {
    pub fn total_mean_var(&self) -> f64 {
        self.mean_var.sum()
    }

    pub fn total_r_var(&self) -> f64 {
        self.r_var.sum()
    }

    pub fn total_p_var(&self) -> f64 {
        self.p_var.sum()
    }
}

pub fn estimator_covariance_iid(
    model: &SpectralModel,
    frames: usize,
) -> Result<EstimatorCovariance> {
    if frames == 0 {
        return invalid("number of frames must be at least 1");
    }
    let inv = c(1.0 / frames as f64);
    let (r, p) = (model.cov.r(), model.cov.p());
    let d = r.nrows();
    let diag = |i: usize| r[(i, i)].re;
    let f = frames as f64;
    Ok(EstimatorCovariance {
        frames,
        mean_cov: r * inv,
        r_cov: (p * p.conjugate() + r * r) * inv,
        p_cov: (r * r) * (inv * 2.0),
        mean_var: DVector::from_fn(d, |i, _| diag(i) / f),
        r_var: DMatrix::from_fn(d, d, |i, k| (diag(i) * diag(k) + p[(i, k)].norm_sqr()) / f),
        p_var: DMatrix::from_fn(d, d, |i, k| (diag(i) * diag(k) + r[(i, k)].norm_sqr()) / f),
    })
}

/// Empirical estimator variances against frame count.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyReport {
    pub frames: Vec<usize>,
    pub trials: usize,
    /// Summed per-entry variances of m̂, R̂ and P̂ for each frame count.
    pub mean_var: Vec<f64>,
    pub r_var: Vec<f64>,
    pub p_var: Vec<f64>,
    pub predicted_mean_var: Vec<f64>,
    pub predicted_r_var: Vec<f64>,
    pub predicted_p_var: Vec<f64>,
    /// Per-bin (diagonal entry) variances of R̂ and P̂ for each frame count.
    pub r_var_diag: Vec<Vec<f64>>,
    pub p_var_diag: Vec<Vec<f64>>,
    pub mean_slope: f64,
    pub r_slope: f64,
    pub p_slope: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Sample variance (unbiased) of complex draws, `Σ|zᵢ - z̄|² / (n - 1)`.
fn complex_variance(values: impl Iterator<Item = Complex64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().fold(Complex64::new(0.0, 0.0), |a, z| a + z) / n;
    values.map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0)
}

pub fn consistency_study(
    model: &SpectralModel,
    frames: &[usize],
    trials: usize,
    seed: u64,
) -> Result<ConsistencyReport> {
    if trials < 100 {
        return invalid(format!("at least 100 trials are required, got {trials}"));
    }
    if frames.len() < 2 {
        return invalid("at least two frame counts are required to fit a slope");
    }
    if frames[0] < 2 || frames.windows(2).any(|w| w[0] >= w[1]) {
        return invalid("frame counts must be strictly increasing and at least 2");
    }
    let sampler = Sampler::new(model)?;
    let d = model.cfg.dim();
    let mut report = ConsistencyReport {
        frames: frames.to_vec(),
        trials,
        mean_var: Vec::new(),
        r_var: Vec::new(),
        p_var: Vec::new(),
        predicted_mean_var: Vec::new(),
        predicted_r_var: Vec::new(),
        predicted_p_var: Vec::new(),
        r_var_diag: Vec::new(),
        p_var_diag: Vec::new(),
        mean_slope: 0.0,
        r_slope: 0.0,
        p_slope: 0.0,
    };
    for (fi, &f) in frames.iter().enumerate() {
        let estimates: Vec<SpectralModel> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = SamplerSeed::new(seed, ((fi as u64) << 32) | trial as u64).rng();
                let signal = sampler.sample_signal(f, &mut rng)?;
                estimate_moments(&signal)
            })
            .collect::<Result<_>>()?;
        let mut mean_var = 0.0;
        let mut r_var = 0.0;
        let mut p_var = 0.0;
        let mut r_diag = Vec::with_capacity(d);
        let mut p_diag = Vec::with_capacity(d);
        for i in 0..d {
            mean_var += complex_variance(estimates.iter().map(|e| e.mean.top()[i]));
            for k in 0..d {
                let vr = complex_variance(estimates.iter().map(|e| e.cov.r()[(i, k)]));
                let vp = complex_variance(estimates.iter().map(|e| e.cov.p()[(i, k)]));
                r_var += vr;
                p_var += vp;
                if i == k {
                    r_diag.push(vr);
                    p_diag.push(vp);
                }
            }
        }
        let predicted = estimator_covariance_iid(model, f)?;
        report.mean_var.push(mean_var);
        report.r_var.push(r_var);
        report.p_var.push(p_var);
        report.predicted_mean_var.push(predicted.total_mean_var());
        report.predicted_r_var.push(predicted.total_r_var());
        report.predicted_p_var.push(predicted.total_p_var());
        report.r_var_diag.push(r_diag);
        report.p_var_diag.push(p_diag);
    }
    let fx: Vec<f64> = frames.iter().map(|&f| f as f64).collect();
    report.mean_slope = log_log_slope(&fx, &report.mean_var);
    report.r_slope = log_log_slope(&fx, &report.r_var);
    report.p_slope = log_log_slope(&fx, &report.p_var);
    Ok(report)
}

/// Result of [`ml_refine`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlRefinement {
    pub model: SpectralModel,
    pub initial_log_likelihood: f64,
    pub log_likelihood: f64,
    /// Log-likelihood after each accepted iteration, starting with the initial value.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub const ML_MAX_ITER: usize = 200;
pub const ML_TOL: f64 = 1e-8;
/// Relative eigenvalue floor applied to `R(t)` before inversion.
const ML_FLOOR: f64 = 1e-8;

/// Per-phase sufficient statistics: the model is `L`-periodic, so sums over
/// samples collapse to sums over the `L` phases of a frame.
struct PhaseStats {
    count: Vec<f64>,
    sum: Vec<DVector<f64>>,
    scatter: Vec<DMatrix<f64>>,
    total: f64,
}

impl PhaseStats {
    fn new(signal: &RealSignal) -> Self {
        let cfg = signal.cfg();
        let (l, n) = (cfg.frame_len(), cfg.num_channels());
        let mut stats = Self {
            count: vec![0.0; l],
            sum: vec![DVector::zeros(n); l],
            scatter: vec![DMatrix::zeros(n, n); l],
            total: signal.len() as f64,
        };
        for (t, row) in signal.samples().row_iter().enumerate() {
            let ph = t % l;
            let x = row.transpose();
            stats.count[ph] += 1.0;
            stats.sum[ph] += &x;
            stats.scatter[ph] += &x * x.transpose();
        }
        stats
    }

    /// `Σ_{t ≡ φ} (x - μ)(x - μ)ᵀ`.
    fn centred(&self, ph: usize, mu: &DVector<f64>) -> DMatrix<f64> {
        let s1 = &self.sum[ph];
        &self.scatter[ph] - s1 * mu.transpose() - mu * s1.transpose()
            + mu * mu.transpose() * self.count[ph]
    }
}

struct PhaseModel {
    phi: Vec<CMatrix>,
    mean: Vec<DVector<f64>>,
    inv: Vec<DMatrix<f64>>,
    logdet: Vec<f64>,
}

fn phase_model(cfg: &FrameConfig, mean_full: &CVector, cov_full: &CMatrix) -> Result<PhaseModel> {
    let l = cfg.frame_len();
    let mut out = PhaseModel {
        phi: Vec::with_capacity(l),
        mean: Vec::with_capacity(l),
        inv: Vec::with_capacity(l),
        logdet: Vec::with_capacity(l),
    };
    for ph in 0..l {
        let phi = basis_at(cfg, ph as i64).matrix;
        let mu = (&phi * mean_full).map(|z| z.re);
        let r = (&phi * cov_full * phi.adjoint()).map(|z| z.re);
        let trace = r.trace();
        if trace <= 0.0 || !trace.is_finite() {
            return Err(Error::Numerical(format!(
                "time-varying covariance at phase {ph} is singular (trace {trace:.3e})"
            )));
        }
        let floor = ML_FLOOR * trace / cfg.num_channels() as f64;
        let (values, vectors) = linalg::eigh_real(&r);
        let inv_vals = values.map(|v| 1.0 / v.max(floor));
        let inv = &vectors * DMatrix::from_diagonal(&inv_vals) * vectors.transpose();
        out.logdet
            .push(values.iter().map(|v| v.max(floor).ln()).sum());
        out.phi.push(phi);
        out.mean.push(mu);
        out.inv.push((&inv + inv.transpose()) * 0.5);
    }
    Ok(out)
}

fn log_likelihood_from(stats: &PhaseStats, pm: &PhaseModel, n: usize) -> f64 {
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let mut acc = 0.0;
    for ph in 0..pm.phi.len() {
        let s = stats.centred(ph, &pm.mean[ph]);
        let quad = (&pm.inv[ph] * s).trace();
        acc += stats.count[ph] * (n as f64 * ln2pi + pm.logdet[ph]) + quad;
    }
    -0.5 * acc
}

/// Exact time-domain Gaussian log-likelihood `Σ_t ln N(x(t); m(t), R(t))`,
/// with `R(t)` eigenvalue-floored at `1e-8·tr/N`.
pub fn time_domain_log_likelihood(signal: &RealSignal, model: &SpectralModel) -> Result<f64> {
    if signal.cfg() != model.cfg() {
        return invalid("signal and model frame configurations differ");
    }
    let stats = PhaseStats::new(signal);
    let pm = phase_model(model.cfg(), &model.mean.full(), &model.cov.full())?;
    Ok(log_likelihood_from(&stats, &pm, model.cfg().num_channels()))
}

/// Regularises a covariance so that its augmented form is positive definite.
fn regularise(cov: &AugmentedMatrix) -> Result<AugmentedMatrix> {
    let full = cov.full();
    let floor = linalg::relative_floor(&full, ML_FLOOR);
    if floor <= 0.0 {
        return Err(Error::Numerical(
            "initial covariance is zero and cannot be regularised".into(),
        ));
    }
    let min = linalg::min_eigenvalue(&full);
    if min >= floor {
        Ok(cov.clone())
    } else {
        Ok(cov.with_diagonal_loading(floor - min))
    }
}

/// Weighted least-squares spectral mean with weights `R⁻¹(t)`.
fn wls_mean(cfg: &FrameConfig, stats: &PhaseStats, pm: &PhaseModel) -> AugmentedVector {
    let n = cfg.aug_dim();
    let mut normal = CMatrix::zeros(n, n);
    let mut rhs = CVector::zeros(n);
    for ph in 0..pm.phi.len() {
        let phi = &pm.phi[ph];
        let w = linalg::to_complex(&pm.inv[ph]);
        let phw = phi.adjoint() * w;
        normal += &phw * phi * c(stats.count[ph]);
        rhs += &phw * stats.sum[ph].map(c);
    }
    let (inv, _) = linalg::pinv(&normal, 1e-12);
    let full = inv * rhs;
    let d = cfg.dim();
    let top = CVector::from_fn(d, |i, _| (full[i] + full[d + i].conj()) * 0.5);
    AugmentedVector::from_top(top)
}

/// Fixed-point covariance update `R̄ + R̄ Q R̄` with
/// `Q = (1/T) Σ_t Φ̄ᴴ (R⁻¹ssᵀR⁻¹ - R⁻¹) Φ̄`; its fixed points are the
/// stationary points of the time-domain likelihood in `R̄`.
fn covariance_update(
    cov: &AugmentedMatrix,
    stats: &PhaseStats,
    pm: &PhaseModel,
) -> Result<AugmentedMatrix> {
    let full = cov.full();
    let n = full.nrows();
    let mut q = CMatrix::zeros(n, n);
    for ph in 0..pm.phi.len() {
        let s = stats.centred(ph, &pm.mean[ph]);
        let w = &pm.inv[ph];
        let inner = w * s * w - w * stats.count[ph];
        let phi = &pm.phi[ph];
        q += phi.adjoint() * linalg::to_complex(&inner) * phi;
    }
    q /= c(stats.total);
    let next = linalg::hermitize(&(&full + &full * q * &full));
    AugmentedMatrix::from_full(&next)
}

/// Full (time-domain) ML refinement starting from `init`.
///
/// Alternates the weighted least-squares mean with weights `R⁻¹(t)` and a
/// fixed-point covariance update until the relative log-likelihood change
/// drops below `tol` or `max_iter` iterations have run. An iteration that
/// would lower the likelihood is discarded and ends the refinement.
pub fn ml_refine(
    signal: &RealSignal,
    init: &SpectralModel,
    max_iter: usize,
    tol: f64,
) -> Result<MlRefinement> {
    if signal.cfg() != init.cfg() {
        return invalid("signal and model frame configurations differ");
    }
    let cfg = *init.cfg();
    let n = cfg.num_channels();
    let stats = PhaseStats::new(signal);

    let mut model = init.with_cov(regularise(init.cov())?)?;
    let mut pm = phase_model(&cfg, &model.mean.full(), &model.cov.full())?;
    let initial = log_likelihood_from(&stats, &pm, n);
    let mut current = initial;
    let mut history = vec![initial];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        let mean = wls_mean(&cfg, &stats, &pm);
        let pm_mean = phase_model(&cfg, &mean.full(), &model.cov.full())?;
        let cov = covariance_update(&model.cov, &stats, &pm_mean)?;
        let candidate = SpectralModel::new(cfg, mean, cov)?;
        let pm_next = match phase_model(&cfg, &candidate.mean.full(), &candidate.cov.full()) {
            Ok(p) => p,
            Err(_) => break,
        };
        let ll = log_likelihood_from(&stats, &pm_next, n);
        if !ll.is_finite() || ll < current {
            break;
        }
        iterations += 1;
        let change = (ll - current).abs() / current.abs().max(1.0);
        model = candidate;
        pm = pm_next;
        current = ll;
        history.push(ll);
        if change < tol {
            converged = true;
            break;
        }
    }

    Ok(MlRefinement {
        model,
        initial_log_likelihood: initial,
        log_likelihood: current,
        history,
        iterations,
        converged,
    })
}
