//! Generalised likelihood ratio tests for harmonics, cyclostationarity and
//! general nonstationarity, with chi-squared thresholds and a Monte Carlo
//! ROC harness.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, Continuous, ContinuousCDF};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::moments::{moments_from_projections, project_frames, SpectralModel};
use crate::spectral::{AugmentedMatrix, AugmentedVector, FrameConfig};
use crate::synthesis::{make_wss, random_augmented_covariance, Sampler, SamplerSeed};

/// Relative eigenvalue floor `1e-8·tr/(2MN)` applied before inversion.
pub const GLR_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    Harmonic,
    Cyclo,
    Nonstat,
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [TestKind::Harmonic, TestKind::Cyclo, TestKind::Nonstat];

    pub fn name(&self) -> &'static str {
        match self {
            TestKind::Harmonic => "harmonic",
            TestKind::Cyclo => "cyclo",
            TestKind::Nonstat => "nonstat",
        }
    }
}

impl fmt::Display for TestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(TestKind::Harmonic),
            "cyclo" => Ok(TestKind::Cyclo),
            "nonstat" => Ok(TestKind::Nonstat),
            other => invalid(format!(
                "unknown test kind '{other}' (expected harmonic, cyclo or nonstat)"
            )),
        }
    }
}

/// Eigen-decomposition of the augmented covariance with the GLR floor applied.
struct Regularised {
    values: Vec<f64>,
    vectors: CMatrix,
}

impl Regularised {
    fn new(full: &CMatrix) -> Result<Self> {
        let floor = linalg::relative_floor(full, GLR_FLOOR);
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(Error::Numerical(
                "augmented covariance is zero or non-finite".into(),
            ));
        }
        let (values, vectors) = linalg::eigh(full);
        Ok(Self {
            values: values.iter().map(|v| v.max(floor)).collect(),
            vectors,
        })
    }

    fn logdet(&self) -> f64 {
        self.values.iter().map(|v| v.ln()).sum()
    }

    /// `xᴴ R̄⁻¹ x`.
    fn quad(&self, x: &CVector) -> Complex64 {
        let y = self.vectors.adjoint() * x;
        y.iter()
            .zip(&self.values)
            .map(|(z, v)| c(z.norm_sqr() / v))
            .sum()
    }
}

fn real_scalar(z: Complex64, what: &str) -> Result<f64> {
    if z.im.abs() > 1e-10 * z.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "{what} has imaginary residue {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `m̄ᴴ R̄⁻¹ m̄`.
pub fn snr(mean: &AugmentedVector, cov: &AugmentedMatrix) -> Result<f64> {
    if mean.dim() != cov.dim() {
        return invalid("mean and covariance dimensions differ");
    }
    let reg = Regularised::new(&cov.full())?;
    Ok(real_scalar(reg.quad(&mean.full()), "SNR")?.max(0.0))
}

fn check_frames(frames: usize) -> Result<()> {
    if frames == 0 {
        return invalid("number of frames must be at least 1");
    }
    Ok(())
}

/// `λ = F m̂ᴴ R̂⁻¹ m̂`.
pub fn glr_harmonic(model: &SpectralModel, frames: usize) -> Result<f64> {
    check_frames(frames)?;
    Ok(frames as f64 * snr(model.mean(), model.cov())?)
}

fn positive_diagonal(full: &CMatrix) -> Result<Vec<f64>> {
    let diag: Vec<f64> = (0..full.nrows()).map(|i| full[(i, i)].re).collect();
    if let Some(v) = diag.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::Numerical(format!(
            "augmented covariance has nonpositive diagonal entry {v:.3e}"
        )));
    }
    Ok(diag)
}

/// `F [ln det D - ln det R̂ + tr(D⁻¹R̂) - 2NM]` with `D = diag(R̂)`.
fn cyclo_terms(model: &SpectralModel, frames: usize) -> Result<(f64, Vec<f64>)> {
    check_frames(frames)?;
    let full = model.cov().full();
    let diag = positive_diagonal(&full)?;
    let reg = Regularised::new(&full)?;
    // D = diag(R̂) makes tr(D⁻¹R̂) = 2NM, cancelling the constant.
    let stat = diag.iter().map(|d| d.ln()).sum::<f64>() - reg.logdet();
    Ok((frames as f64 * stat, diag))
}

pub fn glr_cyclo(model: &SpectralModel, frames: usize) -> Result<f64> {
    Ok(cyclo_terms(model, frames)?.0.max(0.0))
}

/// Cyclostationarity statistic plus `F tr(D⁻¹ m̂m̂ᴴ)`.
pub fn glr_nonstat(model: &SpectralModel, frames: usize) -> Result<f64> {
    let (cyclo, diag) = cyclo_terms(model, frames)?;
    let mean = model.mean().full();
    let harmonic: f64 = mean.iter().zip(&diag).map(|(z, d)| z.norm_sqr() / d).sum();
    Ok((cyclo + frames as f64 * harmonic).max(0.0))
}

pub fn glr(kind: TestKind, model: &SpectralModel, frames: usize) -> Result<f64> {
    match kind {
        TestKind::Harmonic => glr_harmonic(model, frames),
        TestKind::Cyclo => glr_cyclo(model, frames),
        TestKind::Nonstat => glr_nonstat(model, frames),
    }
}

/// `ρ = 1 - det R̄ / det diag R̄`, evaluated on the normalised correlation.
pub fn cyclo_degree(cov: &AugmentedMatrix) -> Result<f64> {
    let full = cov.full();
    let diag = positive_diagonal(&full)?;
    let scale: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let corr = CMatrix::from_fn(full.nrows(), full.ncols(), |i, k| {
        full[(i, k)] * (scale[i] * scale[k])
    });
    let (values, _) = linalg::eigh(&corr);
    let det: f64 = values.iter().map(|v| v.max(0.0)).product();
    Ok((1.0 - det).clamp(0.0, 1.0))
}

/// How the degrees of freedom of the reference chi-squared law are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DofMode {
    /// `NM`, `(3N²M² - NM)/2`, `(3N²M² + NM)/2`.
    Paper,
    /// Mean of the statistic over `trials` null datasets of `frames` frames.
    Calibrated {
        frames: usize,
        trials: usize,
        seed: u64,
    },
}

pub fn closed_form_dof(kind: TestKind, n: usize, m: usize) -> f64 {
    let nm = (n * m) as f64;
    match kind {
        TestKind::Harmonic => nm,
        TestKind::Cyclo => (3.0 * nm * nm - nm) / 2.0,
        TestKind::Nonstat => (3.0 * nm * nm + nm) / 2.0,
    }
}

/// Number of free real parameters removed by each null hypothesis:
/// `2MN`, `2M²N²` and `2M²N² + 2MN`.
pub fn parameter_count_dof(kind: TestKind, n: usize, m: usize) -> f64 {
    let nm = (n * m) as f64;
    match kind {
        TestKind::Harmonic => 2.0 * nm,
        TestKind::Cyclo => 2.0 * nm * nm,
        TestKind::Nonstat => 2.0 * nm * nm + 2.0 * nm,
    }
}

pub fn dof(kind: TestKind, n: usize, m: usize, mode: DofMode) -> Result<f64> {
    if n == 0 || m == 0 {
        return invalid("N and M must be positive");
    }
    match mode {
        DofMode::Paper => Ok(closed_form_dof(kind, n, m)),
        DofMode::Calibrated {
            frames,
            trials,
            seed,
        } => calibrate_dof(kind, &FrameConfig::new(m, n)?, frames, trials, seed),
    }
}

/// Statistics of `trials` datasets drawn from the white, proper null model.
/// All three statistics are invariant to the null's free parameters, so this
/// null is representative.
pub fn null_statistics(
    kind: TestKind,
    cfg: &FrameConfig,
    frames: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let null = make_wss(cfg, &vec![1.0; cfg.dim()])?;
    monte_carlo_statistics(kind, &null, frames, trials, seed, 0)
}

pub fn calibrate_dof(
    kind: TestKind,
    cfg: &FrameConfig,
    frames: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials < 2 {
        return invalid("calibration needs at least 2 trials");
    }
    let stats = null_statistics(kind, cfg, frames, trials, seed)?;
    Ok(stats.iter().sum::<f64>() / stats.len() as f64)
}

/// Statistic of each of `trials` datasets drawn from `model`; trial `i` uses
/// stream `(tag << 32) | i`, and results are returned in trial order.
pub fn monte_carlo_statistics(
    kind: TestKind,
    model: &SpectralModel,
    frames: usize,
    trials: usize,
    seed: u64,
    tag: u64,
) -> Result<Vec<f64>> {
    if frames < 2 {
        return Err(Error::InsufficientData {
            frames,
            required: 2,
        });
    }
    let sampler = Sampler::new(model)?;
    let cfg = *model.cfg();
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = SamplerSeed::new(seed, (tag << 32) | i as u64).rng();
            let signal = sampler.sample_signal(frames, &mut rng)?;
            let est = moments_from_projections(cfg, &project_frames(&signal))?;
            glr(kind, &est, frames)
        })
        .collect()
}

fn chi2(nu: f64) -> Result<ChiSquared> {
    if !(nu > 0.0 && nu.is_finite()) {
        return invalid(format!("degrees of freedom must be positive, got {nu}"));
    }
    ChiSquared::new(nu).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Upper-tail probability `P(χ²_ν > λ)`.
pub fn chi2_sf(lambda: f64, nu: f64) -> Result<f64> {
    let dist = chi2(nu)?;
    if lambda.is_nan() {
        return invalid("statistic is NaN");
    }
    if lambda <= 0.0 {
        return Ok(1.0);
    }
    Ok(dist.sf(lambda).clamp(0.0, 1.0))
}

/// `γ` with `P(χ²_ν > γ) = α`.
pub fn chi2_quantile(nu: f64, alpha: f64) -> Result<f64> {
    let dist = chi2(nu)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return invalid(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let mut x = dist.inverse_cdf(1.0 - alpha);
    // Newton polish on the survival function, which keeps tail resolution.
    for _ in 0..20 {
        let pdf = dist.pdf(x);
        if !(pdf > 0.0) {
            break;
        }
        let step = (dist.sf(x) - alpha) / pdf;
        let next = (x + step).max(x * 0.5);
        if (next - x).abs() <= 1e-14 * x.max(1.0) {
            x = next;
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Decision at level `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlrOutcome {
    pub statistic: f64,
    pub dof: f64,
    pub threshold: f64,
    pub p_value: f64,
    pub reject: bool,
}

pub fn decide(lambda: f64, nu: f64, alpha: f64) -> Result<GlrOutcome> {
    let threshold = chi2_quantile(nu, alpha)?;
    Ok(GlrOutcome {
        statistic: lambda,
        dof: nu,
        threshold,
        p_value: chi2_sf(lambda, nu)?,
        reject: lambda > threshold,
    })
}

/// Smallest frame count for which the covariance-based tests are trusted.
pub fn min_frames(cfg: &FrameConfig) -> usize {
    2 * cfg.aug_dim()
}

/// 50 geometric thresholds between the `0.999` and `0.001` upper quantiles of `χ²_ν`.
pub fn default_thresholds(nu: f64) -> Result<Vec<f64>> {
    let lo = chi2_quantile(nu, 0.999)?;
    let hi = chi2_quantile(nu, 0.001)?;
    let n = 50;
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|i| lo * (ratio * i as f64).exp()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub p_fa: f64,
    pub p_d: f64,
}

/// Empirical operating characteristic of one test on one pair of hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub kind: TestKind,
    pub frames: usize,
    pub trials: usize,
    /// Points sorted by ascending threshold.
    pub points: Vec<RocPoint>,
    /// Statistics under the null and the alternative, in trial order.
    pub h0_statistics: Vec<f64>,
    pub h1_statistics: Vec<f64>,
    pub warnings: Vec<String>,
}

fn exceed_fraction(stats: &[f64], gamma: f64) -> f64 {
    stats.iter().filter(|&&v| v > gamma).count() as f64 / stats.len() as f64
}

impl RocCurve {
    /// Detection probability at false-alarm rate `p_fa`, using the empirical
    /// null quantile as threshold (the tightest threshold with rate ≤ `p_fa`).
    pub fn detection_at(&self, p_fa: f64) -> f64 {
        let mut h0 = self.h0_statistics.clone();
        h0.sort_by(|a, b| b.total_cmp(a));
        let allowed = (p_fa * h0.len() as f64 + 1e-9).floor() as usize;
        let gamma = if allowed >= h0.len() {
            f64::NEG_INFINITY
        } else {
            h0[allowed]
        };
        exceed_fraction(&self.h1_statistics, gamma)
    }

    /// Largest amount by which `self` falls below `other` over the `P_FA` grid.
    pub fn dominance_violation(&self, other: &RocCurve, grid: &[f64]) -> f64 {
        grid.iter()
            .map(|&p| other.detection_at(p) - self.detection_at(p))
            .fold(0.0, f64::max)
    }

    /// `max |P_D - P_FA|` over the curve points.
    pub fn diagonal_deviation(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.p_d - p.p_fa).abs())
            .fold(0.0, f64::max)
    }
}

/// Empirical ROC of `kind` for datasets of `frames` frames drawn from `h0`
/// (streams tagged 0) and `h1` (streams tagged 1). Without explicit
/// thresholds the default grid is centred on the mean null statistic.
pub fn roc_curve(
    h0: &SpectralModel,
    h1: &SpectralModel,
    kind: TestKind,
    frames: usize,
    trials: usize,
    thresholds: Option<&[f64]>,
    seed: u64,
) -> Result<RocCurve> {
    if trials < 100 {
        return invalid(format!("at least 100 trials are required, got {trials}"));
    }
    if h0.cfg() != h1.cfg() {
        return invalid("null and alternative models must share a frame configuration");
    }
    let mut warnings = Vec::new();
    let need = min_frames(h0.cfg());
    if frames < need {
        warnings.push(format!(
            "{frames} frames is below the recommended minimum of {need} for a {}-dimensional covariance",
            h0.cfg().aug_dim()
        ));
    }
    let h0_statistics = monte_carlo_statistics(kind, h0, frames, trials, seed, 0)?;
    let h1_statistics = monte_carlo_statistics(kind, h1, frames, trials, seed, 1)?;
    let grid = match thresholds {
        Some(t) => {
            let mut t = t.to_vec();
            t.sort_by(f64::total_cmp);
            t
        }
        None => {
            let nu_hat = h0_statistics.iter().sum::<f64>() / trials as f64;
            default_thresholds(nu_hat.max(1e-3))?
        }
    };
    let points = grid
        .iter()
        .map(|&gamma| RocPoint {
            threshold: gamma,
            p_fa: exceed_fraction(&h0_statistics, gamma),
            p_d: exceed_fraction(&h1_statistics, gamma),
        })
        .collect();
    Ok(RocCurve {
        kind,
        frames,
        trials,
        points,
        h0_statistics,
        h1_statistics,
        warnings,
    })
}

/// White proper noise plus a harmonic mean of random direction with the
/// given `m̄ᴴR̄⁻¹m̄`.
pub fn harmonic_alternative<R: Rng + ?Sized>(
    cfg: &FrameConfig,
    target_snr: f64,
    rng: &mut R,
) -> Result<SpectralModel> {
    if !(target_snr >= 0.0 && target_snr.is_finite()) {
        return invalid("SNR must be nonnegative and finite");
    }
    let d = cfg.dim();
    let dir = CVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    // With R̄ = I the augmented quadratic form is 2‖c‖².
    let scale = (target_snr / 2.0).sqrt() / dir.norm();
    let null = make_wss(cfg, &vec![1.0; d])?;
    null.with_mean(AugmentedVector::from_top(dir * c(scale)))
}

/// A random unit-diagonal augmented correlation.
pub fn random_augmented_correlation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> AugmentedMatrix {
    let cov = random_augmented_covariance(dim, rng);
    let s: Vec<f64> = (0..dim).map(|i| 1.0 / cov.r()[(i, i)].re.sqrt()).collect();
    let r = CMatrix::from_fn(dim, dim, |i, k| cov.r()[(i, k)] * (s[i] * s[k]));
    let p = CMatrix::from_fn(dim, dim, |i, k| cov.p()[(i, k)] * (s[i] * s[k]));
    AugmentedMatrix::new(r, p).expect("scaling preserves structure")
}

/// Zero-mean model `(1 - s) I + s S` with `s` chosen so that its degree of
/// cyclostationarity equals `rho`, where `S` is a random unit-diagonal
/// augmented correlation.
pub fn cyclo_alternative<R: Rng + ?Sized>(
    cfg: &FrameConfig,
    rho: f64,
    rng: &mut R,
) -> Result<SpectralModel> {
    if !(0.0..1.0).contains(&rho) {
        return invalid(format!("rho must lie in [0, 1), got {rho}"));
    }
    let d = cfg.dim();
    let target = random_augmented_correlation(d, rng);
    let blend = |s: f64| -> Result<AugmentedMatrix> {
        let eye = CMatrix::identity(d, d);
        AugmentedMatrix::new(&eye * c(1.0 - s) + target.r() * c(s), target.p() * c(s))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if cyclo_degree(&blend(1.0)?)? < rho {
        return Err(Error::Numerical(format!(
            "random correlation cannot reach rho = {rho}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cyclo_degree(&blend(mid)?)? < rho {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let cov = blend(if rho == 0.0 { 0.0 } else { 0.5 * (lo + hi) })?;
    SpectralModel::new(*cfg, AugmentedVector::zeros(d), cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_frame_config;
    use crate::synthesis::random_model;
    use proptest::prelude::*;
    use rand::Rng;

    fn scalar_model(mean: Complex64, r: f64, p: Complex64) -> SpectralModel {
        let cfg = make_frame_config(1, 1).unwrap();
        SpectralModel::new(
            cfg,
            AugmentedVector::from_top(CVector::from_element(1, mean)),
            AugmentedMatrix::new(
                CMatrix::from_element(1, 1, c(r)),
                CMatrix::from_element(1, 1, p),
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn harmonic_examples() {
        let zero = scalar_model(c(0.0), 1.0, c(0.2));
        assert_eq!(glr_harmonic(&zero, 100).unwrap(), 0.0);
        let m = scalar_model(Complex64::new(0.3, 0.4), 1.0, c(0.0));
        assert!((snr(m.mean(), m.cov()).unwrap() - 0.5).abs() < 1e-14);
        assert!((glr_harmonic(&m, 10).unwrap() - 5.0).abs() < 1e-12);
        let m2 = scalar_model(Complex64::new(0.6, 0.8), 1.0, c(0.0));
        let ratio = snr(m2.mean(), m2.cov()).unwrap() / snr(m.mean(), m.cov()).unwrap();
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn cyclo_examples() {
        let diag = scalar_model(c(0.0), 2.0, c(0.0));
        assert!(glr_cyclo(&diag, 500).unwrap().abs() < 1e-12);
        let half = scalar_model(c(0.0), 1.0, c(0.5));
        let expected = 100.0 * -(0.75_f64.ln());
        assert!((glr_cyclo(&half, 100).unwrap() - expected).abs() < 1e-10);
        let mut last = -1.0;
        for i in 0..10 {
            let v = glr_cyclo(&scalar_model(c(0.0), 1.0, c(0.1 * i as f64)), 50).unwrap();
            assert!(v > last);
            last = v;
        }
        let bad = scalar_model(c(0.0), 0.0, c(0.0));
        assert!(matches!(glr_cyclo(&bad, 10), Err(Error::Numerical(_))));
    }

    #[test]
    fn nonstat_examples() {
        let diag = scalar_model(c(0.0), 2.0, c(0.0));
        assert!(glr_nonstat(&diag, 100).unwrap().abs() < 1e-12);
        let cyclo = scalar_model(c(0.0), 1.0, Complex64::new(0.3, 0.2));
        assert_eq!(
            glr_nonstat(&cyclo, 40).unwrap(),
            glr_cyclo(&cyclo, 40).unwrap()
        );
        let mean = Complex64::new(0.7, -0.2);
        let m = scalar_model(mean, 2.0, c(0.0));
        let expected = 30.0 * 2.0 * mean.norm_sqr() / 2.0;
        assert!((glr_nonstat(&m, 30).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_form_dof_examples() {
        assert_eq!(dof(TestKind::Harmonic, 1, 2, DofMode::Paper).unwrap(), 2.0);
        assert_eq!(dof(TestKind::Cyclo, 1, 1, DofMode::Paper).unwrap(), 1.0);
        assert_eq!(dof(TestKind::Nonstat, 1, 1, DofMode::Paper).unwrap(), 2.0);
        assert!("bogus".parse::<TestKind>().is_err());
        for kind in TestKind::ALL {
            assert_eq!(kind.name().parse::<TestKind>().unwrap(), kind);
        }
    }

    #[test]
    fn chi2_examples() {
        assert!((chi2_quantile(2.0, 0.5).unwrap() - 2.0 * 2.0_f64.ln()).abs() < 1e-10);
        assert!((chi2_quantile(1.0, 0.05).unwrap() - 3.841458820694124).abs() < 1e-9);
        assert!((chi2_quantile(2.0, 0.05).unwrap() - 5.991464547107979).abs() < 1e-9);
        assert!(chi2_quantile(2.0, 0.0).is_err());
        assert!(chi2_quantile(2.0, 1.0).is_err());
        assert!(chi2_quantile(0.0, 0.5).is_err());
        assert_eq!(chi2_sf(0.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn decide_examples() {
        let out = decide(0.0, 2.0, 0.1).unwrap();
        assert!(!out.reject);
        assert_eq!(out.p_value, 1.0);
        let gamma = chi2_quantile(2.0, 0.1).unwrap();
        assert!(decide(gamma + 1e-9, 2.0, 0.1).unwrap().reject);
        assert!(!decide(gamma, 2.0, 0.1).unwrap().reject);
    }

    #[test]
    fn degree_examples() {
        let diag = scalar_model(c(0.0), 3.0, c(0.0));
        assert_eq!(cyclo_degree(diag.cov()).unwrap(), 0.0);
        let rect = scalar_model(c(0.0), 2.0, Complex64::from_polar(2.0, 0.4));
        assert!((cyclo_degree(rect.cov()).unwrap() - 1.0).abs() < 1e-8);
        let half = scalar_model(c(0.0), 1.0, c(0.5));
        assert!((cyclo_degree(half.cov()).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn cyclo_alternative_hits_target() {
        let cfg = make_frame_config(1, 3).unwrap();
        let mut rng = SamplerSeed::new(1, 0).rng();
        for rho in [0.0, 0.1, 0.25, 0.5] {
            let model = cyclo_alternative(&cfg, rho, &mut rng).unwrap();
            assert!((cyclo_degree(model.cov()).unwrap() - rho).abs() < 1e-9);
        }
        let h = harmonic_alternative(&cfg, 0.3, &mut rng).unwrap();
        assert!((snr(h.mean(), h.cov()).unwrap() - 0.3).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn statistics_are_nonnegative_and_ordered(m in 1usize..3, n in 1usize..3, seed in any::<u64>(), f in 1usize..1000) {
            let cfg = make_frame_config(m, n).unwrap();
            let model = random_model(&cfg, &mut SamplerSeed::new(seed, 0).rng());
            let h = glr_harmonic(&model, f).unwrap();
            let cy = glr_cyclo(&model, f).unwrap();
            let ns = glr_nonstat(&model, f).unwrap();
            prop_assert!(h >= 0.0 && cy >= 0.0 && ns >= 0.0);
            prop_assert!(ns >= cy);
            prop_assert!((h - f as f64 * snr(model.mean(), model.cov()).unwrap()).abs() <= 1e-10 * h.max(1.0));
        }

        #[test]
        fn degree_is_scale_invariant(m in 1usize..3, n in 1usize..3, seed in any::<u64>()) {
            let cfg = make_frame_config(m, n).unwrap();
            let mut rng = SamplerSeed::new(seed, 0).rng();
            let cov = random_augmented_covariance(cfg.dim(), &mut rng);
            let scale: Vec<f64> = (0..cfg.dim()).map(|_| rng.random_range(0.1..10.0)).collect();
            let dm = CMatrix::from_diagonal(&CVector::from_iterator(cfg.dim(), scale.iter().map(|&s| c(s))));
            let scaled = cov.congruence(&dm, &CMatrix::zeros(cfg.dim(), cfg.dim())).unwrap();
            let a = cyclo_degree(&cov).unwrap();
            let b = cyclo_degree(&scaled).unwrap();
            prop_assert!((a - b).abs() < 1e-8);
        }

        #[test]
        fn snr_invariant_under_widely_linear_maps(d in 1usize..4, seed in any::<u64>()) {
            let mut rng = SamplerSeed::new(seed, 0).rng();
            let cov = random_augmented_covariance(d, &mut rng);
            let mean = AugmentedVector::from_top(CVector::from_fn(d, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }));
            let g = |rng: &mut rand_chacha::ChaCha8Rng| CMatrix::from_fn(d, d, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            }) * c(0.3);
            let a = CMatrix::identity(d, d) + g(&mut rng);
            let b = g(&mut rng);
            let mean2 = AugmentedVector::from_top(&a * mean.top() + &b * mean.top().conjugate());
            let cov2 = cov.congruence(&a, &b).unwrap();
            let s1 = snr(&mean, &cov).unwrap();
            let s2 = snr(&mean2, &cov2).unwrap();
            prop_assert!((s1 - s2).abs() <= 1e-8 * s1.max(1.0));
        }

        #[test]
        fn chi2_roundtrip(nu in 0.5f64..300.0, alpha in 0.001f64..0.999) {
            let q = chi2_quantile(nu, alpha).unwrap();
            prop_assert!((chi2_sf(q, nu).unwrap() - alpha).abs() < 1e-9);
        }
    }
}
