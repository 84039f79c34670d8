//! Sampling of time-spectra and real signals from a [`SpectralModel`], and
//! constructors for the canonical signal classes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, J};
use crate::moments::SpectralModel;
use crate::spectral::{
    expand_frame_into, to_real_composite, AugmentedMatrix, AugmentedVector, FrameConfig,
    RealSignal, PSD_SLACK,
};

/// Seed and stream of the ChaCha8 generator used for all sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SamplerSeed {
    pub seed: u64,
    pub stream: u64,
}

impl SamplerSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Factor `L̄ = [A B; B* A*]` with `L̄L̄ᴴ` equal to the augmented covariance,
/// so that `s = A w + B w*` has that covariance for circular white `w`.
#[derive(Debug, Clone, PartialEq)]
pub struct WidelyLinearFactor {
    pub a: CMatrix,
    pub b: CMatrix,
}

impl WidelyLinearFactor {
    pub fn full(&self) -> CMatrix {
        let d = self.a.nrows();
        let mut out = CMatrix::zeros(2 * d, 2 * d);
        out.view_mut((0, 0), (d, d)).copy_from(&self.a);
        out.view_mut((0, d), (d, d)).copy_from(&self.b);
        out.view_mut((d, 0), (d, d)).copy_from(&self.b.conjugate());
        out.view_mut((d, d), (d, d)).copy_from(&self.a.conjugate());
        out
    }

    /// `(A Aᴴ + B Bᴴ, A Bᵀ + B Aᵀ)`.
    pub fn covariance(&self) -> Result<AugmentedMatrix> {
        let (a, b) = (&self.a, &self.b);
        AugmentedMatrix::new(
            a * a.adjoint() + b * b.adjoint(),
            a * b.transpose() + b * a.transpose(),
        )
    }
}

/// Widely linear square root of an augmented covariance.
///
/// Factors the real composite covariance of `[Re s; Im s]` by Cholesky when
/// it is well conditioned, otherwise by a symmetric eigen square root with
/// round-off negatives clamped to zero.
pub fn widely_linear_cholesky(aug: &AugmentedMatrix) -> Result<WidelyLinearFactor> {
    let d = aug.dim();
    let composite = to_real_composite(aug);
    let (values, vectors) = linalg::eigh_real(&composite);
    let lmax = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let lmin = values.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    let tolerance = PSD_SLACK * lmax.max(1.0);
    if lmin < -tolerance {
        return Err(Error::NotPsd {
            min_eigenvalue: lmin,
            tolerance,
        });
    }
    let g = match (lmin > 1e-12 * lmax)
        .then(|| composite.clone().cholesky())
        .flatten()
    {
        Some(chol) => chol.l(),
        None => {
            let roots = values.map(|v| v.max(0.0).sqrt());
            &vectors * DMatrix::from_diagonal(&roots)
        }
    };
    let block = |r: usize, k: usize| g.view((r * d, k * d), (d, d)).map(c);
    let (g11, g12, g21, g22) = (block(0, 0), block(0, 1), block(1, 0), block(1, 1));
    let s = c(std::f64::consts::FRAC_1_SQRT_2);
    Ok(WidelyLinearFactor {
        a: (&g11 + &g22 + (&g21 - &g12) * J) * s,
        b: (&g11 - &g22 + (&g12 + &g21) * J) * s,
    })
}

/// Precomputed sampler for one model; reusable across draws and threads.
#[derive(Debug, Clone)]
pub struct Sampler {
    cfg: FrameConfig,
    mean: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    table: Vec<Complex64>,
}

impl Sampler {
    pub fn new(model: &SpectralModel) -> Result<Self> {
        let factor = widely_linear_cholesky(model.cov())?;
        let d = model.cfg().dim();
        let row_major = |m: &CMatrix| (0..d * d).map(|i| m[(i / d, i % d)]).collect();
        Ok(Self {
            cfg: *model.cfg(),
            mean: model.mean().top().iter().copied().collect(),
            a: row_major(&factor.a),
            b: row_major(&factor.b),
            table: model.cfg().phasor_table(),
        })
    }

    pub fn cfg(&self) -> &FrameConfig {
        &self.cfg
    }

    fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, w: &mut [Complex64], out: &mut [Complex64]) {
        let d = self.mean.len();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for z in w.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *z = Complex64::new(re * s, im * s);
        }
        for i in 0..d {
            let (ra, rb) = (&self.a[i * d..(i + 1) * d], &self.b[i * d..(i + 1) * d]);
            let mut acc = self.mean[i];
            for k in 0..d {
                acc += ra[k] * w[k] + rb[k] * w[k].conj();
            }
            out[i] = acc;
        }
    }

    pub fn sample_tfr<R: Rng + ?Sized>(&self, rng: &mut R) -> AugmentedVector {
        let d = self.mean.len();
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        let mut top = vec![Complex64::new(0.0, 0.0); d];
        self.draw_into(rng, &mut w, &mut top);
        AugmentedVector::from_top(CVector::from_vec(top))
    }

    /// `F` independent frames, each expanded from a fresh time-spectrum draw.
    pub fn sample_signal<R: Rng + ?Sized>(&self, frames: usize, rng: &mut R) -> Result<RealSignal> {
        if frames == 0 {
            return invalid("number of frames must be at least 1");
        }
        let (l, n, d) = (
            self.cfg.frame_len(),
            self.cfg.num_channels(),
            self.cfg.dim(),
        );
        let mut w = vec![Complex64::new(0.0, 0.0); d];
        let mut top = vec![Complex64::new(0.0, 0.0); d];
        let mut data = vec![0.0; frames * l * n];
        for chunk in data.chunks_mut(l * n) {
            self.draw_into(rng, &mut w, &mut top);
            expand_frame_into(&self.cfg, &self.table, &top, chunk);
        }
        RealSignal::new(DMatrix::from_row_slice(frames * l, n, &data), self.cfg)
    }
}

/// One draw `s = m + A w + B w*` of the time-spectrum.
pub fn sample_tfr<R: Rng + ?Sized>(model: &SpectralModel, rng: &mut R) -> Result<AugmentedVector> {
    Ok(Sampler::new(model)?.sample_tfr(rng))
}

/// A real signal of `frames` independent frames drawn from `model`.
pub fn sample_signal<R: Rng + ?Sized>(
    model: &SpectralModel,
    frames: usize,
    rng: &mut R,
) -> Result<RealSignal> {
    Sampler::new(model)?.sample_signal(frames, rng)
}

fn check_bin(cfg: &FrameConfig, bin: usize) -> Result<()> {
    if bin == 0 || bin > cfg.num_bins() {
        return invalid(format!("bin must lie in 1..={}, got {bin}", cfg.num_bins()));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return invalid(format!("{name} must be positive and finite, got {v}"));
    }
    Ok(())
}

/// Deterministic sinusoid `amplitude·cos(ω_bin t + phase)` in every channel.
pub fn make_harmonic(
    cfg: &FrameConfig,
    bin: usize,
    amplitude: f64,
    phase: f64,
) -> Result<SpectralModel> {
    check_bin(cfg, bin)?;
    check_positive("amplitude", amplitude)?;
    if !phase.is_finite() {
        return invalid("phase must be finite");
    }
    let n = cfg.num_channels();
    // m(t) = (2/√(2M))|c|cos(ωt + φ), so |c| = amplitude·√(M/2).
    let value = Complex64::from_polar(amplitude * (cfg.num_bins() as f64 / 2.0).sqrt(), phase);
    let mut top = CVector::zeros(cfg.dim());
    for ch in 0..n {
        top[(bin - 1) * n + ch] = value;
    }
    SpectralModel::new(
        *cfg,
        AugmentedVector::from_top(top),
        AugmentedMatrix::zeros(cfg.dim()),
    )
}

/// Proper, diagonal spectrum. `spectrum` holds either one power per bin
/// (shared by all channels) or one per (bin, channel) in bin-major order.
pub fn make_wss(cfg: &FrameConfig, spectrum: &[f64]) -> Result<SpectralModel> {
    let (m, d) = (cfg.num_bins(), cfg.dim());
    let n = cfg.num_channels();
    let diag: Vec<f64> = if spectrum.len() == d {
        spectrum.to_vec()
    } else if spectrum.len() == m {
        (0..d).map(|i| spectrum[i / n]).collect()
    } else {
        return invalid(format!(
            "spectrum must have {m} or {d} entries, got {}",
            spectrum.len()
        ));
    };
    for &v in &diag {
        check_positive("spectral power", v)?;
    }
    let r = CMatrix::from_diagonal(&CVector::from_iterator(d, diag.into_iter().map(c)));
    SpectralModel::new(
        *cfg,
        AugmentedVector::zeros(d),
        AugmentedMatrix::new(r, CMatrix::zeros(d, d))?,
    )
}

/// Maximally improper component at one bin: `R = power·I`, `P = power·e^{jθ}·I`.
pub fn make_pure_cyclo(
    cfg: &FrameConfig,
    bin: usize,
    power: f64,
    phase: f64,
) -> Result<SpectralModel> {
    check_bin(cfg, bin)?;
    check_positive("power", power)?;
    if !phase.is_finite() {
        return invalid("phase must be finite");
    }
    let (n, d) = (cfg.num_channels(), cfg.dim());
    let mut r = CMatrix::zeros(d, d);
    let mut p = CMatrix::zeros(d, d);
    let pv = Complex64::from_polar(power, phase);
    for ch in 0..n {
        let i = (bin - 1) * n + ch;
        r[(i, i)] = c(power);
        p[(i, i)] = pv;
    }
    SpectralModel::new(*cfg, AugmentedVector::zeros(d), AugmentedMatrix::new(r, p)?)
}

/// Zero-mean model with arbitrary feasible `(R, P)` satisfying `‖R‖ > ‖P‖ > 0`.
pub fn make_general_cyclo(cfg: &FrameConfig, r: CMatrix, p: CMatrix) -> Result<SpectralModel> {
    let cov = AugmentedMatrix::new(r, p)?;
    let diag = crate::spectral::validate_augmented(&cov);
    if !diag.psd_ok {
        return invalid(format!(
            "augmented covariance is not positive semi-definite (min eigenvalue {:.3e})",
            diag.min_eigenvalue
        ));
    }
    if !(diag.p_norm > 0.0 && diag.r_norm > diag.p_norm) {
        return invalid(format!(
            "need ‖R‖ > ‖P‖ > 0, got ‖R‖ = {:.3e}, ‖P‖ = {:.3e}",
            diag.r_norm, diag.p_norm
        ));
    }
    SpectralModel::new(*cfg, AugmentedVector::zeros(cfg.dim()), cov)
}

/// Random positive definite augmented covariance: a Wishart-like real
/// composite with `2·dim + 2` degrees of freedom, mapped back to `(R, P)`.
pub fn random_augmented_covariance<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> AugmentedMatrix {
    let k = 2 * dim + 2;
    let g = DMatrix::<f64>::from_fn(2 * dim, k, |_, _| rng.sample(StandardNormal));
    let composite = &g * g.transpose() / k as f64;
    crate::spectral::from_real_composite(&composite).expect("composite is symmetric")
}

/// Random model with a random mean and [`random_augmented_covariance`].
pub fn random_model<R: Rng + ?Sized>(cfg: &FrameConfig, rng: &mut R) -> SpectralModel {
    let d = cfg.dim();
    let mean = CVector::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    SpectralModel::new(
        *cfg,
        AugmentedVector::from_top(mean),
        random_augmented_covariance(d, rng),
    )
    .expect("dimensions agree")
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::moments::{estimate_moments, time_varying_stats};
    use crate::spectral::{expand, make_frame_config};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    pub(crate) fn random_model(cfg: &FrameConfig, seed: u64) -> SpectralModel {
        super::random_model(cfg, &mut SamplerSeed::new(seed, 0).rng())
    }

    #[test]
    fn factor_reproduces_covariance() {
        let mut rng = SamplerSeed::new(1, 0).rng();
        for d in 1..6 {
            let cov = random_augmented_covariance(d, &mut rng);
            let f = widely_linear_cholesky(&cov).unwrap();
            let back = f.covariance().unwrap();
            assert!(linalg::max_abs(&(back.full() - cov.full())) < 1e-12);
            let full = f.full();
            assert!(linalg::max_abs(&(&full * full.adjoint() - cov.full())) < 1e-12);
        }
    }

    #[test]
    fn factor_handles_rank_deficient_and_zero() {
        let cfg = make_frame_config(1, 1).unwrap();
        let cyclo = make_pure_cyclo(&cfg, 1, 2.0, 0.7).unwrap();
        let f = widely_linear_cholesky(cyclo.cov()).unwrap();
        assert!(linalg::max_abs(&(f.covariance().unwrap().full() - cyclo.cov().full())) < 1e-12);
        let f = widely_linear_cholesky(&AugmentedMatrix::zeros(3)).unwrap();
        assert_eq!(linalg::max_abs(&f.a), 0.0);
    }

    #[test]
    fn factor_rejects_indefinite() {
        let cov = AugmentedMatrix::new(
            CMatrix::from_element(1, 1, c(1.0)),
            CMatrix::from_element(1, 1, c(1.5)),
        )
        .unwrap();
        assert!(matches!(
            widely_linear_cholesky(&cov),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn same_seed_same_signal() {
        let cfg = make_frame_config(2, 2).unwrap();
        let model = random_model(&cfg, 4);
        let a = sample_signal(&model, 7, &mut SamplerSeed::new(9, 3).rng()).unwrap();
        let b = sample_signal(&model, 7, &mut SamplerSeed::new(9, 3).rng()).unwrap();
        let other = sample_signal(&model, 7, &mut SamplerSeed::new(9, 4).rng()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn zero_covariance_reproduces_mean() {
        let cfg = make_frame_config(2, 1).unwrap();
        let model = make_harmonic(&cfg, 2, 1.3, 0.4).unwrap();
        let signal = sample_signal(&model, 3, &mut SamplerSeed::new(1, 1).rng()).unwrap();
        for t in 0..signal.len() {
            let x = expand(&cfg, model.mean(), t as i64).unwrap();
            assert!((signal.samples()[(t, 0)] - x[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_is_a_cosine() {
        let cfg = make_frame_config(3, 2).unwrap();
        let model = make_harmonic(&cfg, 2, 0.9, -1.0).unwrap();
        let w = 2.0 * PI * 2.0 / 7.0;
        let stats = time_varying_stats(&model, 0..7).unwrap();
        for (t, m) in stats.times.iter().zip(&stats.means) {
            let expected = 0.9 * (w * *t as f64 - 1.0).cos();
            for ch in 0..2 {
                assert!((m[ch] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constructors_validate() {
        let cfg = make_frame_config(2, 1).unwrap();
        assert!(make_harmonic(&cfg, 0, 1.0, 0.0).is_err());
        assert!(make_harmonic(&cfg, 3, 1.0, 0.0).is_err());
        assert!(make_harmonic(&cfg, 1, 0.0, 0.0).is_err());
        assert!(make_wss(&cfg, &[1.0]).is_err());
        assert!(make_wss(&cfg, &[1.0, -1.0]).is_err());
        assert!(make_pure_cyclo(&cfg, 1, -1.0, 0.0).is_err());
        let one = |v: f64| CMatrix::from_element(1, 1, c(v));
        let cfg1 = make_frame_config(1, 1).unwrap();
        assert!(make_general_cyclo(&cfg1, one(1.0), one(0.5)).is_ok());
        assert!(make_general_cyclo(&cfg1, one(1.0), one(0.0)).is_err());
        assert!(make_general_cyclo(&cfg1, one(1.0), one(1.0)).is_err());
        assert!(make_general_cyclo(&cfg1, one(1.0), one(1.2)).is_err());
    }

    #[test]
    fn sample_moments_approach_model() {
        let cfg = make_frame_config(2, 1).unwrap();
        let model = random_model(&cfg, 8);
        let signal = sample_signal(&model, 40_000, &mut SamplerSeed::new(2, 0).rng()).unwrap();
        let est = estimate_moments(&signal).unwrap();
        let scale = linalg::max_abs(&model.cov().full());
        assert!((est.mean().top() - model.mean().top())
            .iter()
            .all(|z| z.norm() < 0.05 * scale.sqrt()));
        assert!(linalg::max_abs(&(est.cov().full() - model.cov().full())) < 0.05 * scale);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn factor_roundtrip_property(d in 1usize..6, seed in any::<u64>()) {
            let cov = random_augmented_covariance(d, &mut SamplerSeed::new(seed, 0).rng());
            let back = widely_linear_cholesky(&cov).unwrap().covariance().unwrap();
            let scale = linalg::max_abs(&cov.full()).max(1.0);
            prop_assert!(linalg::max_abs(&(back.full() - cov.full())) < 1e-10 * scale);
        }

        #[test]
        fn sampled_signal_has_frame_multiple_length(m in 1usize..4, n in 1usize..3, f in 1usize..5, seed in any::<u64>()) {
            let cfg = make_frame_config(m, n).unwrap();
            let model = random_model(&cfg, seed);
            let s = sample_signal(&model, f, &mut SamplerSeed::new(seed, 1).rng()).unwrap();
            prop_assert_eq!(s.len(), f * cfg.frame_len());
            prop_assert_eq!(s.num_frames(), f);
        }
    }
}
