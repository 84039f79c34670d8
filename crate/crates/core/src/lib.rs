//! Augmented spectral analysis of multivariate cyclostationary signals.
//!
//! A real `N`-channel signal is cut into frames of odd length `L = 2M + 1`;
//! each frame is described by an `MN`-dimensional complex time-spectrum whose
//! Hermitian covariance `R` and complementary covariance `P` capture
//! second-order cyclostationarity at the `M` analysis bins.

pub mod canonical;
pub mod detect;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod spectral;
pub mod synthesis;

pub use canonical::{
    canonical_coords, canonical_expand, circularity_spectrum, coherence, mmse_tfr,
    mmse_tfr_complex, sut, takagi, CanonicalDecomposition, MmseEstimate,
};
pub use detect::{
    chi2_quantile, chi2_sf, cyclo_degree, decide, dof, glr, glr_cyclo, glr_harmonic, glr_nonstat,
    roc_curve, snr, DofMode, GlrOutcome, RocCurve, RocPoint, TestKind,
};
pub use error::{Error, Result};
pub use moments::{
    absolute_moments, consistency_study, estimate_moments, estimator_covariance_iid, ml_refine,
    temporal_autoconvolution, temporal_autocovariance, time_domain_log_likelihood,
    time_varying_stats, ConsistencyReport, EstimatorCovariance, MlRefinement, SpectralModel,
    TimeVaryingStats,
};
pub use spectral::{
    basis_at, expand, from_real_composite, make_frame_config, project_frame, to_real_composite,
    validate_augmented, AugmentedDiagnostics, AugmentedMatrix, AugmentedVector, FrameConfig,
    FrequencyGrid, RealSignal, SpectralBasis,
};
pub use synthesis::{
    make_general_cyclo, make_harmonic, make_pure_cyclo, make_wss, sample_signal, sample_tfr,
    widely_linear_cholesky, Sampler, SamplerSeed, WidelyLinearFactor,
};
