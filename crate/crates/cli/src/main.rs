mod format;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use augspec::detect::{cyclo_alternative, harmonic_alternative, parameter_count_dof};
use augspec::linalg::CMatrix;
use augspec::{
    circularity_spectrum, cyclo_degree, decide, dof, estimate_moments, glr, make_frame_config,
    make_general_cyclo, make_harmonic, make_pure_cyclo, make_wss, ml_refine, roc_curve,
    sample_signal, snr, sut, AugmentedVector, DofMode, FrameConfig, RealSignal, SamplerSeed,
    SpectralModel, TestKind,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::format::{validation, Invalid, Pair, FORMAT_VERSION};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

/// Augmented spectral analysis of multivariate cyclostationary signals.
#[derive(Parser)]
#[command(name = "augspec", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a real signal from a model file or a built-in constructor.
    Synth(SynthArgs),
    /// Estimate the augmented spectral moments of a signal.
    Estimate(EstimateArgs),
    /// Strongly-uncorrelating transform and circularity spectrum of a model.
    Sut(SutArgs),
    /// Run the GLR tests on a signal or an estimated model.
    Detect(DetectArgs),
    /// Monte Carlo ROC curves for one test over a sweep of alternatives.
    Roc(RocArgs),
    /// Empirical estimator variances against frame count.
    Consistency(ConsistencyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelClass {
    Harmonic,
    Wss,
    PureCyclo,
    GeneralCyclo,
}

#[derive(Args)]
struct SynthArgs {
    /// Model document to sample from instead of a constructor.
    #[arg(long, conflicts_with = "class")]
    model: Option<PathBuf>,
    #[arg(long, value_enum)]
    class: Option<ModelClass>,
    #[arg(long, default_value_t = 1)]
    bins: usize,
    #[arg(long, default_value_t = 1)]
    channels: usize,
    #[arg(long, default_value_t = 100)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    /// Analysis bin for the harmonic and cyclostationary constructors.
    #[arg(long, default_value_t = 1)]
    bin: usize,
    /// Harmonic amplitude.
    #[arg(long, default_value_t = 1.0)]
    amp: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phase: f64,
    /// Spectral power at the active bin (every bin for `wss`).
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Complementary magnitude for `general-cyclo`; at most `power`.
    #[arg(long, default_value_t = 0.5)]
    pseudo: f64,
    /// Power of white proper noise added to the model.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    /// Bins per frame; read from the signal header when omitted.
    #[arg(long)]
    bins: Option<usize>,
    /// Refine the estimate by time-domain maximum likelihood.
    #[arg(long)]
    ml_refine: bool,
    #[arg(long, default_value_t = augspec::moments::ML_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = augspec::moments::ML_TOL)]
    tol: f64,
    /// Model document destination; the summary goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SutArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestChoice {
    Harmonic,
    Cyclo,
    Nonstat,
    All,
}

impl TestChoice {
    fn kinds(self) -> Vec<TestKind> {
        match self {
            TestChoice::Harmonic => vec![TestKind::Harmonic],
            TestChoice::Cyclo => vec![TestKind::Cyclo],
            TestChoice::Nonstat => vec![TestKind::Nonstat],
            TestChoice::All => TestKind::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DofChoice {
    /// `NM`, `(3N²M² - NM)/2`, `(3N²M² + NM)/2`.
    Paper,
    /// Real parameter counts `2MN`, `2M²N²`, `2M²N² + 2MN`.
    Parameters,
    /// Monte Carlo mean of the statistic under white proper noise.
    Calibrated,
}

#[derive(Args)]
struct DetectArgs {
    /// Signal file to test.
    #[arg(long, required_unless_present = "model", conflicts_with = "model")]
    input: Option<PathBuf>,
    /// Model document treated as an estimate from `--frames` frames.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    /// Frame count behind `--model`.
    #[arg(long)]
    frames: Option<usize>,
    #[arg(long, value_enum, default_value = "all")]
    test: TestChoice,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, value_enum, default_value = "paper")]
    dof: DofChoice,
    /// Null datasets used by `--dof calibrated`.
    #[arg(long, default_value_t = 2000)]
    calibration_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Sweep {
    Snr,
    Rho,
}

#[derive(Args)]
struct RocArgs {
    #[arg(long, value_enum, default_value = "harmonic")]
    test: TestChoice,
    /// Swept parameter; defaults to `rho` for the cyclostationarity test and `snr` otherwise.
    #[arg(long, value_enum)]
    sweep: Option<Sweep>,
    #[arg(long, default_value_t = 1)]
    bins: usize,
    #[arg(long, default_value_t = 10)]
    channels: usize,
    #[arg(long, default_value_t = 500)]
    frames: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// SNR values in dB for an SNR sweep.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "-20,-15,-10,-5,0"
    )]
    snr_db: Vec<f64>,
    /// Degrees of cyclostationarity for a rho sweep.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
    rho: Vec<f64>,
    /// Background degree of cyclostationarity during an SNR sweep.
    #[arg(long, default_value_t = 0.0)]
    background_rho: f64,
    /// Reports detection probability at this false-alarm rate.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConsistencyArgs {
    /// Model to sample; defaults to a general cyclostationary model with a mean.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    bins: usize,
    #[arg(long, default_value_t = 1)]
    channels: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "10,100,1000,10000,100000"
    )]
    frames: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes `text` to `path` through a sibling temporary file, or to stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".partial");
            let tmp = PathBuf::from(tmp);
            fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, path).with_context(|| format!("writing {}", path.display()))
        }
    }
}

fn ensure_distinct(input: &Path, out: Option<&Path>) -> Result<()> {
    if out == Some(input) {
        bail!(validation(format!(
            "output path {} is also an input",
            input.display()
        )));
    }
    Ok(())
}

fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        bail!(validation(format!("--{name} must be positive")));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!(validation(format!(
            "--alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn load_signal(path: &Path, bins: Option<usize>) -> Result<RealSignal> {
    let file = format::read_signal(path)?;
    let bins = bins.or(file.bins).ok_or_else(|| {
        anyhow!(validation(
            "--bins is required when the signal header omits it".into()
        ))
    })?;
    let cfg = FrameConfig::new(bins, file.samples.ncols())?;
    Ok(RealSignal::new(file.samples, cfg)?)
}

fn constructor_model(
    args: &SynthArgs,
    class: ModelClass,
    cfg: &FrameConfig,
) -> Result<SpectralModel> {
    let d = cfg.dim();
    let model = match class {
        ModelClass::Harmonic => make_harmonic(cfg, args.bin, args.amp, args.phase)?,
        ModelClass::Wss => make_wss(cfg, &vec![args.power; d])?,
        ModelClass::PureCyclo => make_pure_cyclo(cfg, args.bin, args.power, args.phase)?,
        ModelClass::GeneralCyclo => {
            if args.bin == 0 || args.bin > cfg.num_bins() {
                bail!(validation(format!(
                    "--bin must lie in 1..={}",
                    cfg.num_bins()
                )));
            }
            let n = cfg.num_channels();
            let mut r = CMatrix::zeros(d, d);
            let mut p = CMatrix::zeros(d, d);
            let pseudo = Complex64::from_polar(args.pseudo, args.phase);
            for ch in 0..n {
                let i = (args.bin - 1) * n + ch;
                r[(i, i)] = Complex64::new(args.power, 0.0);
                p[(i, i)] = pseudo;
            }
            make_general_cyclo(cfg, r, p)?
        }
    };
    if args.noise > 0.0 {
        Ok(model.superpose(&make_wss(cfg, &vec![args.noise; d])?)?)
    } else {
        Ok(model)
    }
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    check_positive("frames", args.frames)?;
    let model = match (&args.model, args.class) {
        (Some(path), _) => {
            ensure_distinct(path, args.out.as_deref())?;
            format::read_model(path)?
        }
        (None, class) => {
            let cfg = make_frame_config(args.bins, args.channels)?;
            constructor_model(args, class.unwrap_or(ModelClass::Harmonic), &cfg)?
        }
    };
    let mut rng = SamplerSeed::new(args.seed, args.stream).rng();
    let signal = sample_signal(&model, args.frames, &mut rng)?;
    emit(
        args.out.as_deref(),
        &format::write_signal(&signal, Some((args.seed, args.stream))),
    )
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_estimate(args: &EstimateArgs) -> Result<()> {
    ensure_distinct(&args.input, args.out.as_deref())?;
    let signal = load_signal(&args.input, args.bins)?;
    let plain = estimate_moments(&signal)?;
    let mut summary = String::new();
    let model = if args.ml_refine {
        let refined = ml_refine(&signal, &plain, args.max_iter, args.tol)?;
        let _ = writeln!(summary, "ml_iterations\t{}", refined.iterations);
        let _ = writeln!(summary, "ml_converged\t{}", refined.converged);
        let _ = writeln!(summary, "log_likelihood\t{:.10e}", refined.log_likelihood);
        refined.model
    } else {
        plain
    };
    let cfg = model.cfg();
    let mut head = String::new();
    let _ = writeln!(head, "bins\t{}", cfg.num_bins());
    let _ = writeln!(head, "channels\t{}", cfg.num_channels());
    let _ = writeln!(head, "frames\t{}", signal.num_frames());
    // Zero or rank-deficient estimates leave these undefined.
    let snr_text =
        snr(model.mean(), model.cov()).map_or("undefined".into(), |v| format!("{v:.6e}"));
    let rho_text = cyclo_degree(model.cov()).map_or("undefined".into(), |v| format!("{v:.6}"));
    let kappa_text = circularity_spectrum(&model).map_or("undefined".into(), |k| join(&k));
    let _ = writeln!(head, "snr\t{snr_text}");
    let _ = writeln!(head, "rho\t{rho_text}");
    let _ = writeln!(head, "kappa\t{kappa_text}");
    head.push_str(&summary);
    let doc = format::model_json(&model, None);
    match &args.out {
        Some(path) => {
            emit(Some(path), &doc)?;
            print!("{head}");
        }
        None => {
            print!("{doc}");
            eprint!("{head}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SutDocument {
    format: &'static str,
    version: u32,
    bins: usize,
    channels: usize,
    seed: Option<u64>,
    kappa: Vec<f64>,
    regularised: bool,
    psi: Vec<Vec<Pair>>,
    v: Vec<Vec<Pair>>,
}

fn cmd_sut(args: &SutArgs) -> Result<()> {
    ensure_distinct(&args.model, args.out.as_deref())?;
    let model = format::read_model(&args.model)?;
    let decomp = sut(model.cov().r(), model.cov().p())?;
    let doc = SutDocument {
        format: "augspec-sut",
        version: FORMAT_VERSION,
        bins: model.cfg().num_bins(),
        channels: model.cfg().num_channels(),
        seed: None,
        kappa: decomp.kappa.clone(),
        regularised: decomp.regularised,
        psi: format::pair_matrix(&decomp.psi),
        v: format::pair_matrix(&decomp.v),
    };
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)
}

#[derive(Serialize)]
struct OutcomeRecord {
    test: &'static str,
    statistic: f64,
    dof: f64,
    threshold: f64,
    p_value: f64,
    reject: bool,
}

#[derive(Serialize)]
struct DetectReport {
    format: &'static str,
    version: u32,
    bins: usize,
    channels: usize,
    frames: usize,
    seed: u64,
    alpha: f64,
    dof_mode: &'static str,
    outcomes: Vec<OutcomeRecord>,
}

fn cmd_detect(args: &DetectArgs) -> Result<()> {
    check_alpha(args.alpha)?;
    check_positive("calibration-trials", args.calibration_trials)?;
    let (model, frames) = match (&args.input, &args.model) {
        (Some(path), _) => {
            ensure_distinct(path, args.out.as_deref())?;
            let signal = load_signal(path, args.bins)?;
            (estimate_moments(&signal)?, signal.num_frames())
        }
        (None, Some(path)) => {
            ensure_distinct(path, args.out.as_deref())?;
            let frames = args
                .frames
                .ok_or_else(|| anyhow!(validation("--frames is required with --model".into())))?;
            check_positive("frames", frames)?;
            (format::read_model(path)?, frames)
        }
        (None, None) => bail!(validation("one of --input or --model is required".into())),
    };
    let cfg = *model.cfg();
    let (n, m) = (cfg.num_channels(), cfg.num_bins());
    let (mode_name, mode) = match args.dof {
        DofChoice::Paper => ("paper", Some(DofMode::Paper)),
        DofChoice::Parameters => ("parameters", None),
        DofChoice::Calibrated => (
            "calibrated",
            Some(DofMode::Calibrated {
                frames,
                trials: args.calibration_trials,
                seed: args.seed,
            }),
        ),
    };
    let mut outcomes = Vec::new();
    for kind in args.test.kinds() {
        let nu = match mode {
            Some(mode) => dof(kind, n, m, mode)?,
            None => parameter_count_dof(kind, n, m),
        };
        let outcome = decide(glr(kind, &model, frames)?, nu, args.alpha)?;
        outcomes.push(OutcomeRecord {
            test: kind.name(),
            statistic: outcome.statistic,
            dof: outcome.dof,
            threshold: outcome.threshold,
            p_value: outcome.p_value,
            reject: outcome.reject,
        });
    }
    let report = DetectReport {
        format: "augspec-detect",
        version: FORMAT_VERSION,
        bins: m,
        channels: n,
        frames,
        seed: args.seed,
        alpha: args.alpha,
        dof_mode: mode_name,
        outcomes,
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    emit(args.out.as_deref(), &text)
}

fn with_snr(
    model: &SpectralModel,
    direction: &AugmentedVector,
    target: f64,
) -> Result<SpectralModel> {
    let base = snr(direction, model.cov())?;
    let scale = Complex64::new((target / base).sqrt(), 0.0);
    Ok(model.with_mean(AugmentedVector::from_top(direction.top() * scale))?)
}

fn cmd_roc(args: &RocArgs) -> Result<()> {
    check_positive("frames", args.frames)?;
    check_positive("trials", args.trials)?;
    check_alpha(args.alpha)?;
    let kind = match args.test {
        TestChoice::Harmonic => TestKind::Harmonic,
        TestChoice::Cyclo => TestKind::Cyclo,
        TestChoice::Nonstat => TestKind::Nonstat,
        TestChoice::All => bail!(validation("roc runs one test at a time".into())),
    };
    let sweep = args.sweep.unwrap_or(if kind == TestKind::Cyclo {
        Sweep::Rho
    } else {
        Sweep::Snr
    });
    let valid = matches!(
        (kind, sweep),
        (TestKind::Harmonic, Sweep::Snr) | (TestKind::Cyclo, Sweep::Rho) | (TestKind::Nonstat, _)
    );
    if !valid {
        bail!(validation(format!(
            "the {kind} test cannot sweep this parameter"
        )));
    }
    let values = match sweep {
        Sweep::Snr => &args.snr_db,
        Sweep::Rho => &args.rho,
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        bail!(validation(
            "sweep values must be finite and nonempty".into()
        ));
    }
    if sweep == Sweep::Rho && values.iter().any(|r| !(0.0..1.0).contains(r)) {
        bail!(validation("rho values must lie in [0, 1)".into()));
    }
    if !(0.0..1.0).contains(&args.background_rho) {
        bail!(validation("--background-rho must lie in [0, 1)".into()));
    }
    let cfg = make_frame_config(args.bins, args.channels)?;
    let null = make_wss(&cfg, &vec![1.0; cfg.dim()])?;
    let alt_seed = args.seed.wrapping_add(1);
    let alternatives: Vec<SpectralModel> = match sweep {
        Sweep::Snr => {
            let direction =
                harmonic_alternative(&cfg, 1.0, &mut SamplerSeed::new(alt_seed, 0).rng())?
                    .mean()
                    .clone();
            let background = if args.background_rho > 0.0 {
                cyclo_alternative(
                    &cfg,
                    args.background_rho,
                    &mut SamplerSeed::new(alt_seed, 1).rng(),
                )?
            } else {
                null.clone()
            };
            values
                .iter()
                .map(|db| with_snr(&background, &direction, 10f64.powf(db / 10.0)))
                .collect::<Result<_>>()?
        }
        Sweep::Rho => values
            .iter()
            .map(|&rho| {
                Ok(cyclo_alternative(
                    &cfg,
                    rho,
                    &mut SamplerSeed::new(alt_seed, 1).rng(),
                )?)
            })
            .collect::<Result<_>>()?,
    };
    let sweep_name = match sweep {
        Sweep::Snr => "snr_db",
        Sweep::Rho => "rho",
    };
    let mut out = String::new();
    let _ = writeln!(out, "# augspec-roc v1");
    let _ = writeln!(
        out,
        "# test={kind} bins={} channels={} frames={} trials={} background_rho={}",
        args.bins, args.channels, args.frames, args.trials, args.background_rho
    );
    let _ = writeln!(out, "# seed={}", args.seed);
    let mut tail = String::new();
    let _ = writeln!(out, "test,{sweep_name},threshold,p_fa,p_d");
    for (value, h1) in values.iter().zip(&alternatives) {
        let curve = roc_curve(&null, h1, kind, args.frames, args.trials, None, args.seed)?;
        for w in &curve.warnings {
            eprintln!("warning: {w}");
        }
        for p in &curve.points {
            let _ = writeln!(
                out,
                "{kind},{value},{:.10e},{},{}",
                p.threshold, p.p_fa, p.p_d
            );
        }
        let _ = writeln!(
            tail,
            "# p_d_at_p_fa {sweep_name}={value} alpha={} p_d={}",
            args.alpha,
            curve.detection_at(args.alpha)
        );
    }
    out.push_str(&tail);
    emit(args.out.as_deref(), &out)
}

fn default_consistency_model(cfg: &FrameConfig) -> Result<SpectralModel> {
    let d = cfg.dim();
    let model = make_general_cyclo(
        cfg,
        CMatrix::identity(d, d),
        CMatrix::identity(d, d) * Complex64::new(0.5, 0.0),
    )?;
    Ok(model.with_mean(AugmentedVector::from_top(
        augspec::linalg::CVector::from_element(d, Complex64::new(0.5, 0.0)),
    ))?)
}

fn cmd_consistency(args: &ConsistencyArgs) -> Result<()> {
    check_positive("trials", args.trials)?;
    if args.frames.is_empty() || args.frames.iter().any(|&f| f < 2) {
        bail!(validation(
            "--frames must list frame counts of at least 2".into()
        ));
    }
    let model = match &args.model {
        Some(path) => {
            ensure_distinct(path, args.out.as_deref())?;
            format::read_model(path)?
        }
        None => default_consistency_model(&make_frame_config(args.bins, args.channels)?)?,
    };
    let report = augspec::consistency_study(&model, &args.frames, args.trials, args.seed)?;
    let cfg = model.cfg();
    let mut out = String::new();
    let _ = writeln!(out, "# augspec-consistency v1");
    let _ = writeln!(
        out,
        "# bins={} channels={} trials={}",
        cfg.num_bins(),
        cfg.num_channels(),
        report.trials
    );
    let _ = writeln!(out, "# seed={}", args.seed);
    let _ = writeln!(out, "estimator,frames,empirical_var,predicted_var,slope");
    let rows = [
        (
            "mean",
            &report.mean_var,
            &report.predicted_mean_var,
            report.mean_slope,
        ),
        ("r", &report.r_var, &report.predicted_r_var, report.r_slope),
        ("p", &report.p_var, &report.predicted_p_var, report.p_slope),
    ];
    for (name, empirical, predicted, slope) in rows {
        for (i, f) in report.frames.iter().enumerate() {
            let _ = writeln!(
                out,
                "{name},{f},{:.10e},{:.10e},{slope:.6}",
                empirical[i], predicted[i]
            );
        }
    }
    emit(args.out.as_deref(), &out)
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("AUGSPEC_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            anyhow!(validation(format!(
                "AUGSPEC_THREADS must be a positive integer, got '{value}'"
            )))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| anyhow!(e))
}

fn run(cli: &Cli) -> Result<()> {
    configure_threads()?;
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Sut(a) => cmd_sut(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Roc(a) => cmd_roc(a),
        Command::Consistency(a) => cmd_consistency(a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Invalid>().is_some() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<augspec::Error>() {
            return match e {
                augspec::Error::Numerical(_) | augspec::Error::NotPsd { .. } => EXIT_NUMERICAL,
                _ => EXIT_USAGE,
            };
        }
    }
    EXIT_USAGE
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
