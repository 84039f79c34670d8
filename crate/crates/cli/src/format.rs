//! On-disk formats: signal CSV and model JSON.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use augspec::linalg::{CMatrix, CVector};
use augspec::{
    validate_augmented, AugmentedMatrix, AugmentedVector, FrameConfig, RealSignal, SpectralModel,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const SIGNAL_MAGIC: &str = "# augspec-signal v1";
pub const SIGNAL_PREFIX: &str = "# augspec-signal";
pub const MODEL_FORMAT: &str = "augspec-model";
pub const FORMAT_VERSION: u32 = 1;

/// Rejected input; maps to the usage/validation exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct Invalid(pub String);

pub fn validation(msg: String) -> Invalid {
    Invalid(msg)
}

pub fn write_signal(signal: &RealSignal, seed: Option<(u64, u64)>) -> String {
    let cfg = signal.cfg();
    let n = cfg.num_channels();
    let mut out = String::new();
    let _ = writeln!(out, "{SIGNAL_MAGIC}");
    let _ = writeln!(
        out,
        "# bins={} channels={} frame_len={} frames={}",
        cfg.num_bins(),
        n,
        cfg.frame_len(),
        signal.num_frames()
    );
    match seed {
        Some((s, stream)) => {
            let _ = writeln!(out, "# seed={s} stream={stream}");
        }
        None => {
            let _ = writeln!(out, "# seed=none");
        }
    }
    out.push('t');
    for ch in 1..=n {
        let _ = write!(out, ",x{ch}");
    }
    out.push('\n');
    for (t, row) in signal.samples().row_iter().enumerate() {
        let _ = write!(out, "{t}");
        for v in row.iter() {
            let _ = write!(out, ",{v:.16e}");
        }
        out.push('\n');
    }
    out
}

/// Parsed signal file; `bins` is taken from the header when present.
pub struct SignalFile {
    pub bins: Option<usize>,
    pub samples: DMatrix<f64>,
}

fn header_value(line: &str, key: &str) -> Option<usize> {
    line.trim_start_matches('#')
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(key)?.strip_prefix('=')?.parse().ok())
}

pub fn read_signal(path: &Path) -> Result<SignalFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines().peekable();
    let mut bins = None;
    if let Some(first) = lines.peek() {
        if first.starts_with(SIGNAL_PREFIX) && first.trim() != SIGNAL_MAGIC {
            bail!(validation(format!(
                "unsupported signal format: {}",
                first.trim()
            )));
        }
    }
    while let Some(line) = lines.peek() {
        if !line.starts_with('#') {
            break;
        }
        bins = bins.or_else(|| header_value(line, "bins"));
        lines.next();
    }
    let header = lines
        .next()
        .ok_or_else(|| anyhow!(validation("signal file has no column header".into())))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.first() != Some(&"t") || columns.len() < 2 {
        bail!(validation(format!(
            "expected header t,x1,...,xN, got '{header}'"
        )));
    }
    let n = columns.len() - 1;
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n + 1 {
            bail!(validation(format!(
                "row {} has {} fields, expected {}",
                i + 1,
                fields.len(),
                n + 1
            )));
        }
        for f in &fields[1..] {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| anyhow!(validation(format!("row {}: cannot parse '{f}'", i + 1))))?;
            data.push(v);
        }
        rows += 1;
    }
    Ok(SignalFile {
        bins,
        samples: DMatrix::from_row_slice(rows, n, &data),
    })
}

pub type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn unpair(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn pair_matrix(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|k| pair(m[(i, k)])).collect())
        .collect()
}

fn unpair_matrix(rows: &[Vec<Pair>], d: usize, name: &str) -> Result<CMatrix> {
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        bail!(validation(format!("{name} must be {d} × {d}")));
    }
    Ok(CMatrix::from_fn(d, d, |i, k| unpair(&rows[i][k])))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub version: u32,
    pub bins: usize,
    pub channels: usize,
    pub frame_len: usize,
    pub seed: Option<u64>,
    pub mean: Vec<Pair>,
    pub r: Vec<Vec<Pair>>,
    pub p: Vec<Vec<Pair>>,
}

impl ModelDocument {
    pub fn from_model(model: &SpectralModel, seed: Option<u64>) -> Self {
        let cfg = model.cfg();
        Self {
            format: MODEL_FORMAT.into(),
            version: FORMAT_VERSION,
            bins: cfg.num_bins(),
            channels: cfg.num_channels(),
            frame_len: cfg.frame_len(),
            seed,
            mean: model.mean().top().iter().map(|z| pair(*z)).collect(),
            r: pair_matrix(model.cov().r()),
            p: pair_matrix(model.cov().p()),
        }
    }

    pub fn to_model(&self) -> Result<SpectralModel> {
        if self.format != MODEL_FORMAT || self.version != FORMAT_VERSION {
            bail!(validation(format!(
                "unsupported model format {} v{}",
                self.format, self.version
            )));
        }
        let cfg = FrameConfig::new(self.bins, self.channels)?;
        if cfg.frame_len() != self.frame_len {
            bail!(validation(format!(
                "frame_len {} inconsistent with {} bins",
                self.frame_len, self.bins
            )));
        }
        let d = cfg.dim();
        if self.mean.len() != d {
            bail!(validation(format!("mean must have {d} entries")));
        }
        let mean =
            AugmentedVector::from_top(CVector::from_iterator(d, self.mean.iter().map(unpair)));
        let cov = AugmentedMatrix::new(
            unpair_matrix(&self.r, d, "r")?,
            unpair_matrix(&self.p, d, "p")?,
        )?;
        let diag = validate_augmented(&cov);
        if !diag.is_valid() {
            bail!(validation(format!(
                "model covariance is not a valid augmented covariance (min eigenvalue {:.3e})",
                diag.min_eigenvalue
            )));
        }
        Ok(SpectralModel::new(cfg, mean, cov)?)
    }
}

pub fn read_model(path: &Path) -> Result<SpectralModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ModelDocument = serde_json::from_str(&text)
        .map_err(|e| anyhow!(validation(format!("{}: {e}", path.display()))))?;
    doc.to_model()
}

pub fn model_json(model: &SpectralModel, seed: Option<u64>) -> String {
    let mut s = serde_json::to_string_pretty(&ModelDocument::from_model(model, seed))
        .expect("serialisable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_document_round_trip_is_exact() {
        let cfg = FrameConfig::new(2, 2).unwrap();
        let d = cfg.dim();
        let r = CMatrix::from_fn(d, d, |i, k| {
            let z = Complex64::new(
                0.1 / (1.0 + i as f64 + k as f64),
                (i as f64 - k as f64) / 7.0,
            );
            if i == k {
                Complex64::new(1.0 / 3.0 + 1.0, 0.0)
            } else {
                z
            }
        });
        let p = CMatrix::from_fn(d, d, |i, k| {
            Complex64::new(0.01 * (i + k) as f64, 0.03 / 7.0)
        });
        let mean = AugmentedVector::from_top(CVector::from_fn(d, |i, _| {
            Complex64::new(std::f64::consts::PI * i as f64, -1e-300)
        }));
        let model = SpectralModel::new(cfg, mean, AugmentedMatrix::new(r, p).unwrap()).unwrap();
        let doc: ModelDocument = serde_json::from_str(&model_json(&model, Some(4))).unwrap();
        assert_eq!(doc.seed, Some(4));
        assert_eq!(doc.to_model().unwrap(), model);
    }

    #[test]
    fn unknown_versions_are_rejected() {
        let model = SpectralModel::zero(FrameConfig::new(1, 1).unwrap());
        let mut doc = ModelDocument::from_model(&model, None);
        doc.version = 2;
        assert!(doc
            .to_model()
            .unwrap_err()
            .downcast_ref::<Invalid>()
            .is_some());
    }
}
