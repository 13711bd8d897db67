//! IQ capture files and report persistence.
//!
//! A capture is two files: `name.iq`, raw little-endian `f32` samples
//! (interleaved I/Q pairs, or real values for passband captures), and
//! `name.iq.json`, a metadata sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dsp::Sample;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaptureFormat {
    Complex,
    Real,
}

/// Sidecar contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaptureMeta {
    pub sample_rate_hz: f64,
    pub center_freq_hz: f64,
    pub format: CaptureFormat,
    #[serde(default)]
    pub description: String,
    /// RFC 3339 timestamp.
    pub capture_time: String,
    /// Symbol time of the first sample, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_symbols: Option<f64>,
}

impl CaptureMeta {
    pub fn new(sample_rate_hz: f64, center_freq_hz: f64, format: CaptureFormat) -> Self {
        Self {
            sample_rate_hz,
            center_freq_hz,
            format,
            description: String::new(),
            capture_time: chrono::Utc::now().to_rfc3339(),
            origin_symbols: None,
        }
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(format!(
                "sample_rate_hz must be > 0, got {}",
                self.sample_rate_hz
            ));
        }
        if !self.center_freq_hz.is_finite() {
            return Err("center_freq_hz must be finite".into());
        }
        if chrono::DateTime::parse_from_rfc3339(&self.capture_time).is_err() {
            return Err(format!(
                "capture_time '{}' is not RFC 3339",
                self.capture_time
            ));
        }
        Ok(())
    }
}

/// Capture payload.
#[derive(Debug, Clone, PartialEq)]
pub enum CaptureData {
    Complex(Vec<Sample>),
    Real(Vec<f64>),
}

impl CaptureData {
    pub fn format(&self) -> CaptureFormat {
        match self {
            CaptureData::Complex(_) => CaptureFormat::Complex,
            CaptureData::Real(_) => CaptureFormat::Real,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            CaptureData::Complex(v) => v.len(),
            CaptureData::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Rounds every component to the nearest `f32`, the precision of the payload.
pub fn quantize_f32(x: &[Sample]) -> Vec<Sample> {
    x.iter()
        .map(|s| Sample::new(s.re as f32 as f64, s.im as f32 as f64))
        .collect()
}

pub fn quantize_f32_real(x: &[f64]) -> Vec<f64> {
    x.iter().map(|&v| v as f32 as f64).collect()
}

/// Sidecar path for a payload path: `capture.iq` -> `capture.iq.json`.
pub fn sidecar_path(payload: &Path) -> PathBuf {
    let mut s = payload.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the payload and its sidecar, creating parent directories. Values
/// are stored as `f32`.
pub fn write_capture(data: &CaptureData, meta: &CaptureMeta, path: &Path) -> Result<()> {
    if data.format() != meta.format {
        return Err(Error::param(format!(
            "metadata declares {:?} samples but the payload is {:?}",
            meta.format,
            data.format()
        )));
    }
    meta.check().map_err(Error::param)?;
    let mut bytes = Vec::with_capacity(data.len() * 8);
    match data {
        CaptureData::Complex(v) => {
            for s in v {
                bytes.extend_from_slice(&(s.re as f32).to_le_bytes());
                bytes.extend_from_slice(&(s.im as f32).to_le_bytes());
            }
        }
        CaptureData::Real(v) => {
            for &s in v {
                bytes.extend_from_slice(&(s as f32).to_le_bytes());
            }
        }
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let side = sidecar_path(path);
    let json = serde_json::to_string_pretty(meta).expect("metadata serializes");
    fs::write(&side, json).map_err(|e| Error::io(&side, e))
}

/// Reads a capture written by [`write_capture`] or any tool following the
/// same layout.
pub fn read_capture(path: &Path) -> Result<(CaptureData, CaptureMeta)> {
    let side = sidecar_path(path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: CaptureMeta = serde_json::from_str(&text).map_err(|e| Error::MalformedSidecar {
        path: side.clone(),
        reason: e.to_string(),
    })?;
    meta.check().map_err(|reason| Error::MalformedSidecar {
        path: side.clone(),
        reason,
    })?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let unit = match meta.format {
        CaptureFormat::Complex => 8,
        CaptureFormat::Real => 4,
    };
    if bytes.len() % unit != 0 {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            len: bytes.len() as u64,
            unit: unit as u64,
        });
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    let per_sample = unit / 4;
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinitePayload {
            path: path.to_path_buf(),
            index: i / per_sample,
        });
    }
    let data = match meta.format {
        CaptureFormat::Complex => CaptureData::Complex(
            values
                .chunks_exact(2)
                .map(|p| Sample::new(p[0] as f64, p[1] as f64))
                .collect(),
        ),
        CaptureFormat::Real => CaptureData::Real(values.iter().map(|&v| v as f64).collect()),
    };
    Ok((data, meta))
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Serializes rows to CSV with a header taken from the field names.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Config(format!("CSV encoding failed: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("CSV encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}
