//! Thermal frames and the `THFR` file format (binary payload plus a JSON
//! sidecar for identifiers and correction provenance).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"THFR";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 1 + 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    RawSignal,
    CorrectedTemperature,
}

impl FrameKind {
    fn code(self) -> u8 {
        match self {
            FrameKind::RawSignal => 0,
            FrameKind::CorrectedTemperature => 1,
        }
    }

    fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(FrameKind::RawSignal),
            1 => Some(FrameKind::CorrectedTemperature),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionMethod {
    Bisection,
    Surrogate,
}

impl CorrectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CorrectionMethod::Bisection => "bisection",
            CorrectionMethod::Surrogate => "surrogate",
        }
    }
}

impl std::str::FromStr for CorrectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bisection" => Ok(CorrectionMethod::Bisection),
            "surrogate" => Ok(CorrectionMethod::Surrogate),
            _ => Err(Error::domain(format!("unknown correction method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub frame_id: String,
    pub camera_id: String,
    /// Unix milliseconds, UTC.
    pub timestamp_ms: i64,
    pub width: u32,
    pub height: u32,
    pub kind: FrameKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_version: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<CorrectionMethod>,
    /// Pixels that could not be corrected (stored as NaN).
    #[serde(default)]
    pub error_count: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_frame_id: Option<String>,
}

/// Row-major frame. Raw frames hold band signal; corrected frames hold
/// tube temperature in kelvin with NaN marking failed pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalFrame {
    pub meta: FrameMeta,
    pub values: Vec<f32>,
}

impl ThermalFrame {
    pub fn new(meta: FrameMeta, values: Vec<f32>) -> Result<Self> {
        let f = ThermalFrame { meta, values };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.meta.width as usize, self.meta.height as usize);
        if w == 0 || h == 0 {
            return Err(Error::domain("frame dimensions must be positive"));
        }
        if self.values.len() != w * h {
            return Err(Error::domain(format!(
                "frame holds {} values, expected {w}×{h}",
                self.values.len()
            )));
        }
        match self.meta.kind {
            FrameKind::RawSignal => {
                if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
                    return Err(Error::domain(format!("raw frame value {i} is not finite")));
                }
            }
            FrameKind::CorrectedTemperature => {
                if self.meta.mask_version.is_none() || self.meta.method.is_none() {
                    return Err(Error::domain("corrected frame must record mask version and method"));
                }
                let bad = self.values.iter().filter(|v| !v.is_finite()).count() as u64;
                if bad != self.meta.error_count {
                    return Err(Error::domain(format!(
                        "corrected frame has {bad} sentinel pixels but error count {}",
                        self.meta.error_count
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.meta.width as usize
    }

    pub fn height(&self) -> usize {
        self.meta.height as usize
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.values[y * self.width() + x]
    }

    /// Binary payload in the `THFR` layout.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.meta.width.to_le_bytes());
        out.extend_from_slice(&self.meta.height.to_le_bytes());
        out.push(self.meta.kind.code());
        out.extend_from_slice(&self.meta.timestamp_ms.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Writes `<path>` and its `.json` sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode()).map_err(|e| Error::io(path, e))?;
        let side = sidecar_path(path);
        let json = serde_json::to_vec_pretty(&self.meta)?;
        std::fs::write(&side, json).map_err(|e| Error::io(&side, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let payload = decode_payload(&bytes)?;
        let side = sidecar_path(path);
        let text = std::fs::read(&side).map_err(|e| Error::io(&side, e))?;
        let meta: FrameMeta = serde_json::from_slice(&text)?;
        if (meta.width, meta.height, meta.kind, meta.timestamp_ms)
            != (payload.width, payload.height, payload.kind, payload.timestamp_ms)
        {
            return Err(Error::domain(format!(
                "sidecar for {} disagrees with the binary header",
                path.display()
            )));
        }
        ThermalFrame::new(meta, payload.values)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

/// Header fields and values of a `THFR` payload.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePayload {
    pub width: u32,
    pub height: u32,
    pub kind: FrameKind,
    pub timestamp_ms: i64,
    pub values: Vec<f32>,
}

pub fn decode_payload(buf: &[u8]) -> Result<FramePayload> {
    let trunc = |offset: usize, what: &str| Error::Parse {
        offset: offset as u64,
        message: format!("frame truncated reading {what}"),
    };
    if buf.len() < HEADER_LEN {
        return Err(trunc(buf.len(), "header"));
    }
    if &buf[..4] != MAGIC {
        return Err(Error::Parse { offset: 0, message: "bad magic, expected THFR".into() });
    }
    let u32_at = |o: usize| u32::from_le_bytes(buf[o..o + 4].try_into().unwrap());
    let version = u32_at(4);
    if version != VERSION {
        return Err(Error::Parse { offset: 4, message: format!("unsupported version {version}") });
    }
    let width = u32_at(8);
    let height = u32_at(12);
    let kind = FrameKind::from_code(buf[16])
        .ok_or_else(|| Error::Parse { offset: 16, message: format!("unknown frame kind {}", buf[16]) })?;
    let timestamp_ms = i64::from_le_bytes(buf[17..25].try_into().unwrap());
    let n = width as usize * height as usize;
    let body = &buf[HEADER_LEN..];
    if body.len() < 4 * n {
        return Err(trunc(HEADER_LEN + body.len() / 4 * 4, "values"));
    }
    if body.len() > 4 * n {
        return Err(Error::Parse {
            offset: (HEADER_LEN + 4 * n) as u64,
            message: "trailing bytes after frame values".into(),
        });
    }
    let values = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(FramePayload { width, height, kind, timestamp_ms, values })
}
