//! File-backed frame and mask store: `<root>/frames/<id>.thfr` (+ sidecar)
//! and a JSON index holding frame metadata, masks and the id counter.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use super::correct::{correct_frame, Corrector};
use super::mask::ParameterMask;
use super::roi::{roi_stats, RoiGeometry, RoiSummary};
use super::thermal::{FrameKind, FrameMeta, ThermalFrame};
use crate::error::{Error, Result};
use crate::inverse::SolverConfig;
use crate::models::ParameterRanges;
use crate::quadrature::QuadratureConfig;

const INDEX_FILE: &str = "index.json";

#[derive(Debug, Default, Serialize, Deserialize)]
struct StoreState {
    next_seq: u64,
    frames: BTreeMap<String, FrameMeta>,
    masks: BTreeMap<String, ParameterMask>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeseriesPoint {
    pub timestamp_ms: i64,
    pub frame_id: String,
    pub summary: RoiSummary,
}

#[derive(Debug)]
pub struct FrameStore {
    root: PathBuf,
    state: RwLock<StoreState>,
    // serialises writers so index snapshots and mask versions stay ordered
    write_lock: Mutex<()>,
}

pub fn validate_camera_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && id.len() <= 64
        && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_');
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!("camera id {id:?} must be 1-64 characters of [A-Za-z0-9_-]")))
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

impl FrameStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let frames = root.join("frames");
        std::fs::create_dir_all(&frames).map_err(|e| Error::io(&frames, e))?;
        let index = root.join(INDEX_FILE);
        let state = if index.exists() {
            let text = std::fs::read(&index).map_err(|e| Error::io(&index, e))?;
            serde_json::from_slice(&text)?
        } else {
            StoreState::default()
        };
        Ok(FrameStore { root, state: RwLock::new(state), write_lock: Mutex::new(()) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn frame_path(&self, id: &str) -> PathBuf {
        self.root.join("frames").join(format!("{id}.thfr"))
    }

    fn persist(&self, state: &StoreState) -> Result<()> {
        write_atomic(&self.root.join(INDEX_FILE), &serde_json::to_vec_pretty(state)?)
    }

    fn write_frame(&self, frame: &ThermalFrame) -> Result<()> {
        let path = self.frame_path(&frame.meta.frame_id);
        let side = super::thermal::sidecar_path(&path);
        write_atomic(&side, &serde_json::to_vec_pretty(&frame.meta)?)?;
        write_atomic(&path, &frame.encode())
    }

    /// Cameras that have frames or a mask, sorted.
    pub fn cameras(&self) -> Vec<String> {
        let s = self.state.read();
        let mut c: Vec<String> = s.frames.values().map(|m| m.camera_id.clone()).chain(s.masks.keys().cloned()).collect();
        c.sort();
        c.dedup();
        c
    }

    pub fn has_camera(&self, camera: &str) -> bool {
        let s = self.state.read();
        s.masks.contains_key(camera) || s.frames.values().any(|m| m.camera_id == camera)
    }

    /// Stores a raw frame under a fresh id and returns its metadata.
    pub fn insert_raw(&self, mut frame: ThermalFrame) -> Result<FrameMeta> {
        validate_camera_id(&frame.meta.camera_id)?;
        if frame.meta.kind != FrameKind::RawSignal {
            return Err(Error::domain("insert_raw expects a raw signal frame"));
        }
        let _w = self.write_lock.lock();
        let seq = self.state.read().next_seq + 1;
        frame.meta.frame_id = format!("{}-{seq:06}", frame.meta.camera_id);
        frame.validate()?;
        self.write_frame(&frame)?;
        let mut s = self.state.write();
        s.next_seq = seq;
        s.frames.insert(frame.meta.frame_id.clone(), frame.meta.clone());
        self.persist(&s)?;
        Ok(frame.meta)
    }

    /// Stores (or replaces) a frame under its own id.
    pub fn put_frame(&self, frame: &ThermalFrame) -> Result<()> {
        validate_camera_id(&frame.meta.camera_id)?;
        frame.validate()?;
        let _w = self.write_lock.lock();
        self.write_frame(frame)?;
        let mut s = self.state.write();
        s.frames.insert(frame.meta.frame_id.clone(), frame.meta.clone());
        self.persist(&s)
    }

    pub fn meta(&self, id: &str) -> Result<FrameMeta> {
        self.state
            .read()
            .frames
            .get(id)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("frame {id}")))
    }

    pub fn fetch(&self, id: &str) -> Result<ThermalFrame> {
        self.meta(id)?;
        ThermalFrame::load(&self.frame_path(id))
    }

    /// Frames ordered by timestamp then id, optionally filtered.
    pub fn list(
        &self,
        camera: Option<&str>,
        from_ms: Option<i64>,
        to_ms: Option<i64>,
        kind: Option<FrameKind>,
    ) -> Result<Vec<FrameMeta>> {
        if let Some(c) = camera {
            if !self.has_camera(c) {
                return Err(Error::NotFound(format!("camera {c}")));
            }
        }
        let s = self.state.read();
        let mut out: Vec<FrameMeta> = s
            .frames
            .values()
            .filter(|m| camera.is_none_or(|c| m.camera_id == c))
            .filter(|m| from_ms.is_none_or(|f| m.timestamp_ms >= f))
            .filter(|m| to_ms.is_none_or(|t| m.timestamp_ms <= t))
            .filter(|m| kind.is_none_or(|k| m.kind == k))
            .cloned()
            .collect();
        out.sort_by(|a, b| (a.timestamp_ms, &a.frame_id).cmp(&(b.timestamp_ms, &b.frame_id)));
        Ok(out)
    }

    pub fn mask(&self, camera: &str) -> Result<ParameterMask> {
        self.state
            .read()
            .masks
            .get(camera)
            .cloned()
            .ok_or_else(|| Error::NotFound(format!("mask for camera {camera}")))
    }

    /// Validates and stores `mask` for `camera`, returning the new version.
    pub fn upsert_mask(&self, camera: &str, mut mask: ParameterMask) -> Result<u64> {
        validate_camera_id(camera)?;
        mask.validate(&ParameterRanges::furnace())?;
        let _w = self.write_lock.lock();
        let mut s = self.state.write();
        let version = s.masks.get(camera).map_or(0, |m| m.version) + 1;
        mask.camera_id = camera.to_string();
        if mask.mask_id.is_empty() {
            mask.mask_id = format!("{camera}-mask");
        }
        mask.version = version;
        s.masks.insert(camera.to_string(), mask);
        self.persist(&s)?;
        Ok(version)
    }

    /// Corrects a stored raw frame with the camera's current mask and
    /// stores the result.
    pub fn correct(
        &self,
        id: &str,
        corrector: Corrector<'_>,
        cfg: &SolverConfig,
        q: &QuadratureConfig,
    ) -> Result<ThermalFrame> {
        let raw = self.fetch(id)?;
        let mask = self.mask(&raw.meta.camera_id)?;
        let out = correct_frame(&raw, &mask, corrector, cfg, q)?;
        self.put_frame(&out)?;
        Ok(out)
    }

    /// ROI summaries over the camera's corrected frames in `[from, to]`,
    /// one per timestamp (latest mask version wins), in time order.
    pub fn roi_timeseries(
        &self,
        camera: &str,
        geom: &RoiGeometry,
        from_ms: Option<i64>,
        to_ms: Option<i64>,
    ) -> Result<Vec<TimeseriesPoint>> {
        geom.validate_shape()?;
        let metas = self.list(Some(camera), from_ms, to_ms, Some(FrameKind::CorrectedTemperature))?;
        let mut latest: BTreeMap<i64, FrameMeta> = BTreeMap::new();
        for m in metas {
            let newer = latest
                .get(&m.timestamp_ms)
                .is_none_or(|cur| (m.mask_version, &m.frame_id) > (cur.mask_version, &cur.frame_id));
            if newer {
                latest.insert(m.timestamp_ms, m);
            }
        }
        latest
            .into_values()
            .map(|m| {
                let frame = self.fetch(&m.frame_id)?;
                let stats = roi_stats(&frame, geom)?;
                Ok(TimeseriesPoint { timestamp_ms: m.timestamp_ms, frame_id: m.frame_id, summary: stats.summary().clone() })
            })
            .collect()
    }
}
