//! Operator-facing payloads: identical to the internal types except that
//! temperatures are in °C. Conversion happens only here.

use serde::{Deserialize, Serialize};

use super::mask::{MaskRegion, ParameterMask};
use super::roi::RoiStats;
use super::scene::{SceneSpec, TubeSpec};
use super::thermal::{FrameKind, ThermalFrame};
use crate::models::SceneParameters;
use crate::radiometry::{celsius_to_kelvin, kelvin_to_celsius, CELSIUS_OFFSET};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApiParameters {
    pub wall_temp_c: f64,
    pub gas_temp_c: f64,
    pub eps_height: f64,
    pub eps_mean: f64,
    pub eps_sigma: f64,
    pub abs_height: f64,
    pub abs_mean: f64,
    pub abs_sigma: f64,
}

impl From<SceneParameters> for ApiParameters {
    fn from(p: SceneParameters) -> Self {
        ApiParameters {
            wall_temp_c: kelvin_to_celsius(p.wall_temp),
            gas_temp_c: kelvin_to_celsius(p.gas_temp),
            eps_height: p.eps_height,
            eps_mean: p.eps_mean,
            eps_sigma: p.eps_sigma,
            abs_height: p.abs_height,
            abs_mean: p.abs_mean,
            abs_sigma: p.abs_sigma,
        }
    }
}

impl From<ApiParameters> for SceneParameters {
    fn from(p: ApiParameters) -> Self {
        SceneParameters {
            wall_temp: celsius_to_kelvin(p.wall_temp_c),
            gas_temp: celsius_to_kelvin(p.gas_temp_c),
            eps_height: p.eps_height,
            eps_mean: p.eps_mean,
            eps_sigma: p.eps_sigma,
            abs_height: p.abs_height,
            abs_mean: p.abs_mean,
            abs_sigma: p.abs_sigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiTube {
    pub center_x: f64,
    pub radius: f64,
    pub ts_top_c: f64,
    pub ts_bottom_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<ApiParameters>,
}

fn default_width() -> usize {
    80
}

fn default_height() -> usize {
    48
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSceneSpec {
    pub camera_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_ms: Option<i64>,
    #[serde(default = "default_width")]
    pub width: usize,
    #[serde(default = "default_height")]
    pub height: usize,
    pub background: ApiParameters,
    #[serde(default)]
    pub tubes: Vec<ApiTube>,
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

impl ApiSceneSpec {
    pub fn from_spec(spec: &SceneSpec, width: usize, height: usize) -> Self {
        ApiSceneSpec {
            camera_id: spec.camera_id.clone(),
            timestamp_ms: spec.timestamp_ms,
            width,
            height,
            background: spec.background.into(),
            tubes: spec
                .tubes
                .iter()
                .map(|t| ApiTube {
                    center_x: t.center_x,
                    radius: t.radius,
                    ts_top_c: kelvin_to_celsius(t.ts_top),
                    ts_bottom_c: kelvin_to_celsius(t.ts_bottom),
                    parameters: t.parameters.map(Into::into),
                })
                .collect(),
            noise_amplitude: spec.noise_amplitude,
            seed: spec.seed,
        }
    }

    pub fn to_spec(&self) -> SceneSpec {
        SceneSpec {
            camera_id: self.camera_id.clone(),
            timestamp_ms: self.timestamp_ms,
            background: self.background.into(),
            tubes: self
                .tubes
                .iter()
                .map(|t| TubeSpec {
                    center_x: t.center_x,
                    radius: t.radius,
                    ts_top: celsius_to_kelvin(t.ts_top_c),
                    ts_bottom: celsius_to_kelvin(t.ts_bottom_c),
                    parameters: t.parameters.map(Into::into),
                })
                .collect(),
            noise_amplitude: self.noise_amplitude,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiRegion {
    pub polygon: Vec<(f64, f64)>,
    pub parameters: ApiParameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiMask {
    #[serde(default)]
    pub mask_id: String,
    #[serde(default)]
    pub camera_id: String,
    #[serde(default)]
    pub regions: Vec<ApiRegion>,
    pub default_parameters: ApiParameters,
    #[serde(default)]
    pub version: u64,
}

impl From<&ParameterMask> for ApiMask {
    fn from(m: &ParameterMask) -> Self {
        ApiMask {
            mask_id: m.mask_id.clone(),
            camera_id: m.camera_id.clone(),
            regions: m
                .regions
                .iter()
                .map(|r| ApiRegion { polygon: r.polygon.clone(), parameters: r.parameters.into() })
                .collect(),
            default_parameters: m.default_parameters.into(),
            version: m.version,
        }
    }
}

impl From<&ApiMask> for ParameterMask {
    fn from(m: &ApiMask) -> Self {
        ParameterMask {
            mask_id: m.mask_id.clone(),
            camera_id: m.camera_id.clone(),
            regions: m
                .regions
                .iter()
                .map(|r| MaskRegion { polygon: r.polygon.clone(), parameters: r.parameters.into() })
                .collect(),
            default_parameters: m.default_parameters.into(),
            version: m.version,
        }
    }
}

/// ROI statistics in operator units: °C for corrected frames, signal
/// units otherwise.
pub fn stats_for_api(kind: FrameKind, stats: RoiStats) -> RoiStats {
    match kind {
        FrameKind::CorrectedTemperature => stats.shifted(-CELSIUS_OFFSET),
        FrameKind::RawSignal => stats,
    }
}

/// Frame in operator units (corrected values in °C), same layout.
pub fn frame_for_api(frame: &ThermalFrame) -> ThermalFrame {
    match frame.meta.kind {
        FrameKind::RawSignal => frame.clone(),
        FrameKind::CorrectedTemperature => ThermalFrame {
            meta: frame.meta.clone(),
            values: frame.values.iter().map(|&v| (v as f64 - CELSIUS_OFFSET) as f32).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_round_trip_through_celsius() {
        let spec = SceneSpec::demo("c");
        let api = ApiSceneSpec::from_spec(&spec, 80, 48);
        assert!((api.background.wall_temp_c - 1105.0).abs() < 1e-9);
        let back = api.to_spec();
        assert!((back.tubes[0].ts_top - spec.tubes[0].ts_top).abs() < 1e-9);
        let json = serde_json::to_string(&api).unwrap();
        let parsed: ApiSceneSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, api);
    }

    #[test]
    fn mask_defaults_from_minimal_json() {
        let m: ApiMask = serde_json::from_str(
            r#"{"default_parameters":{"wall_temp_c":1105,"gas_temp_c":980,"eps_height":0.82,
                "eps_mean":3.95,"eps_sigma":1.0,"abs_height":0.05,"abs_mean":3.95,"abs_sigma":1.0}}"#,
        )
        .unwrap();
        let internal = ParameterMask::from(&m);
        assert!((internal.default_parameters.wall_temp - 1378.15).abs() < 1e-9);
        assert!(internal.regions.is_empty());
    }
}
