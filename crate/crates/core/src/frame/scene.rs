//! Synthetic furnace views: vertical tubes over a refractory background,
//! rendered through model D with seeded uniform noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mask::{MaskRegion, ParameterMask};
use super::roi::polygon_pixels;
use super::thermal::{FrameKind, FrameMeta, ThermalFrame};
use crate::error::{Error, Result};
use crate::inverse::SolverConfig;
use crate::models::{ModelKind, PreparedModel, SceneParameters};
use crate::quadrature::QuadratureConfig;
use crate::radiometry::celsius_to_kelvin;

/// A tube seen side-on: columns within `radius` of `center_x`, full height,
/// temperature varying linearly from `ts_top` to `ts_bottom` (K).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    pub center_x: f64,
    pub radius: f64,
    pub ts_top: f64,
    pub ts_bottom: f64,
    /// Surface/gas parameters for this tube; the background's when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<SceneParameters>,
}

impl TubeSpec {
    pub fn outline(&self, height: usize) -> Vec<(f64, f64)> {
        let (l, r) = (self.center_x - self.radius, self.center_x + self.radius);
        vec![(l, 0.0), (r, 0.0), (r, height as f64), (l, height as f64)]
    }

    pub fn temperature_at_row(&self, y: usize, height: usize) -> f64 {
        let f = (y as f64 + 0.5) / height as f64;
        self.ts_top + f * (self.ts_bottom - self.ts_top)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub camera_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_ms: Option<i64>,
    /// Wall/gas conditions everywhere; background pixels show the wall at T_w.
    pub background: SceneParameters,
    #[serde(default)]
    pub tubes: Vec<TubeSpec>,
    /// Half-width of the uniform noise added to each pixel signal.
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SceneSpec {
    /// Three tubes between 900 and 1000 °C over nominal furnace conditions.
    pub fn demo(camera_id: &str) -> Self {
        let k = celsius_to_kelvin;
        let background = SceneParameters {
            wall_temp: k(1105.0),
            gas_temp: k(980.0),
            eps_height: 0.82,
            eps_mean: 3.95,
            eps_sigma: 1.0,
            abs_height: 0.05,
            abs_mean: 3.95,
            abs_sigma: 1.0,
        };
        let tube = |cx: f64, top: f64, bottom: f64| TubeSpec {
            center_x: cx,
            radius: 6.0,
            ts_top: k(top),
            ts_bottom: k(bottom),
            parameters: None,
        };
        SceneSpec {
            camera_id: camera_id.to_string(),
            timestamp_ms: None,
            background,
            tubes: vec![tube(16.0, 900.0, 960.0), tube(40.0, 930.0, 1000.0), tube(64.0, 910.0, 950.0)],
            noise_amplitude: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self, cfg: &SolverConfig) -> Result<()> {
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(Error::domain("noise amplitude must be finite and non-negative"));
        }
        let in_bracket = |t: f64| t >= cfg.bracket_lo && t <= cfg.bracket_hi;
        for (i, t) in self.tubes.iter().enumerate() {
            if !(t.radius > 0.0 && t.center_x.is_finite()) {
                return Err(Error::domain(format!("tube {i}: radius must be positive")));
            }
            if !in_bracket(t.ts_top) || !in_bracket(t.ts_bottom) {
                return Err(Error::domain(format!(
                    "tube {i}: temperatures must lie in [{}, {}] K",
                    cfg.bracket_lo, cfg.bracket_hi
                )));
            }
            if let Some(p) = &t.parameters {
                p.to_conditions()?.validate()?;
            }
        }
        if !in_bracket(self.background.wall_temp) {
            return Err(Error::domain("background wall temperature outside solver bracket"));
        }
        self.background.to_conditions()?.validate()
    }

    /// The mask an operator with perfect knowledge of this scene would use.
    pub fn generating_mask(&self, height: usize) -> ParameterMask {
        let mut mask = ParameterMask::uniform(&self.camera_id, self.background);
        for t in &self.tubes {
            mask.regions.push(MaskRegion {
                polygon: t.outline(height),
                parameters: t.parameters.unwrap_or(self.background),
            });
        }
        mask
    }

    /// Per-pixel true temperature (K): tube profile or wall temperature.
    pub fn ground_truth(&self, width: usize, height: usize) -> Vec<f64> {
        let mut truth = vec![self.background.wall_temp; width * height];
        for t in &self.tubes {
            for (x, y) in polygon_pixels(&t.outline(height), width, height) {
                truth[y * width + x] = t.temperature_at_row(y, height);
            }
        }
        truth
    }
}

pub fn render_synthetic_frame(
    spec: &SceneSpec,
    width: usize,
    height: usize,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<ThermalFrame> {
    spec.validate(cfg)?;
    if width == 0 || height == 0 || width > u32::MAX as usize || height > u32::MAX as usize {
        return Err(Error::domain("frame dimensions must be positive"));
    }
    let mask = spec.generating_mask(height);
    let sets = mask.parameter_sets();
    let models = sets
        .iter()
        .map(|p| PreparedModel::new(ModelKind::D, &p.to_conditions()?, q))
        .collect::<Result<Vec<_>>>()?;
    let region = mask.resolve(width, height);
    let truth = spec.ground_truth(width, height);
    let clean: Vec<f64> = region
        .par_iter()
        .zip(truth.par_iter())
        .map(|(&r, &t)| models[r].signal(t))
        .collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let a = spec.noise_amplitude;
    let values = clean
        .iter()
        .map(|s| {
            let noise = if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 };
            (s + noise) as f32
        })
        .collect();
    ThermalFrame::new(
        FrameMeta {
            frame_id: String::new(),
            camera_id: spec.camera_id.clone(),
            timestamp_ms: spec.timestamp_ms.unwrap_or(0),
            width: width as u32,
            height: height as u32,
            kind: FrameKind::RawSignal,
            mask_version: None,
            method: None,
            error_count: 0,
            source_frame_id: None,
        },
        values,
    )
}
