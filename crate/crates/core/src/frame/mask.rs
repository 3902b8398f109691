//! Per-camera parameter masks: polygons assigning scene parameters to
//! pixels, the last listed region winning over earlier ones and the default.

use serde::{Deserialize, Serialize};

use super::roi::{polygon_pixels, signed_area};
use crate::error::{Error, Result};
use crate::models::{ParameterRanges, SceneParameters};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskRegion {
    pub polygon: Vec<(f64, f64)>,
    pub parameters: SceneParameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterMask {
    pub mask_id: String,
    pub camera_id: String,
    #[serde(default)]
    pub regions: Vec<MaskRegion>,
    pub default_parameters: SceneParameters,
    #[serde(default)]
    pub version: u64,
}

impl ParameterMask {
    pub fn uniform(camera_id: &str, parameters: SceneParameters) -> Self {
        ParameterMask {
            mask_id: format!("{camera_id}-mask"),
            camera_id: camera_id.to_string(),
            regions: Vec::new(),
            default_parameters: parameters,
            version: 0,
        }
    }

    pub fn validate(&self, ranges: &ParameterRanges) -> Result<()> {
        ranges
            .check(&self.default_parameters)
            .map_err(|e| Error::domain(format!("default parameters: {e}")))?;
        for (i, r) in self.regions.iter().enumerate() {
            if r.polygon.len() < 3 || r.polygon.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(Error::domain(format!("region {i}: polygon needs at least 3 finite vertices")));
            }
            if signed_area(&r.polygon).abs() < 1e-12 {
                return Err(Error::domain(format!("region {i}: polygon vertices are collinear")));
            }
            ranges
                .check(&r.parameters)
                .map_err(|e| Error::domain(format!("region {i}: {e}")))?;
        }
        Ok(())
    }

    /// Parameter tuples in lookup order: index 0 is the default, `i + 1`
    /// is region `i`.
    pub fn parameter_sets(&self) -> Vec<SceneParameters> {
        std::iter::once(self.default_parameters)
            .chain(self.regions.iter().map(|r| r.parameters))
            .collect()
    }

    /// For every pixel (row-major), the index into [`Self::parameter_sets`].
    pub fn resolve(&self, width: usize, height: usize) -> Vec<usize> {
        let mut map = vec![0usize; width * height];
        for (i, r) in self.regions.iter().enumerate() {
            for (x, y) in polygon_pixels(&r.polygon, width, height) {
                map[y * width + x] = i + 1;
            }
        }
        map
    }

    pub fn parameters_at(&self, x: usize, y: usize, width: usize, height: usize) -> SceneParameters {
        let idx = self.resolve(width, height)[y * width + x];
        self.parameter_sets()[idx]
    }
}
