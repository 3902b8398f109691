//! Per-pixel conversion of raw signal frames into tube temperature.

use rayon::prelude::*;

use super::mask::ParameterMask;
use super::thermal::{CorrectionMethod, FrameKind, FrameMeta, ThermalFrame};
use crate::error::{Error, Result};
use crate::inverse::{invert_prepared, SolverConfig};
use crate::models::{ModelKind, PreparedModel};
use crate::quadrature::QuadratureConfig;
use crate::surrogate::{MlpModel, INPUTS};

#[derive(Debug, Clone, Copy)]
pub enum Corrector<'a> {
    Bisection,
    Surrogate(&'a MlpModel),
}

impl Corrector<'_> {
    pub fn method(&self) -> CorrectionMethod {
        match self {
            Corrector::Bisection => CorrectionMethod::Bisection,
            Corrector::Surrogate(_) => CorrectionMethod::Surrogate,
        }
    }
}

/// Identifier of the frame produced by correcting `source` with a given
/// mask version and method; re-running the same correction reuses it.
pub fn corrected_frame_id(source: &str, mask_version: u64, method: CorrectionMethod) -> String {
    format!("{source}.m{mask_version}.{}", method.as_str())
}

/// Resolves every pixel's parameters from `mask` and inverts model D.
/// Pixels that cannot be inverted become NaN and are counted in
/// `error_count`.
pub fn correct_frame(
    frame: &ThermalFrame,
    mask: &ParameterMask,
    corrector: Corrector<'_>,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<ThermalFrame> {
    if frame.meta.kind != FrameKind::RawSignal {
        return Err(Error::domain("only raw signal frames can be corrected"));
    }
    cfg.validate()?;
    let (w, h) = (frame.width(), frame.height());
    let region = mask.resolve(w, h);
    let sets = mask.parameter_sets();

    let temps: Vec<f64> = match corrector {
        Corrector::Bisection => {
            let models = sets
                .iter()
                .map(|p| PreparedModel::new(ModelKind::D, &p.to_conditions()?, q))
                .collect::<Result<Vec<_>>>()?;
            region
                .par_iter()
                .zip(frame.values.par_iter())
                .map(|(&r, &s)| {
                    invert_prepared(&models[r], s as f64, cfg)
                        .map(|x| x.temperature_ts)
                        .unwrap_or(f64::NAN)
                })
                .collect()
        }
        Corrector::Surrogate(model) => {
            let rows: Vec<[f64; INPUTS]> = region
                .iter()
                .zip(&frame.values)
                .map(|(&r, &s)| {
                    let mut row = [0.0; INPUTS];
                    row[0] = s as f64;
                    row[1..].copy_from_slice(&sets[r].to_array());
                    row
                })
                .collect();
            let ok: Vec<bool> = rows.iter().map(|r| r[0] > 0.0).collect();
            let safe: Vec<[f64; INPUTS]> = rows
                .into_iter()
                .zip(&ok)
                .map(|(mut r, &good)| {
                    if !good {
                        r[0] = 1.0;
                    }
                    r
                })
                .collect();
            model
                .predict(&safe)?
                .into_iter()
                .zip(ok)
                .map(|(t, good)| if good && t.is_finite() { t } else { f64::NAN })
                .collect()
        }
    };

    let values: Vec<f32> = temps.iter().map(|&t| t as f32).collect();
    let error_count = values.iter().filter(|v| !v.is_finite()).count() as u64;
    let method = corrector.method();
    ThermalFrame::new(
        FrameMeta {
            frame_id: corrected_frame_id(&frame.meta.frame_id, mask.version, method),
            camera_id: frame.meta.camera_id.clone(),
            timestamp_ms: frame.meta.timestamp_ms,
            width: frame.meta.width,
            height: frame.meta.height,
            kind: FrameKind::CorrectedTemperature,
            mask_version: Some(mask.version),
            method: Some(method),
            error_count,
            source_frame_id: Some(frame.meta.frame_id.clone()),
        },
        values,
    )
}
