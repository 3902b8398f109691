//! Tube-temperature recovery by bisection on the monotone forward map.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, PreparedModel, SceneConditions};
use crate::quadrature::QuadratureConfig;
use crate::radiometry::celsius_to_kelvin;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub bracket_lo: f64,
    pub bracket_hi: f64,
    pub tolerance_t: f64,
    pub max_iterations: usize,
}

impl Default for SolverConfig {
    /// 700–1300 °C, 1 mK, 100 iterations.
    fn default() -> Self {
        SolverConfig {
            bracket_lo: celsius_to_kelvin(700.0),
            bracket_hi: celsius_to_kelvin(1300.0),
            tolerance_t: 1e-3,
            max_iterations: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bracket_lo > 0.0 && self.bracket_lo < self.bracket_hi && self.bracket_hi.is_finite()) {
            return Err(Error::domain(format!(
                "solver bracket must satisfy 0 < lo < hi, got [{}, {}]",
                self.bracket_lo, self.bracket_hi
            )));
        }
        if !(self.tolerance_t > 0.0) {
            return Err(Error::domain("solver tolerance must be positive"));
        }
        if self.max_iterations < 20 {
            return Err(Error::domain("solver needs max_iterations >= 20"));
        }
        Ok(())
    }

    /// Halvings needed to shrink the bracket below the tolerance.
    pub fn required_iterations(&self) -> usize {
        ((self.bracket_hi - self.bracket_lo) / self.tolerance_t).log2().ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InversionResult {
    pub temperature_ts: f64,
    pub iterations: usize,
    /// forward(temperature_ts) − measured signal
    pub residual: f64,
    pub converged: bool,
}

/// Finds T_s such that the model signal matches `measured`.
pub fn invert_signal(
    kind: ModelKind,
    assumed: &SceneConditions,
    measured: f64,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<InversionResult> {
    cfg.validate()?;
    let model = PreparedModel::new(kind, assumed, q)?;
    invert_prepared(&model, measured, cfg)
}

/// Bisection against an already prepared model; `cfg` must be valid.
pub fn invert_prepared(
    model: &PreparedModel,
    measured: f64,
    cfg: &SolverConfig,
) -> Result<InversionResult> {
    if !measured.is_finite() {
        return Err(Error::domain(format!("measured signal must be finite, got {measured}")));
    }
    let mut lo = cfg.bracket_lo;
    let mut hi = cfg.bracket_hi;
    let s_lo = model.signal_at(lo);
    let s_hi = model.signal_at(hi);
    if !(measured >= s_lo && measured <= s_hi) {
        return Err(Error::Bracket {
            signal: measured,
            lo_signal: s_lo,
            hi_signal: s_hi,
        });
    }
    let mut iterations = 0;
    while hi - lo > cfg.tolerance_t {
        if iterations == cfg.max_iterations {
            return Err(Error::Convergence {
                max_iterations: cfg.max_iterations,
            });
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let r = model.signal_at(mid) - measured;
        if r == 0.0 {
            return Ok(InversionResult {
                temperature_ts: mid,
                iterations,
                residual: 0.0,
                converged: true,
            });
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok(InversionResult {
        temperature_ts: t,
        iterations,
        residual: model.signal_at(t) - measured,
        converged: true,
    })
}

/// Element-wise [`invert_signal`], run in parallel, order preserved.
/// A failing element carries its own error.
pub fn invert_batch(
    kind: ModelKind,
    assumed: &[SceneConditions],
    signals: &[f64],
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<Vec<Result<InversionResult>>> {
    if assumed.len() != signals.len() {
        return Err(Error::domain(format!(
            "batch length mismatch: {} parameter sets vs {} signals",
            assumed.len(),
            signals.len()
        )));
    }
    cfg.validate()?;
    Ok(assumed
        .par_iter()
        .zip(signals.par_iter())
        .map(|(cond, &s)| invert_signal(kind, cond, s, cfg, q))
        .collect())
}
