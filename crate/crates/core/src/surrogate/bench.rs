//! Wall-clock comparison of surrogate inference against per-row bisection.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::mlp::{MlpModel, INPUTS};
use crate::error::{Error, Result};
use crate::inverse::{invert_batch, SolverConfig};
use crate::models::{ModelKind, SceneConditions, SceneParameters};
use crate::quadrature::QuadratureConfig;

pub const MIN_BENCH_ROWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub rows: usize,
    pub surrogate_time: Duration,
    pub bisection_time: Duration,
    /// bisection_time / surrogate_time
    pub speedup: f64,
    pub solver_failures: usize,
    /// Surrogate temperatures (K), exactly as returned by `predict`.
    #[serde(skip)]
    pub surrogate_output: Vec<f64>,
    /// Bisection temperatures (K); NaN where the solver failed.
    #[serde(skip)]
    pub bisection_output: Vec<f64>,
    pub accuracy: Agreement,
}

/// |surrogate − bisection| statistics over rows where both succeeded (K).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub median_abs: f64,
    pub p95_abs: f64,
    pub max_abs: f64,
    pub rms: f64,
}

impl Agreement {
    pub fn between(a: &[f64], b: &[f64]) -> Agreement {
        let mut d: Vec<f64> = a
            .iter()
            .zip(b)
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| (x - y).abs())
            .collect();
        if d.is_empty() {
            return Agreement { median_abs: f64::NAN, p95_abs: f64::NAN, max_abs: f64::NAN, rms: f64::NAN };
        }
        d.sort_by(f64::total_cmp);
        let rms = (d.iter().map(|x| x * x).sum::<f64>() / d.len() as f64).sqrt();
        Agreement {
            median_abs: quantile_sorted(&d, 0.5),
            p95_abs: quantile_sorted(&d, 0.95),
            max_abs: d[d.len() - 1],
            rms,
        }
    }
}

/// Linear-interpolated quantile of an ascending slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

/// Times `predict` and `invert_batch` (model D) on the same rows; the
/// faster of `repeats` runs is kept for each.
pub fn bench(
    model: &MlpModel,
    batch: &[[f64; INPUTS]],
    cfg: &SolverConfig,
    q: &QuadratureConfig,
    repeats: usize,
) -> Result<BenchResult> {
    if batch.len() < MIN_BENCH_ROWS {
        return Err(Error::domain(format!(
            "bench needs at least {MIN_BENCH_ROWS} rows, got {}",
            batch.len()
        )));
    }
    let conds: Vec<SceneConditions> = batch
        .iter()
        .map(|r| SceneParameters::from_array(std::array::from_fn(|k| r[k + 1])).to_conditions())
        .collect::<Result<_>>()?;
    let signals: Vec<f64> = batch.iter().map(|r| r[0]).collect();
    let repeats = repeats.max(1);

    model.predict(&batch[..MIN_BENCH_ROWS.min(batch.len())])?;
    let mut surrogate_time = Duration::MAX;
    let mut surrogate_output = Vec::new();
    for _ in 0..repeats {
        let t = Instant::now();
        surrogate_output = model.predict(batch)?;
        surrogate_time = surrogate_time.min(t.elapsed());
    }

    let mut bisection_time = Duration::MAX;
    let mut solved = Vec::new();
    for _ in 0..repeats {
        let t = Instant::now();
        solved = invert_batch(ModelKind::D, &conds, &signals, cfg, q)?;
        bisection_time = bisection_time.min(t.elapsed());
    }
    let bisection_output: Vec<f64> = solved
        .iter()
        .map(|r| r.as_ref().map(|x| x.temperature_ts).unwrap_or(f64::NAN))
        .collect();
    let solver_failures = bisection_output.iter().filter(|v| v.is_nan()).count();

    Ok(BenchResult {
        rows: batch.len(),
        surrogate_time,
        bisection_time,
        speedup: bisection_time.as_secs_f64() / surrogate_time.as_secs_f64().max(1e-12),
        solver_failures,
        accuracy: Agreement::between(&surrogate_output, &bisection_output),
        surrogate_output,
        bisection_output,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile_sorted(&s, 0.5), 3.0);
        assert_eq!(quantile_sorted(&s, 1.0), 5.0);
        assert_eq!(quantile_sorted(&s, 0.25), 2.0);
        let a = Agreement::between(&[1.0, 2.0, f64::NAN], &[1.5, 2.0, 3.0]);
        assert_eq!(a.max_abs, 0.5);
        assert_eq!(a.median_abs, 0.25);
    }
}
