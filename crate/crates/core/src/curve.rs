//! Wavelength-dependent dimensionless curves: emissivity, gas absorption
//! and sensor responsivity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radiometry::Band;

/// A dimensionless function of wavelength (μm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralCurve {
    Constant {
        value: f64,
    },
    /// `height · exp(−(λ − mean)² / (2·sigma²))`
    Bell {
        height: f64,
        mean: f64,
        sigma: f64,
    },
    /// Piecewise-linear through `samples`, clamped to the end values
    /// outside the sampled range.
    Tabulated {
        #[serde(deserialize_with = "de_samples")]
        samples: Vec<(f64, f64)>,
    },
}

fn de_samples<'de, D>(d: D) -> std::result::Result<Vec<(f64, f64)>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    let samples = Vec::<(f64, f64)>::deserialize(d)?;
    validate_samples(&samples).map_err(serde::de::Error::custom)?;
    Ok(samples)
}

fn validate_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::domain("tabulated curve needs at least one sample"));
    }
    if samples.iter().any(|(l, v)| !l.is_finite() || !v.is_finite()) {
        return Err(Error::domain("tabulated curve samples must be finite"));
    }
    if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::domain(
            "tabulated curve wavelengths must be strictly increasing",
        ));
    }
    Ok(())
}

impl SpectralCurve {
    pub fn constant(value: f64) -> Self {
        SpectralCurve::Constant { value }
    }

    pub fn bell(height: f64, mean: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite() && height.is_finite() && mean.is_finite()) {
            return Err(Error::domain(format!(
                "bell curve needs finite height/mean and positive sigma, got h={height} μ={mean} σ={sigma}"
            )));
        }
        Ok(SpectralCurve::Bell {
            height,
            mean,
            sigma,
        })
    }

    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        validate_samples(&samples)?;
        Ok(SpectralCurve::Tabulated { samples })
    }

    /// Evaluates the curve at `lambda` μm.
    pub fn eval(&self, lambda: f64) -> f64 {
        match self {
            SpectralCurve::Constant { value } => *value,
            SpectralCurve::Bell {
                height,
                mean,
                sigma,
            } => {
                let d = lambda - mean;
                height * (-(d * d) / (2.0 * sigma * sigma)).exp()
            }
            SpectralCurve::Tabulated { samples } => interpolate(samples, lambda),
        }
    }

    /// Peak value: the constant, the bell height, or the largest sample.
    pub fn peak(&self) -> f64 {
        match self {
            SpectralCurve::Constant { value } => *value,
            SpectralCurve::Bell { height, .. } => *height,
            SpectralCurve::Tabulated { samples } => {
                samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Same shape with the peak moved to `peak`. Constant and bell curves
    /// take the value directly; tabulated curves are rescaled.
    pub fn with_peak(&self, peak: f64) -> Self {
        match self {
            SpectralCurve::Constant { .. } => SpectralCurve::Constant { value: peak },
            SpectralCurve::Bell { mean, sigma, .. } => SpectralCurve::Bell {
                height: peak,
                mean: *mean,
                sigma: *sigma,
            },
            SpectralCurve::Tabulated { samples } => {
                let current = self.peak();
                let scale = if current != 0.0 { peak / current } else { 0.0 };
                SpectralCurve::Tabulated {
                    samples: samples.iter().map(|&(l, v)| (l, v * scale)).collect(),
                }
            }
        }
    }

    /// Exact (min, max) of the curve over the closed band.
    pub fn extrema_on(&self, band: &Band) -> (f64, f64) {
        let (lo, hi) = (band.lo(), band.hi());
        let mut min = self.eval(lo).min(self.eval(hi));
        let mut max = self.eval(lo).max(self.eval(hi));
        match self {
            SpectralCurve::Constant { .. } => {}
            SpectralCurve::Bell { mean, .. } => {
                if *mean > lo && *mean < hi {
                    let v = self.eval(*mean);
                    min = min.min(v);
                    max = max.max(v);
                }
            }
            SpectralCurve::Tabulated { samples } => {
                for &(_, v) in samples.iter().filter(|(l, _)| *l > lo && *l < hi) {
                    min = min.min(v);
                    max = max.max(v);
                }
            }
        }
        (min, max)
    }
}

fn interpolate(samples: &[(f64, f64)], lambda: f64) -> f64 {
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if lambda <= first.0 {
        return first.1;
    }
    if lambda >= last.0 {
        return last.1;
    }
    // first index with wavelength > lambda; guaranteed in 1..len by the clamps above
    let i = samples.partition_point(|s| s.0 <= lambda);
    let (l0, v0) = samples[i - 1];
    let (l1, v1) = samples[i];
    v0 + (v1 - v0) * (lambda - l0) / (l1 - l0)
}
