//! Physical constants, Planck spectral radiance and the sensor band.
//!
//! Wavelengths are micrometres and temperatures kelvin throughout, so the
//! radiation constants are stored in micrometre-based units:
//! `c1L` in W·μm⁴·m⁻²·sr⁻¹ and `c2` in μm·K. With those units
//! [`planck_radiance`] returns W·m⁻²·sr⁻¹·μm⁻¹.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset between the Celsius and Kelvin scales.
pub const CELSIUS_OFFSET: f64 = 273.15;

pub fn celsius_to_kelvin(c: f64) -> f64 {
    c + CELSIUS_OFFSET
}

pub fn kelvin_to_celsius(k: f64) -> f64 {
    k - CELSIUS_OFFSET
}

/// CODATA exact SI constants plus the two derived radiation constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    planck_h: f64,
    boltzmann_kb: f64,
    light_speed_c0: f64,
    c1l: f64,
    c2: f64,
}

impl PhysicalConstants {
    pub const SI: PhysicalConstants = PhysicalConstants {
        planck_h: 6.626_070_15e-34,
        boltzmann_kb: 1.380_649e-23,
        light_speed_c0: 299_792_458.0,
        c1l: 1.191_042_972_397_188_4e8,
        c2: 14_387.768_775_039_338,
    };

    /// Derives the radiation constants from `h`, `k_B` and `c0`.
    ///
    /// `c1L = 2·h·c0²` is scaled by 1e24 (m⁴→μm⁴ and per-m→per-μm) and
    /// `c2 = h·c0/k_B` by 1e6 (m·K→μm·K).
    pub fn from_fundamental(planck_h: f64, boltzmann_kb: f64, light_speed_c0: f64) -> Self {
        PhysicalConstants {
            planck_h,
            boltzmann_kb,
            light_speed_c0,
            c1l: 2.0 * planck_h * light_speed_c0 * light_speed_c0 * 1e24,
            c2: planck_h * light_speed_c0 / boltzmann_kb * 1e6,
        }
    }

    pub fn planck_h(&self) -> f64 {
        self.planck_h
    }

    pub fn boltzmann_kb(&self) -> f64 {
        self.boltzmann_kb
    }

    pub fn light_speed_c0(&self) -> f64 {
        self.light_speed_c0
    }

    /// First radiation constant for radiance, W·μm⁴·m⁻²·sr⁻¹.
    pub fn c1l(&self) -> f64 {
        self.c1l
    }

    /// Second radiation constant, μm·K.
    pub fn c2(&self) -> f64 {
        self.c2
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// Blackbody spectral radiance at `lambda` μm and `t` K.
pub fn planck_radiance(lambda: f64, t: f64, consts: &PhysicalConstants) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("wavelength must be positive, got {lambda}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("temperature must be positive, got {t}")));
    }
    Ok(planck_unchecked(lambda, t, consts))
}

/// Inner-loop form of [`planck_radiance`] for callers that validated inputs.
#[inline]
pub(crate) fn planck_unchecked(lambda: f64, t: f64, consts: &PhysicalConstants) -> f64 {
    let l2 = lambda * lambda;
    consts.c1l / (l2 * l2 * lambda * (consts.c2 / (lambda * t)).exp_m1())
}

/// Spectral band of the thermometer, in μm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BandRepr", into = "BandRepr")]
pub struct Band {
    lambda_lo: f64,
    lambda_hi: f64,
}

#[derive(Serialize, Deserialize)]
struct BandRepr {
    lambda_lo: f64,
    lambda_hi: f64,
}

impl TryFrom<BandRepr> for Band {
    type Error = Error;
    fn try_from(r: BandRepr) -> Result<Self> {
        Band::new(r.lambda_lo, r.lambda_hi)
    }
}

impl From<Band> for BandRepr {
    fn from(b: Band) -> Self {
        BandRepr {
            lambda_lo: b.lambda_lo,
            lambda_hi: b.lambda_hi,
        }
    }
}

impl Band {
    /// Default sensor band: 3.7–4.2 μm around the 3.95 μm nominal wavelength.
    pub const DEFAULT: Band = Band {
        lambda_lo: 3.7,
        lambda_hi: 4.2,
    };

    pub fn new(lambda_lo: f64, lambda_hi: f64) -> Result<Self> {
        if !(lambda_lo > 0.0 && lambda_lo.is_finite() && lambda_hi.is_finite()) {
            return Err(Error::domain(format!(
                "band limits must be positive and finite, got [{lambda_lo}, {lambda_hi}]"
            )));
        }
        if lambda_lo >= lambda_hi {
            return Err(Error::domain(format!(
                "band must satisfy lo < hi, got [{lambda_lo}, {lambda_hi}]"
            )));
        }
        Ok(Band {
            lambda_lo,
            lambda_hi,
        })
    }

    /// Band of the given width centred on `center`.
    pub fn centered(center: f64, width: f64) -> Result<Self> {
        Band::new(center - 0.5 * width, center + 0.5 * width)
    }

    pub fn lo(&self) -> f64 {
        self.lambda_lo
    }

    pub fn hi(&self) -> f64 {
        self.lambda_hi
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lambda_lo + self.lambda_hi)
    }

    pub fn width(&self) -> f64 {
        self.lambda_hi - self.lambda_lo
    }
}

impl Default for Band {
    fn default() -> Self {
        Band::DEFAULT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_constants_match_fundamental_derivation() {
        let si = PhysicalConstants::SI;
        let derived =
            PhysicalConstants::from_fundamental(si.planck_h(), si.boltzmann_kb(), si.light_speed_c0());
        assert!((derived.c1l() / si.c1l() - 1.0).abs() < 1e-10);
        assert!((derived.c2() / si.c2() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn planck_vanishes_at_low_temperature() {
        let v = planck_radiance(3.95, 1.0, &PhysicalConstants::SI).unwrap();
        assert!(v < 1e-300);
    }

    #[test]
    fn planck_golden_value() {
        // 40-digit evaluation of c1L / (λ⁵ (exp(c2/λT) − 1)) at λ = 3.95 μm, T = 1223.15 K.
        let golden = 6642.381_139_736_158;
        let v = planck_radiance(3.95, 1223.15, &PhysicalConstants::SI).unwrap();
        assert!((v / golden - 1.0).abs() < 1e-13, "{v}");
    }

    #[test]
    fn planck_rejects_non_positive_inputs() {
        let c = PhysicalConstants::SI;
        assert!(matches!(planck_radiance(0.0, 1000.0, &c), Err(Error::Domain(_))));
        assert!(matches!(planck_radiance(4.0, -1.0, &c), Err(Error::Domain(_))));
        assert!(planck_radiance(f64::NAN, 1000.0, &c).is_err());
    }

    #[test]
    fn band_validation() {
        assert!(Band::new(4.2, 3.7).is_err());
        assert!(Band::new(0.0, 3.7).is_err());
        let b = Band::centered(3.95, 0.5).unwrap();
        assert!((b.lo() - 3.7).abs() < 1e-15 && (b.hi() - 4.2).abs() < 1e-15);
    }
}
