//! Forward measurement models A–D and the irradiance decomposition.
//!
//! | kind | tube emission | wall reflection | gas |
//! |------|---------------|-----------------|-----|
//! | A    | blackbody     | –               | –   |
//! | B    | ε(λ)          | –               | –   |
//! | C    | ε(λ)          | (1−ε(λ))·L(T_w) | –   |
//! | D    | attenuated by (1 − l·α(λ)) | attenuated | l·α(λ)·L(T_g) |
//!
//! Signals are band-integrated radiance with the (unnormalised) sensor
//! responsivity folded in, W·m⁻²·sr⁻¹.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curve::SpectralCurve;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::radiometry::{celsius_to_kelvin, planck_unchecked, Band, PhysicalConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    A,
    B,
    C,
    D,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::A, ModelKind::B, ModelKind::C, ModelKind::D];

    pub fn uses_emissivity(self) -> bool {
        self >= ModelKind::B
    }

    pub fn uses_wall(self) -> bool {
        self >= ModelKind::C
    }

    pub fn uses_gas(self) -> bool {
        self == ModelKind::D
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModelKind::A => "A",
            ModelKind::B => "B",
            ModelKind::C => "C",
            ModelKind::D => "D",
        };
        f.write_str(s)
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(ModelKind::A),
            "B" => Ok(ModelKind::B),
            "C" => Ok(ModelKind::C),
            "D" => Ok(ModelKind::D),
            other => Err(Error::domain(format!("unknown model kind {other:?}"))),
        }
    }
}

fn default_path_length() -> f64 {
    1.0
}

fn default_responsivity() -> SpectralCurve {
    SpectralCurve::constant(1.0)
}

/// Everything about a measurement except the tube temperature: the
/// thermometer's view of the furnace. Temperatures in kelvin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConditions {
    pub wall_temp: f64,
    pub gas_temp: f64,
    pub emissivity: SpectralCurve,
    pub absorption: SpectralCurve,
    #[serde(default = "default_path_length")]
    pub path_length: f64,
    #[serde(default = "default_responsivity")]
    pub responsivity: SpectralCurve,
    #[serde(default)]
    pub band: Band,
}

impl SceneConditions {
    /// Steam-reformer nominal operating point: ε = 0.82, α = 0.05,
    /// T_w = 1105 °C, T_g = 980 °C, rectangular response on 3.7–4.2 μm.
    pub fn nominal() -> Self {
        SceneConditions {
            wall_temp: celsius_to_kelvin(1105.0),
            gas_temp: celsius_to_kelvin(980.0),
            emissivity: SpectralCurve::constant(0.82),
            absorption: SpectralCurve::constant(0.05),
            path_length: 1.0,
            responsivity: SpectralCurve::constant(1.0),
            band: Band::DEFAULT,
        }
    }

    pub fn with_tube_temp(self, tube_temp: f64) -> FurnaceScene {
        FurnaceScene {
            tube_temp,
            conditions: self,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_temperature("wall", self.wall_temp)?;
        check_temperature("gas", self.gas_temp)?;
        if !(self.path_length >= 0.0 && self.path_length.is_finite()) {
            return Err(Error::domain(format!(
                "path length must be non-negative, got {}",
                self.path_length
            )));
        }
        let (eps_lo, eps_hi) = self.emissivity.extrema_on(&self.band);
        if !(eps_lo >= 0.0 && eps_hi <= 1.0) {
            return Err(Error::domain(format!(
                "emissivity must stay in [0, 1] on the band, spans [{eps_lo}, {eps_hi}]"
            )));
        }
        let (abs_lo, abs_hi) = self.absorption.extrema_on(&self.band);
        let (la_lo, la_hi) = (self.path_length * abs_lo, self.path_length * abs_hi);
        if !(la_lo >= 0.0 && la_hi < 1.0) {
            return Err(Error::domain(format!(
                "effective absorption l·α must stay in [0, 1) on the band, spans [{la_lo}, {la_hi}]"
            )));
        }
        let (r_lo, r_hi) = self.responsivity.extrema_on(&self.band);
        if !(r_lo >= 0.0 && r_hi.is_finite()) {
            return Err(Error::domain("responsivity must be non-negative on the band"));
        }
        Ok(())
    }
}

fn check_temperature(what: &str, t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} temperature must be > 0 K, got {t}")))
    }
}

/// Physical ground truth of one measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FurnaceScene {
    pub tube_temp: f64,
    #[serde(flatten)]
    pub conditions: SceneConditions,
}

impl FurnaceScene {
    /// Nominal conditions with the tube at 950 °C.
    pub fn nominal() -> Self {
        SceneConditions::nominal().with_tube_temp(celsius_to_kelvin(950.0))
    }

    pub fn validate(&self) -> Result<()> {
        check_temperature("tube", self.tube_temp)?;
        self.conditions.validate()
    }
}

/// The three irradiance contributions reaching the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalDecomposition {
    /// Tube emission after gas attenuation.
    pub g_emit_prime: f64,
    /// Wall radiation reflected by the tube, after gas attenuation.
    pub g_reflect_prime: f64,
    /// Gas self-emission.
    pub g_gas: f64,
    pub g_sensor: f64,
}

/// A model kind bound to fixed scene conditions, with every
/// tube-independent quantity evaluated on the quadrature nodes once.
///
/// `signal(T)` is then one Planck evaluation per node, which is what the
/// inverse solver iterates on.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    kind: ModelKind,
    consts: PhysicalConstants,
    /// (wavelength, weight · R · (1 − l·α) · ε)
    emit: Vec<(f64, f64)>,
    reflect: f64,
    gas: f64,
}

impl PreparedModel {
    pub fn new(kind: ModelKind, cond: &SceneConditions, q: &QuadratureConfig) -> Result<Self> {
        Self::with_constants(kind, cond, q, PhysicalConstants::SI)
    }

    pub fn with_constants(
        kind: ModelKind,
        cond: &SceneConditions,
        q: &QuadratureConfig,
        consts: PhysicalConstants,
    ) -> Result<Self> {
        cond.validate()?;
        let mut emit = Vec::with_capacity(q.node_count());
        let mut reflect = 0.0;
        let mut gas = 0.0;
        for (lambda, w) in q.band_nodes(&cond.band) {
            let wr = w * cond.responsivity.eval(lambda);
            let eps = if kind.uses_emissivity() {
                cond.emissivity.eval(lambda)
            } else {
                1.0
            };
            let la = if kind.uses_gas() {
                cond.path_length * cond.absorption.eval(lambda)
            } else {
                0.0
            };
            emit.push((lambda, wr * (1.0 - la) * eps));
            if kind.uses_wall() {
                reflect += wr * (1.0 - la) * (1.0 - eps) * planck_unchecked(lambda, cond.wall_temp, &consts);
            }
            if kind.uses_gas() {
                gas += wr * la * planck_unchecked(lambda, cond.gas_temp, &consts);
            }
        }
        Ok(PreparedModel {
            kind,
            consts,
            emit,
            reflect,
            gas,
        })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Tube-independent part of the signal (reflection + gas).
    pub fn background(&self) -> f64 {
        self.reflect + self.gas
    }

    pub(crate) fn emitted(&self, tube_temp: f64) -> f64 {
        self.emit
            .iter()
            .map(|&(lambda, c)| c * planck_unchecked(lambda, tube_temp, &self.consts))
            .sum()
    }

    pub(crate) fn signal_at(&self, tube_temp: f64) -> f64 {
        self.emitted(tube_temp) + self.reflect + self.gas
    }

    pub fn signal(&self, tube_temp: f64) -> Result<f64> {
        check_temperature("tube", tube_temp)?;
        Ok(self.signal_at(tube_temp))
    }

    pub fn decompose(&self, tube_temp: f64) -> Result<SignalDecomposition> {
        check_temperature("tube", tube_temp)?;
        let g_emit_prime = self.emitted(tube_temp);
        Ok(SignalDecomposition {
            g_emit_prime,
            g_reflect_prime: self.reflect,
            g_gas: self.gas,
            g_sensor: g_emit_prime + self.reflect + self.gas,
        })
    }
}

/// Band-integrated sensor signal for `scene` under model `kind`.
pub fn forward_signal(kind: ModelKind, scene: &FurnaceScene, q: &QuadratureConfig) -> Result<f64> {
    check_temperature("tube", scene.tube_temp)?;
    Ok(PreparedModel::new(kind, &scene.conditions, q)?.signal_at(scene.tube_temp))
}

/// Model-D signal split into emitted, reflected and gas contributions.
pub fn decompose(scene: &FurnaceScene, q: &QuadratureConfig) -> Result<SignalDecomposition> {
    check_temperature("tube", scene.tube_temp)?;
    PreparedModel::new(ModelKind::D, &scene.conditions, q)?.decompose(scene.tube_temp)
}

/// The eight operator-adjustable scene parameters with bell-shaped
/// emissivity and absorption: the surrogate's inputs besides the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SceneParameters {
    pub wall_temp: f64,
    pub gas_temp: f64,
    pub eps_height: f64,
    pub eps_mean: f64,
    pub eps_sigma: f64,
    pub abs_height: f64,
    pub abs_mean: f64,
    pub abs_sigma: f64,
}

impl SceneParameters {
    pub const NAMES: [&'static str; 8] = [
        "wall_temp",
        "gas_temp",
        "eps_height",
        "eps_mean",
        "eps_sigma",
        "abs_height",
        "abs_mean",
        "abs_sigma",
    ];

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.wall_temp,
            self.gas_temp,
            self.eps_height,
            self.eps_mean,
            self.eps_sigma,
            self.abs_height,
            self.abs_mean,
            self.abs_sigma,
        ]
    }

    pub fn from_array(a: [f64; 8]) -> Self {
        SceneParameters {
            wall_temp: a[0],
            gas_temp: a[1],
            eps_height: a[2],
            eps_mean: a[3],
            eps_sigma: a[4],
            abs_height: a[5],
            abs_mean: a[6],
            abs_sigma: a[7],
        }
    }

    /// Scene conditions on the default band with rectangular response and l = 1.
    pub fn to_conditions(&self) -> Result<SceneConditions> {
        Ok(SceneConditions {
            wall_temp: self.wall_temp,
            gas_temp: self.gas_temp,
            emissivity: SpectralCurve::bell(self.eps_height, self.eps_mean, self.eps_sigma)?,
            absorption: SpectralCurve::bell(self.abs_height, self.abs_mean, self.abs_sigma)?,
            path_length: 1.0,
            responsivity: SpectralCurve::constant(1.0),
            band: Band::DEFAULT,
        })
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo && v <= self.hi
    }

    pub fn span(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Operating envelope of the model-D surrogate (temperatures in kelvin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    pub tube_temp: Range,
    /// Indexed like [`SceneParameters::to_array`].
    pub params: [Range; 8],
}

impl ParameterRanges {
    /// T_s 800–1200 °C, T_w 800–1300 °C, T_g 500–1000 °C, h_ε 0.65–0.95,
    /// μ 3.3–4.6 μm, σ 0.2–1.8 μm, h_α 0–0.2.
    pub fn furnace() -> Self {
        let k = celsius_to_kelvin;
        ParameterRanges {
            tube_temp: Range::new(k(800.0), k(1200.0)),
            params: [
                Range::new(k(800.0), k(1300.0)),
                Range::new(k(500.0), k(1000.0)),
                Range::new(0.65, 0.95),
                Range::new(3.3, 4.6),
                Range::new(0.2, 1.8),
                Range::new(0.0, 0.2),
                Range::new(3.3, 4.6),
                Range::new(0.2, 1.8),
            ],
        }
    }

    /// Names the first parameter outside its range, if any.
    pub fn check(&self, p: &SceneParameters) -> Result<()> {
        for ((name, v), r) in SceneParameters::NAMES.iter().zip(p.to_array()).zip(self.params) {
            if !r.contains(v) {
                return Err(Error::domain(format!(
                    "{name} = {v} outside operating range [{}, {}]",
                    r.lo, r.hi
                )));
            }
        }
        Ok(())
    }
}

impl Default for ParameterRanges {
    fn default() -> Self {
        Self::furnace()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn kind_ordering_and_parse() {
        assert!(ModelKind::A < ModelKind::B && ModelKind::C < ModelKind::D);
        assert_eq!("d".parse::<ModelKind>().unwrap(), ModelKind::D);
        assert!("E".parse::<ModelKind>().is_err());
    }

    #[test]
    fn b_with_unit_emissivity_is_a() {
        let mut s = FurnaceScene::nominal();
        let a = forward_signal(ModelKind::A, &s, &q()).unwrap();
        s.conditions.emissivity = SpectralCurve::constant(1.0);
        assert_eq!(forward_signal(ModelKind::B, &s, &q()).unwrap(), a);
    }

    #[test]
    fn c_with_equal_wall_is_a() {
        let mut s = FurnaceScene::nominal();
        s.conditions.wall_temp = s.tube_temp;
        s.conditions.emissivity = SpectralCurve::bell(0.7, 3.8, 0.4).unwrap();
        let a = forward_signal(ModelKind::A, &s, &q()).unwrap();
        let c = forward_signal(ModelKind::C, &s, &q()).unwrap();
        assert!((c - a).abs() <= 1e-12 * a);
    }

    #[test]
    fn d_without_absorption_is_c() {
        let mut s = FurnaceScene::nominal();
        s.conditions.absorption = SpectralCurve::constant(0.0);
        assert_eq!(
            forward_signal(ModelKind::D, &s, &q()).unwrap(),
            forward_signal(ModelKind::C, &s, &q()).unwrap()
        );
    }

    #[test]
    fn nominal_model_d_golden() {
        // 10⁶-interval midpoint rule in extended precision.
        let golden = 3584.849_356_774_968;
        let v = forward_signal(ModelKind::D, &FurnaceScene::nominal(), &q()).unwrap();
        assert!((v / golden - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn nominal_decomposition_golden() {
        let d = decompose(&FurnaceScene::nominal(), &q()).unwrap();
        assert!((d.g_emit_prime / 2591.826_598_117_491 - 1.0).abs() < 1e-10);
        assert!((d.g_reflect_prime / 813.617_782_033_4 - 1.0).abs() < 1e-10);
        assert!((d.g_gas / 179.404_976_624_076_7 - 1.0).abs() < 1e-10);
        assert_eq!(d.g_sensor, d.g_emit_prime + d.g_reflect_prime + d.g_gas);
    }

    #[test]
    fn perfect_emitter_clear_gas_has_no_background() {
        let mut s = FurnaceScene::nominal();
        s.conditions.emissivity = SpectralCurve::constant(1.0);
        s.conditions.absorption = SpectralCurve::constant(0.0);
        let d = decompose(&s, &q()).unwrap();
        assert_eq!(d.g_reflect_prime, 0.0);
        assert_eq!(d.g_gas, 0.0);
    }

    #[test]
    fn isothermal_cavity_is_blackbody() {
        let mut s = FurnaceScene::nominal();
        s.conditions.wall_temp = s.tube_temp;
        s.conditions.gas_temp = s.tube_temp;
        s.conditions.absorption = SpectralCurve::bell(0.15, 3.9, 0.3).unwrap();
        let d = decompose(&s, &q()).unwrap();
        let a = forward_signal(ModelKind::A, &s, &q()).unwrap();
        assert!((d.g_sensor - a).abs() <= 1e-12 * a);
    }

    #[test]
    fn reflections_raise_apparent_radiance() {
        let s = FurnaceScene::nominal();
        assert!(s.conditions.wall_temp > s.tube_temp);
        let b = forward_signal(ModelKind::B, &s, &q()).unwrap();
        let c = forward_signal(ModelKind::C, &s, &q()).unwrap();
        assert!(c > b);
    }

    #[test]
    fn invalid_scenes_are_rejected() {
        let mut s = FurnaceScene::nominal();
        s.conditions.emissivity = SpectralCurve::constant(1.2);
        assert!(matches!(forward_signal(ModelKind::B, &s, &q()), Err(Error::Domain(_))));
        let mut s = FurnaceScene::nominal();
        s.conditions.absorption = SpectralCurve::constant(0.6);
        s.conditions.path_length = 2.0;
        assert!(forward_signal(ModelKind::D, &s, &q()).is_err());
        let mut s = FurnaceScene::nominal();
        s.tube_temp = 0.0;
        assert!(forward_signal(ModelKind::A, &s, &q()).is_err());
    }

    #[test]
    fn scene_json_roundtrip_with_defaults() {
        let json = r#"{"tube_temp":1223.15,"wall_temp":1378.15,"gas_temp":1253.15,
            "emissivity":{"kind":"constant","value":0.82},
            "absorption":{"kind":"constant","value":0.05}}"#;
        let s: FurnaceScene = serde_json::from_str(json).unwrap();
        assert_eq!(s, FurnaceScene::nominal());
    }

    #[test]
    fn ranges_check_names_offender() {
        let r = ParameterRanges::furnace();
        let mut p = SceneParameters::from_array(std::array::from_fn(|i| r.params[i].lo));
        assert!(r.check(&p).is_ok());
        p.eps_height = 1.2;
        let msg = r.check(&p).unwrap_err().to_string();
        assert!(msg.contains("eps_height"), "{msg}");
    }
}
