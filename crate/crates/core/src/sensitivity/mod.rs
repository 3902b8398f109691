//! One-at-a-time parameter perturbation and uncertainty budgeting.
//!
//! The true scene stays at its nominal values; the thermometer's *assumed*
//! value of one parameter is swept and the recovered tube temperature is
//! compared with the truth. The largest absolute deviation over the sweep
//! is that parameter's standard uncertainty at the given tube temperature,
//! and per-parameter uncertainties add in quadrature.

mod report;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inverse::{invert_prepared, SolverConfig};
use crate::models::{forward_signal, ModelKind, PreparedModel, SceneConditions};
use crate::quadrature::QuadratureConfig;
use crate::radiometry::{celsius_to_kelvin, Band};

pub use report::{
    budget_csv, emit_sweep_report, format_sig6, read_budget_csv, sweep_csv, read_sweep_csv, write_budget_csv,
    write_sweep_csv, BudgetRecord, SweepRecord, BUDGET_HEADER, SWEEP_HEADER,
};

/// Coverage factor for a 95 % interval under a normal distribution.
pub const COVERAGE_95: f64 = 1.96;

/// Default grid density per parameter.
pub const DEFAULT_GRID_POINTS: usize = 41;

/// Tube temperatures (°C) at which sweeps are reported.
pub const REPORT_TUBE_TEMPS_C: [f64; 6] = [880.0, 910.0, 940.0, 970.0, 1000.0, 1030.0];

pub fn report_tube_temps() -> Vec<f64> {
    REPORT_TUBE_TEMPS_C.iter().map(|&c| celsius_to_kelvin(c)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterName {
    Wavelength,
    Emissivity,
    Absorption,
    WallTemp,
    GasTemp,
}

impl ParameterName {
    pub const ALL: [ParameterName; 5] = [
        ParameterName::Wavelength,
        ParameterName::Emissivity,
        ParameterName::Absorption,
        ParameterName::WallTemp,
        ParameterName::GasTemp,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParameterName::Wavelength => "wavelength",
            ParameterName::Emissivity => "emissivity",
            ParameterName::Absorption => "absorption",
            ParameterName::WallTemp => "wall_temp",
            ParameterName::GasTemp => "gas_temp",
        }
    }

    /// Whether the model kind has this variable at all.
    pub fn applies_to(self, kind: ModelKind) -> bool {
        match self {
            ParameterName::Wavelength => true,
            ParameterName::Emissivity => kind.uses_emissivity(),
            ParameterName::WallTemp => kind.uses_wall(),
            ParameterName::Absorption | ParameterName::GasTemp => kind.uses_gas(),
        }
    }

    pub fn is_temperature(self) -> bool {
        matches!(self, ParameterName::WallTemp | ParameterName::GasTemp)
    }

    /// Parameters of `kind` in canonical order.
    pub fn for_model(kind: ModelKind) -> Vec<ParameterName> {
        Self::ALL.into_iter().filter(|p| p.applies_to(kind)).collect()
    }

    /// Current value of this parameter in `cond`: band centre, curve peak
    /// or temperature.
    pub fn value_in(self, cond: &SceneConditions) -> f64 {
        match self {
            ParameterName::Wavelength => cond.band.center(),
            ParameterName::Emissivity => cond.emissivity.peak(),
            ParameterName::Absorption => cond.absorption.peak(),
            ParameterName::WallTemp => cond.wall_temp,
            ParameterName::GasTemp => cond.gas_temp,
        }
    }

    /// `cond` with this parameter replaced by `value`. Wavelength moves the
    /// band centre at fixed width; emissivity and absorption set the curve
    /// peak keeping its shape.
    pub fn apply(self, cond: &SceneConditions, value: f64) -> Result<SceneConditions> {
        let mut out = cond.clone();
        match self {
            ParameterName::Wavelength => out.band = Band::centered(value, cond.band.width())?,
            ParameterName::Emissivity => out.emissivity = cond.emissivity.with_peak(value),
            ParameterName::Absorption => out.absorption = cond.absorption.with_peak(value),
            ParameterName::WallTemp => out.wall_temp = value,
            ParameterName::GasTemp => out.gas_temp = value,
        }
        Ok(out)
    }
}

impl fmt::Display for ParameterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParameterName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        let p = match norm.as_str() {
            "wavelength" | "lambda" => ParameterName::Wavelength,
            "emissivity" | "eps" => ParameterName::Emissivity,
            "absorption" | "alpha" => ParameterName::Absorption,
            "wall_temp" | "tw" => ParameterName::WallTemp,
            "gas_temp" | "tg" => ParameterName::GasTemp,
            _ => return Err(Error::domain(format!("unknown parameter {s:?}"))),
        };
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpec {
    pub name: ParameterName,
    pub nominal: f64,
    pub range_lo: f64,
    pub range_hi: f64,
    pub grid_points: usize,
}

impl ParameterSpec {
    pub fn new(name: ParameterName, nominal: f64, range_lo: f64, range_hi: f64, grid_points: usize) -> Result<Self> {
        let spec = ParameterSpec {
            name,
            nominal,
            range_lo,
            range_hi,
            grid_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Steam-reformer sensitivity ranges (temperatures in kelvin).
    pub fn standard(name: ParameterName) -> Self {
        let k = celsius_to_kelvin;
        let (nominal, lo, hi) = match name {
            ParameterName::Wavelength => (3.95, 3.7, 4.2),
            ParameterName::Emissivity => (0.82, 0.72, 0.92),
            ParameterName::Absorption => (0.05, 0.0, 0.1),
            ParameterName::WallTemp => (k(1105.0), k(1030.0), k(1180.0)),
            ParameterName::GasTemp => (k(980.0), k(880.0), k(1080.0)),
        };
        ParameterSpec {
            name,
            nominal,
            range_lo: lo,
            range_hi: hi,
            grid_points: DEFAULT_GRID_POINTS,
        }
    }

    pub fn with_grid_points(mut self, n: usize) -> Self {
        self.grid_points = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.range_lo <= self.nominal && self.nominal <= self.range_hi) {
            return Err(Error::domain(format!(
                "{}: nominal {} outside range [{}, {}]",
                self.name, self.nominal, self.range_lo, self.range_hi
            )));
        }
        if self.grid_points < 3 {
            return Err(Error::domain(format!("{}: grid needs at least 3 points", self.name)));
        }
        Ok(())
    }

    /// Evenly spaced grid over the range, endpoints included.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.grid_points;
        let step = (self.range_hi - self.range_lo) / (n - 1) as f64;
        (0..n)
            .map(|i| if i + 1 == n { self.range_hi } else { self.range_lo + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub model: ModelKind,
    pub parameter: ParameterSpec,
    pub tube_temps: Vec<f64>,
    pub grid: Vec<f64>,
    /// `delta_t[i][j]`: recovered − true tube temperature (K) at
    /// `tube_temps[i]` when the thermometer assumes `grid[j]`. NaN where
    /// the solver failed; see `failures`.
    pub delta_t: Vec<Vec<f64>>,
    pub failures: Vec<CellFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub row: usize,
    pub col: usize,
    pub message: String,
}

/// Converts a signal measured on the true band into the signal the
/// thermometer's model expects on its assumed band.
///
/// The instrument is blackbody-calibrated on its real band, so the reading
/// is exact as a brightness temperature. A wrong assumed wavelength then
/// only enters through the correction model: the brightness temperature
/// is re-expressed as blackbody radiance on the assumed band before the
/// model is inverted. Identical band and responsivity pass `measured`
/// through unchanged.
pub fn calibrated_signal(
    true_cond: &SceneConditions,
    assumed_cond: &SceneConditions,
    measured: f64,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<f64> {
    if true_cond.band == assumed_cond.band && true_cond.responsivity == assumed_cond.responsivity {
        return Ok(measured);
    }
    let fine = SolverConfig {
        tolerance_t: cfg.tolerance_t.min(1e-7),
        max_iterations: cfg.max_iterations.max(100),
        ..*cfg
    };
    let true_bb = PreparedModel::new(ModelKind::A, true_cond, q)?;
    let brightness = invert_prepared(&true_bb, measured, &fine)?.temperature_ts;
    forward_signal(ModelKind::A, &assumed_cond.clone().with_tube_temp(brightness), q)
}

/// Sweeps one assumed parameter over its grid at each tube temperature.
pub fn perturbation_sweep(
    kind: ModelKind,
    spec: &ParameterSpec,
    tube_temps: &[f64],
    nominals: &SceneConditions,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<SweepResult> {
    spec.validate()?;
    cfg.validate()?;
    if !spec.name.applies_to(kind) {
        return Err(Error::domain(format!(
            "parameter {} is not part of model {kind}",
            spec.name
        )));
    }
    for &t in tube_temps {
        if !(t >= cfg.bracket_lo && t <= cfg.bracket_hi) {
            return Err(Error::domain(format!(
                "tube temperature {t} K outside solver bracket [{}, {}]",
                cfg.bracket_lo, cfg.bracket_hi
            )));
        }
    }
    let truth = PreparedModel::new(kind, nominals, q)?;
    let grid = spec.grid();
    let assumed: Vec<SceneConditions> = grid
        .iter()
        .map(|&v| spec.name.apply(nominals, v))
        .collect::<Result<_>>()?;
    let prepared: Vec<PreparedModel> = assumed
        .iter()
        .map(|c| PreparedModel::new(kind, c, q))
        .collect::<Result<_>>()?;

    let rows: Vec<Vec<std::result::Result<f64, String>>> = tube_temps
        .par_iter()
        .map(|&ts| {
            let measured = truth.signal_at(ts);
            assumed
                .iter()
                .zip(&prepared)
                .map(|(cond, model)| {
                    let s = calibrated_signal(nominals, cond, measured, cfg, q)?;
                    Ok(invert_prepared(model, s, cfg)?.temperature_ts - ts)
                })
                .map(|r: Result<f64>| r.map_err(|e| e.to_string()))
                .collect()
        })
        .collect();

    let mut failures = Vec::new();
    let delta_t = rows
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, cell)| match cell {
                    Ok(v) => v,
                    Err(message) => {
                        failures.push(CellFailure { row: i, col: j, message });
                        f64::NAN
                    }
                })
                .collect()
        })
        .collect();

    Ok(SweepResult {
        model: kind,
        parameter: *spec,
        tube_temps: tube_temps.to_vec(),
        grid,
        delta_t,
        failures,
    })
}

/// Largest |ΔT| over the grid at `tube_temp` (K).
pub fn uncertainty_for_parameter(sweep: &SweepResult, tube_temp: f64) -> Result<f64> {
    let row = sweep
        .tube_temps
        .iter()
        .position(|&t| t == tube_temp)
        .ok_or_else(|| {
            Error::Lookup(format!(
                "tube temperature {tube_temp} K is not part of the {} sweep",
                sweep.parameter.name
            ))
        })?;
    let values = &sweep.delta_t[row];
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::domain(format!(
            "{} sweep has failed cells at {tube_temp} K",
            sweep.parameter.name
        )));
    }
    Ok(values.iter().fold(0.0, |m: f64, v| m.max(v.abs())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBudget {
    pub per_parameter_u: BTreeMap<String, f64>,
    pub combined_uc: f64,
    pub coverage_k: f64,
    pub expanded_u: f64,
}

/// u_c = √Σu², U = k·u_c.
pub fn combine_budget(us: &BTreeMap<String, f64>, coverage_k: f64) -> Result<UncertaintyBudget> {
    if let Some((name, u)) = us.iter().find(|(_, u)| !(**u >= 0.0 && u.is_finite())) {
        return Err(Error::domain(format!("uncertainty for {name} must be >= 0, got {u}")));
    }
    if !(coverage_k >= 0.0 && coverage_k.is_finite()) {
        return Err(Error::domain(format!("coverage factor must be >= 0, got {coverage_k}")));
    }
    let combined_uc = us.values().map(|u| u * u).sum::<f64>().sqrt();
    Ok(UncertaintyBudget {
        per_parameter_u: us.clone(),
        combined_uc,
        coverage_k,
        expanded_u: coverage_k * combined_uc,
    })
}

/// A budget tied to the model and tube temperature it was evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeBudget {
    pub model: ModelKind,
    pub tube_temp: f64,
    pub budget: UncertaintyBudget,
}

/// Budget at `tube_temp` from one sweep per parameter.
pub fn budget_from_sweeps(
    sweeps: &[SweepResult],
    tube_temp: f64,
    coverage_k: f64,
) -> Result<TubeBudget> {
    let model = sweeps
        .first()
        .map(|s| s.model)
        .ok_or_else(|| Error::domain("budget needs at least one sweep"))?;
    let mut us = BTreeMap::new();
    for s in sweeps {
        if s.model != model {
            return Err(Error::domain("sweeps in one budget must share a model kind"));
        }
        us.insert(s.parameter.name.to_string(), uncertainty_for_parameter(s, tube_temp)?);
    }
    Ok(TubeBudget {
        model,
        tube_temp,
        budget: combine_budget(&us, coverage_k)?,
    })
}

/// Standard sweeps for every parameter of `kind`, then a budget per tube
/// temperature.
pub fn model_study(
    kind: ModelKind,
    tube_temps: &[f64],
    nominals: &SceneConditions,
    grid_points: usize,
    coverage_k: f64,
    cfg: &SolverConfig,
    q: &QuadratureConfig,
) -> Result<(Vec<SweepResult>, Vec<TubeBudget>)> {
    let sweeps = ParameterName::for_model(kind)
        .into_iter()
        .map(|p| {
            let mut spec = ParameterSpec::standard(p).with_grid_points(grid_points);
            spec.nominal = p.value_in(nominals);
            perturbation_sweep(kind, &spec, tube_temps, nominals, cfg, q)
        })
        .collect::<Result<Vec<_>>>()?;
    let budgets = tube_temps
        .iter()
        .map(|&t| budget_from_sweeps(&sweeps, t, coverage_k))
        .collect::<Result<Vec<_>>>()?;
    Ok((sweeps, budgets))
}

/// Pearson correlation; NaN for degenerate input.
pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn sweep(kind: ModelKind, p: ParameterName, temps: &[f64]) -> SweepResult {
        perturbation_sweep(
            kind,
            &ParameterSpec::standard(p),
            temps,
            &SceneConditions::nominal(),
            &SolverConfig::default(),
            &q(),
        )
        .unwrap()
    }

    #[test]
    fn standard_grid_contains_nominal() {
        for p in ParameterName::ALL {
            let spec = ParameterSpec::standard(p);
            let g = spec.grid();
            assert_eq!(g.len(), 41);
            assert_eq!(g[0], spec.range_lo);
            assert_eq!(g[40], spec.range_hi);
            assert!((g[20] - spec.nominal).abs() < 1e-9, "{p}");
            assert_eq!(p.value_in(&SceneConditions::nominal()), spec.nominal);
        }
    }

    #[test]
    fn nominal_column_is_zero() {
        let temps = report_tube_temps();
        for (kind, p) in [
            (ModelKind::B, ParameterName::Wavelength),
            (ModelKind::B, ParameterName::Emissivity),
            (ModelKind::D, ParameterName::GasTemp),
        ] {
            let s = sweep(kind, p, &temps);
            for row in &s.delta_t {
                assert!(row[20].abs() <= 0.01, "{kind} {p}: {}", row[20]);
            }
        }
    }

    #[test]
    fn parameter_outside_model_is_rejected() {
        let err = perturbation_sweep(
            ModelKind::B,
            &ParameterSpec::standard(ParameterName::WallTemp),
            &[1223.15],
            &SceneConditions::nominal(),
            &SolverConfig::default(),
            &q(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn spec_validation() {
        assert!(ParameterSpec::new(ParameterName::Emissivity, 0.5, 0.72, 0.92, 41).is_err());
        assert!(ParameterSpec::new(ParameterName::Emissivity, 0.82, 0.72, 0.92, 2).is_err());
    }

    #[test]
    fn uncertainty_is_max_abs() {
        let mut s = sweep(ModelKind::B, ParameterName::Emissivity, &[1223.15]);
        s.delta_t = vec![vec![-3.0, 0.0, 5.0]];
        assert_eq!(uncertainty_for_parameter(&s, 1223.15).unwrap(), 5.0);
        s.delta_t = vec![vec![0.0; 3]];
        assert_eq!(uncertainty_for_parameter(&s, 1223.15).unwrap(), 0.0);
        assert!(matches!(uncertainty_for_parameter(&s, 1000.0), Err(Error::Lookup(_))));
    }

    #[test]
    fn budget_arithmetic() {
        let us: BTreeMap<String, f64> = [("a".into(), 3.0), ("b".into(), 4.0)].into();
        let b = combine_budget(&us, 1.0).unwrap();
        assert_eq!(b.combined_uc, 5.0);
        assert_eq!(b.expanded_u, 5.0);
        let zero: BTreeMap<String, f64> = [("a".into(), 0.0)].into();
        let b = combine_budget(&zero, COVERAGE_95).unwrap();
        assert_eq!((b.combined_uc, b.expanded_u), (0.0, 0.0));
        let neg: BTreeMap<String, f64> = [("a".into(), -1.0)].into();
        assert!(combine_budget(&neg, 1.0).is_err());
    }

    #[test]
    fn model_b_emissivity_dominates_budget() {
        let nominal = celsius_to_kelvin(950.0);
        let (_, budgets) = model_study(
            ModelKind::B,
            &[nominal],
            &SceneConditions::nominal(),
            DEFAULT_GRID_POINTS,
            COVERAGE_95,
            &SolverConfig::default(),
            &q(),
        )
        .unwrap();
        let b = &budgets[0].budget;
        assert!(b.per_parameter_u["emissivity"] / b.combined_uc > 0.99);
        assert_eq!(b.expanded_u, COVERAGE_95 * b.combined_uc);
    }

    #[test]
    fn emissivity_uncertainty_converges_under_refinement() {
        // Fine-grid recomputation: 10× denser grid over the same range.
        let t = celsius_to_kelvin(950.0);
        let coarse = sweep(ModelKind::B, ParameterName::Emissivity, &[t]);
        let fine = perturbation_sweep(
            ModelKind::B,
            &ParameterSpec::standard(ParameterName::Emissivity).with_grid_points(401),
            &[t],
            &SceneConditions::nominal(),
            &SolverConfig::default(),
            &q(),
        )
        .unwrap();
        let a = uncertainty_for_parameter(&coarse, t).unwrap();
        let b = uncertainty_for_parameter(&fine, t).unwrap();
        assert!((a / b - 1.0).abs() < 0.02, "{a} vs {b}");
    }

    #[test]
    fn calibrated_signal_identity_on_same_band() {
        let c = SceneConditions::nominal();
        let s = calibrated_signal(&c, &c, 1234.5, &SolverConfig::default(), &q()).unwrap();
        assert_eq!(s, 1234.5);
    }

    #[test]
    fn parameter_names_parse() {
        for p in ParameterName::ALL {
            assert_eq!(p.as_str().parse::<ParameterName>().unwrap(), p);
        }
        assert_eq!("eps".parse::<ParameterName>().unwrap(), ParameterName::Emissivity);
        assert!("height".parse::<ParameterName>().is_err());
    }

    #[test]
    fn correlation_signs() {
        let x = [1.0, 2.0, 3.0];
        assert!((correlation(&x, &[2.0, 4.0, 6.0]) - 1.0).abs() < 1e-12);
        assert!((correlation(&x, &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
    }
}
