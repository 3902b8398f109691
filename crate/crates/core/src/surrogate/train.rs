//! Minibatch Adam on mean squared error of the normalised output.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::LabeledDataset;
use super::mlp::{feature_value, MlpModel, NormRange, Workspace, INPUTS};
use crate::error::{Error, Result};
use crate::models::ParameterRanges;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Share of rows held out when [`train`] splits the data itself.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 200,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 256,
            seed: 0,
            validation_fraction: 0.1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::domain("epochs and batch_size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.epsilon > 0.0) {
            return Err(Error::domain("learning rate and epsilon must be positive"));
        }
        if !((0.0..1.0).contains(&self.beta1) && (0.0..1.0).contains(&self.beta2)) {
            return Err(Error::domain("Adam betas must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(Error::domain("validation fraction must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    /// Validation RMS error in kelvin.
    pub final_rms: f64,
    pub train_rms: f64,
    /// Mean training loss (normalised MSE) per epoch.
    pub epoch_loss: Vec<f64>,
    pub train_rows: usize,
    pub validation_rows: usize,
    #[serde(with = "secs")]
    pub wall_time: Duration,
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        Ok(Duration::from_secs_f64(f64::deserialize(d)?))
    }
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    fn new(model: &MlpModel) -> Self {
        let zeros: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        Adam {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, cfg: &TrainConfig, weights: &mut [Vec<f64>], grads: &[Vec<f64>]) {
        self.t += 1;
        let c1 = 1.0 - cfg.beta1.powi(self.t);
        let c2 = 1.0 - cfg.beta2.powi(self.t);
        for (((w, g), m), v) in weights.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            for i in 0..w.len() {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
                w[i] -= cfg.learning_rate * (m[i] / c1) / ((v[i] / c2).sqrt() + cfg.epsilon);
            }
        }
    }
}

/// Normalisation pairs: the operating ranges for the eight parameters
/// (widened to cover the data if needed), observed extent of ln S,
/// and the tube-temperature range for the output.
pub fn fit_normalization(
    data: &LabeledDataset,
    ranges: &ParameterRanges,
) -> Result<([NormRange; INPUTS], NormRange)> {
    let extent = |vals: &mut dyn Iterator<Item = f64>| {
        vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let widen = |(lo, hi): (f64, f64)| {
        if lo < hi {
            NormRange::new(lo, hi)
        } else {
            let pad = 0.5 * lo.abs().max(1.0);
            NormRange::new(lo - pad, hi + pad)
        }
    };
    let mut inputs = [NormRange { lo: 0.0, hi: 1.0 }; INPUTS];
    inputs[0] = widen(extent(&mut data.inputs.iter().map(|r| feature_value(0, r[0]))))?;
    for k in 0..8 {
        let (lo, hi) = extent(&mut data.inputs.iter().map(|r| r[k + 1]));
        let r = ranges.params[k];
        inputs[k + 1] = widen((lo.min(r.lo), hi.max(r.hi)))?;
    }
    let (lo, hi) = extent(&mut data.targets.iter().copied());
    let output = widen((lo.min(ranges.tube_temp.lo), hi.max(ranges.tube_temp.hi)))?;
    Ok((inputs, output))
}

/// Splits `data` (seeded shuffle, `validation_fraction` held out) and trains.
pub fn train(data: &LabeledDataset, cfg: &TrainConfig) -> Result<(MlpModel, TrainingReport)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::domain("training data is empty"));
    }
    let n = data.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed ^ SPLIT_STREAM));
    let n_val = if n == 1 {
        0
    } else {
        ((n as f64 * cfg.validation_fraction).round() as usize).clamp(1, n - 1)
    };
    let (val_idx, train_idx) = idx.split_at(n_val);
    let train_set = data.select(train_idx);
    let val_set = if n_val == 0 { train_set.clone() } else { data.select(val_idx) };
    train_with_validation(&train_set, &val_set, cfg, |_, _| {})
}

const SPLIT_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Trains on `train_set`, reporting RMS on `validation`. `on_epoch` sees
/// the epoch index and its mean training loss.
pub fn train_with_validation(
    train_set: &LabeledDataset,
    validation: &LabeledDataset,
    cfg: &TrainConfig,
    mut on_epoch: impl FnMut(usize, f64),
) -> Result<(MlpModel, TrainingReport)> {
    cfg.validate()?;
    if train_set.is_empty() || validation.is_empty() {
        return Err(Error::domain("training and validation sets must be nonempty"));
    }
    let start = Instant::now();
    let (in_norm, out_norm) = fit_normalization(train_set, &ParameterRanges::furnace())?;
    let mut model = MlpModel::init(in_norm, out_norm, cfg.seed);

    let x_all = model.normalize_inputs(&train_set.inputs);
    let y_all: Vec<f64> = train_set.targets.iter().map(|&t| out_norm.normalize(t)).collect();
    let n = train_set.len();
    let bs = cfg.batch_size.min(n);

    let mut adam = Adam::new(&model);
    let mut grads: Vec<Vec<f64>> = model.weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut ws = Workspace::new(bs);
    let mut xb = vec![0.0; bs * INPUTS];
    let mut yb = vec![0.0; bs];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(bs) {
            let m = batch.len();
            for (j, &i) in batch.iter().enumerate() {
                xb[j * INPUTS..(j + 1) * INPUTS].copy_from_slice(&x_all[i * INPUTS..(i + 1) * INPUTS]);
                yb[j] = y_all[i];
            }
            let loss = model.backprop(&xb[..m * INPUTS], &yb[..m], &mut ws, &mut grads);
            if !loss.is_finite() {
                return Err(Error::Training { epoch });
            }
            total += loss * m as f64;
            adam.step(cfg, &mut model.weights, &grads);
        }
        let mean = total / n as f64;
        if !mean.is_finite() || model.weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::Training { epoch });
        }
        epoch_loss.push(mean);
        on_epoch(epoch, mean);
    }

    let final_rms = rms_error(&model, validation)?;
    let train_rms = rms_error(&model, train_set)?;
    Ok((
        model,
        TrainingReport {
            final_rms,
            train_rms,
            epoch_loss,
            train_rows: n,
            validation_rows: validation.len(),
            wall_time: start.elapsed(),
        },
    ))
}

/// Root-mean-square prediction error in kelvin.
pub fn rms_error(model: &MlpModel, data: &LabeledDataset) -> Result<f64> {
    let pred = model.predict(&data.inputs)?;
    let sq: f64 = pred.iter().zip(&data.targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sq / data.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureConfig;
    use crate::surrogate::dataset::generate_dataset;

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        assert!(TrainConfig { epochs: 0, ..Default::default() }.validate().is_err());
        assert!(TrainConfig { batch_size: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let q = QuadratureConfig::default();
        let d = generate_dataset(600, &ParameterRanges::furnace(), 2, &q).unwrap();
        let cfg = TrainConfig { epochs: 3, seed: 4, ..Default::default() };
        let (a, ra) = train(&d, &cfg).unwrap();
        let (b, rb) = train(&d, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.final_rms, rb.final_rms);
        assert_eq!(ra.validation_rows, 60);
    }

    #[test]
    fn loss_decreases() {
        let q = QuadratureConfig::default();
        let d = generate_dataset(2000, &ParameterRanges::furnace(), 5, &q).unwrap();
        let cfg = TrainConfig { epochs: 15, seed: 1, ..Default::default() };
        let (_, r) = train(&d, &cfg).unwrap();
        assert!(r.epoch_loss.last().unwrap() < &(0.5 * r.epoch_loss[0]), "{:?}", r.epoch_loss);
    }

    #[test]
    fn divergence_reports_epoch() {
        let q = QuadratureConfig::default();
        let d = generate_dataset(300, &ParameterRanges::furnace(), 5, &q).unwrap();
        let cfg = TrainConfig { epochs: 5, learning_rate: 1e300, ..Default::default() };
        match train(&d, &cfg) {
            Err(Error::Training { epoch }) => assert!(epoch < 5),
            other => panic!("{other:?}"),
        }
    }
}
