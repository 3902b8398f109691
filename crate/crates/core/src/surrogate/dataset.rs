//! Labelled (signal + parameters → tube temperature) samples drawn from
//! the model-D operating envelope.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::mlp::INPUTS;
use crate::error::{Error, Result};
use crate::models::{ModelKind, ParameterRanges, PreparedModel, SceneParameters};
use crate::quadrature::QuadratureConfig;

/// Column order of a feature row; the signal comes first.
pub const FEATURE_NAMES: [&str; INPUTS] = [
    "signal",
    "wall_temp",
    "gas_temp",
    "eps_height",
    "eps_mean",
    "eps_sigma",
    "abs_height",
    "abs_mean",
    "abs_sigma",
];

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub inputs: Vec<[f64; INPUTS]>,
    /// Tube temperature in kelvin.
    pub targets: Vec<f64>,
    pub seed: u64,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Scene parameters of row `i`.
    pub fn parameters(&self, i: usize) -> SceneParameters {
        let r = &self.inputs[i];
        SceneParameters::from_array(std::array::from_fn(|k| r[k + 1]))
    }

    pub fn signal(&self, i: usize) -> f64 {
        self.inputs[i][0]
    }

    /// Rows `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            inputs: idx.iter().map(|&i| self.inputs[i]).collect(),
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
            seed: self.seed,
        }
    }

    /// CSV with a `# seed=` comment line and a header; values use the
    /// shortest representation that parses back to the same bits.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::with_capacity(self.len() * 200 + 128);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "{},tube_temp", FEATURE_NAMES.join(","));
        for (row, t) in self.inputs.iter().zip(&self.targets) {
            for v in row {
                let _ = write!(s, "{v},");
            }
            let _ = writeln!(s, "{t}");
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut offset = 0u64;
        let mut header_seen = false;
        let mut data = LabeledDataset {
            inputs: Vec::new(),
            targets: Vec::new(),
            seed: 0,
        };
        for line in text.split_inclusive('\n') {
            let here = offset;
            offset += line.len() as u64;
            let line = line.trim_end_matches(['\n', '\r']);
            let parse_err = |message: String| Error::Parse { offset: here, message };
            if let Some(rest) = line.strip_prefix("# seed=") {
                data.seed = rest.trim().parse().map_err(|_| parse_err(format!("bad seed {rest:?}")))?;
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            if !header_seen {
                header_seen = true;
                if line.starts_with("signal") {
                    continue;
                }
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| parse_err(format!("bad number: {e}")))?;
            if vals.len() != INPUTS + 1 {
                return Err(parse_err(format!("expected {} columns, got {}", INPUTS + 1, vals.len())));
            }
            data.inputs.push(std::array::from_fn(|k| vals[k]));
            data.targets.push(vals[INPUTS]);
        }
        Ok(data)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}

/// Draws `n` scenes uniformly and independently over `ranges` and labels
/// each with its model-D signal. Rows depend only on `seed`.
pub fn generate_dataset(
    n: usize,
    ranges: &ParameterRanges,
    seed: u64,
    q: &QuadratureConfig,
) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::domain("dataset size must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, r: crate::models::Range| {
        if r.span() > 0.0 {
            rng.random_range(r.lo..=r.hi)
        } else {
            r.lo
        }
    };
    let draws: Vec<(f64, [f64; 8])> = (0..n)
        .map(|_| {
            let ts = draw(&mut rng, ranges.tube_temp);
            let p = std::array::from_fn(|k| draw(&mut rng, ranges.params[k]));
            (ts, p)
        })
        .collect();

    let inputs = draws
        .par_iter()
        .map(|(ts, p)| {
            let cond = SceneParameters::from_array(*p).to_conditions()?;
            let s = PreparedModel::new(ModelKind::D, &cond, q)?.signal(*ts)?;
            let mut row = [0.0; INPUTS];
            row[0] = s;
            row[1..].copy_from_slice(p);
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledDataset {
        inputs,
        targets: draws.iter().map(|d| d.0).collect(),
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_rows() {
        let q = QuadratureConfig::default();
        let r = ParameterRanges::furnace();
        let a = generate_dataset(5, &r, 11, &q).unwrap();
        let b = generate_dataset(5, &r, 11, &q).unwrap();
        assert_eq!(a, b);
        let c = generate_dataset(5, &r, 12, &q).unwrap();
        assert_ne!(a.targets, c.targets);
        assert!(generate_dataset(0, &r, 1, &q).is_err());
    }

    #[test]
    fn rows_lie_in_ranges() {
        let q = QuadratureConfig::default();
        let r = ParameterRanges::furnace();
        let d = generate_dataset(2000, &r, 3, &q).unwrap();
        for i in 0..d.len() {
            assert!(r.tube_temp.contains(d.targets[i]));
            r.check(&d.parameters(i)).unwrap();
            assert!(d.signal(i) > 0.0);
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let q = QuadratureConfig::default();
        let d = generate_dataset(50, &ParameterRanges::furnace(), 8, &q).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        d.write_csv(&p).unwrap();
        assert_eq!(LabeledDataset::read_csv(&p).unwrap(), d);
    }

    #[test]
    fn csv_error_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "# seed=1\nsignal,a\n1,2,3\n").unwrap();
        match LabeledDataset::read_csv(&p) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 18),
            other => panic!("{other:?}"),
        }
    }
}
