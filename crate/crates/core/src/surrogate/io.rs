//! `MLPT` model files: little-endian header, per-layer weight blocks
//! (`fan_in × fan_out`, row-major), ten normalisation pairs, seed.
//! The first normalisation pair is in ln-signal units.

use std::path::Path;

use super::mlp::{MlpModel, MlpTopology, NormRange, INPUTS};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MLPT";
pub const VERSION: u32 = 1;

pub fn encode_model(model: &MlpModel) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * model.parameter_count() + 200);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(model.weights.len() as u32).to_le_bytes());
    for (l, w) in model.weights.iter().enumerate() {
        let (rows, cols) = MlpTopology.shape(l);
        out.extend_from_slice(&(rows as u32).to_le_bytes());
        out.extend_from_slice(&(cols as u32).to_le_bytes());
        for v in w {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    for n in model.input_norm.iter().chain(std::iter::once(&model.output_norm)) {
        out.extend_from_slice(&n.lo.to_le_bytes());
        out.extend_from_slice(&n.hi.to_le_bytes());
    }
    out.extend_from_slice(&model.training_seed.to_le_bytes());
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize, what: &str) -> Result<&[u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Parse {
                offset: self.pos as u64,
                message: format!("file truncated reading {what}"),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }
}

pub fn decode_model(buf: &[u8]) -> Result<MlpModel> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        return Err(Error::Parse { offset: 0, message: "bad magic, expected MLPT".into() });
    }
    let at = r.pos as u64;
    let version = r.u32("version")?;
    if version != VERSION {
        return Err(Error::Parse { offset: at, message: format!("unsupported version {version}") });
    }
    let topo = MlpTopology;
    let at = r.pos as u64;
    let layers = r.u32("layer count")? as usize;
    if layers != topo.layer_count() {
        return Err(Error::Parse {
            offset: at,
            message: format!("expected {} layers, found {layers}", topo.layer_count()),
        });
    }
    let mut weights = Vec::with_capacity(layers);
    for l in 0..layers {
        let rows = r.u32("layer rows")? as usize;
        let cols = r.u32("layer cols")? as usize;
        let (want_r, want_c) = topo.shape(l);
        if (rows, cols) != (want_r, want_c) {
            return Err(Error::Shape {
                layer: l,
                message: format!("declared {rows}×{cols}, topology needs {want_r}×{want_c}"),
            });
        }
        let mut w = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            w.push(r.f64("weights")?);
        }
        weights.push(w);
    }
    let mut norms = Vec::with_capacity(INPUTS + 1);
    for _ in 0..=INPUTS {
        let at = r.pos as u64;
        let lo = r.f64("normalisation")?;
        let hi = r.f64("normalisation")?;
        norms.push(NormRange::new(lo, hi).map_err(|e| Error::Parse { offset: at, message: e.to_string() })?);
    }
    let seed = r.u64("seed")?;
    if r.pos != buf.len() {
        return Err(Error::Parse {
            offset: r.pos as u64,
            message: format!("{} trailing bytes", buf.len() - r.pos),
        });
    }
    let input_norm: [NormRange; INPUTS] = norms[..INPUTS].try_into().unwrap();
    MlpModel::from_parts(weights, input_norm, norms[INPUTS], seed)
}

pub fn save_model(model: &MlpModel, path: &Path) -> Result<()> {
    std::fs::write(path, encode_model(model)).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel> {
    let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&buf)
}
