//! Bias-free fully connected network 9 → 96 → 125 → 1 (ReLU, ReLU, linear).
//!
//! Layer `l` stores a `fan_in × fan_out` row-major matrix, so a batch
//! `X (n × fan_in)` maps to `X · W (n × fan_out)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INPUTS: usize = 9;
pub const LAYER_SIZES: [usize; 4] = [INPUTS, 96, 125, 1];
pub const PARAMETER_COUNT: usize = 9 * 96 + 96 * 125 + 125;

/// Fixed topology; only the sizes are data, activations are implied
/// (ReLU on hidden layers, identity on the output).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpTopology;

impl MlpTopology {
    pub fn layer_sizes(&self) -> &'static [usize] {
        &LAYER_SIZES
    }

    pub fn layer_count(&self) -> usize {
        LAYER_SIZES.len() - 1
    }

    /// `(fan_in, fan_out)` of layer `l`.
    pub fn shape(&self, l: usize) -> (usize, usize) {
        (LAYER_SIZES[l], LAYER_SIZES[l + 1])
    }

    pub fn parameter_count(&self) -> usize {
        (0..self.layer_count())
            .map(|l| {
                let (i, o) = self.shape(l);
                i * o
            })
            .sum()
    }
}

/// Affine map of a physical range onto [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRange {
    pub lo: f64,
    pub hi: f64,
}

impl NormRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::domain(format!(
                "normalisation range needs lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(NormRange { lo, hi })
    }

    #[inline]
    pub fn normalize(&self, x: f64) -> f64 {
        2.0 * (x - self.lo) / (self.hi - self.lo) - 1.0
    }

    #[inline]
    pub fn denormalize(&self, z: f64) -> f64 {
        self.lo + 0.5 * (z + 1.0) * (self.hi - self.lo)
    }

    /// d(physical)/d(normalised)
    pub fn scale(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub(crate) weights: Vec<Vec<f64>>,
    pub(crate) input_norm: [NormRange; INPUTS],
    pub(crate) output_norm: NormRange,
    pub(crate) training_seed: u64,
}

impl MlpModel {
    /// Glorot-uniform initialisation, ±√(6 / (fan_in + fan_out)) per layer.
    pub fn init(input_norm: [NormRange; INPUTS], output_norm: NormRange, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = MlpTopology;
        let weights = (0..topo.layer_count())
            .map(|l| {
                let (i, o) = topo.shape(l);
                let limit = (6.0 / (i + o) as f64).sqrt();
                (0..i * o).map(|_| rng.random_range(-limit..limit)).collect()
            })
            .collect();
        MlpModel {
            weights,
            input_norm,
            output_norm,
            training_seed: seed,
        }
    }

    /// Builds a model from explicit weights, checking every layer shape.
    pub fn from_parts(
        weights: Vec<Vec<f64>>,
        input_norm: [NormRange; INPUTS],
        output_norm: NormRange,
        training_seed: u64,
    ) -> Result<Self> {
        let topo = MlpTopology;
        if weights.len() != topo.layer_count() {
            return Err(Error::Shape {
                layer: weights.len().min(topo.layer_count()),
                message: format!("expected {} layers, got {}", topo.layer_count(), weights.len()),
            });
        }
        for (l, w) in weights.iter().enumerate() {
            let (i, o) = topo.shape(l);
            if w.len() != i * o {
                return Err(Error::Shape {
                    layer: l,
                    message: format!("expected {i}×{o} = {} weights, got {}", i * o, w.len()),
                });
            }
        }
        let model = MlpModel {
            weights,
            input_norm,
            output_norm,
            training_seed,
        };
        debug_assert_eq!(model.parameter_count(), PARAMETER_COUNT);
        Ok(model)
    }

    pub fn topology(&self) -> MlpTopology {
        MlpTopology
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn input_norm(&self) -> &[NormRange; INPUTS] {
        &self.input_norm
    }

    pub fn output_norm(&self) -> NormRange {
        self.output_norm
    }

    pub fn training_seed(&self) -> u64 {
        self.training_seed
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum()
    }

    /// Normalises raw feature rows into a packed `n × 9` matrix. The
    /// signal enters as ln S, so its range pair is stored in log units.
    pub fn normalize_inputs(&self, rows: &[[f64; INPUTS]]) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len() * INPUTS);
        for r in rows {
            for (k, (x, n)) in r.iter().zip(&self.input_norm).enumerate() {
                out.push(n.normalize(feature_value(k, *x)));
            }
        }
        out
    }

    /// Network output on normalised inputs (`n × 9` packed), normalised scale.
    pub fn forward_normalized(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len() / INPUTS;
        let mut act = x.to_vec();
        for (l, w) in self.weights.iter().enumerate() {
            let (i, o) = MlpTopology.shape(l);
            let mut next = vec![0.0; n * o];
            gemm(n, i, o, &act, w, &mut next);
            if l + 1 < self.weights.len() {
                relu_in_place(&mut next);
            }
            act = next;
        }
        act
    }

    /// Tube temperatures (K) for raw feature rows
    /// `[S, T_w, T_g, h_ε, μ_ε, σ_ε, h_α, μ_α, σ_α]`.
    ///
    /// Rows are evaluated in fixed 1024-row blocks, in parallel, so the
    /// result does not depend on how the caller splits a batch.
    pub fn predict(&self, rows: &[[f64; INPUTS]]) -> Result<Vec<f64>> {
        if let Some(i) = rows.iter().position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(Error::domain(format!("input row {i} has non-finite features")));
        }
        if let Some(i) = rows.iter().position(|r| r[0] <= 0.0) {
            return Err(Error::domain(format!("input row {i} has a non-positive signal")));
        }
        Ok(rows
            .par_chunks(PREDICT_BLOCK)
            .flat_map_iter(|chunk| {
                let z = self.forward_normalized(&self.normalize_inputs(chunk));
                z.into_iter().map(|v| self.output_norm.denormalize(v))
            })
            .collect())
    }

    /// Packed-matrix entry point used by FFI and the CLI: `inputs.len()`
    /// must be a multiple of 9.
    pub fn predict_flat(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        if inputs.len() % INPUTS != 0 {
            return Err(Error::domain(format!(
                "input length {} is not a multiple of {INPUTS}",
                inputs.len()
            )));
        }
        let rows: Vec<[f64; INPUTS]> = inputs
            .chunks_exact(INPUTS)
            .map(|c| c.try_into().expect("chunk of 9"))
            .collect();
        self.predict(&rows)
    }

    /// Hidden-layer activations for normalised inputs, for inspection.
    pub fn hidden_activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len() / INPUTS;
        let mut out = Vec::new();
        let mut act = x.to_vec();
        for l in 0..self.weights.len() - 1 {
            let (i, o) = MlpTopology.shape(l);
            let mut next = vec![0.0; n * o];
            gemm(n, i, o, &act, &self.weights[l], &mut next);
            relu_in_place(&mut next);
            out.push(next.clone());
            act = next;
        }
        out
    }

    /// Mean squared error on the normalised scale and its gradient with
    /// respect to every weight, by backpropagation.
    pub fn loss_and_gradient(&self, x: &[f64], y: &[f64]) -> (f64, Vec<Vec<f64>>) {
        let mut ws = Workspace::new(y.len());
        let mut grads: Vec<Vec<f64>> = self.weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let loss = self.backprop(x, y, &mut ws, &mut grads);
        (loss, grads)
    }

    pub(crate) fn backprop(
        &self,
        x: &[f64],
        y: &[f64],
        ws: &mut Workspace,
        grads: &mut [Vec<f64>],
    ) -> f64 {
        let n = y.len();
        let [_, h1, h2, _] = LAYER_SIZES;
        ws.resize(n);
        let Workspace { a1, a2, out, d_out, d2, d1 } = ws;

        gemm(n, INPUTS, h1, x, &self.weights[0], a1);
        relu_in_place(a1);
        gemm(n, h1, h2, a1, &self.weights[1], a2);
        relu_in_place(a2);
        gemm(n, h2, 1, a2, &self.weights[2], out);

        let mut loss = 0.0;
        let scale = 2.0 / n as f64;
        for ((d, o), t) in d_out.iter_mut().zip(out.iter()).zip(y) {
            let r = o - t;
            loss += r * r;
            *d = scale * r;
        }
        loss /= n as f64;

        // dW3 = A2ᵀ · dOut ; dA2 = dOut · W3ᵀ
        gemm_tn(h2, n, 1, a2, d_out, &mut grads[2]);
        gemm_nt(n, 1, h2, d_out, &self.weights[2], d2);
        relu_backward(d2, a2);
        gemm_tn(h1, n, h2, a1, d2, &mut grads[1]);
        gemm_nt(n, h2, h1, d2, &self.weights[1], d1);
        relu_backward(d1, a1);
        gemm_tn(INPUTS, n, h1, x, d1, &mut grads[0]);
        loss
    }
}

/// Feature `k` as seen by the normalisation: ln of the signal, others as is.
#[inline]
pub fn feature_value(k: usize, x: f64) -> f64 {
    if k == 0 {
        x.ln()
    } else {
        x
    }
}

pub(crate) const PREDICT_BLOCK: usize = 1024;

/// Scratch buffers for one minibatch.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    a1: Vec<f64>,
    a2: Vec<f64>,
    out: Vec<f64>,
    d_out: Vec<f64>,
    d2: Vec<f64>,
    d1: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(n: usize) -> Self {
        let mut ws = Workspace::default();
        ws.resize(n);
        ws
    }

    fn resize(&mut self, n: usize) {
        let [_, h1, h2, _] = LAYER_SIZES;
        self.a1.resize(n * h1, 0.0);
        self.a2.resize(n * h2, 0.0);
        self.out.resize(n, 0.0);
        self.d_out.resize(n, 0.0);
        self.d2.resize(n * h2, 0.0);
        self.d1.resize(n * h1, 0.0);
    }
}

fn relu_in_place(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn relu_backward(grad: &mut [f64], act: &[f64]) {
    for (g, a) in grad.iter_mut().zip(act) {
        if *a <= 0.0 {
            *g = 0.0;
        }
    }
}

/// C (m×n) = A (m×k) · B (k×n), all row-major.
fn gemm(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), n as isize, 1,
            0.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// C (m×n) = Aᵀ · B where A is stored k×m and B is k×n.
fn gemm_tn(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= k * m && b.len() >= k * n && c.len() >= m * n);
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), 1, m as isize,
            b.as_ptr(), n as isize, 1,
            0.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// C (m×n) = A · Bᵀ where A is m×k and B is stored n×k.
fn gemm_nt(m: usize, k: usize, n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    debug_assert!(a.len() >= m * k && b.len() >= n * k && c.len() >= m * n);
    unsafe {
        matrixmultiply::dgemm(
            m, k, n, 1.0,
            a.as_ptr(), k as isize, 1,
            b.as_ptr(), 1, k as isize,
            0.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}
