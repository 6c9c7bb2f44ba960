//! MLP parameters, forward pass with cache, exact backward pass.

use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream_rng, Stream};

use super::activation::Activation;

/// Weights and biases of a dense MLP together with its per-layer activation
/// pattern. `weights[l]` has shape `(layer_dims[l+1] × layer_dims[l])`,
/// row-major; the last activation is always `Linear`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layer_dims: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
    activations: Vec<Activation>,
}

impl MlpParams {
    /// Zero-initialized network with the default pattern: GELU on hidden
    /// layers, linear output.
    pub fn new(layer_dims: Vec<usize>) -> Result<Self> {
        let acts = default_activations(&layer_dims)?;
        Self::with_activations(layer_dims, acts)
    }

    /// Zero-initialized network with an explicit per-layer pattern (needed by
    /// architectures with an internal linear layer).
    pub fn with_activations(layer_dims: Vec<usize>, activations: Vec<Activation>) -> Result<Self> {
        validate_dims(&layer_dims)?;
        let n_layers = layer_dims.len() - 1;
        if activations.len() != n_layers {
            return Err(Error::Config(format!(
                "{} activations for {n_layers} layers",
                activations.len()
            )));
        }
        if activations.last() != Some(&Activation::Linear) {
            return Err(Error::Config("output layer must be linear".into()));
        }
        let weights = (0..n_layers)
            .map(|l| Matrix::zeros(layer_dims[l + 1], layer_dims[l]))
            .collect();
        let biases = (0..n_layers).map(|l| vec![0.0; layer_dims[l + 1]]).collect();
        Ok(MlpParams {
            layer_dims,
            weights,
            biases,
            activations,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// Number of weight layers.
    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn weight(&self, layer: usize) -> &Matrix {
        &self.weights[layer]
    }

    pub fn weight_mut(&mut self, layer: usize) -> &mut Matrix {
        &mut self.weights[layer]
    }

    pub fn bias(&self, layer: usize) -> &[f64] {
        &self.biases[layer]
    }

    pub fn bias_mut(&mut self, layer: usize) -> &mut Vec<f64> {
        &mut self.biases[layer]
    }

    /// Total parameter count.
    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .map(|w| w.data().len())
            .chain(self.biases.iter().map(|b| b.len()))
            .sum()
    }
}

fn validate_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(Error::Config(format!(
            "need at least input and output dims, got {layer_dims:?}"
        )));
    }
    if let Some(pos) = layer_dims.iter().position(|&d| d == 0) {
        return Err(Error::Config(format!("zero-width layer at position {pos}")));
    }
    Ok(())
}

fn default_activations(layer_dims: &[usize]) -> Result<Vec<Activation>> {
    validate_dims(layer_dims)?;
    let n_layers = layer_dims.len() - 1;
    let mut acts = vec![Activation::Gelu; n_layers];
    acts[n_layers - 1] = Activation::Linear;
    Ok(acts)
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    /// Uniform in ±sqrt(6/(fan_in+fan_out)), zero biases.
    GlorotUniform,
    Zeros,
}

/// Seeded initialization with GELU hidden layers and a linear output.
pub fn init_params(layer_dims: &[usize], seed: u64, scheme: InitScheme) -> Result<MlpParams> {
    let acts = default_activations(layer_dims)?;
    init_params_with(layer_dims, acts, seed, scheme)
}

/// Seeded initialization with an explicit activation pattern. Deterministic:
/// the same `(layer_dims, seed, scheme)` produce bitwise identical weights.
pub fn init_params_with(
    layer_dims: &[usize],
    activations: Vec<Activation>,
    seed: u64,
    scheme: InitScheme,
) -> Result<MlpParams> {
    let mut params = MlpParams::with_activations(layer_dims.to_vec(), activations)?;
    if scheme == InitScheme::Zeros {
        return Ok(params);
    }
    let mut rng = stream_rng(seed, Stream::Init);
    for l in 0..params.num_layers() {
        let fan_in = layer_dims[l] as f64;
        let fan_out = layer_dims[l + 1] as f64;
        let limit = (6.0 / (fan_in + fan_out)).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit);
        for w in params.weights[l].data_mut() {
            *w = dist.sample(&mut rng);
        }
        // biases stay zero
    }
    Ok(params)
}

/// Everything the backward pass needs: the input to each layer and each
/// layer's pre-activation, for one batch.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `layer_inputs[l]` is the batch entering layer `l`; length `num_layers`.
    layer_inputs: Vec<Matrix>,
    /// `preactivations[l] = layer_inputs[l]·Wᵀ + b`; length `num_layers`.
    preactivations: Vec<Matrix>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.layer_inputs[0].rows()
    }

    pub fn num_layers(&self) -> usize {
        self.preactivations.len()
    }
}

/// Forward pass over a batch (rows = samples, cols = input dim), returning
/// the output batch and the cache for an exact backward pass.
pub fn mlp_forward(params: &MlpParams, batch: &Matrix) -> Result<(Matrix, ForwardCache)> {
    forward_impl(params, batch, true)
}

/// Forward pass without retaining the cache (evaluation path). Performs the
/// identical arithmetic as [`mlp_forward`].
pub fn mlp_forward_output(params: &MlpParams, batch: &Matrix) -> Result<Matrix> {
    Ok(forward_impl(params, batch, false)?.0)
}

fn forward_impl(
    params: &MlpParams,
    batch: &Matrix,
    keep_cache: bool,
) -> Result<(Matrix, ForwardCache)> {
    let n_layers = params.num_layers();
    let mut layer_inputs = Vec::with_capacity(if keep_cache { n_layers } else { 0 });
    let mut preactivations = Vec::with_capacity(if keep_cache { n_layers } else { 0 });
    let mut a = batch.clone();
    for l in 0..n_layers {
        if a.cols() != params.layer_dims[l] {
            return Err(Error::Shape {
                layer: l,
                details: format!(
                    "input has {} columns, layer expects {}",
                    a.cols(),
                    params.layer_dims[l]
                ),
            });
        }
        let mut z = a.matmul_nt(&params.weights[l]);
        z.add_row_broadcast(&params.biases[l]);
        let act = params.activations[l];
        let next = match act {
            Activation::Linear => z.clone(),
            Activation::Gelu => {
                let mut out = z.clone();
                for x in out.data_mut() {
                    *x = super::activation::gelu(*x);
                }
                out
            }
        };
        if keep_cache {
            layer_inputs.push(a);
            preactivations.push(z);
        }
        a = next;
    }
    Ok((
        a,
        ForwardCache {
            layer_inputs,
            preactivations,
        },
    ))
}

/// Parameter gradients, shaped like [`MlpParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl MlpGrads {
    pub fn zeros_like(params: &MlpParams) -> Self {
        MlpGrads {
            weights: params
                .weights
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            biases: params.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Euclidean norm over all entries.
    pub fn norm(&self) -> f64 {
        let mut s = 0.0;
        for w in &self.weights {
            for x in w.data() {
                s += x * x;
            }
        }
        for b in &self.biases {
            for x in b {
                s += x * x;
            }
        }
        s.sqrt()
    }

    /// Adds `other`, entry by entry.
    pub fn accumulate(&mut self, other: &MlpGrads) {
        for (w, ow) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in w.data_mut().iter_mut().zip(ow.data()) {
                *x += *y;
            }
        }
        for (b, ob) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in b.iter_mut().zip(ob) {
                *x += *y;
            }
        }
    }
}

/// Exact backward pass. `grad_out` is dL/d(output); returns parameter
/// gradients and dL/d(input batch). The input gradient is what lets an
/// upstream encoder (the sum-pooled feature net) receive its share of the
/// loss gradient.
pub fn mlp_backward(
    params: &MlpParams,
    cache: &ForwardCache,
    grad_out: &Matrix,
) -> Result<(MlpGrads, Matrix)> {
    let n_layers = params.num_layers();
    if cache.num_layers() != n_layers {
        return Err(Error::Shape {
            layer: n_layers.saturating_sub(1),
            details: format!(
                "cache has {} layers, params have {n_layers}",
                cache.num_layers()
            ),
        });
    }
    let last = &cache.preactivations[n_layers - 1];
    if grad_out.rows() != last.rows() || grad_out.cols() != last.cols() {
        return Err(Error::Shape {
            layer: n_layers - 1,
            details: format!(
                "grad_out is {}x{}, forward output was {}x{}",
                grad_out.rows(),
                grad_out.cols(),
                last.rows(),
                last.cols()
            ),
        });
    }

    let mut grads = MlpGrads::zeros_like(params);
    let mut grad_a = grad_out.clone();
    for l in (0..n_layers).rev() {
        // dZ = dA ⊙ act'(Z)
        let mut dz = grad_a;
        match params.activations[l] {
            Activation::Linear => {}
            Activation::Gelu => {
                let z = &cache.preactivations[l];
                for (g, zv) in dz.data_mut().iter_mut().zip(z.data()) {
                    *g *= super::activation::gelu_deriv(*zv);
                }
            }
        }
        grads.weights[l] = dz.matmul_tn(&cache.layer_inputs[l]);
        grads.biases[l] = dz.column_sums();
        grad_a = dz.matmul(&params.weights[l]);
    }
    Ok((grads, grad_a))
}
