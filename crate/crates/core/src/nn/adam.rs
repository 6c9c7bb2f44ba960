//! Adam optimizer with bias correction.

use crate::error::{Error, Result};

use super::mlp::{MlpGrads, MlpParams};

const DEFAULT_BETA1: f64 = 0.9;
const DEFAULT_BETA2: f64 = 0.999;
const DEFAULT_EPSILON: f64 = 1e-8;

/// First/second-moment buffers mirroring the parameter shapes, plus the step
/// counter. Decay rates are 0.9 and 0.999; epsilon 1e-8.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: MlpGrads,
    pub v: MlpGrads,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(params: &MlpParams) -> Self {
        AdamState {
            m: MlpGrads::zeros_like(params),
            v: MlpGrads::zeros_like(params),
            t: 0,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// One bias-corrected Adam step in place. Gradients must be finite; a
/// non-finite entry aborts with the offending layer index.
pub fn adam_step(
    params: &mut MlpParams,
    grads: &MlpGrads,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !(lr > 0.0) {
        return Err(Error::Argument(format!("learning rate must be > 0, got {lr}")));
    }
    for (layer, w) in grads.weights.iter().enumerate() {
        if !w.all_finite() || grads.biases[layer].iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteGradient { layer });
        }
    }

    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - state.beta1.powi(t);
    let bc2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, eps) = (state.beta1, state.beta2, state.epsilon);

    let update = |p: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
        *m = b1 * *m + (1.0 - b1) * g;
        *v = b2 * *v + (1.0 - b2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    };

    for l in 0..params.num_layers() {
        let g = &grads.weights[l];
        let m = &mut state.m.weights[l];
        let v = &mut state.v.weights[l];
        let pw = params.weight_mut(l);
        for i in 0..g.data().len() {
            update(
                &mut pw.data_mut()[i],
                g.data()[i],
                &mut m.data_mut()[i],
                &mut v.data_mut()[i],
            );
        }
        let gb = &grads.biases[l];
        let mb = &mut state.m.biases[l];
        let vb = &mut state.v.biases[l];
        let pb = params.bias_mut(l);
        for i in 0..gb.len() {
            update(&mut pb[i], gb[i], &mut mb[i], &mut vb[i]);
        }
    }
    Ok(())
}
