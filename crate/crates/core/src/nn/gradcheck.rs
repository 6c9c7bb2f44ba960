//! Central-difference gradient oracle.
//!
//! Test-side machinery: it perturbs every parameter of a cloned network one
//! coordinate at a time and never touches the analytic backward path it
//! checks.

use super::mlp::{MlpGrads, MlpParams};

/// Central differences `(f(θ+h) − f(θ−h)) / 2h` over every weight and bias.
pub fn finite_diff_grad<F>(mut loss: F, params: &MlpParams, step: f64) -> MlpGrads
where
    F: FnMut(&MlpParams) -> f64,
{
    assert!(step > 0.0, "step must be positive");
    let mut work = params.clone();
    let mut grads = MlpGrads::zeros_like(params);
    for l in 0..params.num_layers() {
        for i in 0..params.weight(l).data().len() {
            let orig = work.weight(l).data()[i];
            work.weight_mut(l).data_mut()[i] = orig + step;
            let plus = loss(&work);
            work.weight_mut(l).data_mut()[i] = orig - step;
            let minus = loss(&work);
            work.weight_mut(l).data_mut()[i] = orig;
            grads.weights[l].data_mut()[i] = (plus - minus) / (2.0 * step);
        }
        for i in 0..params.bias(l).len() {
            let orig = work.bias(l)[i];
            work.bias_mut(l)[i] = orig + step;
            let plus = loss(&work);
            work.bias_mut(l)[i] = orig - step;
            let minus = loss(&work);
            work.bias_mut(l)[i] = orig;
            grads.biases[l][i] = (plus - minus) / (2.0 * step);
        }
    }
    grads
}

/// Central differences of a scalar function of a flat parameter vector.
pub fn finite_diff_grad_vec<F>(mut loss: F, at: &[f64], step: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    assert!(step > 0.0, "step must be positive");
    let mut work = at.to_vec();
    let mut grads = Vec::with_capacity(at.len());
    for i in 0..at.len() {
        work[i] = at[i] + step;
        let plus = loss(&work);
        work[i] = at[i] - step;
        let minus = loss(&work);
        work[i] = at[i];
        grads.push((plus - minus) / (2.0 * step));
    }
    grads
}

/// Guarded relative error, maximized over all entries:
/// `|a−b| / max(|a|, |b|, 1e-6)`. The 1e-6 floor keeps finite-difference
/// rounding noise on near-zero gradients from dominating the comparison.
pub fn max_relative_error(a: &MlpGrads, b: &MlpGrads) -> f64 {
    let mut worst: f64 = 0.0;
    let mut acc = |x: f64, y: f64| {
        let rel = (x - y).abs() / x.abs().max(y.abs()).max(1e-6);
        if rel > worst {
            worst = rel;
        }
    };
    for (wa, wb) in a.weights.iter().zip(&b.weights) {
        for (x, y) in wa.data().iter().zip(wb.data()) {
            acc(*x, *y);
        }
    }
    for (ba, bb) in a.biases.iter().zip(&b.biases) {
        for (x, y) in ba.iter().zip(bb) {
            acc(*x, *y);
        }
    }
    worst
}
