//! Minimal dense neural-network engine.
//!
//! Fixed MLP topology only: dense layers, GELU hidden activations, linear
//! output, Adam updates, plus a central-difference gradient oracle for tests.
//! Everything is 64-bit and deterministic: identical inputs give bitwise
//! identical outputs.

mod activation;
mod adam;
mod checkpoint;
mod gradcheck;
mod mlp;

pub use activation::{gelu, gelu_deriv, Activation};
pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, load_checkpoint_default, save_checkpoint};
pub use gradcheck::{finite_diff_grad, finite_diff_grad_vec, max_relative_error};
pub use mlp::{
    init_params, init_params_with, mlp_backward, mlp_forward, mlp_forward_output, ForwardCache,
    InitScheme, MlpGrads, MlpParams,
};
