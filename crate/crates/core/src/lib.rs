//! Fixed-dimensional, permutation-invariant set representations for policy
//! learning, with baselines and a benchmark harness.
//!
//! The core idea: encode each element of a variable-size set through a shared
//! feature network, sum the encodings, and concatenate the pooled vector with
//! the remaining (non-set) features. The result has a fixed dimension for any
//! set size and is invariant to element order. Two classical flat
//! representations — concatenation under an arbitrary permutation (AP) and
//! under a fixed sorting rule (FP) — serve as baselines, along with the
//! power-sum machinery that makes the pooled encoding provably injective.
//!
//! Modules:
//! - [`nn`]: from-scratch dense MLP engine (GELU, Adam, gradient oracle).
//! - [`setrep`]: the ESC/AP/FP state representations.
//! - [`benchmarks`]: six synthetic permutation-invariant target functions.
//! - [`data`]: seeded dataset generation and the `ESCD` binary format.
//! - [`injectivity`]: power-sum embeddings and collision search.
//! - [`trainer`]: supervised training loops, RMSE evaluation, multi-seed suite.
//! - [`plot`]: SVG training-curve emitter.

pub mod benchmarks;
pub mod data;
pub mod error;
pub mod injectivity;
pub mod matrix;
pub mod nn;
pub mod plot;
pub mod presets;
pub mod rng;
pub mod setrep;
pub mod trainer;

pub use error::{Error, Result};

/// Tool version embedded in output artifacts for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
