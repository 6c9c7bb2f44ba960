//! Parameter checkpoint file.
//!
//! Little-endian binary, magic `MLP1`:
//!
//! ```text
//! magic        4 bytes  "MLP1"
//! dim count    u32
//! layer_dims   u32 × dim count
//! per layer:   weights row-major f64 × (out·in), then biases f64 × out
//! adam t       u64
//! adam m       same layout as the weights/biases block
//! adam v       same layout as the weights/biases block
//! ```
//!
//! Activation patterns are not stored; the loader takes them from the caller
//! (the default pattern is GELU hidden layers with a linear output). Adam
//! decay rates are the fixed defaults.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

use super::activation::Activation;
use super::adam::AdamState;
use super::mlp::{MlpGrads, MlpParams};

const MAGIC: &[u8; 4] = b"MLP1";

pub fn save_checkpoint(params: &MlpParams, state: &AdamState, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);

    w.write_all(MAGIC).map_err(io)?;
    let dims = params.layer_dims();
    w.write_all(&(dims.len() as u32).to_le_bytes()).map_err(io)?;
    for &d in dims {
        w.write_all(&(d as u32).to_le_bytes()).map_err(io)?;
    }
    for l in 0..params.num_layers() {
        write_f64s(&mut w, params.weight(l).data()).map_err(io)?;
        write_f64s(&mut w, params.bias(l)).map_err(io)?;
    }
    w.write_all(&state.t.to_le_bytes()).map_err(io)?;
    for buffers in [&state.m, &state.v] {
        for l in 0..params.num_layers() {
            write_f64s(&mut w, buffers.weights[l].data()).map_err(io)?;
            write_f64s(&mut w, &buffers.biases[l]).map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

/// Loads a checkpoint, assigning the given activation pattern (one entry per
/// weight layer, last must be linear).
pub fn load_checkpoint(path: &Path, activations: Vec<Activation>) -> Result<(MlpParams, AdamState)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let io = |e| Error::io(path, e);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::format(path, format!("bad magic {magic:?}, expected MLP1")));
    }
    let dim_count = read_u32(&mut r).map_err(io)? as usize;
    if dim_count < 2 {
        return Err(Error::format(path, format!("{dim_count} layer dims, need at least 2")));
    }
    let mut dims = Vec::with_capacity(dim_count);
    for _ in 0..dim_count {
        dims.push(read_u32(&mut r).map_err(io)? as usize);
    }

    let mut params = MlpParams::with_activations(dims.clone(), activations)?;
    for l in 0..params.num_layers() {
        let n = dims[l + 1] * dims[l];
        read_f64s(&mut r, params.weight_mut(l).data_mut(), n).map_err(io)?;
        read_f64s_vec(&mut r, params.bias_mut(l), dims[l + 1]).map_err(io)?;
    }

    let mut t_bytes = [0u8; 8];
    r.read_exact(&mut t_bytes).map_err(io)?;
    let mut state = AdamState::new(&params);
    state.t = u64::from_le_bytes(t_bytes);
    for buffers in [&mut state.m, &mut state.v] {
        read_grads(&mut r, buffers, &dims).map_err(io)?;
    }

    let mut rest = [0u8; 1];
    match r.read(&mut rest).map_err(io)? {
        0 => Ok((params, state)),
        _ => Err(Error::format(path, "trailing bytes after checkpoint payload")),
    }
}

/// Loads with the default activation pattern (GELU hidden, linear output).
pub fn load_checkpoint_default(path: &Path) -> Result<(MlpParams, AdamState)> {
    // Peek the dims first to size the default pattern.
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|e| Error::io(path, e))?;
    if &magic != MAGIC {
        return Err(Error::format(path, format!("bad magic {magic:?}, expected MLP1")));
    }
    let dim_count = read_u32(&mut r).map_err(|e| Error::io(path, e))? as usize;
    if dim_count < 2 {
        return Err(Error::format(path, format!("{dim_count} layer dims, need at least 2")));
    }
    let n_layers = dim_count - 1;
    let mut acts = vec![Activation::Gelu; n_layers];
    acts[n_layers - 1] = Activation::Linear;
    drop(r);
    load_checkpoint(path, acts)
}

fn write_f64s<W: Write>(w: &mut W, xs: &[f64]) -> std::io::Result<()> {
    for x in xs {
        w.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, out: &mut [f64], n: usize) -> std::io::Result<()> {
    debug_assert_eq!(out.len(), n);
    let mut b = [0u8; 8];
    for x in out.iter_mut() {
        r.read_exact(&mut b)?;
        *x = f64::from_le_bytes(b);
    }
    Ok(())
}

fn read_f64s_vec<R: Read>(r: &mut R, out: &mut Vec<f64>, n: usize) -> std::io::Result<()> {
    out.resize(n, 0.0);
    read_f64s(r, out, n)
}

fn read_grads<R: Read>(r: &mut R, grads: &mut MlpGrads, dims: &[usize]) -> std::io::Result<()> {
    for l in 0..dims.len() - 1 {
        let n = dims[l + 1] * dims[l];
        read_f64s(r, grads.weights[l].data_mut(), n)?;
        read_f64s_vec(r, &mut grads.biases[l], dims[l + 1])?;
    }
    let _ = Matrix::zeros(0, 0);
    Ok(())
}
