//! State representations of a driving observation.
//!
//! An observation is a variable-size multiset of per-vehicle feature vectors
//! plus a fixed "else" vector (ego/road indicators). Three mappings turn it
//! into a flat state:
//!
//! - **ESC** (encoding, sum, concatenation): each vehicle runs through a
//!   shared feature net, the encodings are summed, and the pooled vector is
//!   concatenated with `x_else`. Fixed dimension `d3+d2` for any set size.
//! - **AP** (arbitrary permutation): plain concatenation under a caller-chosen
//!   permutation; different permutations give different states.
//! - **FP** (fixed permutation): concatenation after sorting vehicles by full
//!   lexicographic order on their entries.
//!
//! Summation order: floating-point addition is not commutative at the bit
//! level, so ESC sorts the raw vehicle vectors lexicographically before
//! encoding and summing. That makes permutation invariance hold bitwise, not
//! just to a tolerance.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{mlp_backward, mlp_forward, ForwardCache, MlpGrads, MlpParams};

/// Feature vector of one surrounding vehicle (`d1` entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurroundingFeature {
    pub values: Vec<f64>,
}

impl SurroundingFeature {
    pub fn new(values: Vec<f64>) -> Self {
        SurroundingFeature { values }
    }
}

/// One observation: the vehicle multiset (storage order is incidental) and
/// the non-set feature vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSet {
    pub vehicles: Vec<SurroundingFeature>,
    pub x_else: Vec<f64>,
}

impl ObservationSet {
    pub fn new(vehicles: Vec<SurroundingFeature>, x_else: Vec<f64>) -> Self {
        ObservationSet { vehicles, x_else }
    }

    pub fn num_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    /// Copy with the vehicle list reordered by `perm` (0-based bijection).
    pub fn permuted(&self, perm: &[usize]) -> Result<ObservationSet> {
        validate_permutation(perm, self.vehicles.len())?;
        Ok(ObservationSet {
            vehicles: perm.iter().map(|&i| self.vehicles[i].clone()).collect(),
            x_else: self.x_else.clone(),
        })
    }
}

/// Layout of a state vector: pooled `d3+d2` (ESC) or flat `M·d1+d2` (AP/FP).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateLayout {
    Esc,
    Flat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub values: Vec<f64>,
    pub layout: StateLayout,
}

fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    a.len().cmp(&b.len())
}

/// Indices of `vehicles` sorted by lexicographic order over their entries.
/// Equal vectors keep storage order (stable sort).
pub fn canonical_order(vehicles: &[SurroundingFeature]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..vehicles.len()).collect();
    idx.sort_by(|&i, &j| lex_cmp(&vehicles[i].values, &vehicles[j].values));
    idx
}

fn validate_permutation(perm: &[usize], m: usize) -> Result<()> {
    if perm.len() != m {
        return Err(Error::Argument(format!(
            "permutation has {} entries for {m} vehicles",
            perm.len()
        )));
    }
    let mut seen = vec![false; m];
    for &p in perm {
        if p >= m || seen[p] {
            return Err(Error::Argument(format!("not a bijection on 0..{m}: {perm:?}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Uniform random permutation of `0..m` (Fisher–Yates), deterministic given
/// the RNG state.
pub fn sample_permutation(m: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Forward caches for the feature net over a batch of observations, plus the
/// row ranges (offsets) delimiting each observation's vehicles in the
/// flattened matrix. Single-use: one backward per forward.
#[derive(Debug)]
pub struct EscCache {
    forward: ForwardCache,
    /// `offsets.len() == batch_size + 1`; observation `s` owns rows
    /// `offsets[s]..offsets[s+1]`.
    offsets: Vec<usize>,
}

impl EscCache {
    pub fn batch_size(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn total_vehicles(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

/// ESC representation of one observation: `[Σ h(x; φ); x_else]`.
///
/// Vehicles are sorted canonically before encoding, so any storage order of
/// the same multiset produces a bitwise identical state.
pub fn esc_represent(
    obs: &ObservationSet,
    feature_params: &MlpParams,
) -> Result<(StateVector, EscCache)> {
    if obs.vehicles.is_empty() {
        return Err(Error::EmptyVehicleSet);
    }
    let d1 = feature_params.input_dim();
    let m = obs.vehicles.len();
    let mut rows = Matrix::zeros(m, d1);
    fill_sorted_segment(&mut rows, 0, &obs.vehicles, d1)?;
    let (states, cache) = esc_states_from_rows(rows, &[0, m], &[obs.x_else.as_slice()], feature_params)?;
    Ok((
        StateVector {
            values: states.row(0).to_vec(),
            layout: StateLayout::Esc,
        },
        cache,
    ))
}

/// Batched ESC forward: encodes all vehicles of all observations in one
/// flattened pass and segment-sums them in canonical order. `vehicle_rows`
/// holds each observation's vehicles contiguously (any order within a
/// segment; this function sorts); `x_else` has one row per observation.
/// Returns the `B × (d3+d2)` state matrix and the cache for
/// [`esc_backward_batch`].
pub fn esc_represent_batch(
    vehicle_rows: &Matrix,
    offsets: &[usize],
    x_else: &Matrix,
    feature_params: &MlpParams,
) -> Result<(Matrix, EscCache)> {
    let batch = offsets.len().saturating_sub(1);
    if batch == 0 || *offsets.last().unwrap() != vehicle_rows.rows() {
        return Err(Error::Argument(format!(
            "segment offsets {offsets:?} do not cover {} vehicle rows",
            vehicle_rows.rows()
        )));
    }
    if x_else.rows() != batch {
        return Err(Error::Argument(format!(
            "{} x_else rows for {batch} observations",
            x_else.rows()
        )));
    }
    let d1 = feature_params.input_dim();
    if vehicle_rows.cols() != d1 {
        return Err(Error::Shape {
            layer: 0,
            details: format!(
                "vehicle rows have {} columns, feature net expects {d1}",
                vehicle_rows.cols()
            ),
        });
    }
    // Sort rows within each segment into a fresh matrix.
    let mut sorted = Matrix::zeros(vehicle_rows.rows(), d1);
    for s in 0..batch {
        let (start, end) = (offsets[s], offsets[s + 1]);
        if end < start || start == end {
            return Err(Error::EmptyVehicleSet);
        }
        let mut idx: Vec<usize> = (start..end).collect();
        idx.sort_by(|&i, &j| lex_cmp(vehicle_rows.row(i), vehicle_rows.row(j)));
        for (dst, &src) in (start..end).zip(&idx) {
            sorted.row_mut(dst).copy_from_slice(vehicle_rows.row(src));
        }
    }
    let else_rows: Vec<&[f64]> = (0..batch).map(|s| x_else.row(s)).collect();
    esc_states_from_rows(sorted, offsets, &else_rows, feature_params)
}

/// Core of the ESC forward: rows must already be in canonical per-segment
/// order.
fn esc_states_from_rows(
    sorted_rows: Matrix,
    offsets: &[usize],
    x_else: &[&[f64]],
    feature_params: &MlpParams,
) -> Result<(Matrix, EscCache)> {
    let d3 = feature_params.output_dim();
    let d2 = x_else[0].len();
    let batch = offsets.len() - 1;
    let (encoded, cache) = mlp_forward(feature_params, &sorted_rows)?;
    let mut states = Matrix::zeros(batch, d3 + d2);
    for s in 0..batch {
        if x_else[s].len() != d2 {
            return Err(Error::Argument("ragged x_else lengths in batch".into()));
        }
        let row = states.row_mut(s);
        // Sum encodings in ascending (canonical) row order.
        for r in offsets[s]..offsets[s + 1] {
            for (acc, v) in row[..d3].iter_mut().zip(encoded.row(r)) {
                *acc += *v;
            }
        }
        row[d3..].copy_from_slice(x_else[s]);
    }
    Ok((
        states,
        EscCache {
            forward: cache,
            offsets: offsets.to_vec(),
        },
    ))
}

/// Backward through the sum pool for a single observation: every vehicle's
/// encoder receives the same upstream gradient (derivative of a sum), and the
/// returned parameter gradient is the sum of per-vehicle gradients in
/// canonical order.
pub fn esc_backward(
    cache: &EscCache,
    feature_params: &MlpParams,
    grad_xset: &[f64],
) -> Result<MlpGrads> {
    let d3 = feature_params.output_dim();
    if grad_xset.len() != d3 {
        return Err(Error::Shape {
            layer: feature_params.num_layers() - 1,
            details: format!("grad_xset has {} entries, expected {d3}", grad_xset.len()),
        });
    }
    let grad = Matrix::from_row(grad_xset);
    esc_backward_batch(cache, feature_params, &grad)
}

/// Batched form: `grad_xset` has one row per observation; each row is
/// broadcast to that observation's vehicles.
pub fn esc_backward_batch(
    cache: &EscCache,
    feature_params: &MlpParams,
    grad_xset: &Matrix,
) -> Result<MlpGrads> {
    let d3 = feature_params.output_dim();
    if grad_xset.cols() != d3 || grad_xset.rows() != cache.batch_size() {
        return Err(Error::Shape {
            layer: feature_params.num_layers() - 1,
            details: format!(
                "grad_xset is {}x{}, cache expects {}x{d3}",
                grad_xset.rows(),
                grad_xset.cols(),
                cache.batch_size()
            ),
        });
    }
    let total = cache.total_vehicles();
    let mut grad_rows = Matrix::zeros(total, d3);
    for s in 0..cache.batch_size() {
        for r in cache.offsets[s]..cache.offsets[s + 1] {
            grad_rows.row_mut(r).copy_from_slice(grad_xset.row(s));
        }
    }
    let (grads, _grad_in) = mlp_backward(feature_params, &cache.forward, &grad_rows)?;
    Ok(grads)
}

/// AP representation: `[x_{perm(0)}; …; x_{perm(M-1)}; x_else]`.
pub fn ap_represent(obs: &ObservationSet, perm: &[usize]) -> Result<StateVector> {
    validate_permutation(perm, obs.vehicles.len())?;
    let mut values = Vec::new();
    for &i in perm {
        values.extend_from_slice(&obs.vehicles[i].values);
    }
    values.extend_from_slice(&obs.x_else);
    Ok(StateVector {
        values,
        layout: StateLayout::Flat,
    })
}

/// FP representation: vehicles sorted by full lexicographic order (first
/// entry, then second on ties, and so on), then concatenated with `x_else`.
/// Invariant to the storage order of the vehicle list.
pub fn fp_represent(obs: &ObservationSet) -> StateVector {
    let order = canonical_order(&obs.vehicles);
    let mut values = Vec::new();
    for &i in &order {
        values.extend_from_slice(&obs.vehicles[i].values);
    }
    values.extend_from_slice(&obs.x_else);
    StateVector {
        values,
        layout: StateLayout::Flat,
    }
}

/// Pads the observation with copies of `pad` up to exactly `target_z`
/// vehicles. Truncation is not supported: more than `target_z` vehicles is an
/// error.
pub fn pad_virtual(
    obs: &ObservationSet,
    target_z: usize,
    pad: &SurroundingFeature,
) -> Result<ObservationSet> {
    let m = obs.vehicles.len();
    if m > target_z {
        return Err(Error::Argument(format!(
            "{m} vehicles exceed target size {target_z}; truncation is not supported"
        )));
    }
    let mut out = obs.clone();
    out.vehicles.extend(std::iter::repeat(pad.clone()).take(target_z - m));
    Ok(out)
}

/// Analytic power-feature encoder: min-max scales each coordinate to `[0,1]`
/// and stacks its first `n_max` powers, with a trailing constant 1 (the
/// set-size counter once summed over a set). Output length `n_max·d1 + 1`.
pub fn power_feature_encode(
    x: &SurroundingFeature,
    n_max: usize,
    c_min: f64,
    c_max: f64,
) -> Result<Vec<f64>> {
    if !(c_max > c_min) {
        return Err(Error::Argument(format!("need c_max > c_min, got [{c_min}, {c_max}]")));
    }
    let d1 = x.values.len();
    let mut out = Vec::with_capacity(n_max * d1 + 1);
    for (j, &v) in x.values.iter().enumerate() {
        if !(c_min..=c_max).contains(&v) {
            return Err(Error::Domain(format!(
                "entry {j} = {v} outside [{c_min}, {c_max}]"
            )));
        }
        let z = (v - c_min) / (c_max - c_min);
        let mut zk = 1.0;
        for _ in 0..n_max {
            zk *= z;
            out.push(zk);
        }
    }
    out.push(1.0);
    Ok(out)
}

/// Flat FP inputs for a batch with uniform set size: one row per observation,
/// vehicles in canonical order followed by `x_else`.
pub fn fp_flat_batch(vehicle_rows: &Matrix, offsets: &[usize], x_else: &Matrix) -> Result<Matrix> {
    flat_batch_impl(vehicle_rows, offsets, x_else, |start, end, rows| {
        let mut idx: Vec<usize> = (start..end).collect();
        idx.sort_by(|&i, &j| lex_cmp(rows.row(i), rows.row(j)));
        idx
    })
}

/// Flat AP inputs: a fresh uniform permutation per observation drawn from
/// `rng`.
pub fn ap_flat_batch(
    vehicle_rows: &Matrix,
    offsets: &[usize],
    x_else: &Matrix,
    rng: &mut impl rand::Rng,
) -> Result<Matrix> {
    flat_batch_impl(vehicle_rows, offsets, x_else, |start, end, _rows| {
        let perm = sample_permutation(end - start, rng);
        perm.into_iter().map(|p| start + p).collect()
    })
}

fn flat_batch_impl(
    vehicle_rows: &Matrix,
    offsets: &[usize],
    x_else: &Matrix,
    mut order: impl FnMut(usize, usize, &Matrix) -> Vec<usize>,
) -> Result<Matrix> {
    let batch = offsets.len().saturating_sub(1);
    if batch == 0 || x_else.rows() != batch {
        return Err(Error::Argument("batch layout mismatch".into()));
    }
    let m = offsets[1] - offsets[0];
    for s in 0..batch {
        if offsets[s + 1] - offsets[s] != m {
            return Err(Error::Argument(
                "flat representations need a uniform set size across the batch".into(),
            ));
        }
    }
    let d1 = vehicle_rows.cols();
    let d2 = x_else.cols();
    let mut out = Matrix::zeros(batch, m * d1 + d2);
    for s in 0..batch {
        let idx = order(offsets[s], offsets[s + 1], vehicle_rows);
        let row = out.row_mut(s);
        for (k, &src) in idx.iter().enumerate() {
            row[k * d1..(k + 1) * d1].copy_from_slice(vehicle_rows.row(src));
        }
        row[m * d1..].copy_from_slice(x_else.row(s));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_diff_grad, init_params, max_relative_error, InitScheme};
    use crate::rng::{stream_rng, Stream};
    use rand::Rng;

    fn veh(vals: &[f64]) -> SurroundingFeature {
        SurroundingFeature::new(vals.to_vec())
    }

    fn random_obs(rng: &mut impl Rng, m: usize, d1: usize, d2: usize) -> ObservationSet {
        ObservationSet::new(
            (0..m)
                .map(|_| veh(&(0..d1).map(|_| rng.gen_range(-5.0..5.0)).collect::<Vec<_>>()))
                .collect(),
            (0..d2).map(|_| rng.gen_range(-5.0..5.0)).collect(),
        )
    }

    #[test]
    fn esc_single_vehicle_is_plain_encoding() {
        let params = init_params(&[3, 8, 4], 11, InitScheme::GlorotUniform).unwrap();
        let obs = ObservationSet::new(vec![veh(&[0.5, -1.0, 2.0])], vec![9.0, -3.0]);
        let (state, _) = esc_represent(&obs, &params).unwrap();
        let enc =
            crate::nn::mlp_forward_output(&params, &Matrix::from_row(&[0.5, -1.0, 2.0])).unwrap();
        assert_eq!(&state.values[..4], enc.row(0));
        assert_eq!(&state.values[4..], &[9.0, -3.0]);
    }

    #[test]
    fn esc_is_bitwise_permutation_invariant() {
        let params = init_params(&[3, 8, 5], 3, InitScheme::GlorotUniform).unwrap();
        let mut rng = stream_rng(5, Stream::Data);
        for _ in 0..20 {
            let m = rng.gen_range(1..=8);
            let obs = random_obs(&mut rng, m, 3, 2);
            let (base, _) = esc_represent(&obs, &params).unwrap();
            let perm = sample_permutation(m, &mut rng);
            let (permuted, _) = esc_represent(&obs.permuted(&perm).unwrap(), &params).unwrap();
            assert_eq!(base, permuted);
        }
    }

    #[test]
    fn esc_rejects_empty_observation() {
        let params = init_params(&[3, 4, 2], 1, InitScheme::GlorotUniform).unwrap();
        let obs = ObservationSet::new(vec![], vec![1.0]);
        assert!(matches!(
            esc_represent(&obs, &params),
            Err(Error::EmptyVehicleSet)
        ));
    }

    #[test]
    fn esc_output_dimension_is_fixed_across_set_sizes() {
        let params = init_params(&[2, 6, 7], 9, InitScheme::GlorotUniform).unwrap();
        let mut rng = stream_rng(8, Stream::Data);
        for m in 1..=20 {
            let obs = random_obs(&mut rng, m, 2, 3);
            let (state, cache) = esc_represent(&obs, &params).unwrap();
            assert_eq!(state.values.len(), 7 + 3);
            assert_eq!(cache.total_vehicles(), m);
        }
    }

    #[test]
    fn esc_backward_single_vehicle_equals_mlp_backward() {
        let params = init_params(&[3, 6, 4], 21, InitScheme::GlorotUniform).unwrap();
        let obs = ObservationSet::new(vec![veh(&[1.0, 0.5, -0.25])], vec![]);
        let (_, cache) = esc_represent(&obs, &params).unwrap();
        let g = [0.3, -1.0, 0.7, 2.0];
        let esc = esc_backward(&cache, &params, &g).unwrap();

        let (_, fwd) =
            crate::nn::mlp_forward(&params, &Matrix::from_row(&[1.0, 0.5, -0.25])).unwrap();
        let (plain, _) = crate::nn::mlp_backward(&params, &fwd, &Matrix::from_row(&g)).unwrap();
        assert_eq!(esc, plain);
    }

    #[test]
    fn esc_backward_duplicated_vehicle_doubles_gradient() {
        let params = init_params(&[2, 5, 3], 33, InitScheme::GlorotUniform).unwrap();
        let x = veh(&[0.7, -0.3]);
        let single = ObservationSet::new(vec![x.clone()], vec![]);
        let double = ObservationSet::new(vec![x.clone(), x.clone()], vec![]);
        let g = [1.0, -0.5, 0.25];
        let (_, c1) = esc_represent(&single, &params).unwrap();
        let (_, c2) = esc_represent(&double, &params).unwrap();
        let g1 = esc_backward(&c1, &params, &g).unwrap();
        let g2 = esc_backward(&c2, &params, &g).unwrap();
        for (w2, w1) in g2.weights.iter().zip(&g1.weights) {
            for (a, b) in w2.data().iter().zip(w1.data()) {
                assert_eq!(*a, 2.0 * b);
            }
        }
        for (b2, b1) in g2.biases.iter().zip(&g1.biases) {
            for (a, b) in b2.iter().zip(b1) {
                assert_eq!(*a, 2.0 * b);
            }
        }
    }

    #[test]
    fn esc_backward_matches_finite_differences() {
        // loss = ||x_set||^2, gradient wrt feature params
        let params = init_params(&[2, 6, 4], 13, InitScheme::GlorotUniform).unwrap();
        let mut rng = stream_rng(14, Stream::Data);
        let obs = random_obs(&mut rng, 3, 2, 0);

        let xset_of = |p: &MlpParams| {
            let (state, _) = esc_represent(&obs, p).unwrap();
            state.values[..4].to_vec()
        };
        let loss = |p: &MlpParams| xset_of(p).iter().map(|v| v * v).sum::<f64>();

        let (state, cache) = esc_represent(&obs, &params).unwrap();
        let grad_xset: Vec<f64> = state.values[..4].iter().map(|v| 2.0 * v).collect();
        let analytic = esc_backward(&cache, &params, &grad_xset).unwrap();
        let numeric = finite_diff_grad(loss, &params, 1e-5);
        let rel = max_relative_error(&analytic, &numeric);
        assert!(rel <= 1e-4, "max relative error {rel}");
    }

    #[test]
    fn ap_examples() {
        let obs = ObservationSet::new(vec![veh(&[1.0]), veh(&[2.0])], vec![9.0]);
        assert_eq!(ap_represent(&obs, &[0, 1]).unwrap().values, vec![1.0, 2.0, 9.0]);
        assert_eq!(ap_represent(&obs, &[1, 0]).unwrap().values, vec![2.0, 1.0, 9.0]);
        assert!(ap_represent(&obs, &[0]).is_err());
        assert!(ap_represent(&obs, &[0, 0]).is_err());
    }

    #[test]
    fn single_vehicle_representations_coincide() {
        let obs = ObservationSet::new(vec![veh(&[1.5, -2.0])], vec![0.5]);
        let ap = ap_represent(&obs, &[0]).unwrap();
        let fp = fp_represent(&obs);
        assert_eq!(ap.values, fp.values);
        assert_eq!(ap.values, vec![1.5, -2.0, 0.5]);
    }

    #[test]
    fn fp_sorts_lexicographically() {
        let obs = ObservationSet::new(
            vec![veh(&[2.0, 0.0]), veh(&[1.0, 5.0]), veh(&[1.0, 2.0])],
            vec![],
        );
        assert_eq!(fp_represent(&obs).values, vec![1.0, 2.0, 1.0, 5.0, 2.0, 0.0]);
    }

    #[test]
    fn fp_is_invariant_to_storage_order() {
        let mut rng = stream_rng(4, Stream::Data);
        for _ in 0..20 {
            let m = rng.gen_range(2..=10);
            let obs = random_obs(&mut rng, m, 4, 3);
            let perm = sample_permutation(m, &mut rng);
            assert_eq!(fp_represent(&obs), fp_represent(&obs.permuted(&perm).unwrap()));
        }
    }

    #[test]
    fn fp_order_flips_across_the_crossing() {
        // X = {[j,2],[1,5]}: sorted output swaps as j crosses 1.
        let obs_at = |j: f64| {
            ObservationSet::new(vec![veh(&[j, 2.0]), veh(&[1.0, 5.0])], vec![])
        };
        assert_eq!(fp_represent(&obs_at(0.999)).values, vec![0.999, 2.0, 1.0, 5.0]);
        assert_eq!(fp_represent(&obs_at(1.001)).values, vec![1.0, 5.0, 1.001, 2.0]);
    }

    #[test]
    fn fp_jump_norm_at_the_crossing() {
        let obs_at = |j: f64| {
            ObservationSet::new(vec![veh(&[j, 2.0]), veh(&[1.0, 5.0])], vec![])
        };
        let eps = 1e-9;
        let lo = fp_represent(&obs_at(1.0 - eps)).values;
        let hi = fp_represent(&obs_at(1.0 + eps)).values;
        let jump: f64 = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!((jump - 3.0 * std::f64::consts::SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn sample_permutation_is_uniform_m2() {
        let mut rng = stream_rng(100, Stream::Permutation);
        let mut count_id = 0usize;
        let n = 100_000;
        for _ in 0..n {
            if sample_permutation(2, &mut rng) == vec![0, 1] {
                count_id += 1;
            }
        }
        let freq = count_id as f64 / n as f64;
        assert!((freq - 0.5).abs() < 0.01, "identity frequency {freq}");
    }

    #[test]
    fn sample_permutation_is_uniform_m3() {
        let mut rng = stream_rng(101, Stream::Permutation);
        let mut counts = std::collections::BTreeMap::new();
        let n = 100_000;
        for _ in 0..n {
            *counts.entry(sample_permutation(3, &mut rng)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        for (perm, c) in counts {
            let freq = c as f64 / n as f64;
            assert!(
                (freq - 1.0 / 6.0).abs() < 0.15 / 6.0,
                "{perm:?} frequency {freq}"
            );
        }
    }

    #[test]
    fn sample_permutation_m1_is_identity() {
        let mut rng = stream_rng(102, Stream::Permutation);
        for _ in 0..10 {
            assert_eq!(sample_permutation(1, &mut rng), vec![0]);
        }
    }

    #[test]
    fn pad_virtual_examples() {
        let pad = veh(&[5.0, 5.0]);
        let obs = ObservationSet::new(vec![veh(&[1.0, 2.0]), veh(&[3.0, 4.0])], vec![0.0]);
        // M == Z: unchanged
        assert_eq!(pad_virtual(&obs, 2, &pad).unwrap(), obs);
        // M=0, Z=1: just the pad vehicle
        let empty = ObservationSet::new(vec![], vec![0.0]);
        let padded = pad_virtual(&empty, 1, &pad).unwrap();
        assert_eq!(padded.vehicles, vec![pad.clone()]);
        // M=2, Z=4: last two are pads
        let padded = pad_virtual(&obs, 4, &pad).unwrap();
        assert_eq!(padded.vehicles.len(), 4);
        assert_eq!(padded.vehicles[2], pad);
        assert_eq!(padded.vehicles[3], pad);
        // M > Z: refused
        assert!(pad_virtual(&obs, 1, &pad).is_err());
    }

    #[test]
    fn power_feature_encode_examples() {
        let enc = power_feature_encode(&veh(&[-5.0, -5.0]), 3, -5.0, 5.0).unwrap();
        assert_eq!(enc, vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let enc = power_feature_encode(&veh(&[5.0]), 4, -5.0, 5.0).unwrap();
        assert_eq!(enc, vec![1.0, 1.0, 1.0, 1.0, 1.0]);
        let enc = power_feature_encode(&veh(&[0.0]), 2, -5.0, 5.0).unwrap();
        assert_eq!(enc, vec![0.5, 0.25, 1.0]);
        assert!(power_feature_encode(&veh(&[6.0]), 2, -5.0, 5.0).is_err());
        assert!(power_feature_encode(&veh(&[0.0]), 2, 5.0, -5.0).is_err());
    }

    #[test]
    fn batch_and_single_esc_paths_agree() {
        let params = init_params(&[3, 8, 5], 71, InitScheme::GlorotUniform).unwrap();
        let mut rng = stream_rng(72, Stream::Data);
        let observations: Vec<ObservationSet> =
            (0..4).map(|_| random_obs(&mut rng, rng.gen_range(1..=5), 3, 2)).collect();

        let total: usize = observations.iter().map(|o| o.num_vehicles()).sum();
        let mut rows = Matrix::zeros(total, 3);
        let mut offsets = vec![0usize];
        let mut x_else = Matrix::zeros(4, 2);
        let mut r = 0;
        for (s, obs) in observations.iter().enumerate() {
            for v in &obs.vehicles {
                rows.row_mut(r).copy_from_slice(&v.values);
                r += 1;
            }
            offsets.push(r);
            x_else.row_mut(s).copy_from_slice(&obs.x_else);
        }
        let (states, _) = esc_represent_batch(&rows, &offsets, &x_else, &params).unwrap();
        for (s, obs) in observations.iter().enumerate() {
            let (single, _) = esc_represent(obs, &params).unwrap();
            assert_eq!(states.row(s), single.values.as_slice());
        }
    }

    #[test]
    fn flat_batches_require_uniform_set_size() {
        let rows = Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]).unwrap();
        let x_else = Matrix::zeros(2, 1);
        let err = fp_flat_batch(&rows, &[0, 1, 3], &x_else);
        assert!(err.is_err());
    }
}
