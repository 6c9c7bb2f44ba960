//! Power-sum embeddings of multisets and empirical collision search.
//!
//! A multiset of scalars in `[0,1]` is pinned down by its first `n` power
//! sums when `n` is at least the multiset size; stacking per-coordinate power
//! sums and a set-size counter extends this to variable-size sets of bounded
//! vectors. These are the analytic targets the learned sum-pooled encoder
//! only has to be *able* to hit, so they double as oracles: this module
//! evaluates them exactly and searches for collisions on a quantized grid,
//! where multiset distinctness is decidable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::setrep::{canonical_order, power_feature_encode, SurroundingFeature};

/// A multiset of scalars, each in `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarSet {
    values: Vec<f64>,
}

impl ScalarSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("element {i} = {v} outside [0, 1]")));
            }
        }
        Ok(ScalarSet { values })
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Min-max scaling to `[0,1]`: `z = (x − c_min) / (c_max − c_min)`.
pub fn minmax_scale(values: &[f64], c_min: f64, c_max: f64) -> Result<Vec<f64>> {
    if !(c_max > c_min) {
        return Err(Error::Argument(format!("need c_max > c_min, got [{c_min}, {c_max}]")));
    }
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if !(c_min..=c_max).contains(&x) {
                return Err(Error::Domain(format!(
                    "entry {i} = {x} outside [{c_min}, {c_max}]"
                )));
            }
            Ok((x - c_min) / (c_max - c_min))
        })
        .collect()
}

/// Sum-of-power mapping: entry `k` (1-based) is `Σ_i z_i^k`, for `k = 1..=n`.
/// Injective on same-size multisets whenever `n ≥ |Z|`.
pub fn sum_of_power(set: &ScalarSet, n: usize) -> Vec<f64> {
    assert!(n >= 1, "need at least one power");
    let mut out = vec![0.0; n];
    for &z in &set.values {
        let mut zk = 1.0;
        for slot in out.iter_mut() {
            zk *= z;
            *slot += zk;
        }
    }
    out
}

/// The variable-size set embedding: per-coordinate scaled power sums
/// `E_N(X_norm,j)` stacked for `j = 1..=d1`, then the set size as the final
/// entry. Computed as the canonical-order sum of
/// [`power_feature_encode`] vectors, so it equals the ESC sum pool with the
/// analytic encoder bit for bit. Output length `n_max·d1 + 1`.
pub fn g_mapping(
    vehicles: &[SurroundingFeature],
    n_max: usize,
    c_min: f64,
    c_max: f64,
) -> Result<Vec<f64>> {
    if vehicles.len() > n_max {
        return Err(Error::Domain(format!(
            "{} vehicles exceed the maximum set size {n_max}",
            vehicles.len()
        )));
    }
    let d1 = vehicles.first().map_or(0, |v| v.values.len());
    let mut out = vec![0.0; n_max * d1 + 1];
    for &i in &canonical_order(vehicles) {
        let v = &vehicles[i];
        if v.values.len() != d1 {
            return Err(Error::Argument("ragged vehicle dimensions".into()));
        }
        let enc = power_feature_encode(v, n_max, c_min, c_max)?;
        for (acc, e) in out.iter_mut().zip(&enc) {
            *acc += *e;
        }
    }
    Ok(out)
}

/// Grid-quantized search space: vehicle entries live on
/// `c_min + k·grid_step` for integer `k`.
#[derive(Debug, Clone, Serialize)]
pub struct SearchSpace {
    pub d1: usize,
    pub n_max: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub grid_step: f64,
}

impl SearchSpace {
    fn levels(&self) -> Result<usize> {
        if !(self.c_max > self.c_min) || !(self.grid_step > 0.0) {
            return Err(Error::Argument("degenerate search space".into()));
        }
        let span = (self.c_max - self.c_min) / self.grid_step;
        let levels = span.round() as usize + 1;
        if levels < 2 {
            return Err(Error::Argument("grid needs at least two levels".into()));
        }
        Ok(levels)
    }

    fn value(&self, idx: u32) -> f64 {
        self.c_min + idx as f64 * self.grid_step
    }
}

/// A grid multiset: one `Vec<u32>` of grid indices per vehicle, kept sorted
/// so equality is exact multiset equality.
type GridSet = Vec<Vec<u32>>;

fn canonicalize(mut set: GridSet) -> GridSet {
    set.sort();
    set
}

fn to_vehicles(set: &GridSet, space: &SearchSpace) -> Vec<SurroundingFeature> {
    set.iter()
        .map(|v| SurroundingFeature::new(v.iter().map(|&k| space.value(k)).collect()))
        .collect()
}

fn random_grid_set(space: &SearchSpace, levels: usize, rng: &mut impl rand::Rng) -> GridSet {
    let m = rng.gen_range(1..=space.n_max);
    canonicalize(
        (0..m)
            .map(|_| (0..space.d1).map(|_| rng.gen_range(0..levels as u32)).collect())
            .collect(),
    )
}

/// One element moved by one grid step in one coordinate.
fn perturb_swap_step(base: &GridSet, levels: usize, rng: &mut impl rand::Rng) -> GridSet {
    let mut out = base.clone();
    let v = rng.gen_range(0..out.len());
    let c = rng.gen_range(0..out[v].len());
    let k = out[v][c];
    out[v][c] = if k == 0 {
        1
    } else if k as usize == levels - 1 {
        k - 1
    } else if rng.gen_bool(0.5) {
        k - 1
    } else {
        k + 1
    };
    canonicalize(out)
}

/// Two elements replaced by their midpoint pair (floor/ceil per coordinate),
/// preserving every per-coordinate sum — the classic first-power collision
/// family.
fn perturb_merge(base: &GridSet, rng: &mut impl rand::Rng) -> GridSet {
    let mut out = base.clone();
    if out.len() < 2 {
        return out;
    }
    let i = rng.gen_range(0..out.len());
    let mut j = rng.gen_range(0..out.len() - 1);
    if j >= i {
        j += 1;
    }
    for c in 0..out[i].len() {
        let (a, b) = (out[i][c], out[j][c]);
        let s = a + b;
        out[i][c] = s / 2;
        out[j][c] = s - s / 2;
    }
    canonicalize(out)
}

/// Set size changed by one (add a random element, or drop one).
fn perturb_resize(
    base: &GridSet,
    space: &SearchSpace,
    levels: usize,
    rng: &mut impl rand::Rng,
) -> GridSet {
    let mut out = base.clone();
    let can_grow = out.len() < space.n_max;
    let can_shrink = out.len() > 1;
    let grow = match (can_grow, can_shrink) {
        (true, true) => rng.gen_bool(0.5),
        (true, false) => true,
        (false, true) => false,
        (false, false) => return out,
    };
    if grow {
        out.push((0..space.d1).map(|_| rng.gen_range(0..levels as u32)).collect());
    } else {
        let i = rng.gen_range(0..out.len());
        out.remove(i);
    }
    canonicalize(out)
}

/// A pair of distinct multisets whose embeddings landed closer than the
/// tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct CollisionWitness {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CollisionReport {
    pub trials: u64,
    pub tolerance: f64,
    /// Smallest embedding distance seen across all trial pairs.
    pub min_distance: f64,
    pub collision: Option<CollisionWitness>,
}

impl CollisionReport {
    pub fn collided(&self) -> bool {
        self.collision.is_some()
    }
}

/// Draws `trials` pairs of distinct grid multisets — random pairs
/// interleaved with adversarial near-pairs (one-step moves, sum-preserving
/// merges, size changes) — and embeds both sides. Any pair closer than `tol`
/// is a collision; the closest such pair is reported as the witness.
pub fn collision_search<E>(
    embed: E,
    space: &SearchSpace,
    trials: u64,
    tol: f64,
    rng: &mut impl rand::Rng,
) -> Result<CollisionReport>
where
    E: Fn(&[SurroundingFeature]) -> Vec<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let levels = space.levels()?;
    let mut min_distance = f64::INFINITY;
    let mut collision: Option<CollisionWitness> = None;

    for trial in 0..trials {
        let a = random_grid_set(space, levels, rng);
        let b = match trial % 4 {
            0 => random_grid_set(space, levels, rng),
            1 => perturb_swap_step(&a, levels, rng),
            2 => perturb_merge(&a, rng),
            _ => perturb_resize(&a, space, levels, rng),
        };
        // Equal multisets are the same input, not a collision candidate.
        let b = if b == a { perturb_swap_step(&a, levels, rng) } else { b };
        if b == a {
            continue;
        }

        let va = to_vehicles(&a, space);
        let vb = to_vehicles(&b, space);
        let ea = embed(&va);
        let eb = embed(&vb);
        let distance = ea
            .iter()
            .zip(&eb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt();
        if distance < min_distance {
            min_distance = distance;
            if distance < tol {
                collision = Some(CollisionWitness {
                    a: va.iter().map(|v| v.values.clone()).collect(),
                    b: vb.iter().map(|v| v.values.clone()).collect(),
                    distance,
                });
            }
        }
    }

    Ok(CollisionReport {
        trials,
        tolerance: tol,
        min_distance,
        collision,
    })
}

/// Embedding closure for [`g_mapping`] over a search space.
pub fn g_mapping_embed(space: &SearchSpace) -> impl Fn(&[SurroundingFeature]) -> Vec<f64> {
    let (n_max, c_min, c_max) = (space.n_max, space.c_min, space.c_max);
    move |x| g_mapping(x, n_max, c_min, c_max).expect("grid points are in bounds")
}

/// Per-coordinate power sums truncated to `n` powers and *without* the
/// set-size counter. With `n` below the multiset size this is non-injective;
/// the search exists to demonstrate that.
pub fn truncated_power_embed(
    n: usize,
    c_min: f64,
    c_max: f64,
) -> impl Fn(&[SurroundingFeature]) -> Vec<f64> {
    move |vehicles| {
        let d1 = vehicles.first().map_or(0, |v| v.values.len());
        let mut out = vec![0.0; n * d1];
        for v in vehicles {
            let scaled = minmax_scale(&v.values, c_min, c_max).expect("grid points in bounds");
            for (j, &z) in scaled.iter().enumerate() {
                let mut zk = 1.0;
                for k in 0..n {
                    zk *= z;
                    out[j * n + k] += zk;
                }
            }
        }
        out
    }
}
