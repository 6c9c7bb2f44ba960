//! The six synthetic permutation-invariant target functions and executable
//! invariance checkers.
//!
//! Each function combines p-norms, per-vehicle aggregates (min/max/mean over
//! the multiset of per-vehicle scalars), and `x_else` terms. Aggregates are
//! computed after sorting the vehicle list canonically, so the result does
//! not depend on storage order even at the bit level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::setrep::{canonical_order, sample_permutation, ObservationSet, SurroundingFeature};

/// Identifier of one of the six target functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkId(u32);

impl BenchmarkId {
    pub fn new(id: u32) -> Result<Self> {
        if (1..=6).contains(&id) {
            Ok(BenchmarkId(id))
        } else {
            Err(Error::Argument(format!("benchmark id {id} not in 1..=6")))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = BenchmarkId> {
        (1..=6).map(BenchmarkId)
    }
}

impl std::fmt::Display for BenchmarkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(Σ |v_i|^p)^(1/p)` for `p ≥ 1`.
pub fn pnorm(v: &[f64], p: f64) -> Result<f64> {
    if v.is_empty() {
        return Err(Error::Domain("p-norm of an empty vector".into()));
    }
    if !(p >= 1.0) {
        return Err(Error::Argument(format!("p-norm needs p >= 1, got {p}")));
    }
    let sum: f64 = v.iter().map(|x| x.abs().powf(p)).sum();
    Ok(sum.powf(1.0 / p))
}

fn vmin(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

fn vmax(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn vmean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Evaluates target function `id` on an observation. Exact formulas:
///
/// 1. `mean(x_else) − 0.2·min_i ‖x_i‖₃ + 0.4·mean_i ‖x_i‖₁ · max_i ‖x_i‖₂`
/// 2. `0.5·min(x_else) · max_i max(x_i) · min_i ‖x_i‖₄`
/// 3. `0.2·‖x_else‖₃ + 2·mean_i ‖x_i‖₁ · mean_i max(x_i)`
/// 4. `5·‖x_else‖₂ · ‖[min(x_i)/(‖x_i‖₂+0.1)]_i‖₄`
/// 5. `10·‖x_else‖₄ · mean_i [mean(x_i)·max(x_i)/(‖x_i‖₄+0.1)]`
/// 6. `8·‖x_else‖₂ · max_i [mean(x_i)·‖x_i‖₃/(‖x_i‖₂+0.1)]`
///
/// The `+0.1` denominators keep every function finite on the whole sampling
/// box, since p-norms are non-negative.
pub fn eval_benchmark(id: BenchmarkId, obs: &ObservationSet) -> Result<f64> {
    if obs.vehicles.is_empty() {
        return Err(Error::EmptyVehicleSet);
    }
    if obs.x_else.is_empty() {
        return Err(Error::Domain("x_else must be non-empty".into()));
    }
    let order = canonical_order(&obs.vehicles);
    let vehicles: Vec<&SurroundingFeature> = order.iter().map(|&i| &obs.vehicles[i]).collect();
    let per_vehicle = |f: &dyn Fn(&[f64]) -> Result<f64>| -> Result<Vec<f64>> {
        vehicles.iter().map(|v| f(&v.values)).collect()
    };
    let x_else = &obs.x_else;

    let value = match id.get() {
        1 => {
            let n3 = per_vehicle(&|x| pnorm(x, 3.0))?;
            let n1 = per_vehicle(&|x| pnorm(x, 1.0))?;
            let n2 = per_vehicle(&|x| pnorm(x, 2.0))?;
            vmean(x_else) - 0.2 * vmin(&n3) + 0.4 * vmean(&n1) * vmax(&n2)
        }
        2 => {
            let maxs = per_vehicle(&|x| Ok(vmax(x)))?;
            let n4 = per_vehicle(&|x| pnorm(x, 4.0))?;
            0.5 * vmin(x_else) * vmax(&maxs) * vmin(&n4)
        }
        3 => {
            let n1 = per_vehicle(&|x| pnorm(x, 1.0))?;
            let maxs = per_vehicle(&|x| Ok(vmax(x)))?;
            0.2 * pnorm(x_else, 3.0)? + 2.0 * vmean(&n1) * vmean(&maxs)
        }
        4 => {
            let ratios = per_vehicle(&|x| Ok(vmin(x) / (pnorm(x, 2.0)? + 0.1)))?;
            5.0 * pnorm(x_else, 2.0)? * pnorm(&ratios, 4.0)?
        }
        5 => {
            let terms = per_vehicle(&|x| Ok(vmean(x) * vmax(x) / (pnorm(x, 4.0)? + 0.1)))?;
            10.0 * pnorm(x_else, 4.0)? * vmean(&terms)
        }
        6 => {
            let terms = per_vehicle(&|x| Ok(vmean(x) * pnorm(x, 3.0)? / (pnorm(x, 2.0)? + 0.1)))?;
            8.0 * pnorm(x_else, 2.0)? * vmax(&terms)
        }
        _ => unreachable!("BenchmarkId is validated at construction"),
    };
    Ok(value)
}

/// Outcome of probing a set function under random vehicle permutations.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub invariant: bool,
    pub max_deviation: f64,
    /// A permutation that changed the value, if any.
    pub witness: Option<Vec<usize>>,
}

/// Evaluates `f` on `obs` and on `trials` random permutations of its vehicle
/// list. `invariant` is true only if every permuted value equals the base
/// value bitwise (deviation exactly 0), which canonical-order functions
/// achieve by construction.
pub fn check_permutation_invariance<F>(
    f: F,
    obs: &ObservationSet,
    trials: usize,
    rng: &mut impl rand::Rng,
) -> InvarianceReport
where
    F: Fn(&ObservationSet) -> f64,
{
    let base = f(obs);
    let mut max_deviation: f64 = 0.0;
    let mut witness = None;
    for _ in 0..trials {
        let perm = sample_permutation(obs.vehicles.len(), rng);
        let permuted = obs
            .permuted(&perm)
            .expect("sample_permutation returns a bijection");
        let value = f(&permuted);
        let deviation = (value - base).abs();
        if deviation > max_deviation || (value.to_bits() != base.to_bits() && witness.is_none()) {
            max_deviation = max_deviation.max(deviation);
            witness.get_or_insert(perm);
        }
    }
    InvarianceReport {
        invariant: witness.is_none(),
        max_deviation,
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn pnorm_examples() {
        assert!((pnorm(&[3.0, 4.0], 2.0).unwrap() - 5.0).abs() < 1e-12);
        assert!((pnorm(&[1.0, 1.0, 1.0], 1.0).unwrap() - 3.0).abs() < 1e-12);
        // (2·16)^(1/4) = 32^0.25
        assert!((pnorm(&[-2.0, 2.0], 4.0).unwrap() - 2.378414230005442).abs() < 1e-12);
        assert!(pnorm(&[], 2.0).is_err());
        assert!(pnorm(&[1.0], 0.5).is_err());
    }

    #[test]
    fn benchmark_id_bounds() {
        assert!(BenchmarkId::new(0).is_err());
        assert!(BenchmarkId::new(7).is_err());
        assert_eq!(BenchmarkId::new(3).unwrap().get(), 3);
    }

    #[test]
    fn benchmark3_single_vehicle_reference_value() {
        // X = {ones(5)}, x_else = ones(10):
        // 0.2·10^(1/3) + 2·5·1 = 10.430886938006378
        let obs = ObservationSet::new(vec![veh(&[1.0; 5])], vec![1.0; 10]);
        let got = eval_benchmark(BenchmarkId::new(3).unwrap(), &obs).unwrap();
        assert!((got - 10.430886938006378).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn benchmark2_zero_min_else_kills_output() {
        let mut rng = stream_rng(2, Stream::Data);
        for _ in 0..10 {
            let mut obs = random_obs(&mut rng, 4, 5, 10);
            obs.x_else[3] = 0.0;
            for x in obs.x_else.iter_mut() {
                *x = x.abs(); // min is the planted 0
            }
            let got = eval_benchmark(BenchmarkId::new(2).unwrap(), &obs).unwrap();
            assert_eq!(got, 0.0);
        }
    }

    #[test]
    fn all_benchmarks_are_bitwise_permutation_invariant() {
        let mut rng = stream_rng(3, Stream::Data);
        for id in BenchmarkId::all() {
            for _ in 0..20 {
                let m = rng.gen_range(1..=10);
                let obs = random_obs(&mut rng, m, 5, 10);
                let mut perm_rng = stream_rng(4, Stream::Permutation);
                let report = check_permutation_invariance(
                    |o| eval_benchmark(id, o).unwrap(),
                    &obs,
                    20,
                    &mut perm_rng,
                );
                assert!(report.invariant, "benchmark {id} deviated {}", report.max_deviation);
                assert_eq!(report.max_deviation, 0.0);
            }
        }
    }

    #[test]
    fn checker_flags_a_sensitive_function_with_witness() {
        // Reading the first vehicle's first coordinate is order-sensitive.
        let obs = ObservationSet::new(vec![veh(&[1.0, 0.0]), veh(&[2.0, 0.0])], vec![0.0]);
        let mut rng = stream_rng(5, Stream::Permutation);
        let report =
            check_permutation_invariance(|o| o.vehicles[0].values[0], &obs, 50, &mut rng);
        assert!(!report.invariant);
        assert!(report.max_deviation > 0.0);
        assert!(report.witness.is_some());
    }

    #[test]
    fn benchmark4_scales_linearly_in_x_else_norm() {
        let mut rng = stream_rng(6, Stream::Data);
        let obs = random_obs(&mut rng, 5, 5, 10);
        let mut doubled = obs.clone();
        for x in doubled.x_else.iter_mut() {
            *x *= 2.0;
        }
        let id = BenchmarkId::new(4).unwrap();
        let base = eval_benchmark(id, &obs).unwrap();
        let scaled = eval_benchmark(id, &doubled).unwrap();
        assert!((scaled - 2.0 * base).abs() <= 1e-12 * base.abs().max(1.0));
    }

    #[test]
    fn benchmarks_are_finite_on_the_sampling_box() {
        let mut rng = stream_rng(7, Stream::Data);
        for id in BenchmarkId::all() {
            for _ in 0..200 {
                let m = rng.gen_range(1..=20);
                let obs = random_obs(&mut rng, m, 5, 10);
                let v = eval_benchmark(id, &obs).unwrap();
                assert!(v.is_finite(), "benchmark {id} produced {v}");
            }
        }
    }

    #[test]
    fn rejects_degenerate_observations() {
        let id = BenchmarkId::new(1).unwrap();
        assert!(eval_benchmark(id, &ObservationSet::new(vec![], vec![1.0])).is_err());
        assert!(eval_benchmark(id, &ObservationSet::new(vec![veh(&[1.0])], vec![])).is_err());
    }
}
