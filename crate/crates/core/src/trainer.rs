//! Supervised training of the three representations, RMSE evaluation, the
//! multi-seed experiment suite, and the FP-discontinuity demonstration.
//!
//! Every run is a deterministic function of `(config, seed)`: weight init,
//! epoch shuffles, AP permutation draws, and test-time AP permutations each
//! consume their own seeded stream, and all reductions run in a fixed order.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{
    generate_dataset, iterate_batches, read_dataset, write_dataset, BatchData, Dataset,
    ExperimentConfig, Method, SetSizeMode,
};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::nn::{
    adam_step, mlp_backward, mlp_forward, mlp_forward_output, init_params, init_params_with,
    Activation, AdamState, InitScheme, MlpParams,
};
use crate::rng::{derive_seed, stream_rng, Stream};
use crate::setrep::{ap_flat_batch, esc_backward_batch, esc_represent_batch, fp_flat_batch};

/// One evaluation point: the batch loss at that iteration (absent for the
/// initial point) and the test RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub train_loss: Option<f64>,
    pub test_rmse: f64,
}

/// Full record of one training run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub benchmark_id: u32,
    pub case: SetSizeMode,
    pub method: Method,
    pub seed: u64,
    pub trace: Vec<TracePoint>,
    pub final_rmse: f64,
    /// Informational only; never written to result files, which must be
    /// byte-reproducible.
    pub wall_time_secs: f64,
}

/// Trained networks of one run. `feature` is present only for ESC.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub method: Method,
    pub policy: MlpParams,
    pub policy_adam: AdamState,
    pub feature: Option<MlpParams>,
    pub feature_adam: Option<AdamState>,
}

/// Feature-net dims for ESC: `d1 -> feature_hidden -> d3`.
pub fn esc_feature_dims(config: &ExperimentConfig) -> Vec<usize> {
    let mut dims = vec![config.d1];
    dims.extend(&config.architecture.feature_hidden);
    dims.push(config.d3);
    dims
}

/// Policy-net dims for ESC: `(d3+d2) -> policy_hidden -> 1`.
pub fn esc_policy_dims(config: &ExperimentConfig) -> Vec<usize> {
    let mut dims = vec![config.d3 + config.d2];
    dims.extend(&config.architecture.policy_hidden);
    dims.push(1);
    dims
}

/// Flat-baseline policy net for set size `m`, mirroring the stacked ESC
/// structure: GELU layers of `feature_hidden`, a *linear* layer of width
/// `d3`, GELU layers of `policy_hidden`, linear scalar output. Both
/// architectures thus carry the same hidden layers and unit counts.
pub fn baseline_architecture(
    config: &ExperimentConfig,
    m: usize,
) -> (Vec<usize>, Vec<Activation>) {
    let mut dims = vec![m * config.d1 + config.d2];
    let mut acts = Vec::new();
    for &h in &config.architecture.feature_hidden {
        dims.push(h);
        acts.push(Activation::Gelu);
    }
    dims.push(config.d3);
    acts.push(Activation::Linear);
    for &h in &config.architecture.policy_hidden {
        dims.push(h);
        acts.push(Activation::Gelu);
    }
    dims.push(1);
    acts.push(Activation::Linear);
    (dims, acts)
}

fn check_dataset(config: &ExperimentConfig, ds: &Dataset, role: &str) -> Result<()> {
    if ds.d1 != config.d1 || ds.d2 != config.d2 {
        return Err(Error::Config(format!(
            "{role} set dims ({}, {}) do not match config ({}, {})",
            ds.d1, ds.d2, config.d1, config.d2
        )));
    }
    if ds.set_size_mode != config.set_size_mode {
        return Err(Error::Config(format!(
            "{role} set was generated with {} but config asks for {}",
            ds.set_size_mode, config.set_size_mode
        )));
    }
    if ds.is_empty() {
        return Err(Error::Config(format!("{role} set is empty")));
    }
    Ok(())
}

fn take_columns(m: &Matrix, n: usize) -> Matrix {
    let mut out = Matrix::zeros(m.rows(), n);
    for r in 0..m.rows() {
        out.row_mut(r).copy_from_slice(&m.row(r)[..n]);
    }
    out
}

/// Trains one model with Adam on the mean squared error between the policy
/// output and the label. AP draws a fresh uniform permutation per sample per
/// batch visit; ESC updates the feature and policy nets jointly through the
/// sum pool. Test RMSE is evaluated at iteration 0, every
/// `config.eval_interval` iterations, and at the final iteration.
pub fn train(
    config: &ExperimentConfig,
    method: Method,
    train_set: &Dataset,
    test_set: &Dataset,
    seed: u64,
) -> Result<(TrainedModel, RunMetrics)> {
    config.validate_for(method)?;
    check_dataset(config, train_set, "train")?;
    check_dataset(config, test_set, "test")?;
    if train_set.benchmark_id != config.benchmark_id || test_set.benchmark_id != config.benchmark_id
    {
        return Err(Error::Config("dataset benchmark does not match config".into()));
    }

    let start = Instant::now();
    let lr = config.learning_rate;
    let d3 = config.d3;

    let mut model = match method {
        Method::Esc => {
            let feature = init_params(
                &esc_feature_dims(config),
                derive_seed(seed, Stream::Init, 0),
                InitScheme::GlorotUniform,
            )?;
            let policy = init_params(
                &esc_policy_dims(config),
                derive_seed(seed, Stream::Init, 1),
                InitScheme::GlorotUniform,
            )?;
            let feature_adam = AdamState::new(&feature);
            let policy_adam = AdamState::new(&policy);
            TrainedModel {
                method,
                policy,
                policy_adam,
                feature: Some(feature),
                feature_adam: Some(feature_adam),
            }
        }
        Method::Ap | Method::Fp => {
            let m = match config.set_size_mode {
                SetSizeMode::Fixed(m) => m,
                SetSizeMode::Variable => unreachable!("validated above"),
            };
            let (dims, acts) = baseline_architecture(config, m);
            let policy = init_params_with(
                &dims,
                acts,
                derive_seed(seed, Stream::Init, 1),
                InitScheme::GlorotUniform,
            )?;
            let policy_adam = AdamState::new(&policy);
            TrainedModel {
                method,
                policy,
                policy_adam,
                feature: None,
                feature_adam: None,
            }
        }
    };

    let eval_seed = derive_seed(seed, Stream::EvalPermutation, 0);
    let mut perm_rng = stream_rng(seed, Stream::Permutation);

    let mut trace = vec![TracePoint {
        iteration: 0,
        train_loss: None,
        test_rmse: evaluate_rmse(
            &model.policy,
            method,
            model.feature.as_ref(),
            test_set,
            eval_seed,
        )?,
    }];

    let mut iteration = 0usize;
    let mut epoch = 0u64;
    while iteration < config.iterations {
        let epoch_seed = derive_seed(seed, Stream::Shuffle, epoch);
        for batch in iterate_batches(train_set, config.batch_size, epoch_seed)? {
            if iteration >= config.iterations {
                break;
            }
            iteration += 1;
            let bd = train_set.gather(&batch);
            let b = bd.batch_size();
            let loss = match method {
                Method::Esc => {
                    let feature = model.feature.as_mut().unwrap();
                    let (states, esc_cache) =
                        esc_represent_batch(&bd.vehicle_rows, &bd.offsets, &bd.x_else, feature)?;
                    let (pred, pcache) = mlp_forward(&model.policy, &states)?;
                    let (loss, grad_pred) = mse_and_grad(&pred, &bd.labels);
                    let (pgrads, dstates) = mlp_backward(&model.policy, &pcache, &grad_pred)?;
                    let grad_xset = take_columns(&dstates, d3);
                    let fgrads = esc_backward_batch(&esc_cache, feature, &grad_xset)?;
                    if !loss.is_finite() {
                        return Err(Error::Diverged {
                            iteration,
                            lr,
                            loss,
                            grad_norms: vec![pgrads.norm(), fgrads.norm()],
                        });
                    }
                    adam_step(&mut model.policy, &pgrads, &mut model.policy_adam, lr)?;
                    adam_step(feature, &fgrads, model.feature_adam.as_mut().unwrap(), lr)?;
                    loss
                }
                Method::Fp | Method::Ap => {
                    let inputs = match method {
                        Method::Fp => fp_flat_batch(&bd.vehicle_rows, &bd.offsets, &bd.x_else)?,
                        _ => ap_flat_batch(&bd.vehicle_rows, &bd.offsets, &bd.x_else, &mut perm_rng)?,
                    };
                    let (pred, pcache) = mlp_forward(&model.policy, &inputs)?;
                    let (loss, grad_pred) = mse_and_grad(&pred, &bd.labels);
                    let (pgrads, _) = mlp_backward(&model.policy, &pcache, &grad_pred)?;
                    if !loss.is_finite() {
                        return Err(Error::Diverged {
                            iteration,
                            lr,
                            loss,
                            grad_norms: vec![pgrads.norm()],
                        });
                    }
                    adam_step(&mut model.policy, &pgrads, &mut model.policy_adam, lr)?;
                    loss
                }
            };
            debug_assert_eq!(b, bd.labels.len());
            if iteration % config.eval_interval == 0 || iteration == config.iterations {
                let rmse = evaluate_rmse(
                    &model.policy,
                    method,
                    model.feature.as_ref(),
                    test_set,
                    eval_seed,
                )?;
                trace.push(TracePoint {
                    iteration,
                    train_loss: Some(loss),
                    test_rmse: rmse,
                });
            }
        }
        epoch += 1;
    }

    let final_rmse = trace.last().unwrap().test_rmse;
    let metrics = RunMetrics {
        benchmark_id: config.benchmark_id,
        case: config.set_size_mode,
        method,
        seed,
        trace,
        final_rmse,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((model, metrics))
}

/// Mean squared error over the batch and its gradient w.r.t. predictions.
fn mse_and_grad(pred: &Matrix, labels: &[f64]) -> (f64, Matrix) {
    let b = labels.len();
    let mut grad = pred.clone();
    let mut loss = 0.0;
    for (g, y) in grad.data_mut().iter_mut().zip(labels) {
        let e = *g - *y;
        loss += e * e;
        *g = 2.0 * e / b as f64;
    }
    (loss / b as f64, grad)
}

const EVAL_CHUNK: usize = 512;

/// Root mean square error of the policy over the test set, processed in
/// dataset order. For AP, one permutation per test sample is drawn from a
/// stream seeded with `eval_seed`, freshly re-seeded per call, so repeated
/// evaluations use identical permutations.
pub fn evaluate_rmse(
    policy: &MlpParams,
    method: Method,
    feature: Option<&MlpParams>,
    test_set: &Dataset,
    eval_seed: u64,
) -> Result<f64> {
    if test_set.is_empty() {
        return Err(Error::Argument("cannot evaluate on an empty test set".into()));
    }
    let mut rng = stream_rng(eval_seed, Stream::EvalPermutation);
    let mut sq_sum = 0.0;
    let n = test_set.len();
    let mut start = 0;
    while start < n {
        let end = (start + EVAL_CHUNK).min(n);
        let idx: Vec<usize> = (start..end).collect();
        let bd = test_set.gather(&idx);
        let pred = predict_batch(policy, method, feature, &bd, &mut rng)?;
        for (p, y) in pred.data().iter().zip(&bd.labels) {
            let e = p - y;
            sq_sum += e * e;
        }
        start = end;
    }
    Ok((sq_sum / n as f64).sqrt())
}

fn predict_batch(
    policy: &MlpParams,
    method: Method,
    feature: Option<&MlpParams>,
    bd: &BatchData,
    ap_rng: &mut impl rand::Rng,
) -> Result<Matrix> {
    let inputs = match method {
        Method::Esc => {
            let feature = feature.ok_or_else(|| {
                Error::Argument("ESC evaluation needs the feature net".into())
            })?;
            let (states, _) =
                esc_represent_batch(&bd.vehicle_rows, &bd.offsets, &bd.x_else, feature)?;
            states
        }
        Method::Fp => fp_flat_batch(&bd.vehicle_rows, &bd.offsets, &bd.x_else)?,
        Method::Ap => ap_flat_batch(&bd.vehicle_rows, &bd.offsets, &bd.x_else, ap_rng)?,
    };
    mlp_forward_output(policy, &inputs)
}

/// Declarative description of a whole experiment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Shared dimensions/training settings. Its `set_size_mode`,
    /// `benchmark_id`, and `method` fields are overridden per cell.
    pub base: ExperimentConfig,
    pub benchmarks: Vec<u32>,
    pub cases: Vec<SetSizeMode>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// Seed for dataset generation; independent of training seeds.
    pub data_seed: u64,
    /// Upper bound on concurrently executing runs.
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_jobs() -> usize {
    1
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.benchmarks.is_empty() || self.cases.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("suite needs benchmarks, cases, and methods".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("suite needs at least one seed".into()));
        }
        for &b in &self.benchmarks {
            crate::benchmarks::BenchmarkId::new(b)?;
        }
        for spec in self.runs() {
            self.cell_config(&spec)?.validate_for(spec.method)?;
        }
        Ok(())
    }

    /// The applicable (benchmark, case, method, seed) cross product:
    /// AP/FP are skipped for the variable-size case.
    pub fn runs(&self) -> Vec<RunSpec> {
        let mut specs = Vec::new();
        for &benchmark in &self.benchmarks {
            for &case in &self.cases {
                for &method in &self.methods {
                    if case == SetSizeMode::Variable && method != Method::Esc {
                        continue;
                    }
                    for &seed in &self.seeds {
                        specs.push(RunSpec {
                            benchmark,
                            case,
                            method,
                            seed,
                        });
                    }
                }
            }
        }
        specs
    }

    /// Per-cell experiment config.
    pub fn cell_config(&self, spec: &RunSpec) -> Result<ExperimentConfig> {
        let mut cfg = self.base.clone();
        cfg.benchmark_id = spec.benchmark;
        cfg.set_size_mode = spec.case;
        cfg.method = spec.method;
        Ok(cfg)
    }

    pub fn to_json_file(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serializing suite config: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunSpec {
    pub benchmark: u32,
    pub case: SetSizeMode,
    pub method: Method,
    pub seed: u64,
}

/// RMSE of a variable-size-trained ESC model evaluated on a fixed-M test set.
#[derive(Debug, Clone, Serialize)]
pub struct CrossEval {
    pub benchmark: u32,
    pub m: usize,
    pub seed: u64,
    pub rmse: f64,
}

/// Aggregated statistics of one table cell.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteCell {
    pub benchmark: u32,
    pub case: SetSizeMode,
    /// "ESC", "FP", "AP", or "ESC-var" for cross-evaluated cells.
    pub method: String,
    /// Mean final RMSE over succeeded seeds (NaN if all failed).
    pub mean_rmse: f64,
    /// Sample standard deviation over succeeded seeds; 0 for a single seed.
    pub std_rmse: f64,
    pub n_seeds: usize,
    pub n_failed: usize,
}

#[derive(Debug)]
pub struct SuiteResult {
    pub cells: Vec<SuiteCell>,
    pub runs: Vec<RunMetrics>,
    pub cross_evals: Vec<CrossEval>,
    pub failures: Vec<(RunSpec, String)>,
}

impl SuiteResult {
    pub fn cell(&self, benchmark: u32, case: SetSizeMode, method: &str) -> Option<&SuiteCell> {
        self.cells
            .iter()
            .find(|c| c.benchmark == benchmark && c.case == case && c.method == method)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
        / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

fn dataset_seeds(data_seed: u64, benchmark: u32, case: SetSizeMode) -> (u64, u64) {
    let code = match case {
        SetSizeMode::Fixed(m) => m as u64,
        SetSizeMode::Variable => 0,
    };
    let key = (benchmark as u64) * 1000 + code;
    (
        derive_seed(data_seed, Stream::Data, key * 2),
        derive_seed(data_seed, Stream::Data, key * 2 + 1),
    )
}

/// Canonical dataset file name for one suite cell.
pub fn dataset_file_name(
    benchmark: u32,
    case: SetSizeMode,
    size: usize,
    seed: u64,
    role: &str,
) -> String {
    format!("b{benchmark}_{case}_{role}_n{size}_s{seed}.escd")
}

/// Builds (or loads from `data_dir`, if previously written) both datasets of
/// one suite cell, deterministically from the suite's data seed.
pub fn ensure_cell_datasets(
    suite: &SuiteConfig,
    benchmark: u32,
    case: SetSizeMode,
    data_dir: Option<&std::path::Path>,
) -> Result<(Arc<Dataset>, Arc<Dataset>)> {
    let mut cfg = suite.base.clone();
    cfg.benchmark_id = benchmark;
    cfg.set_size_mode = case;
    let (train_seed, test_seed) = dataset_seeds(suite.data_seed, benchmark, case);

    let mut build = |size: usize, seed: u64, role: &str| -> Result<Arc<Dataset>> {
        if let Some(dir) = data_dir {
            let path = dir.join(dataset_file_name(benchmark, case, size, seed, role));
            if path.exists() {
                return Ok(Arc::new(read_dataset(&path)?));
            }
            let ds = generate_dataset(&cfg, size, seed, benchmark)?;
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            write_dataset(&ds, &path)?;
            return Ok(Arc::new(ds));
        }
        Ok(Arc::new(generate_dataset(&cfg, size, seed, benchmark)?))
    };

    let train = build(suite.base.train_size, train_seed, "train")?;
    let test = build(suite.base.test_size, test_seed, "test")?;
    Ok((train, test))
}

/// Executes the full suite: the applicable cross product of runs, then
/// cross-evaluation of every variable-size-trained ESC model on each fixed-M
/// test set. Per-run failures are recorded and the suite continues. With
/// `jobs > 1` runs execute concurrently; results are identical either way.
pub fn run_experiment_suite(
    suite: &SuiteConfig,
    data_dir: Option<&std::path::Path>,
) -> Result<SuiteResult> {
    suite.validate()?;
    let specs = suite.runs();

    // Datasets up front, in deterministic order.
    let mut datasets: BTreeMap<(u32, SetSizeMode), (Arc<Dataset>, Arc<Dataset>)> = BTreeMap::new();
    for &benchmark in &suite.benchmarks {
        for &case in &suite.cases {
            datasets.insert(
                (benchmark, case),
                ensure_cell_datasets(suite, benchmark, case, data_dir)?,
            );
        }
    }

    let execute = |spec: &RunSpec| -> (RunSpec, std::result::Result<(TrainedModel, RunMetrics), String>) {
        let cfg = match suite.cell_config(spec) {
            Ok(c) => c,
            Err(e) => return (*spec, Err(e.to_string())),
        };
        let (train_set, test_set) = &datasets[&(spec.benchmark, spec.case)];
        let outcome = train(&cfg, spec.method, train_set, test_set, spec.seed)
            .map_err(|e| e.to_string());
        (*spec, outcome)
    };

    let outcomes: Vec<_> = if suite.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(suite.jobs)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        use rayon::prelude::*;
        pool.install(|| specs.par_iter().map(execute).collect())
    } else {
        specs.iter().map(execute).collect()
    };

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    let mut by_cell: BTreeMap<(u32, SetSizeMode, Method), Vec<f64>> = BTreeMap::new();
    let mut failed_count: BTreeMap<(u32, SetSizeMode, Method), usize> = BTreeMap::new();
    let mut var_models: Vec<(u32, u64, TrainedModel)> = Vec::new();

    for (spec, outcome) in outcomes {
        match outcome {
            Ok((model, metrics)) => {
                by_cell
                    .entry((spec.benchmark, spec.case, spec.method))
                    .or_default()
                    .push(metrics.final_rmse);
                if spec.method == Method::Esc && spec.case == SetSizeMode::Variable {
                    var_models.push((spec.benchmark, spec.seed, model));
                }
                runs.push(metrics);
            }
            Err(msg) => {
                *failed_count
                    .entry((spec.benchmark, spec.case, spec.method))
                    .or_default() += 1;
                by_cell
                    .entry((spec.benchmark, spec.case, spec.method))
                    .or_default();
                failures.push((spec, msg));
            }
        }
    }

    // Cross-evaluate variable-trained ESC models at every fixed case.
    let mut cross_evals = Vec::new();
    let mut cross_cells: BTreeMap<(u32, usize), Vec<f64>> = BTreeMap::new();
    for (benchmark, seed, model) in &var_models {
        for &case in &suite.cases {
            let SetSizeMode::Fixed(m) = case else { continue };
            let (_, test_set) = &datasets[&(*benchmark, case)];
            let rmse = evaluate_rmse(
                &model.policy,
                Method::Esc,
                model.feature.as_ref(),
                test_set,
                derive_seed(*seed, Stream::EvalPermutation, m as u64),
            )?;
            cross_evals.push(CrossEval {
                benchmark: *benchmark,
                m,
                seed: *seed,
                rmse,
            });
            cross_cells.entry((*benchmark, m)).or_default().push(rmse);
        }
    }

    let mut cells = Vec::new();
    for ((benchmark, case, method), values) in &by_cell {
        let (mean, std) = mean_std(values);
        cells.push(SuiteCell {
            benchmark: *benchmark,
            case: *case,
            method: method.label().to_string(),
            mean_rmse: mean,
            std_rmse: std,
            n_seeds: values.len(),
            n_failed: failed_count.get(&(*benchmark, *case, *method)).copied().unwrap_or(0),
        });
    }
    for ((benchmark, m), values) in &cross_cells {
        let (mean, std) = mean_std(values);
        cells.push(SuiteCell {
            benchmark: *benchmark,
            case: SetSizeMode::Fixed(*m),
            method: "ESC-var".to_string(),
            mean_rmse: mean,
            std_rmse: std,
            n_seeds: values.len(),
            n_failed: 0,
        });
    }
    cells.sort_by(|a, b| {
        (a.benchmark, a.case, a.method.clone()).cmp(&(b.benchmark, b.case, b.method.clone()))
    });

    Ok(SuiteResult {
        cells,
        runs,
        cross_evals,
        failures,
    })
}

/// One row of the discontinuity report.
#[derive(Debug, Clone, Serialize)]
pub struct DemoRow {
    pub eps: f64,
    /// ‖FP(1+ε) − FP(1−ε)‖₂
    pub fp_jump: f64,
    /// ‖ESC(1+ε) − ESC(1−ε)‖₂ for the supplied feature net
    pub esc_diff: f64,
    /// fp_jump / esc_diff (absent if esc_diff is zero)
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub rows: Vec<DemoRow>,
}

/// Probes the sorted-concatenation discontinuity: the two-vehicle scene
/// `{[j, 2], [1, 5]}` changes sort order as `j` crosses 1, so the FP state
/// jumps by a fixed norm (3√2 in the limit) while the ESC state moves
/// continuously. `feature_params` must take 2-dimensional inputs.
pub fn discontinuity_demo(eps_list: &[f64], feature_params: &MlpParams) -> Result<DemoReport> {
    if feature_params.input_dim() != 2 {
        return Err(Error::Shape {
            layer: 0,
            details: format!(
                "demo scene has 2-dimensional vehicles, feature net expects {}",
                feature_params.input_dim()
            ),
        });
    }
    use crate::setrep::{esc_represent, fp_represent, ObservationSet, SurroundingFeature};
    let obs_at = |j: f64| {
        ObservationSet::new(
            vec![
                SurroundingFeature::new(vec![j, 2.0]),
                SurroundingFeature::new(vec![1.0, 5.0]),
            ],
            vec![],
        )
    };
    let l2 = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    };
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        if !(eps > 0.0) {
            return Err(Error::Argument(format!("eps must be positive, got {eps}")));
        }
        let (lo, hi) = (obs_at(1.0 - eps), obs_at(1.0 + eps));
        let fp_jump = l2(&fp_represent(&lo).values, &fp_represent(&hi).values);
        let (esc_lo, _) = esc_represent(&lo, feature_params)?;
        let (esc_hi, _) = esc_represent(&hi, feature_params)?;
        let esc_diff = l2(&esc_lo.values, &esc_hi.values);
        let ratio = (esc_diff > 0.0).then(|| fp_jump / esc_diff);
        rows.push(DemoRow {
            eps,
            fp_jump,
            esc_diff,
            ratio,
        });
    }
    Ok(DemoReport { rows })
}
