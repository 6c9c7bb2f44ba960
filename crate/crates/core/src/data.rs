//! Experiment configuration, seeded dataset generation, the `ESCD` on-disk
//! format, and shuffled batch iteration.
//!
//! Dataset bytes are the reproducibility contract: the same config and seed
//! produce byte-identical files, and labels round-trip bitwise (text formats
//! would lose ulps).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::benchmarks::{eval_benchmark, BenchmarkId};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{stream_rng, Stream};
use crate::setrep::{ObservationSet, SurroundingFeature};

/// How the set size of each generated observation is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetSizeMode {
    /// Every observation has exactly this many vehicles.
    Fixed(usize),
    /// Uniform over `1..=n_max`.
    Variable,
}

impl std::fmt::Display for SetSizeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SetSizeMode::Fixed(m) => write!(f, "M{m}"),
            SetSizeMode::Variable => write!(f, "Mvar"),
        }
    }
}

/// State-representation method under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Esc,
    Ap,
    Fp,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Esc => "ESC",
            Method::Ap => "AP",
            Method::Fp => "FP",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.to_ascii_uppercase().as_str() {
            "ESC" => Ok(Method::Esc),
            "AP" => Ok(Method::Ap),
            "FP" => Ok(Method::Fp),
            other => Err(Error::Argument(format!("unknown method {other}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Hidden-layer widths of the two ESC nets. The flat-baseline policy net is
/// derived from these for structural parity: its hidden stack is
/// `feature_hidden`, then a linear layer of width `d3`, then `policy_hidden`,
/// so both architectures hold the same number of hidden layers and units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureConfig {
    pub feature_hidden: Vec<usize>,
    pub policy_hidden: Vec<usize>,
}

/// Everything one experiment needs: dimensions, bounds, set-size regime,
/// target function, sizes, optimizer settings, seeds, and architecture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Per-vehicle feature dimension.
    pub d1: usize,
    /// Dimension of `x_else`.
    pub d2: usize,
    /// Feature-net output dimension. Injectivity needs `d3 ≥ n_max·d1 + 1`.
    pub d3: usize,
    /// Maximum set size.
    pub n_max: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub set_size_mode: SetSizeMode,
    pub benchmark_id: u32,
    pub train_size: usize,
    pub test_size: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub iterations: usize,
    /// Test RMSE is evaluated every this many iterations (and at the end).
    pub eval_interval: usize,
    pub seeds: Vec<u64>,
    pub architecture: ArchitectureConfig,
    pub method: Method,
    /// Permit `d3 < n_max·d1 + 1` for ESC (logged as a warning).
    #[serde(default)]
    pub allow_small_d3: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_for(self.method)
    }

    pub fn validate_for(&self, method: Method) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 {
            return Err(Error::Config("d1 and d2 must be positive".into()));
        }
        if self.n_max == 0 {
            return Err(Error::Config("n_max must be positive".into()));
        }
        if !(self.c_min < self.c_max) {
            return Err(Error::Config(format!(
                "need c_min < c_max, got [{}, {}]",
                self.c_min, self.c_max
            )));
        }
        if let SetSizeMode::Fixed(m) = self.set_size_mode {
            if m == 0 || m > self.n_max {
                return Err(Error::Config(format!(
                    "fixed set size {m} outside 1..={}",
                    self.n_max
                )));
            }
        }
        BenchmarkId::new(self.benchmark_id)?;
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.eval_interval == 0 {
            return Err(Error::Config("eval_interval must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("need at least one seed".into()));
        }
        match method {
            Method::Esc => {
                let needed = self.n_max * self.d1 + 1;
                if self.d3 < needed {
                    if self.allow_small_d3 {
                        log::warn!(
                            "d3 = {} is below the injectivity bound n_max*d1+1 = {needed}; \
                             continuing because allow_small_d3 is set",
                            self.d3
                        );
                    } else {
                        return Err(Error::Config(format!(
                            "d3 = {} violates the injectivity bound n_max*d1+1 = {needed} \
                             (set allow_small_d3 to override)",
                            self.d3
                        )));
                    }
                }
            }
            Method::Ap | Method::Fp => {
                if self.set_size_mode == SetSizeMode::Variable {
                    return Err(Error::Config(
                        "AP/FP produce variable-length states under a variable set size; \
                         only ESC supports it"
                            .into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn to_json_file(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(format!("serializing config: {e}")))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        Ok(cfg)
    }
}

/// One labelled observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub obs: ObservationSet,
    pub label: f64,
}

/// An in-memory dataset plus the header fields that identify how it was
/// generated.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub d1: usize,
    pub d2: usize,
    pub n_max: usize,
    pub set_size_mode: SetSizeMode,
    pub benchmark_id: u32,
    pub generator_seed: u64,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Recomputes every label and demands bitwise equality with the stored
    /// one. Catches both file corruption and formula drift.
    pub fn verify_labels(&self) -> Result<()> {
        let id = BenchmarkId::new(self.benchmark_id)?;
        for (i, sample) in self.samples.iter().enumerate() {
            let recomputed = eval_benchmark(id, &sample.obs)?;
            if recomputed.to_bits() != sample.label.to_bits() {
                return Err(Error::Domain(format!(
                    "label mismatch at sample {i}: stored {} recomputed {recomputed}",
                    sample.label
                )));
            }
        }
        Ok(())
    }

    /// Gathers the given samples into training-ready buffers: all vehicle
    /// rows flattened (storage order within each sample), per-sample segment
    /// offsets, the `x_else` matrix, and labels.
    pub fn gather(&self, indices: &[usize]) -> BatchData {
        let total: usize = indices.iter().map(|&i| self.samples[i].obs.num_vehicles()).sum();
        let mut vehicle_rows = Matrix::zeros(total, self.d1);
        let mut offsets = Vec::with_capacity(indices.len() + 1);
        offsets.push(0usize);
        let mut x_else = Matrix::zeros(indices.len(), self.d2);
        let mut labels = Vec::with_capacity(indices.len());
        let mut r = 0;
        for (s, &i) in indices.iter().enumerate() {
            let sample = &self.samples[i];
            for v in &sample.obs.vehicles {
                vehicle_rows.row_mut(r).copy_from_slice(&v.values);
                r += 1;
            }
            offsets.push(r);
            x_else.row_mut(s).copy_from_slice(&sample.obs.x_else);
            labels.push(sample.label);
        }
        BatchData {
            vehicle_rows,
            offsets,
            x_else,
            labels,
        }
    }
}

/// Flattened view of a batch; `offsets` delimit each sample's vehicle rows.
#[derive(Debug, Clone)]
pub struct BatchData {
    pub vehicle_rows: Matrix,
    pub offsets: Vec<usize>,
    pub x_else: Matrix,
    pub labels: Vec<f64>,
}

impl BatchData {
    pub fn batch_size(&self) -> usize {
        self.labels.len()
    }
}

/// Draws one observation: the set size per `set_size_mode`, then every
/// vehicle entry and `x_else` entry i.i.d. uniform on `[c_min, c_max]`.
/// Draw order (size, vehicle rows, x_else) is part of the format contract.
pub fn sample_observation(config: &ExperimentConfig, rng: &mut impl Rng) -> ObservationSet {
    let m = match config.set_size_mode {
        SetSizeMode::Fixed(m) => m,
        SetSizeMode::Variable => rng.gen_range(1..=config.n_max),
    };
    let dist = Uniform::new_inclusive(config.c_min, config.c_max);
    let vehicles = (0..m)
        .map(|_| {
            SurroundingFeature::new((0..config.d1).map(|_| dist.sample(rng)).collect())
        })
        .collect();
    let x_else = (0..config.d2).map(|_| dist.sample(rng)).collect();
    ObservationSet::new(vehicles, x_else)
}

/// Generates `size` labelled samples, deterministically from `seed`.
pub fn generate_dataset(
    config: &ExperimentConfig,
    size: usize,
    seed: u64,
    benchmark_id: u32,
) -> Result<Dataset> {
    let id = BenchmarkId::new(benchmark_id)?;
    let mut rng = stream_rng(seed, Stream::Data);
    let mut samples = Vec::with_capacity(size);
    for _ in 0..size {
        let obs = sample_observation(config, &mut rng);
        let label = eval_benchmark(id, &obs)?;
        samples.push(Sample { obs, label });
    }
    Ok(Dataset {
        d1: config.d1,
        d2: config.d2,
        n_max: config.n_max,
        set_size_mode: config.set_size_mode,
        benchmark_id,
        generator_seed: seed,
        samples,
    })
}

const MAGIC: &[u8; 4] = b"ESCD";
const VERSION: u32 = 1;

/// Writes the dataset in the `ESCD` little-endian binary format:
///
/// ```text
/// magic "ESCD", version u32,
/// d1 u32, d2 u32, n_max u32,
/// mode tag u8 (0 fixed / 1 variable), fixed M u32 (0 when variable),
/// benchmark_id u32, sample count u64, generator seed u64,
/// per sample: M u16, M·d1 vehicle f64s, d2 x_else f64s, label f64
/// ```
pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);

    w.write_all(MAGIC).map_err(io)?;
    w.write_all(&VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(dataset.d1 as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(dataset.d2 as u32).to_le_bytes()).map_err(io)?;
    w.write_all(&(dataset.n_max as u32).to_le_bytes()).map_err(io)?;
    let (tag, fixed_m) = match dataset.set_size_mode {
        SetSizeMode::Fixed(m) => (0u8, m as u32),
        SetSizeMode::Variable => (1u8, 0u32),
    };
    w.write_all(&[tag]).map_err(io)?;
    w.write_all(&fixed_m.to_le_bytes()).map_err(io)?;
    w.write_all(&dataset.benchmark_id.to_le_bytes()).map_err(io)?;
    w.write_all(&(dataset.samples.len() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&dataset.generator_seed.to_le_bytes()).map_err(io)?;

    for sample in &dataset.samples {
        let m = sample.obs.vehicles.len();
        w.write_all(&(m as u16).to_le_bytes()).map_err(io)?;
        for v in &sample.obs.vehicles {
            for x in &v.values {
                w.write_all(&x.to_le_bytes()).map_err(io)?;
            }
        }
        for x in &sample.obs.x_else {
            w.write_all(&x.to_le_bytes()).map_err(io)?;
        }
        w.write_all(&sample.label.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let io = |e| Error::io(path, e);

    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io)?;
    if &magic != MAGIC {
        return Err(Error::format(path, format!("bad magic {magic:?}, expected ESCD")));
    }
    let version = read_u32(&mut r).map_err(io)?;
    if version != VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let d1 = read_u32(&mut r).map_err(io)? as usize;
    let d2 = read_u32(&mut r).map_err(io)? as usize;
    let n_max = read_u32(&mut r).map_err(io)? as usize;
    let mut tag = [0u8; 1];
    r.read_exact(&mut tag).map_err(io)?;
    let fixed_m = read_u32(&mut r).map_err(io)? as usize;
    let set_size_mode = match tag[0] {
        0 => SetSizeMode::Fixed(fixed_m),
        1 => SetSizeMode::Variable,
        other => return Err(Error::format(path, format!("unknown set-size tag {other}"))),
    };
    let benchmark_id = read_u32(&mut r).map_err(io)?;
    let count = read_u64(&mut r).map_err(io)? as usize;
    let generator_seed = read_u64(&mut r).map_err(io)?;

    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        let mut mb = [0u8; 2];
        r.read_exact(&mut mb).map_err(io)?;
        let m = u16::from_le_bytes(mb) as usize;
        if m == 0 || m > n_max {
            return Err(Error::format(path, format!("sample {i}: set size {m} outside 1..={n_max}")));
        }
        if let SetSizeMode::Fixed(fm) = set_size_mode {
            if m != fm {
                return Err(Error::format(
                    path,
                    format!("sample {i}: set size {m} in a fixed-M({fm}) dataset"),
                ));
            }
        }
        let mut vehicles = Vec::with_capacity(m);
        for _ in 0..m {
            vehicles.push(SurroundingFeature::new(read_f64s(&mut r, d1).map_err(io)?));
        }
        let x_else = read_f64s(&mut r, d2).map_err(io)?;
        let label = read_f64(&mut r).map_err(io)?;
        samples.push(Sample {
            obs: ObservationSet::new(vehicles, x_else),
            label,
        });
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(io)? != 0 {
        return Err(Error::format(path, "trailing bytes after last sample"));
    }
    Ok(Dataset {
        d1,
        d2,
        n_max,
        set_size_mode,
        benchmark_id,
        generator_seed,
        samples,
    })
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> std::io::Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> std::io::Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(read_f64(r)?);
    }
    Ok(out)
}

/// Iterator over shuffled index batches; the final short batch is emitted.
pub struct BatchIter {
    order: Vec<usize>,
    batch_size: usize,
    pos: usize,
}

impl Iterator for BatchIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let batch = self.order[self.pos..end].to_vec();
        self.pos = end;
        Some(batch)
    }
}

/// Uniformly shuffles the sample indices with `epoch_seed` and yields batches
/// of `batch_size` (last one possibly short). The same `epoch_seed` always
/// produces the same batch sequence.
pub fn iterate_batches(dataset: &Dataset, batch_size: usize, epoch_seed: u64) -> Result<BatchIter> {
    if dataset.is_empty() {
        return Err(Error::Argument("cannot iterate an empty dataset".into()));
    }
    if batch_size == 0 {
        return Err(Error::Argument("batch_size must be positive".into()));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = stream_rng(epoch_seed, Stream::Shuffle);
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    Ok(BatchIter {
        order,
        batch_size,
        pos: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn small_config() -> ExperimentConfig {
        let mut cfg = presets::desk_experiment();
        cfg.train_size = 64;
        cfg.test_size = 16;
        cfg
    }

    #[test]
    fn fixed_mode_always_draws_the_fixed_size() {
        let mut cfg = small_config();
        cfg.set_size_mode = SetSizeMode::Fixed(5);
        cfg.n_max = 6;
        let mut rng = stream_rng(1, Stream::Data);
        for _ in 0..100 {
            assert_eq!(sample_observation(&cfg, &mut rng).num_vehicles(), 5);
        }
    }

    #[test]
    fn variable_mode_sizes_are_uniform() {
        let mut cfg = small_config();
        cfg.d1 = 5;
        cfg.d2 = 10;
        cfg.n_max = 20;
        cfg.set_size_mode = SetSizeMode::Variable;
        let mut rng = stream_rng(2, Stream::Data);
        let n = 100_000;
        let mut counts = vec![0usize; 21];
        for _ in 0..n {
            counts[sample_observation(&cfg, &mut rng).num_vehicles()] += 1;
        }
        assert_eq!(counts[0], 0);
        for m in 1..=20 {
            let freq = counts[m] as f64 / n as f64;
            assert!((freq - 0.05).abs() < 0.005, "M={m} frequency {freq}");
        }
    }

    #[test]
    fn entries_are_uniform_on_the_box() {
        let mut cfg = small_config();
        cfg.d1 = 5;
        cfg.d2 = 10;
        cfg.set_size_mode = SetSizeMode::Fixed(1);
        cfg.n_max = 20;
        let mut rng = stream_rng(3, Stream::Data);
        let (mut sum, mut min, mut max, mut n) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY, 0u64);
        for _ in 0..1_000_000 {
            let obs = sample_observation(&cfg, &mut rng);
            for x in obs.vehicles.iter().flat_map(|v| &v.values).chain(&obs.x_else) {
                sum += x;
                min = min.min(*x);
                max = max.max(*x);
                n += 1;
            }
        }
        let mean = sum / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!(min >= -5.0 && max <= 5.0);
    }

    #[test]
    fn generation_is_deterministic_and_files_roundtrip() {
        let cfg = small_config();
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("a.escd");
        let p2 = dir.path().join("b.escd");

        let ds1 = generate_dataset(&cfg, 64, 7, cfg.benchmark_id).unwrap();
        let ds2 = generate_dataset(&cfg, 64, 7, cfg.benchmark_id).unwrap();
        assert_eq!(ds1, ds2);

        write_dataset(&ds1, &p1).unwrap();
        write_dataset(&ds2, &p2).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());

        let loaded = read_dataset(&p1).unwrap();
        assert_eq!(loaded, ds1);
        let p3 = dir.path().join("c.escd");
        write_dataset(&loaded, &p3).unwrap();
        assert_eq!(std::fs::read(&p1).unwrap(), std::fs::read(&p3).unwrap());
    }

    #[test]
    fn labels_verify_bitwise_after_roundtrip() {
        let cfg = small_config();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.escd");
        let ds = generate_dataset(&cfg, 200, 11, cfg.benchmark_id).unwrap();
        write_dataset(&ds, &path).unwrap();
        let loaded = read_dataset(&path).unwrap();
        loaded.verify_labels().unwrap();
    }

    #[test]
    fn corrupted_label_is_caught() {
        let cfg = small_config();
        let mut ds = generate_dataset(&cfg, 8, 1, cfg.benchmark_id).unwrap();
        ds.samples[3].label += 1.0;
        assert!(ds.verify_labels().is_err());
    }

    #[test]
    fn read_rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.escd");
        std::fs::write(&path, b"NOTESCD!").unwrap();
        assert!(read_dataset(&path).is_err());
    }

    #[test]
    fn single_batch_is_a_permutation() {
        let cfg = small_config();
        let ds = generate_dataset(&cfg, 32, 5, cfg.benchmark_id).unwrap();
        let batches: Vec<_> = iterate_batches(&ds, 32, 99).unwrap().collect();
        assert_eq!(batches.len(), 1);
        let mut idx = batches[0].clone();
        idx.sort_unstable();
        assert_eq!(idx, (0..32).collect::<Vec<_>>());
    }

    #[test]
    fn same_epoch_seed_same_batches_and_sizes_cover_dataset() {
        let cfg = small_config();
        let ds = generate_dataset(&cfg, 50, 5, cfg.benchmark_id).unwrap();
        let a: Vec<_> = iterate_batches(&ds, 16, 4).unwrap().collect();
        let b: Vec<_> = iterate_batches(&ds, 16, 4).unwrap().collect();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(Vec::len).collect::<Vec<_>>(), vec![16, 16, 16, 2]);
        let mut all: Vec<usize> = a.concat();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn different_epoch_seeds_reorder() {
        let cfg = small_config();
        let ds = generate_dataset(&cfg, 50, 5, cfg.benchmark_id).unwrap();
        let a: Vec<_> = iterate_batches(&ds, 50, 1).unwrap().collect();
        let b: Vec<_> = iterate_batches(&ds, 50, 2).unwrap().collect();
        assert_ne!(a, b);
    }

    #[test]
    fn empty_dataset_is_an_error() {
        let cfg = small_config();
        let ds = Dataset {
            d1: cfg.d1,
            d2: cfg.d2,
            n_max: cfg.n_max,
            set_size_mode: cfg.set_size_mode,
            benchmark_id: cfg.benchmark_id,
            generator_seed: 0,
            samples: vec![],
        };
        assert!(iterate_batches(&ds, 8, 0).is_err());
    }

    #[test]
    fn gather_segments_cover_all_vehicles() {
        let mut cfg = small_config();
        cfg.set_size_mode = SetSizeMode::Variable;
        let ds = generate_dataset(&cfg, 20, 13, cfg.benchmark_id).unwrap();
        let idx: Vec<usize> = (0..20).collect();
        let bd = ds.gather(&idx);
        assert_eq!(bd.batch_size(), 20);
        assert_eq!(*bd.offsets.last().unwrap(), bd.vehicle_rows.rows());
        let total: usize = idx.iter().map(|&i| ds.samples[i].obs.num_vehicles()).sum();
        assert_eq!(bd.vehicle_rows.rows(), total);
    }

    #[test]
    fn config_validation_catches_bad_settings() {
        let mut cfg = small_config();
        cfg.c_min = 5.0;
        cfg.c_max = -5.0;
        assert!(cfg.validate().is_err());

        let mut cfg = small_config();
        cfg.set_size_mode = SetSizeMode::Fixed(99);
        assert!(cfg.validate().is_err());

        let mut cfg = small_config();
        cfg.method = Method::Fp;
        cfg.set_size_mode = SetSizeMode::Variable;
        assert!(cfg.validate().is_err());

        // ESC injectivity bound: d3 too small fails unless overridden
        let mut cfg = small_config();
        cfg.method = Method::Esc;
        cfg.d3 = 2;
        assert!(cfg.validate().is_err());
        cfg.allow_small_d3 = true;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn config_json_roundtrip() {
        let cfg = small_config();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        cfg.to_json_file(&path).unwrap();
        let loaded = ExperimentConfig::from_json_file(&path).unwrap();
        assert_eq!(loaded, cfg);
    }
}
