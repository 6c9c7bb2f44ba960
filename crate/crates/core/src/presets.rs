//! Built-in configuration presets.
//!
//! `paper`: the full-scale protocol — d1=5, d2=10, N=20, d3=101, five hidden
//! layers of 256 units per net, one million training samples, batch 512,
//! lr 8e-5, 3000 iterations, five seeds, benchmarks 1–6 with cases
//! M ∈ {5, 10, 15, 20} and the variable case. Heavy: hours of CPU time and
//! several GB of dataset memory per cell.
//!
//! `desk`: a reduced-scale profile that preserves the structural parity
//! between the ESC nets and the flat baseline — d1=3, d2=4, N=6,
//! d3 = N·d1+1 = 19, two hidden layers of 64 per net (baseline: five hidden
//! layers of 64 with a linear 19-unit middle layer), 20 000 training samples,
//! batch 128, lr 3e-4, 2000 iterations, three seeds.

use crate::data::{ArchitectureConfig, ExperimentConfig, Method, SetSizeMode};
use crate::error::{Error, Result};
use crate::trainer::SuiteConfig;

pub fn desk_experiment() -> ExperimentConfig {
    ExperimentConfig {
        d1: 3,
        d2: 4,
        d3: 19,
        n_max: 6,
        c_min: -5.0,
        c_max: 5.0,
        set_size_mode: SetSizeMode::Fixed(4),
        benchmark_id: 1,
        train_size: 20_000,
        test_size: 2_048,
        batch_size: 128,
        learning_rate: 3e-4,
        iterations: 2_000,
        eval_interval: 50,
        seeds: vec![1, 2, 3],
        architecture: ArchitectureConfig {
            feature_hidden: vec![64, 64],
            policy_hidden: vec![64, 64],
        },
        method: Method::Esc,
        allow_small_d3: false,
    }
}

pub fn desk_suite() -> SuiteConfig {
    SuiteConfig {
        base: desk_experiment(),
        benchmarks: vec![1, 3],
        cases: vec![SetSizeMode::Fixed(2), SetSizeMode::Fixed(4), SetSizeMode::Variable],
        methods: vec![Method::Esc, Method::Fp, Method::Ap],
        seeds: vec![1, 2, 3],
        data_seed: 905,
        jobs: 1,
    }
}

pub fn paper_experiment() -> ExperimentConfig {
    ExperimentConfig {
        d1: 5,
        d2: 10,
        d3: 101,
        n_max: 20,
        c_min: -5.0,
        c_max: 5.0,
        set_size_mode: SetSizeMode::Fixed(5),
        benchmark_id: 1,
        train_size: 1_000_000,
        test_size: 2_048,
        batch_size: 512,
        learning_rate: 8e-5,
        iterations: 3_000,
        eval_interval: 50,
        seeds: vec![1, 2, 3, 4, 5],
        architecture: ArchitectureConfig {
            feature_hidden: vec![256; 5],
            policy_hidden: vec![256; 5],
        },
        method: Method::Esc,
        allow_small_d3: false,
    }
}

pub fn paper_suite() -> SuiteConfig {
    SuiteConfig {
        base: paper_experiment(),
        benchmarks: (1..=6).collect(),
        cases: vec![
            SetSizeMode::Fixed(5),
            SetSizeMode::Fixed(10),
            SetSizeMode::Fixed(15),
            SetSizeMode::Fixed(20),
            SetSizeMode::Variable,
        ],
        methods: vec![Method::Esc, Method::Fp, Method::Ap],
        seeds: vec![1, 2, 3, 4, 5],
        data_seed: 905,
        jobs: 1,
    }
}

pub fn experiment_preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "desk" => Ok(desk_experiment()),
        "paper" => Ok(paper_experiment()),
        other => Err(Error::Config(format!(
            "unknown preset {other}; available: desk, paper"
        ))),
    }
}

pub fn suite_preset(name: &str) -> Result<SuiteConfig> {
    match name {
        "desk" => Ok(desk_suite()),
        "paper" => Ok(paper_suite()),
        other => Err(Error::Config(format!(
            "unknown preset {other}; available: desk, paper"
        ))),
    }
}
