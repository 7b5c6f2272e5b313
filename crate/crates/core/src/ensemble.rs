//! Multi-seed ensembles and parameter sweeps.
//!
//! Every run owns its random stream, so runs are executed in parallel and
//! in any order. Results are sorted by seed before aggregation, and sums use
//! Neumaier compensation, so an ensemble's statistics do not depend on the
//! schedule that produced them.
//!
//! Sweep cells draw their seeds from `seed_base + cell_hash`, where
//! `cell_hash` is FNV-1a (64 bit) over the little-endian bytes of
//! `n_producers as u64`, `consumer_cost.to_bits()` and `theta.to_bits()`.
//! Seed `i` of a cell is `cell_seed + i` (wrapping).

use rayon::prelude::*;

use crate::engine::{run_observed, SimConfig};
use crate::error::{Error, Result};
use crate::observables::{
    condensed_fraction, exact_match_fraction, order_ratio, overlap_histogram,
};
use crate::population::MarketState;

/// Final-state observables of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub survivors: usize,
    pub mean_capital: f64,
    pub mean_satisfaction: f64,
    pub order_ratio: Option<f64>,
    pub condensed_fraction: f64,
    pub exact_match_fraction: f64,
}

impl RunSummary {
    pub fn from_state(state: &MarketState, config: &SimConfig) -> Self {
        let h = overlap_histogram(&state.needs(), config.k).expect("consumers share k");
        let mean_satisfaction = state.mean_satisfaction();
        RunSummary {
            seed: config.seed,
            survivors: state.producers.len(),
            mean_capital: state.mean_capital(),
            mean_satisfaction,
            order_ratio: order_ratio(&h),
            condensed_fraction: condensed_fraction(mean_satisfaction, config.initial_satisfaction),
            exact_match_fraction: exact_match_fraction(state),
        }
    }
}

pub fn summarize_run(config: &SimConfig) -> RunSummary {
    let state = run_observed(config, &mut |_: &MarketState, _: &crate::StepStats| {});
    RunSummary::from_state(&state, config)
}

/// Mean and sample standard deviation over the runs where a value exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    /// Sample (n - 1) standard deviation; 0 for a single value.
    pub std: f64,
    pub count: usize,
}

impl Stat {
    /// `None` for an empty input.
    pub fn from_values(values: &[f64]) -> Option<Stat> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = compensated_sum(values.iter().copied()) / n as f64;
        let std = if n > 1 {
            let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Stat {
            mean,
            std,
            count: n,
        })
    }
}

/// Neumaier's compensated summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRecord {
    pub n_producers: usize,
    pub consumer_cost: f64,
    pub theta: f64,
    pub n_seeds: usize,
    pub survivors: Stat,
    pub mean_capital: Stat,
    pub mean_satisfaction: Stat,
    /// Over the runs where the order ratio is defined; `None` if it never is.
    pub order_ratio: Option<Stat>,
    pub condensed_fraction: Stat,
    pub exact_match_fraction: Stat,
}

/// Summaries of `config` replayed under each seed, in the given order.
pub fn run_summaries(config: &SimConfig, seeds: &[u64]) -> Vec<RunSummary> {
    seeds
        .par_iter()
        .map(|&seed| {
            summarize_run(&SimConfig {
                seed,
                ..config.clone()
            })
        })
        .collect()
}

/// Aggregates run summaries; the result does not depend on their order.
pub fn aggregate(config: &SimConfig, summaries: &[RunSummary]) -> EnsembleRecord {
    assert!(!summaries.is_empty(), "cannot aggregate an empty ensemble");
    let mut sorted: Vec<&RunSummary> = summaries.iter().collect();
    sorted.sort_by_key(|s| s.seed);
    let stat = |f: &dyn Fn(&RunSummary) -> f64| {
        let values: Vec<f64> = sorted.iter().map(|s| f(s)).collect();
        Stat::from_values(&values).expect("non-empty")
    };
    let ratios: Vec<f64> = sorted.iter().filter_map(|s| s.order_ratio).collect();
    EnsembleRecord {
        n_producers: config.n_producers,
        consumer_cost: config.consumer_cost,
        theta: config.theta,
        n_seeds: summaries.len(),
        survivors: stat(&|s| s.survivors as f64),
        mean_capital: stat(&|s| s.mean_capital),
        mean_satisfaction: stat(&|s| s.mean_satisfaction),
        order_ratio: Stat::from_values(&ratios),
        condensed_fraction: stat(&|s| s.condensed_fraction),
        exact_match_fraction: stat(&|s| s.exact_match_fraction),
    }
}

pub fn ensemble_seeds(n_seeds: usize, seed_base: u64) -> Vec<u64> {
    (0..n_seeds as u64)
        .map(|i| seed_base.wrapping_add(i))
        .collect()
}

/// Runs `config` under seeds `seed_base .. seed_base + n_seeds` and
/// aggregates the final states. `config.seed` is ignored.
pub fn run_ensemble(config: &SimConfig, n_seeds: usize, seed_base: u64) -> EnsembleRecord {
    assert!(n_seeds >= 1, "n_seeds must be at least 1");
    let summaries = run_summaries(config, &ensemble_seeds(n_seeds, seed_base));
    aggregate(config, &summaries)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: SimConfig,
    pub np_grid: Vec<usize>,
    pub ac_values: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub n_seeds: usize,
    pub seed_base: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            base: SimConfig::default(),
            np_grid: vec![10, 30, 100, 300, 1000],
            ac_values: vec![0.9, 1.0],
            theta_values: vec![0.8, 0.9],
            n_seeds: 100,
            seed_base: 0,
        }
    }
}

fn sweep_invalid(field: &'static str, value: impl ToString, bound: &'static str) -> Error {
    Error::Validation {
        field,
        value: value.to_string(),
        bound,
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.np_grid.is_empty() {
            return Err(sweep_invalid("np_grid", "[]", "np_grid non-empty"));
        }
        if self.ac_values.is_empty() {
            return Err(sweep_invalid("ac_values", "[]", "ac_values non-empty"));
        }
        if self.theta_values.is_empty() {
            return Err(sweep_invalid(
                "theta_values",
                "[]",
                "theta_values non-empty",
            ));
        }
        if self.n_seeds < 1 {
            return Err(sweep_invalid("n_seeds", self.n_seeds, "n_seeds ≥ 1"));
        }
        for config in self.cells() {
            config.validate()?;
        }
        Ok(())
    }

    /// Cell configs in output order: theta, then consumer cost, then
    /// initial producer count.
    pub fn cells(&self) -> Vec<SimConfig> {
        let mut cells = Vec::new();
        for &theta in &self.theta_values {
            for &consumer_cost in &self.ac_values {
                for &n_producers in &self.np_grid {
                    cells.push(SimConfig {
                        theta,
                        consumer_cost,
                        n_producers,
                        ..self.base.clone()
                    });
                }
            }
        }
        cells
    }
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .into_iter()
        .fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

/// First seed of the sweep cell at `(n_producers, consumer_cost, theta)`.
pub fn cell_seed(seed_base: u64, n_producers: usize, consumer_cost: f64, theta: f64) -> u64 {
    let bytes = (n_producers as u64)
        .to_le_bytes()
        .into_iter()
        .chain(consumer_cost.to_bits().to_le_bytes())
        .chain(theta.to_bits().to_le_bytes());
    seed_base.wrapping_add(fnv1a(bytes))
}

/// One ensemble record per grid cell, in [`SweepSpec::cells`] order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<EnsembleRecord> {
    spec.cells()
        .par_iter()
        .map(|config| {
            let seed = cell_seed(
                spec.seed_base,
                config.n_producers,
                config.consumer_cost,
                config.theta,
            );
            run_ensemble(config, spec.n_seeds, seed)
        })
        .collect()
}
