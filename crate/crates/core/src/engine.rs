//! Per-step market dynamics and the whole-run driver.
//!
//! One step is synchronous. Every consumer, in index order, picks the live
//! producer whose product overlaps its need the most (uniform tie-break),
//! transacting when the relative overlap reaches the threshold. Wealth is
//! then updated for everyone, and only afterwards are dead agents handled:
//! consumers at or below zero satisfaction are reborn with fresh needs,
//! producers with negative capital are removed for good.
//!
//! The living cost `consumer_cost` is charged to every consumer on every
//! step; the `q/k` gain only comes with a transaction.

use std::collections::BTreeMap;

use rand::Rng;

use crate::bitstring::{basin_radius, random_string, BitString, MAX_LEN};
use crate::error::{Error, Result};
use crate::population::{init_market, Consumer, MarketState, Producer, ProducerId};

/// Absorbs rounding accumulated by repeated `q/k` gains: a consumer dies
/// when its satisfaction is `<= DEATH_TOLERANCE`, a producer when its
/// capital is `< -DEATH_TOLERANCE`.
pub const DEATH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// String length.
    pub k: u32,
    /// Minimum relative overlap for a transaction.
    pub theta: f64,
    pub consumer_cost: f64,
    pub producer_cost: f64,
    pub n_producers: usize,
    pub n_consumers: usize,
    pub producer_capital: f64,
    pub initial_satisfaction: f64,
    pub steps: u64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            k: 10,
            theta: 0.9,
            consumer_cost: 1.0,
            producer_cost: 4.5,
            n_producers: 30,
            n_consumers: 1000,
            producer_capital: 200.0,
            initial_satisfaction: 5.0,
            steps: 2000,
            seed: 0,
        }
    }
}

fn invalid(field: &'static str, value: impl ToString, bound: &'static str) -> Error {
    Error::Validation {
        field,
        value: value.to_string(),
        bound,
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_LEN).contains(&self.k) {
            return Err(invalid("k", self.k, "k ∈ [1,64]"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(invalid("theta", self.theta, "theta ∈ [0,1]"));
        }
        if !(self.consumer_cost >= 0.0 && self.consumer_cost.is_finite()) {
            return Err(invalid(
                "consumer_cost",
                self.consumer_cost,
                "consumer_cost ≥ 0 and finite",
            ));
        }
        if !(self.producer_cost >= 0.0 && self.producer_cost.is_finite()) {
            return Err(invalid(
                "producer_cost",
                self.producer_cost,
                "producer_cost ≥ 0 and finite",
            ));
        }
        if self.n_consumers < 1 {
            return Err(invalid("n_consumers", self.n_consumers, "n_consumers ≥ 1"));
        }
        if !(self.producer_capital > 0.0 && self.producer_capital.is_finite()) {
            return Err(invalid(
                "producer_capital",
                self.producer_capital,
                "producer_capital > 0 and finite",
            ));
        }
        if !(self.initial_satisfaction > 0.0 && self.initial_satisfaction.is_finite()) {
            return Err(invalid(
                "initial_satisfaction",
                self.initial_satisfaction,
                "initial_satisfaction > 0 and finite",
            ));
        }
        Ok(())
    }

    /// Hamming radius of the basin of satisfaction for this config.
    pub fn radius(&self) -> u32 {
        basin_radius(self.k, self.theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub t: u64,
    pub n_producers: usize,
    pub mean_capital: f64,
    pub mean_satisfaction: f64,
    /// Consumers that died (and were replaced) this step.
    pub deaths: usize,
    pub producer_deaths: usize,
    pub transactions: usize,
    /// Transactions at full overlap.
    pub exact_matches: usize,
    /// Sum of `q/k` over this step's transactions.
    pub relative_overlap_sum: f64,
    /// Customers served by every producer alive at the start of the step.
    pub per_producer_customers: BTreeMap<ProducerId, u32>,
}

impl StepStats {
    /// Mean relative overlap of this step's transactions.
    pub fn mean_relative_overlap(&self) -> Option<f64> {
        (self.transactions > 0).then(|| self.relative_overlap_sum / self.transactions as f64)
    }
}

/// A consumer's chosen producer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Match {
    /// Position in the producer slice that was searched.
    pub index: usize,
    pub id: ProducerId,
    pub overlap: u32,
}

/// Finds the best-overlap producer within `radius`, drawing once from `rng`
/// only when several producers share the best overlap.
fn best_match<R: Rng + ?Sized>(
    need: &BitString,
    products: &[BitString],
    radius: u32,
    ties: &mut Vec<usize>,
    rng: &mut R,
) -> Option<(usize, u32)> {
    ties.clear();
    let mut best = u32::MAX;
    for (i, product) in products.iter().enumerate() {
        let d = need.distance_unchecked(product);
        if d < best {
            best = d;
            ties.clear();
            ties.push(i);
        } else if d == best {
            ties.push(i);
        }
    }
    if ties.is_empty() || best > radius {
        return None;
    }
    let pick = if ties.len() == 1 {
        ties[0]
    } else {
        ties[rng.random_range(0..ties.len())]
    };
    Some((pick, need.len() - best))
}

/// Picks the producer a consumer with `need` buys from, if any.
///
/// A transaction needs `q/k >= theta`; the comparison is made on the
/// integer radius from [`basin_radius`], so it agrees with the basin sizes.
pub fn match_consumer<R: Rng + ?Sized>(
    need: &BitString,
    producers: &[Producer],
    theta: f64,
    rng: &mut R,
) -> Result<Option<Match>> {
    if let Some(p) = producers.iter().find(|p| p.product.len() != need.len()) {
        return Err(Error::LengthMismatch {
            left: need.len(),
            right: p.product.len(),
        });
    }
    let products: Vec<BitString> = producers.iter().map(|p| p.product).collect();
    let radius = basin_radius(need.len(), theta);
    let mut ties = Vec::new();
    Ok(
        best_match(need, &products, radius, &mut ties, rng).map(|(index, overlap)| Match {
            index,
            id: producers[index].id,
            overlap,
        }),
    )
}

/// Advances the market by one step.
pub fn step(state: &mut MarketState, config: &SimConfig) -> StepStats {
    let k = config.k;
    let kf = f64::from(k);
    let radius = config.radius();
    let products: Vec<BitString> = state.producers.iter().map(|p| p.product).collect();

    let mut ties = Vec::with_capacity(products.len());
    let matches: Vec<Option<(usize, u32)>> = state
        .consumers
        .iter()
        .map(|c| best_match(&c.need, &products, radius, &mut ties, &mut state.rng))
        .collect();

    let mut revenue = vec![0.0f64; products.len()];
    let mut customers = vec![0u32; products.len()];
    let mut transactions = 0;
    let mut exact_matches = 0;
    let mut relative_overlap_sum = 0.0;
    for (consumer, m) in state.consumers.iter_mut().zip(&matches) {
        let gain = match *m {
            Some((j, q)) => {
                let gain = f64::from(q) / kf;
                revenue[j] += gain;
                customers[j] += 1;
                transactions += 1;
                relative_overlap_sum += gain;
                if q == k {
                    exact_matches += 1;
                }
                gain
            }
            None => 0.0,
        };
        consumer.satisfaction = consumer.satisfaction - config.consumer_cost + gain;
    }

    let mut per_producer_customers = BTreeMap::new();
    for ((producer, income), served) in state.producers.iter_mut().zip(&revenue).zip(&customers) {
        producer.capital = producer.capital - config.producer_cost + income;
        producer.customers = *served;
        per_producer_customers.insert(producer.id, *served);
    }

    let mut deaths = 0;
    for consumer in state.consumers.iter_mut() {
        if consumer.satisfaction <= DEATH_TOLERANCE {
            let need = random_string(&mut state.rng, k);
            *consumer = Consumer::new(need, config.initial_satisfaction);
            deaths += 1;
        } else {
            consumer.age += 1;
        }
    }
    let before = state.producers.len();
    state.producers.retain(|p| p.capital >= -DEATH_TOLERANCE);
    let producer_deaths = before - state.producers.len();

    state.t += 1;
    StepStats {
        t: state.t,
        n_producers: state.producers.len(),
        mean_capital: state.mean_capital(),
        mean_satisfaction: state.mean_satisfaction(),
        deaths,
        producer_deaths,
        transactions,
        exact_matches,
        relative_overlap_sum,
        per_producer_customers,
    }
}

/// Hooks called while a run progresses.
pub trait Observer {
    fn initial(&mut self, _state: &MarketState) {}
    fn after_step(&mut self, state: &MarketState, stats: &StepStats);
}

impl<F: FnMut(&MarketState, &StepStats)> Observer for F {
    fn after_step(&mut self, state: &MarketState, stats: &StepStats) {
        self(state, stats)
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    pub initial: MarketState,
    pub stats: Vec<StepStats>,
    pub final_state: MarketState,
}

/// Runs `config.steps` steps from `state`, reporting to `observer`.
pub fn run_from<O: Observer + ?Sized>(
    mut state: MarketState,
    config: &SimConfig,
    observer: &mut O,
) -> MarketState {
    observer.initial(&state);
    for _ in 0..config.steps {
        let stats = step(&mut state, config);
        observer.after_step(&state, &stats);
    }
    state
}

/// Runs a fresh market without keeping per-step records.
pub fn run_observed<O: Observer + ?Sized>(config: &SimConfig, observer: &mut O) -> MarketState {
    run_from(init_market(config), config, observer)
}

pub fn run(config: &SimConfig) -> Trajectory {
    let initial = init_market(config);
    let mut stats = Vec::with_capacity(config.steps as usize);
    let final_state = run_from(
        initial.clone(),
        config,
        &mut |_: &MarketState, s: &StepStats| stats.push(s.clone()),
    );
    Trajectory {
        config: config.clone(),
        initial,
        stats,
        final_state,
    }
}
