//! Agent containers and the market state they form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitstring::{random_string, BitString};
use crate::engine::SimConfig;

/// The random stream driving one run.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Consumer {
    pub need: BitString,
    pub satisfaction: f64,
    /// Steps survived since the consumer was (re)born.
    pub age: u64,
}

impl Consumer {
    pub fn new(need: BitString, satisfaction: f64) -> Self {
        Consumer {
            need,
            satisfaction,
            age: 0,
        }
    }
}

pub type ProducerId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Producer {
    /// Stable identity assigned at initialization, kept after others die.
    pub id: ProducerId,
    pub product: BitString,
    pub capital: f64,
    /// Customers served during the most recent step.
    pub customers: u32,
}

impl Producer {
    pub fn new(id: ProducerId, product: BitString, capital: f64) -> Self {
        Producer {
            id,
            product,
            capital,
            customers: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    pub consumers: Vec<Consumer>,
    /// Live producers in id order. Dead producers are removed.
    pub producers: Vec<Producer>,
    pub t: u64,
    pub rng: SimRng,
}

impl MarketState {
    /// Assembles a market from explicit agents. Producers are sorted by id.
    pub fn from_parts(consumers: Vec<Consumer>, mut producers: Vec<Producer>, seed: u64) -> Self {
        producers.sort_by_key(|p| p.id);
        MarketState {
            consumers,
            producers,
            t: 0,
            rng: seeded_rng(seed),
        }
    }

    pub fn producer(&self, id: ProducerId) -> Option<&Producer> {
        self.producers
            .binary_search_by_key(&id, |p| p.id)
            .ok()
            .map(|i| &self.producers[i])
    }

    pub fn needs(&self) -> Vec<BitString> {
        self.consumers.iter().map(|c| c.need).collect()
    }

    pub fn products(&self) -> Vec<BitString> {
        self.producers.iter().map(|p| p.product).collect()
    }

    pub fn mean_satisfaction(&self) -> f64 {
        mean(self.consumers.iter().map(|c| c.satisfaction))
    }

    /// Mean capital of live producers, 0 when none are left.
    pub fn mean_capital(&self) -> f64 {
        mean(self.producers.iter().map(|p| p.capital))
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        0.0
    } else {
        values.sum::<f64>() / n as f64
    }
}

/// Builds the initial market for `config`.
///
/// Draw order: every producer string in index order, then every consumer
/// string in index order.
pub fn init_market(config: &SimConfig) -> MarketState {
    let mut rng = seeded_rng(config.seed);
    let producers = (0..config.n_producers)
        .map(|i| {
            let product = random_string(&mut rng, config.k);
            Producer::new(i as ProducerId, product, config.producer_capital)
        })
        .collect();
    let consumers = (0..config.n_consumers)
        .map(|_| {
            Consumer::new(
                random_string(&mut rng, config.k),
                config.initial_satisfaction,
            )
        })
        .collect();
    MarketState {
        consumers,
        producers,
        t: 0,
        rng,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_endowments() {
        let config = SimConfig {
            n_producers: 30,
            n_consumers: 1000,
            ..SimConfig::default()
        };
        let state = init_market(&config);
        assert_eq!(state.producers.len(), 30);
        assert_eq!(state.consumers.len(), 1000);
        assert!(state.producers.iter().all(|p| p.capital == 200.0));
        assert!(state.consumers.iter().all(|c| c.satisfaction == 5.0));
        assert!(state.consumers.iter().all(|c| c.need.len() == 10));
        assert_eq!(state.t, 0);
        let ids: Vec<_> = state.producers.iter().map(|p| p.id).collect();
        assert_eq!(ids, (0..30).collect::<Vec<_>>());
    }

    #[test]
    fn empty_producer_set_is_valid() {
        let config = SimConfig {
            n_producers: 0,
            ..SimConfig::default()
        };
        let state = init_market(&config);
        assert!(state.producers.is_empty());
        assert_eq!(state.mean_capital(), 0.0);
    }

    #[test]
    fn same_seed_same_market() {
        let config = SimConfig::default();
        assert_eq!(init_market(&config), init_market(&config));
        let other = SimConfig {
            seed: 1,
            ..config.clone()
        };
        assert_ne!(
            init_market(&config).consumers,
            init_market(&other).consumers
        );
    }

    #[test]
    fn producers_are_drawn_before_consumers() {
        let config = SimConfig {
            n_producers: 3,
            n_consumers: 4,
            seed: 99,
            ..SimConfig::default()
        };
        let state = init_market(&config);
        let mut rng = seeded_rng(99);
        let draws: Vec<_> = (0..7).map(|_| random_string(&mut rng, 10)).collect();
        assert_eq!(state.products(), draws[..3]);
        assert_eq!(state.needs(), draws[3..]);
    }

    #[test]
    fn lookup_by_id() {
        let p = |id| Producer::new(id, BitString::zeros(4).unwrap(), 1.0);
        let state = MarketState::from_parts(vec![], vec![p(7), p(2), p(5)], 0);
        assert_eq!(state.producer(5).map(|x| x.id), Some(5));
        assert!(state.producer(3).is_none());
        assert_eq!(state.producers[0].id, 2);
    }
}
