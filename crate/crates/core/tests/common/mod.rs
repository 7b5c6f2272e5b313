//! Independent recount of one market step, shared by the test targets.

use rand::Rng;

use hypermarket::{BitString, MarketState, SimConfig, StepStats};

/// Position-by-position count of equal bits.
pub fn naive_overlap(a: &BitString, b: &BitString) -> u32 {
    (0..a.len()).filter(|&i| a.bit(i) == b.bit(i)).count() as u32
}

/// For every consumer, the best overlap over all live producers if it passes
/// theta.
pub fn true_best(state: &MarketState, config: &SimConfig) -> Vec<Option<u32>> {
    state
        .consumers
        .iter()
        .map(|c| {
            let best = state
                .producers
                .iter()
                .map(|p| naive_overlap(&c.need, &p.product))
                .max()?;
            (f64::from(best) / f64::from(config.k) >= config.theta - 1e-12).then_some(best)
        })
        .collect()
}

/// Replays the documented draw contract on a copy of the pre-step stream:
/// consumers in index order, one uniform index draw over the tied producers
/// (in list order) only when more than one shares the best overlap.
pub fn replay_assignment(state: &MarketState, config: &SimConfig) -> Vec<Option<(usize, u32)>> {
    let mut rng = state.rng.clone();
    let best = true_best(state, config);
    state
        .consumers
        .iter()
        .zip(&best)
        .map(|(c, q)| {
            let q = (*q)?;
            let tied: Vec<usize> = (0..state.producers.len())
                .filter(|&j| naive_overlap(&c.need, &state.producers[j].product) == q)
                .collect();
            let pick = if tied.len() > 1 {
                tied[rng.random_range(0..tied.len())]
            } else {
                tied[0]
            };
            Some((pick, q))
        })
        .collect()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

/// Checks `after`/`stats` against a recount from `before`. Money is
/// compared to 1e-9.
pub fn check_step(
    before: &MarketState,
    after: &MarketState,
    stats: &StepStats,
    config: &SimConfig,
) -> Result<(), String> {
    let k = f64::from(config.k);
    let t = after.t;
    let assignment = replay_assignment(before, config);

    let transactions = assignment.iter().flatten().count();
    ensure!(
        stats.transactions == transactions,
        "t={t}: {} transactions, recount {transactions}",
        stats.transactions
    );
    let exact = assignment
        .iter()
        .flatten()
        .filter(|m| m.1 == config.k)
        .count();
    ensure!(
        stats.exact_matches == exact,
        "t={t}: {} exact matches, recount {exact}",
        stats.exact_matches
    );
    ensure!(
        after.consumers.len() == config.n_consumers,
        "t={t}: consumer count changed"
    );

    let mut deaths = 0;
    for (i, (old, new)) in before.consumers.iter().zip(&after.consumers).enumerate() {
        let gain = assignment[i].map_or(0.0, |(_, q)| f64::from(q) / k);
        let updated = old.satisfaction - config.consumer_cost + gain;
        if updated > 1e-9 {
            ensure!(
                (new.satisfaction - updated).abs() <= 1e-9,
                "t={t}: consumer {i} S={} expected {updated}",
                new.satisfaction
            );
            ensure!(
                new.need == old.need && new.age == old.age + 1,
                "t={t}: consumer {i} changed identity"
            );
        } else {
            deaths += 1;
            ensure!(
                new.satisfaction == config.initial_satisfaction && new.age == 0,
                "t={t}: consumer {i} not reborn"
            );
        }
    }
    ensure!(
        stats.deaths == deaths,
        "t={t}: {} deaths, recount {deaths}",
        stats.deaths
    );

    let mut removed = 0;
    for (j, old) in before.producers.iter().enumerate() {
        let served: Vec<u32> = assignment
            .iter()
            .flatten()
            .filter(|m| m.0 == j)
            .map(|m| m.1)
            .collect();
        let count = stats
            .per_producer_customers
            .get(&old.id)
            .copied()
            .unwrap_or(0);
        ensure!(
            count as usize == served.len(),
            "t={t}: producer {} served {count}, recount {}",
            old.id,
            served.len()
        );
        let revenue: f64 = served.iter().map(|&q| f64::from(q) / k).sum();
        let expected = old.capital - config.producer_cost + revenue;
        match after.producers.iter().find(|p| p.id == old.id) {
            Some(p) => {
                ensure!(
                    (p.capital - expected).abs() <= 1e-9,
                    "t={t}: producer {} C={} expected {expected}",
                    p.id,
                    p.capital
                );
                ensure!(
                    p.customers as usize == served.len(),
                    "t={t}: producer {} customers",
                    p.id
                );
                ensure!(
                    p.product == old.product,
                    "t={t}: producer {} product changed",
                    p.id
                );
            }
            None => {
                removed += 1;
                ensure!(
                    expected < 0.0,
                    "t={t}: producer {} removed at C={expected}",
                    old.id
                );
            }
        }
    }
    ensure!(
        after.producers.len() + removed == before.producers.len(),
        "t={t}: producers appeared"
    );
    ensure!(
        stats.producer_deaths == removed,
        "t={t}: producer deaths {}",
        stats.producer_deaths
    );
    ensure!(
        stats.n_producers == after.producers.len(),
        "t={t}: producer count"
    );
    Ok(())
}
