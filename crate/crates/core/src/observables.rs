//! Measurements on market snapshots and the closed-form estimates they are
//! compared against.

use std::collections::HashMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitstring::{basin_radius, basin_size, random_string, BitString};
use crate::engine::{run_observed, Observer, SimConfig, StepStats};
use crate::error::{Error, Result};
use crate::population::{Consumer, MarketState, ProducerId};

/// Fraction of condensed consumers implied by the mean satisfaction, taking
/// condensed consumers at `initial_satisfaction` and starving ones at half
/// of it. Not clamped.
pub fn condensed_fraction(mean_satisfaction: f64, initial_satisfaction: f64) -> f64 {
    let half = initial_satisfaction / 2.0;
    (mean_satisfaction - half) / half
}

/// Fraction of consumers sitting exactly on a live producer's product.
pub fn exact_match_fraction(state: &MarketState) -> f64 {
    if state.consumers.is_empty() {
        return 0.0;
    }
    let products: std::collections::HashSet<BitString> =
        state.producers.iter().map(|p| p.product).collect();
    let hits = state
        .consumers
        .iter()
        .filter(|c| products.contains(&c.need))
        .count();
    hits as f64 / state.consumers.len() as f64
}

fn check_lengths(strings: &[BitString], k: u32) -> Result<()> {
    match strings.iter().find(|s| s.len() != k) {
        Some(s) => Err(Error::LengthMismatch {
            left: k,
            right: s.len(),
        }),
        None => Ok(()),
    }
}

/// Pair counts by overlap: `h[v]` is the number of unordered pairs whose
/// overlap is `v`. Fewer than two strings give an all-zero histogram.
pub fn overlap_histogram(strings: &[BitString], k: u32) -> Result<Vec<u64>> {
    check_lengths(strings, k)?;
    let mut multiplicity: HashMap<BitString, u64> = HashMap::new();
    for s in strings {
        *multiplicity.entry(*s).or_default() += 1;
    }
    let mut distinct: Vec<(BitString, u64)> = multiplicity.into_iter().collect();
    distinct.sort_unstable();

    let mut h = vec![0u64; k as usize + 1];
    for (i, (a, na)) in distinct.iter().enumerate() {
        h[k as usize] += na * (na - 1) / 2;
        for (b, nb) in &distinct[i + 1..] {
            let q = k - a.distance_unchecked(b);
            h[q as usize] += na * nb;
        }
    }
    Ok(h)
}

/// Pair counts by Hamming distance; the mirror image of
/// [`overlap_histogram`].
pub fn distance_histogram(strings: &[BitString], k: u32) -> Result<Vec<u64>> {
    let mut h = overlap_histogram(strings, k)?;
    h.reverse();
    Ok(h)
}

/// `h[k] / h[k/2]` for an overlap histogram with `k + 1` bins.
///
/// `None` when the middle bin is empty or `k` is odd.
pub fn order_ratio(h: &[u64]) -> Option<f64> {
    let k = h.len().checked_sub(1)?;
    if k % 2 != 0 || h[k / 2] == 0 {
        return None;
    }
    Some(h[k] as f64 / h[k / 2] as f64)
}

/// Largest number of producers the consumers can sustain when spread
/// uniformly: `n_consumers * mean_relative_overlap / producer_cost`.
pub fn producer_capacity_bound(
    n_consumers: usize,
    producer_cost: f64,
    mean_relative_overlap: f64,
) -> Result<f64> {
    if producer_cost == 0.0 {
        return Err(Error::InfiniteBound);
    }
    Ok(n_consumers as f64 * mean_relative_overlap / producer_cost)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Niche,
    Competition,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Niche => "niche",
            Regime::Competition => "competition",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeEstimate {
    pub regime: Regime,
    pub basin_size: u128,
    /// Total basin volume of all producers over the size of the hypercube.
    pub coverage: f64,
}

pub fn regime_estimate(k: u32, theta: f64, n_producers: usize) -> RegimeEstimate {
    let basin = basin_size(k, theta);
    let covered = basin * n_producers as u128;
    let cube = 1u128 << k;
    RegimeEstimate {
        regime: if covered > cube {
            Regime::Competition
        } else {
            Regime::Niche
        },
        basin_size: basin,
        coverage: covered as f64 / cube as f64,
    }
}

/// Consumers whose need lies within `radius` of `center`.
pub fn basin_occupancy(consumers: &[Consumer], center: &BitString, radius: u32) -> Result<usize> {
    if radius > center.len() {
        return Err(Error::RadiusOutOfRange {
            radius,
            k: center.len(),
        });
    }
    let mut count = 0;
    for c in consumers {
        if c.need.hamming(center)? <= radius {
            count += 1;
        }
    }
    Ok(count)
}

/// Steps a consumer at Hamming distance `d` from its only producer survives,
/// in the continuous approximation `S_0 / (cost - gain)`. Infinite when the
/// gain covers the living cost.
pub fn expected_lifetime(
    d: u32,
    consumer_cost: f64,
    theta: f64,
    k: u32,
    initial_satisfaction: f64,
) -> f64 {
    let gain = if d <= basin_radius(k, theta) {
        f64::from(k - d) / f64::from(k)
    } else {
        0.0
    };
    let net = consumer_cost - gain;
    if net <= 0.0 {
        f64::INFINITY
    } else {
        initial_satisfaction / net
    }
}

/// Records the consumers' pair-overlap histogram every `stride` steps
/// (and at `t = 0`).
#[derive(Debug, Clone)]
pub struct HistogramRecorder {
    pub stride: u64,
    pub records: Vec<(u64, Vec<u64>)>,
}

impl HistogramRecorder {
    pub fn new(stride: u64) -> Self {
        assert!(stride > 0, "stride must be positive");
        HistogramRecorder {
            stride,
            records: Vec::new(),
        }
    }

    fn record(&mut self, state: &MarketState) {
        if state.t.is_multiple_of(self.stride) {
            let k = state.consumers.first().map_or(1, |c| c.need.len());
            let h = overlap_histogram(&state.needs(), k).expect("consumers share k");
            self.records.push((state.t, h));
        }
    }
}

impl Observer for HistogramRecorder {
    fn initial(&mut self, state: &MarketState) {
        self.record(state);
    }

    fn after_step(&mut self, state: &MarketState, _stats: &StepStats) {
        self.record(state);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterKind {
    /// Product of a producer still alive at the end of the run.
    Survivor(ProducerId),
    /// Uniformly drawn reference site.
    Control(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Center {
    pub kind: CenterKind,
    pub site: BitString,
}

impl Center {
    pub fn label(&self) -> String {
        match self.kind {
            CenterKind::Survivor(id) => format!("P{id}"),
            CenterKind::Control(i) => format!("R{i}"),
        }
    }
}

/// Counts consumers around fixed centers after every step.
#[derive(Debug, Clone)]
pub struct OccupancyTracker {
    pub centers: Vec<Center>,
    pub radius: u32,
    /// `counts[t][c]`: occupancy of center `c` at step `t`, starting at 0.
    pub counts: Vec<Vec<usize>>,
}

impl OccupancyTracker {
    pub fn new(centers: Vec<Center>, radius: u32) -> Self {
        OccupancyTracker {
            centers,
            radius,
            counts: Vec::new(),
        }
    }

    fn record(&mut self, state: &MarketState) {
        let row = self
            .centers
            .iter()
            .map(|c| {
                basin_occupancy(&state.consumers, &c.site, self.radius)
                    .expect("centers share the market's k")
            })
            .collect();
        self.counts.push(row);
    }

    /// Occupancy time series of one center.
    pub fn series(&self, center: usize) -> Vec<usize> {
        self.counts.iter().map(|row| row[center]).collect()
    }
}

impl Observer for OccupancyTracker {
    fn initial(&mut self, state: &MarketState) {
        self.record(state);
    }

    fn after_step(&mut self, state: &MarketState, _stats: &StepStats) {
        self.record(state);
    }
}

/// Mixed into the run seed to draw control sites from their own stream.
const CONTROL_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Follows the basins of the producers that end up surviving, from the very
/// first step.
///
/// The run is played once to find the `n_survivors` richest survivors (ties
/// broken by id), then replayed with the same seed while counting consumers
/// within `radius` of their products and of `n_controls` random sites.
/// Control sites come from a separate stream, so the replay is unchanged.
pub fn track_survivor_basins(
    config: &SimConfig,
    n_survivors: usize,
    n_controls: usize,
    radius: u32,
) -> Result<OccupancyTracker> {
    if radius > config.k {
        return Err(Error::RadiusOutOfRange {
            radius,
            k: config.k,
        });
    }
    let final_state = run_observed(config, &mut |_: &MarketState, _: &StepStats| {});
    let mut survivors = final_state.producers.clone();
    survivors.sort_by(|a, b| b.capital.total_cmp(&a.capital).then(a.id.cmp(&b.id)));
    let mut centers: Vec<Center> = survivors
        .iter()
        .take(n_survivors)
        .map(|p| Center {
            kind: CenterKind::Survivor(p.id),
            site: p.product,
        })
        .collect();
    let mut control_rng = ChaCha8Rng::seed_from_u64(config.seed ^ CONTROL_STREAM);
    centers.extend((0..n_controls).map(|i| Center {
        kind: CenterKind::Control(i),
        site: random_string(&mut control_rng, config.k),
    }));

    let mut tracker = OccupancyTracker::new(centers, radius);
    run_observed(config, &mut tracker);
    Ok(tracker)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstring::{binomial, enumerate_ball};
    use crate::population::seeded_rng;

    fn s(text: &str) -> BitString {
        text.parse().unwrap()
    }

    #[test]
    fn condensed_fraction_examples() {
        assert_eq!(condensed_fraction(5.0, 5.0), 1.0);
        assert_eq!(condensed_fraction(2.5, 5.0), 0.0);
        assert_eq!(condensed_fraction(3.75, 5.0), 0.5);
        assert!(condensed_fraction(2.0, 5.0) < 0.0);
    }

    #[test]
    fn overlap_histogram_examples() {
        let same = vec![s("0101010101"); 3];
        let h = overlap_histogram(&same, 10).unwrap();
        assert_eq!(h[10], 3);
        assert_eq!(h.iter().sum::<u64>(), 3);

        let mixed = [s("0000000000"), s("1111111111"), s("0000000000")];
        let h = overlap_histogram(&mixed, 10).unwrap();
        assert_eq!((h[10], h[0]), (1, 2));
        assert_eq!(h.iter().sum::<u64>(), 3);

        assert_eq!(overlap_histogram(&mixed[..1], 10).unwrap(), vec![0; 11]);
        assert!(overlap_histogram(&mixed, 9).is_err());
    }

    #[test]
    fn random_pairs_follow_binomial() {
        let mut rng = seeded_rng(11);
        let strings: Vec<_> = (0..1000).map(|_| random_string(&mut rng, 10)).collect();
        let h = overlap_histogram(&strings, 10).unwrap();
        let total: u64 = h.iter().sum();
        assert_eq!(total, 1000 * 999 / 2);
        let p5 = h[5] as f64 / total as f64;
        let expected = binomial(10, 5) as f64 / 1024.0;
        assert!((p5 - expected).abs() <= 0.01, "{p5} vs {expected}");

        let d = distance_histogram(&strings, 10).unwrap();
        let near = d[4..=6].iter().sum::<u64>() as f64 / total as f64;
        assert!(near > 0.6, "mass near d=5: {near}");
    }

    #[test]
    fn complementary_pair_distance() {
        let a = s("1100101001");
        let d = distance_histogram(&[a, a.complement()], 10).unwrap();
        assert_eq!(d[10], 1);
        assert_eq!(d.iter().sum::<u64>(), 1);
    }

    #[test]
    fn order_ratio_examples() {
        let mut h = vec![0u64; 11];
        h[10] = 2;
        h[5] = 10;
        assert_eq!(order_ratio(&h), Some(0.2));
        h[5] = 0;
        assert_eq!(order_ratio(&h), None);
        assert_eq!(order_ratio(&[1, 2, 3, 4]), None);
        assert_eq!(order_ratio(&[]), None);
    }

    #[test]
    fn capacity_bound_examples() {
        assert_eq!(producer_capacity_bound(1000, 4.5, 0.9).unwrap(), 200.0);
        assert_eq!(producer_capacity_bound(1000, 10.0, 1.0).unwrap(), 100.0);
        assert_eq!(producer_capacity_bound(0, 4.5, 0.9).unwrap(), 0.0);
        assert!(matches!(
            producer_capacity_bound(1000, 0.0, 0.9),
            Err(Error::InfiniteBound)
        ));
    }

    #[test]
    fn regime_examples() {
        let e = regime_estimate(10, 0.9, 30);
        assert_eq!(e.regime, Regime::Niche);
        assert!((e.coverage - 330.0 / 1024.0).abs() < 1e-12);
        let e = regime_estimate(10, 0.8, 30);
        assert_eq!(e.regime, Regime::Competition);
        assert!((e.coverage - 1680.0 / 1024.0).abs() < 1e-12);
        let e = regime_estimate(10, 1.0, 1);
        assert_eq!(e.regime, Regime::Niche);
        assert_eq!(e.coverage, 1.0 / 1024.0);
        // exactly covering the cube is still a niche
        assert_eq!(regime_estimate(4, 1.0, 16).regime, Regime::Niche);
    }

    #[test]
    fn occupancy_examples() {
        let center = s("1011011100");
        let at_center: Vec<_> = (0..7).map(|_| Consumer::new(center, 5.0)).collect();
        assert_eq!(basin_occupancy(&at_center, &center, 0).unwrap(), 7);

        let mut rng = seeded_rng(8);
        let random: Vec<_> = (0..1000)
            .map(|_| Consumer::new(random_string(&mut rng, 10), 5.0))
            .collect();
        assert_eq!(basin_occupancy(&random, &center, 10).unwrap(), 1000);
        let n = basin_occupancy(&random, &center, 2).unwrap();
        assert!((40..=70).contains(&n), "occupancy {n}");
        assert!(basin_occupancy(&random, &center, 11).is_err());
    }

    #[test]
    fn occupancy_matches_ball_enumeration() {
        let mut rng = seeded_rng(21);
        for k in [3u32, 7, 12] {
            let consumers: Vec<_> = (0..300)
                .map(|_| Consumer::new(random_string(&mut rng, k), 1.0))
                .collect();
            let center = random_string(&mut rng, k);
            for r in 0..=k {
                let ball: std::collections::HashSet<_> =
                    enumerate_ball(&center, r).unwrap().into_iter().collect();
                let direct = consumers.iter().filter(|c| ball.contains(&c.need)).count();
                assert_eq!(basin_occupancy(&consumers, &center, r).unwrap(), direct);
            }
        }
    }

    #[test]
    fn lifetime_examples() {
        assert!(expected_lifetime(0, 1.0, 1.0, 10, 5.0).is_infinite());
        assert!(expected_lifetime(0, 1.0, 0.8, 10, 5.0).is_infinite());
        assert!((expected_lifetime(1, 1.0, 0.8, 10, 5.0) - 50.0).abs() < 1e-9);
        assert!((expected_lifetime(2, 1.0, 0.8, 10, 5.0) - 25.0).abs() < 1e-9);
        assert_eq!(expected_lifetime(5, 1.0, 0.8, 10, 5.0), 5.0);
        assert_eq!(expected_lifetime(3, 1.0, 0.8, 10, 5.0), 5.0);
        assert!(expected_lifetime(1, 0.9, 0.9, 10, 5.0).is_infinite());
    }

    #[test]
    fn exact_matches_counted_against_live_products() {
        use crate::population::Producer;
        let consumers = vec![
            Consumer::new(s("1111"), 1.0),
            Consumer::new(s("1110"), 1.0),
            Consumer::new(s("0000"), 1.0),
            Consumer::new(s("1111"), 1.0),
        ];
        let producers = vec![Producer::new(0, s("1111"), 1.0)];
        let state = MarketState::from_parts(consumers, producers, 0);
        assert_eq!(exact_match_fraction(&state), 0.5);
    }

    #[test]
    fn histogram_stride() {
        let config = SimConfig {
            steps: 250,
            n_consumers: 50,
            ..SimConfig::default()
        };
        let mut recorder = HistogramRecorder::new(100);
        run_observed(&config, &mut recorder);
        let ts: Vec<_> = recorder.records.iter().map(|r| r.0).collect();
        assert_eq!(ts, vec![0, 100, 200]);
        assert!(recorder
            .records
            .iter()
            .all(|(_, h)| h.iter().sum::<u64>() == 50 * 49 / 2));
    }

    #[test]
    fn tracked_basins_start_from_initial_state() {
        let config = SimConfig {
            steps: 50,
            ..SimConfig::default()
        };
        let tracker = track_survivor_basins(&config, 2, 2, 2).unwrap();
        assert_eq!(tracker.counts.len(), 51);
        assert_eq!(tracker.centers.len(), 4);
        let initial = crate::population::init_market(&config);
        for (i, c) in tracker.centers.iter().enumerate() {
            let n = basin_occupancy(&initial.consumers, &c.site, 2).unwrap();
            assert_eq!(tracker.counts[0][i], n);
        }
        assert!(matches!(tracker.centers[0].kind, CenterKind::Survivor(_)));
        assert_eq!(tracker.centers[3].label(), "R1");
    }
}
