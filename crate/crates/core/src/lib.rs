//! Producer/consumer co-evolution on the k-bit hypercube.
//!
//! Consumers carry a need string and a satisfaction level, producers a
//! product string and a capital. Each step consumers buy from the producer
//! whose product overlaps their need the most, provided the relative overlap
//! clears a threshold. Starving consumers are replaced by newcomers with
//! random needs; bankrupt producers disappear. Over time consumers condense
//! onto surviving products and the market settles into a niche or a
//! competition regime.
//!
//! Modules, bottom up:
//! - [`bitstring`]: packed strings, overlaps, basin combinatorics.
//! - [`population`]: consumers, producers and the market state.
//! - [`engine`]: one step of the dynamics and the run driver.
//! - [`observables`]: histograms, condensation, analytic bounds, lifetimes.
//! - [`ensemble`]: multi-seed averages and parameter sweeps.
//! - [`cli`]: config files and CSV/JSON outputs.

pub mod bitstring;
pub mod cli;
pub mod engine;
pub mod ensemble;
pub mod error;
pub mod observables;
pub mod population;

pub use bitstring::BitString;
pub use engine::{run, step, SimConfig, StepStats, Trajectory};
pub use error::{Error, Result};
pub use population::{init_market, Consumer, MarketState, Producer};
