//! Competitive market-making under inventory risk.
//!
//! N dealers quote bid/ask offsets around a driftless mid-price. Order flow
//! reaching each dealer is Poisson with an intensity that depends on every
//! dealer's quotes, and each dealer maximizes exponential utility of terminal
//! wealth. This crate carries the pure numerical side of that model:
//!
//! - [`model`]: parameters, validation and the quoting time grid.
//! - [`orderflow`]: aggregate and per-dealer arrival intensities.
//! - [`quoting`]: reservation prices, frozen-inventory value and optimal quotes.
//! - [`ladder`]: the discrete period-by-period value ladder, its h-factor
//!   corrections, a brute-force best-response oracle and a small exact DP.
//! - [`engine`]: seeded fixed-grid Monte Carlo of competing dealers.
//! - [`metrics`]: ensemble statistics in the layout of the reproduction tables.
//!
//! The crate is `no_std` (with `alloc`). All transcendental functions go
//! through `libm` so results are identical with and without the `std` feature.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod engine;
pub mod ladder;
pub mod metrics;
pub mod model;
pub mod orderflow;
pub mod quoting;

mod math;

pub use engine::{simulate_ensemble, simulate_run, replication_seed, RunResult, StepTrace};
pub use metrics::{ensemble_stats, DealerStats, EnsembleStats};
pub use model::{
    validate, DealerSpec, DealerState, MarketParams, QuotePair, SimConfig, SimFlags, TimeGrid,
    ValidConfig,
};
pub use quoting::QuoteContext;
