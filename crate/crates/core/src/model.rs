//! Domain types, configuration validation and the quoting time grid.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use thiserror::Error;

use crate::math;

/// Tolerance on `Σ β_i = 1`.
pub const BETA_SUM_TOLERANCE: f64 = 1e-9;

/// Relative tolerance on `n_steps · dt = horizon`.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Global market constants shared by every dealer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    /// Initial mid-price.
    pub s0: f64,
    /// Mid-price volatility per square-root unit of time.
    pub sigma: f64,
    /// Terminal time `T`.
    pub horizon: f64,
    /// Step length between quoting instants.
    pub dt: f64,
    /// Order-flow intensity scale `A`.
    pub a_rate: f64,
    /// Order-flow decay `k` (inverse price units).
    pub k: f64,
}

impl MarketParams {
    /// The baseline market used by every reproduction preset:
    /// `s = 100, σ = 2, T = 1, dt = 0.005, A = 140, k = 1.5`.
    pub const fn baseline() -> Self {
        Self {
            s0: 100.0,
            sigma: 2.0,
            horizon: 1.0,
            dt: 0.005,
            a_rate: 140.0,
            k: 1.5,
        }
    }

    /// Checks the market invariants and returns the derived grid.
    pub fn grid(&self) -> Result<TimeGrid, ConfigError> {
        let finite = [self.s0, self.sigma, self.horizon, self.dt, self.a_rate, self.k]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ConfigError::InvalidMarket("non-finite parameter"));
        }
        if self.sigma < 0.0 {
            return Err(ConfigError::InvalidMarket("sigma must be >= 0"));
        }
        if self.a_rate < 0.0 {
            return Err(ConfigError::InvalidMarket("A must be >= 0"));
        }
        if self.k <= 0.0 {
            return Err(ConfigError::InvalidMarket("k must be > 0"));
        }
        if self.horizon <= 0.0 {
            return Err(ConfigError::BadTimeGrid("horizon must be > 0"));
        }
        if self.dt <= 0.0 || self.dt > self.horizon {
            return Err(ConfigError::BadTimeGrid("dt must lie in (0, horizon]"));
        }
        let steps = math::round(self.horizon / self.dt);
        if steps < 1.0 {
            return Err(ConfigError::BadTimeGrid("fewer than one step"));
        }
        if (steps * self.dt - self.horizon).abs() > GRID_TOLERANCE * self.horizon {
            return Err(ConfigError::BadTimeGrid("horizon is not a multiple of dt"));
        }
        Ok(TimeGrid::new(self.horizon, self.dt, steps as usize))
    }
}

/// Static profile of one dealer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DealerSpec {
    /// Risk aversion `γ_i > 0`.
    pub gamma: f64,
    /// Influence weight `β_i > 0` on market-order flow.
    pub beta: f64,
    /// Initial inventory in shares.
    pub q0: i64,
    /// Initial cash.
    pub x0: f64,
}

impl DealerSpec {
    pub const fn new(gamma: f64, beta: f64) -> Self {
        Self {
            gamma,
            beta,
            q0: 0,
            x0: 0.0,
        }
    }

    pub const fn with_inventory(mut self, q0: i64) -> Self {
        self.q0 = q0;
        self
    }

    pub const fn with_cash(mut self, x0: f64) -> Self {
        self.x0 = x0;
        self
    }

    /// Initial mark-to-market wealth `x0 + q0·s0`.
    pub fn initial_wealth(&self, s0: f64) -> f64 {
        self.x0 + self.q0 as f64 * s0
    }
}

/// Evolving state of one dealer within a run.
///
/// `q == q0 + fills_bid - fills_ask` holds after every mutation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DealerState {
    pub q: i64,
    pub x: f64,
    pub fills_ask: u64,
    pub fills_bid: u64,
}

impl DealerState {
    pub fn from_spec(spec: &DealerSpec) -> Self {
        Self {
            q: spec.q0,
            x: spec.x0,
            fills_ask: 0,
            fills_bid: 0,
        }
    }

    /// The dealer sells one unit at `price`.
    pub fn record_ask_fill(&mut self, price: f64) {
        self.x += price;
        self.q -= 1;
        self.fills_ask += 1;
    }

    /// The dealer buys one unit at `price`.
    pub fn record_bid_fill(&mut self, price: f64) {
        self.x -= price;
        self.q += 1;
        self.fills_bid += 1;
    }

    pub fn mark_to_market(&self, s: f64) -> f64 {
        self.x + self.q as f64 * s
    }
}

/// A dealer's bid and ask offsets from the mid-price.
///
/// Either offset may be negative: a dealer long enough inventory quotes its
/// ask below the mid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotePair {
    /// `mid - bid`.
    pub delta_b: f64,
    /// `ask - mid`.
    pub delta_a: f64,
}

impl QuotePair {
    pub const fn new(delta_b: f64, delta_a: f64) -> Self {
        Self { delta_b, delta_a }
    }

    pub fn spread(&self) -> f64 {
        self.delta_b + self.delta_a
    }

    pub fn bid_price(&self, mid: f64) -> f64 {
        mid - self.delta_b
    }

    pub fn ask_price(&self, mid: f64) -> f64 {
        mid + self.delta_a
    }
}

/// Optional switches carried alongside a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimFlags {
    /// Accept dealer weights that do not sum to one.
    pub beta_sum_override: bool,
    /// Emit a per-step trace for the first replication.
    pub trace: bool,
    /// Use the `(k + 1 - 1/N)·β` bracket denominator (without `+γ`) in the
    /// multi-period value ladder. Comparison only.
    pub alt_denominator: bool,
}

/// A full simulation request.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub market: MarketParams,
    pub dealers: Vec<DealerSpec>,
    pub runs: usize,
    pub seed: u64,
    pub flags: SimFlags,
}

impl SimConfig {
    pub fn new(market: MarketParams, dealers: Vec<DealerSpec>) -> Self {
        Self {
            market,
            dealers,
            runs: 1,
            seed: 0,
            flags: SimFlags::default(),
        }
    }

    /// `n` identical dealers with risk aversion `gamma` and `β_i = 1/n`.
    pub fn symmetric(market: MarketParams, n: usize, gamma: f64) -> Self {
        let beta = 1.0 / n as f64;
        Self::new(market, (0..n).map(|_| DealerSpec::new(gamma, beta)).collect())
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.runs = runs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn n_dealers(&self) -> usize {
        self.dealers.len()
    }
}

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("dealer {dealer}: gamma must be > 0 (got {gamma})")]
    NonPositiveGamma { dealer: usize, gamma: f64 },
    #[error("dealer {dealer}: beta must be > 0 (got {beta})")]
    NonPositiveBeta { dealer: usize, beta: f64 },
    #[error("dealer weights sum to {sum}, expected 1")]
    BetaSumViolation { sum: f64 },
    #[error("bad time grid: {0}")]
    BadTimeGrid(&'static str),
    #[error("invalid market: {0}")]
    InvalidMarket(&'static str),
    #[error("dealer list is empty")]
    EmptyDealerList,
    #[error("runs must be >= 1")]
    ZeroRuns,
}

/// Every invariant a configuration violated.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ConfigError>);

impl ValidationErrors {
    pub fn errors(&self) -> &[ConfigError] {
        &self.0
    }

    pub fn contains(&self, pred: impl Fn(&ConfigError) -> bool) -> bool {
        self.0.iter().any(pred)
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl core::error::Error for ValidationErrors {}

/// A configuration that passed [`validate`], together with its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidConfig {
    config: SimConfig,
    grid: TimeGrid,
}

impl ValidConfig {
    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    pub fn into_inner(self) -> SimConfig {
        self.config
    }
}

impl Deref for ValidConfig {
    type Target = SimConfig;

    fn deref(&self) -> &SimConfig {
        &self.config
    }
}

/// Checks every invariant of `config`, collecting all violations.
pub fn validate(config: SimConfig) -> Result<ValidConfig, ValidationErrors> {
    let mut errors = Vec::new();

    let grid = match config.market.grid() {
        Ok(g) => Some(g),
        Err(e) => {
            errors.push(e);
            None
        }
    };

    if config.dealers.is_empty() {
        errors.push(ConfigError::EmptyDealerList);
    }
    for (i, d) in config.dealers.iter().enumerate() {
        if !(d.gamma > 0.0 && d.gamma.is_finite()) {
            errors.push(ConfigError::NonPositiveGamma {
                dealer: i,
                gamma: d.gamma,
            });
        }
        if !(d.beta > 0.0 && d.beta.is_finite()) {
            errors.push(ConfigError::NonPositiveBeta {
                dealer: i,
                beta: d.beta,
            });
        }
    }
    if !config.dealers.is_empty() && !config.flags.beta_sum_override {
        let sum: f64 = config.dealers.iter().map(|d| d.beta).sum();
        if (sum - 1.0).abs() > BETA_SUM_TOLERANCE {
            errors.push(ConfigError::BetaSumViolation { sum });
        }
    }
    if config.runs == 0 {
        errors.push(ConfigError::ZeroRuns);
    }

    match grid {
        Some(grid) if errors.is_empty() => Ok(ValidConfig { config, grid }),
        _ => Err(ValidationErrors(errors)),
    }
}

/// Uniform quoting grid `t_l = l·dt`, `l = 0 .. n_steps`.
///
/// Quotes are set at `t_0 .. t_{n-1}`; nothing is quoted at `t_n = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub const fn new(horizon: f64, dt: f64, n_steps: usize) -> Self {
        Self {
            horizon,
            dt,
            n_steps,
        }
    }

    pub fn time(&self, l: usize) -> f64 {
        l as f64 * self.dt
    }

    /// Time remaining `T - t_l`.
    pub fn remaining(&self, l: usize) -> f64 {
        self.horizon - self.time(l)
    }

    /// `Δt_l = t_{l+1} - t_l`.
    pub fn step_len(&self, _l: usize) -> f64 {
        self.dt
    }

    pub fn quoting_times(&self) -> Vec<f64> {
        (0..self.n_steps).map(|l| self.time(l)).collect()
    }

    /// The same grid restricted to its last `n` quoting steps, re-based so
    /// that the horizon becomes `n·dt`. Remaining times are unchanged.
    pub fn tail(&self, n: usize) -> Self {
        Self::new(n as f64 * self.dt, self.dt, n)
    }
}

/// Quoting instants of a market's grid.
pub fn time_grid(market: &MarketParams) -> Result<Vec<f64>, ConfigError> {
    Ok(market.grid()?.quoting_times())
}
