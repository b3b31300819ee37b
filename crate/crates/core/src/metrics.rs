//! Ensemble statistics in table form plus analytic spread averages.

use alloc::vec::Vec;

use thiserror::Error;

use crate::engine::RunResult;
use crate::math;
use crate::model::{DealerSpec, MarketParams, TimeGrid};
use crate::quoting::{spread, QuoteContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no runs to aggregate")]
    EmptyEnsemble,
    #[error("runs disagree on the number of dealers")]
    MixedDealerCounts,
}

/// Mark-to-market gain of dealer `i` over the run.
pub fn profit(run: &RunResult, i: usize) -> f64 {
    run.dealers[i].profit
}

/// Continuous-time average of the quoted spread over `[0, T]`:
/// `(2/γ)·ln(1 + γ/c) + γσ²T/2`.
pub fn analytic_average_spread(spec: &DealerSpec, market: &MarketParams, n_dealers: usize) -> f64 {
    let ctx = QuoteContext::new(spec, market, n_dealers, 0, 0.0);
    spread(&ctx) + 0.5 * spec.gamma * market.sigma * market.sigma * market.horizon
}

/// Equal-weight average of the quoted spread over the quoting instants
/// `t_0 .. t_{n-1}`: the continuous average plus `γσ²dt/2`.
pub fn grid_average_spread(spec: &DealerSpec, market: &MarketParams, n_dealers: usize, grid: &TimeGrid) -> f64 {
    let ctx = QuoteContext::new(spec, market, n_dealers, 0, 0.0);
    let mean_tau = grid.horizon - 0.5 * (grid.n_steps as f64 - 1.0) * grid.dt;
    spread(&ctx) + spec.gamma * market.sigma * market.sigma * mean_tau
}

/// Sample mean and unbiased standard deviation, summed in sorted order so the
/// result does not depend on the order runs arrive in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    /// 0 when fewer than two samples.
    pub std: f64,
}

pub fn moments(values: &mut [f64]) -> Moments {
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        let mut dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        dev.sort_by(f64::total_cmp);
        math::sqrt(dev.iter().sum::<f64>() / (n - 1.0))
    };
    Moments { mean, std }
}

/// One table row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DealerStats {
    pub average_spread: f64,
    pub mean_profit: f64,
    pub std_profit: f64,
    pub mean_q_t: f64,
    pub std_q_t: f64,
}

impl DealerStats {
    /// Standard error of the mean profit.
    pub fn profit_standard_error(&self, runs: usize) -> f64 {
        self.std_profit / math::sqrt(runs as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub dealers: Vec<DealerStats>,
    pub runs: usize,
    /// Standard deviations are undefined for a single run and reported as 0.
    pub single_run: bool,
    pub clamped: u64,
}

pub fn ensemble_stats(results: &[RunResult]) -> Result<EnsembleStats, MetricsError> {
    let first = results.first().ok_or(MetricsError::EmptyEnsemble)?;
    let n = first.dealers.len();
    if results.iter().any(|r| r.dealers.len() != n) {
        return Err(MetricsError::MixedDealerCounts);
    }
    let column = |f: &dyn Fn(&RunResult) -> f64| -> Moments {
        let mut v: Vec<f64> = results.iter().map(f).collect();
        moments(&mut v)
    };
    let dealers = (0..n)
        .map(|i| {
            let spread = column(&|r| r.dealers[i].average_spread);
            let profit = column(&|r| r.dealers[i].profit);
            let q = column(&|r| r.dealers[i].q_t as f64);
            DealerStats {
                average_spread: spread.mean,
                mean_profit: profit.mean,
                std_profit: profit.std,
                mean_q_t: q.mean,
                std_q_t: q.std,
            }
        })
        .collect();
    Ok(EnsembleStats {
        dealers,
        runs: results.len(),
        single_run: results.len() == 1,
        clamped: results.iter().map(|r| r.clamped).sum(),
    })
}

/// Ensemble utility of dealer `i` against holding its initial inventory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityComparison {
    pub mean_utility: f64,
    pub standard_error: f64,
    pub inactive: f64,
}

impl UtilityComparison {
    /// How many standard errors the active mean sits above the inactive value.
    pub fn z_score(&self) -> f64 {
        (self.mean_utility - self.inactive) / self.standard_error
    }
}

/// Compares `-exp(-γ(x_T + q_T s_T))` averaged over `results` with the value
/// of never quoting, `-exp(-γ(x_0 + q_0 s_0))·exp(γ²q_0²σ²T/2)`.
pub fn utility_comparison(
    results: &[RunResult],
    i: usize,
    spec: &DealerSpec,
    market: &MarketParams,
) -> Result<UtilityComparison, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyEnsemble);
    }
    let w0 = spec.initial_wealth(market.s0);
    let g = spec.gamma;
    let mut utilities: Vec<f64> = results
        .iter()
        .map(|r| -math::exp(-g * (w0 + r.dealers[i].profit)))
        .collect();
    let m = moments(&mut utilities);
    let q0 = spec.q0 as f64;
    let inactive = -math::exp(-g * w0 + 0.5 * g * g * q0 * q0 * market.sigma * market.sigma * market.horizon);
    Ok(UtilityComparison {
        mean_utility: m.mean,
        standard_error: m.std / math::sqrt(results.len() as f64),
        inactive,
    })
}
