//! Reservation prices, frozen-inventory value and the optimal competitive quotes.
//!
//! With `c = (k + 1 - 1/N)·β` (the elasticity of a dealer's own fill rate to
//! its own offset) and `H = γσ²(T - t)/2`, a dealer holding `q` quotes
//!
//! ```text
//! δ^b = (1/γ)·ln(1 + γ/c) + H·(2q + 1)
//! δ^a = (1/γ)·ln(1 + γ/c) + H·(1 - 2q)
//! ```
//!
//! Its spread `2·(1/γ)·ln(1 + γ/c) + γσ²(T - t)` does not depend on inventory;
//! inventory only shifts both quotes by `-2qγσ²(T - t)`.

use crate::math;
use crate::model::{DealerSpec, MarketParams, QuotePair};

/// Everything a single dealer needs to price at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuoteContext {
    /// Current inventory.
    pub q: i64,
    pub gamma: f64,
    pub beta: f64,
    pub k: f64,
    pub n_dealers: usize,
    pub sigma: f64,
    /// Time remaining `T - t`.
    pub tau: f64,
}

impl QuoteContext {
    pub fn new(spec: &DealerSpec, market: &MarketParams, n_dealers: usize, q: i64, tau: f64) -> Self {
        Self {
            q,
            gamma: spec.gamma,
            beta: spec.beta,
            k: market.k,
            n_dealers,
            sigma: market.sigma,
            tau,
        }
    }

    pub fn with_inventory(self, q: i64) -> Self {
        Self { q, ..self }
    }

    pub fn with_tau(self, tau: f64) -> Self {
        Self { tau, ..self }
    }

    /// `(k + 1 - 1/N)·β`.
    pub fn elasticity(&self) -> f64 {
        own_elasticity(self.k, self.n_dealers, self.beta)
    }

    /// `(1/γ)·ln(1 + γ/c)`: the inventory-free half spread at `τ = 0`.
    pub fn base_offset(&self) -> f64 {
        math::ln_1p(self.gamma / self.elasticity()) / self.gamma
    }

    /// `γσ²τ/2`: price of carrying one unit of inventory risk to the horizon.
    pub fn risk_unit(&self) -> f64 {
        0.5 * self.gamma * self.sigma * self.sigma * self.tau
    }
}

/// `(k + 1 - 1/N)·β`: magnitude of `∂ ln λ_i / ∂ δ_i`.
pub fn own_elasticity(k: f64, n_dealers: usize, beta: f64) -> f64 {
    (k + 1.0 - 1.0 / n_dealers as f64) * beta
}

/// Utility of holding `q` shares untouched until the horizon:
/// `-exp(-γx)·exp(-γqs)·exp(γ²q²σ²τ/2)`.
pub fn inactive_value(x: f64, s: f64, ctx: &QuoteContext) -> f64 {
    -math::exp(inactive_exponent(x, s, ctx))
}

/// Exponent of [`inactive_value`]: `-γ(x + qs) + γ²q²σ²τ/2`.
pub fn inactive_exponent(x: f64, s: f64, ctx: &QuoteContext) -> f64 {
    let q = ctx.q as f64;
    let g = ctx.gamma;
    -g * (x + q * s) + 0.5 * g * g * q * q * ctx.sigma * ctx.sigma * ctx.tau
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservationPrices {
    /// Price at which buying one more unit leaves utility unchanged.
    pub bid: f64,
    /// Price at which selling one unit leaves utility unchanged.
    pub ask: f64,
    /// Midpoint `s - qγσ²τ`.
    pub mid: f64,
}

pub fn reservation_prices(s: f64, ctx: &QuoteContext) -> ReservationPrices {
    let h = ctx.risk_unit();
    let q = ctx.q;
    // r_b(q) and r_a(q + 1) share the integer multiplier -(1 + 2q).
    let bid_mult = -(1 + 2 * q);
    let ask_mult = 1 - 2 * q;
    ReservationPrices {
        bid: s + bid_mult as f64 * h,
        ask: s + ask_mult as f64 * h,
        mid: s - (2 * q) as f64 * h,
    }
}

pub fn optimal_quotes(ctx: &QuoteContext) -> QuotePair {
    let base = ctx.base_offset();
    let h = ctx.risk_unit();
    let q = ctx.q;
    // δ^a(q) and δ^b(-q) share the multiplier 1 - 2q, so mirror symmetry is exact.
    QuotePair {
        delta_b: base + (2 * q + 1) as f64 * h,
        delta_a: base + (1 - 2 * q) as f64 * h,
    }
}

/// `γσ²τ + (2/γ)·ln(1 + γ/c)`.
pub fn spread(ctx: &QuoteContext) -> f64 {
    2.0 * ctx.risk_unit() + 2.0 * ctx.base_offset()
}

/// Quote skew `δ^a - δ^b = -2qγσ²τ`.
pub fn price_adjustment(ctx: &QuoteContext) -> f64 {
    -((4 * ctx.q) as f64) * ctx.risk_unit()
}
