//! Competitive order-arrival intensities.
//!
//! Market orders on one side of the book arrive at the aggregate rate
//! `Λ = A·exp(-k·Σ_j β_j δ_j)`. Dealer `i` sees the share
//! `λ_i = Λ·exp(-(1 - 1/N)·β_i·δ_i)`, so widening any quote lowers everyone's
//! flow and widening one's own quote lowers one's own flow faster. Bid and ask
//! sides use the same form with their own offset vectors.

use thiserror::Error;

use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("offset and weight lists differ in length ({deltas} vs {betas})")]
    LengthMismatch { deltas: usize, betas: usize },
    #[error("no dealers")]
    Empty,
    #[error("dealer index {index} out of range for {n} dealers")]
    IndexOutOfRange { index: usize, n: usize },
}

/// One side of the book: every dealer's offset on that side plus their weights.
#[derive(Debug, Clone, Copy)]
pub struct IntensityInputs<'a> {
    deltas: &'a [f64],
    betas: &'a [f64],
    a_rate: f64,
    k: f64,
}

impl<'a> IntensityInputs<'a> {
    pub fn new(deltas: &'a [f64], betas: &'a [f64], a_rate: f64, k: f64) -> Result<Self, FlowError> {
        if deltas.len() != betas.len() {
            return Err(FlowError::LengthMismatch {
                deltas: deltas.len(),
                betas: betas.len(),
            });
        }
        if deltas.is_empty() {
            return Err(FlowError::Empty);
        }
        Ok(Self {
            deltas,
            betas,
            a_rate,
            k,
        })
    }

    pub fn n_dealers(&self) -> usize {
        self.deltas.len()
    }

    /// `Σ_j β_j δ_j`.
    pub fn weighted_offset(&self) -> f64 {
        self.deltas
            .iter()
            .zip(self.betas)
            .map(|(d, b)| b * d)
            .sum()
    }

    /// Aggregate market-order rate `Λ`.
    pub fn aggregate_rate(&self) -> f64 {
        self.a_rate * math::exp(-self.k * self.weighted_offset())
    }

    /// Rate at which dealer `i`'s quote on this side is hit.
    pub fn dealer_rate(&self, i: usize) -> Result<f64, FlowError> {
        let n = self.n_dealers();
        if i >= n {
            return Err(FlowError::IndexOutOfRange { index: i, n });
        }
        Ok(self.aggregate_rate() * own_share(self.betas[i], self.deltas[i], n))
    }

    /// All dealers' rates, computing the aggregate once.
    pub fn dealer_rates(&self, out: &mut [f64]) {
        let n = self.n_dealers();
        let agg = self.aggregate_rate();
        for ((r, &b), &d) in out.iter_mut().zip(self.betas).zip(self.deltas) {
            *r = agg * own_share(b, d, n);
        }
    }
}

/// `exp(-(1 - 1/N)·β_i·δ_i)`: the ratio `λ_i / Λ`.
pub fn own_share(beta: f64, delta: f64, n_dealers: usize) -> f64 {
    let frac = 1.0 - 1.0 / n_dealers as f64;
    math::exp(-frac * beta * delta)
}

/// Per-step fill probability `min(λ·dt, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillProbability {
    pub p: f64,
    /// `λ·dt` exceeded one and was clamped.
    pub clamped: bool,
}

pub fn fill_probability(rate: f64, dt: f64) -> FillProbability {
    let raw = rate * dt;
    if raw > 1.0 {
        FillProbability {
            p: 1.0,
            clamped: true,
        }
    } else {
        FillProbability {
            p: raw.max(0.0),
            clamped: false,
        }
    }
}
