//! Seeded Monte Carlo simulation of competing dealers.
//!
//! Each quoting step runs in a fixed order:
//!
//! 1. every dealer quotes in closed form from its inventory and the time left;
//! 2. ask and bid intensities are computed from all dealers' quotes;
//! 3. dealer by dealer, one uniform decides the ask fill, then one the bid fill;
//! 4. one more uniform moves the mid by `+σ√dt` (below one half) or `-σ√dt`.
//!
//! Every uniform is drawn whether or not it can matter, so the stream stays
//! aligned across parameter changes. Replication `r` of an ensemble seeds a
//! [`ChaCha8Rng`] with `master ^ splitmix64(r)`.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;
use crate::model::{DealerSpec, DealerState, MarketParams, QuotePair, SimConfig, TimeGrid, ValidConfig};
use crate::orderflow::{fill_probability, IntensityInputs};
use crate::quoting::{optimal_quotes, QuoteContext};

/// Fill flags of one dealer in one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepFills {
    pub ask: bool,
    pub bid: bool,
}

/// Snapshot of one step, taken after fills and before the mid moves.
#[derive(Debug, Clone, Copy)]
pub struct StepTrace<'a> {
    pub step: usize,
    pub t: f64,
    /// Mid-price the quotes were set against.
    pub mid: f64,
    pub quotes: &'a [QuotePair],
    pub states: &'a [DealerState],
    pub fills: &'a [StepFills],
}

/// Terminal outcome of one dealer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DealerOutcome {
    pub q_t: i64,
    pub x_t: f64,
    pub fills_ask: u64,
    pub fills_bid: u64,
    /// Mean of `δ^b + δ^a` over the quoting steps (0 on an empty grid).
    pub average_spread: f64,
    /// Sum of the offsets earned on fills.
    pub captured_spread: f64,
    /// Sum over steps of post-fill inventory times the mid move.
    pub inventory_pnl: f64,
    /// `x_T + q_T·s_T - (x_0 + q_0·s_0)`.
    pub profit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub first: f64,
    pub last: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub n_steps: usize,
    pub dealers: Vec<DealerOutcome>,
    pub path: PathSummary,
    /// Fill draws whose `λ·dt` exceeded one.
    pub clamped: u64,
}

/// SplitMix64 output for state `r`.
pub fn splitmix64(r: u64) -> u64 {
    let mut z = r.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `r` under master seed `master`.
pub fn replication_seed(master: u64, r: usize) -> u64 {
    master ^ splitmix64(r as u64)
}

/// Reusable per-step buffers.
struct Workspace {
    quotes: Vec<QuotePair>,
    betas: Vec<f64>,
    asks: Vec<f64>,
    bids: Vec<f64>,
    ask_rates: Vec<f64>,
    bid_rates: Vec<f64>,
    fills: Vec<StepFills>,
}

impl Workspace {
    fn new(dealers: &[DealerSpec]) -> Self {
        let n = dealers.len();
        Self {
            quotes: vec![QuotePair::new(0.0, 0.0); n],
            betas: dealers.iter().map(|d| d.beta).collect(),
            asks: vec![0.0; n],
            bids: vec![0.0; n],
            ask_rates: vec![0.0; n],
            bid_rates: vec![0.0; n],
            fills: vec![StepFills::default(); n],
        }
    }
}

/// Per-dealer running sums alongside the state.
#[derive(Debug, Clone, Copy, Default)]
struct Ledger {
    spread_sum: f64,
    captured: f64,
    inventory_pnl: f64,
}

/// One quoting step at time remaining `tau`: quotes, fills, then the mid
/// move. Returns the new mid and the number of clamped fill draws.
pub fn step<R: Rng + ?Sized>(
    states: &mut [DealerState],
    s: f64,
    tau: f64,
    market: &MarketParams,
    dealers: &[DealerSpec],
    rng: &mut R,
) -> (f64, u64) {
    let mut ws = Workspace::new(dealers);
    let clamped = fill_step(states, s, tau, market, dealers, rng, &mut ws);
    (s + mid_move(market, rng), clamped)
}

fn fill_step<R: Rng + ?Sized>(
    states: &mut [DealerState],
    s: f64,
    tau: f64,
    market: &MarketParams,
    dealers: &[DealerSpec],
    rng: &mut R,
    ws: &mut Workspace,
) -> u64 {
    let n = dealers.len();
    for i in 0..n {
        let ctx = QuoteContext::new(&dealers[i], market, n, states[i].q, tau);
        let quote = optimal_quotes(&ctx);
        ws.quotes[i] = quote;
        ws.asks[i] = quote.delta_a;
        ws.bids[i] = quote.delta_b;
    }
    IntensityInputs::new(&ws.asks, &ws.betas, market.a_rate, market.k)
        .expect("one offset per dealer")
        .dealer_rates(&mut ws.ask_rates);
    IntensityInputs::new(&ws.bids, &ws.betas, market.a_rate, market.k)
        .expect("one offset per dealer")
        .dealer_rates(&mut ws.bid_rates);

    let mut clamped = 0;
    for (i, state) in states.iter_mut().enumerate().take(n) {
        let pa = fill_probability(ws.ask_rates[i], market.dt);
        let pb = fill_probability(ws.bid_rates[i], market.dt);
        clamped += u64::from(pa.clamped) + u64::from(pb.clamped);
        let quote = ws.quotes[i];
        let ask = rng.random::<f64>() < pa.p;
        let bid = rng.random::<f64>() < pb.p;
        if ask {
            state.record_ask_fill(quote.ask_price(s));
        }
        if bid {
            state.record_bid_fill(quote.bid_price(s));
        }
        ws.fills[i] = StepFills { ask, bid };
    }
    clamped
}

fn mid_move<R: Rng + ?Sized>(market: &MarketParams, rng: &mut R) -> f64 {
    let size = market.sigma * math::sqrt(market.dt);
    if rng.random::<f64>() < 0.5 {
        size
    } else {
        -size
    }
}

/// One replication over the config's grid.
pub fn simulate_run(config: &ValidConfig, seed: u64) -> RunResult {
    run_on_grid(config, config.grid(), seed, |_| {})
}

/// [`simulate_run`] streaming a [`StepTrace`] per step into `sink`.
pub fn simulate_run_traced(config: &ValidConfig, seed: u64, sink: impl FnMut(&StepTrace<'_>)) -> RunResult {
    run_on_grid(config, config.grid(), seed, sink)
}

/// Runs `config`'s dealers over an explicit grid; `grid.n_steps == 0` yields
/// the initial state unchanged.
pub fn run_on_grid(
    config: &SimConfig,
    grid: TimeGrid,
    seed: u64,
    mut sink: impl FnMut(&StepTrace<'_>),
) -> RunResult {
    let market = &config.market;
    let dealers = &config.dealers;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ws = Workspace::new(dealers);
    let mut states: Vec<DealerState> = dealers.iter().map(DealerState::from_spec).collect();
    let mut ledgers = vec![Ledger::default(); dealers.len()];

    let mut s = market.s0;
    let mut path = PathSummary {
        first: s,
        last: s,
        min: s,
        max: s,
    };
    let mut clamped = 0;

    for l in 0..grid.n_steps {
        clamped += fill_step(&mut states, s, grid.remaining(l), market, dealers, &mut rng, &mut ws);
        sink(&StepTrace {
            step: l,
            t: grid.time(l),
            mid: s,
            quotes: &ws.quotes,
            states: &states,
            fills: &ws.fills,
        });

        let ds = mid_move(market, &mut rng);
        for (((ledger, quote), now), fills) in ledgers
            .iter_mut()
            .zip(&ws.quotes)
            .zip(&states)
            .zip(&ws.fills)
        {
            ledger.spread_sum += quote.spread();
            if fills.ask {
                ledger.captured += quote.delta_a;
            }
            if fills.bid {
                ledger.captured += quote.delta_b;
            }
            ledger.inventory_pnl += now.q as f64 * ds;
        }
        s += ds;
        path.min = path.min.min(s);
        path.max = path.max.max(s);
    }
    path.last = s;

    let steps = grid.n_steps;
    let outcomes = dealers
        .iter()
        .zip(&states)
        .zip(&ledgers)
        .map(|((spec, st), ledger)| DealerOutcome {
            q_t: st.q,
            x_t: st.x,
            fills_ask: st.fills_ask,
            fills_bid: st.fills_bid,
            average_spread: if steps == 0 {
                0.0
            } else {
                ledger.spread_sum / steps as f64
            },
            captured_spread: ledger.captured,
            inventory_pnl: ledger.inventory_pnl,
            profit: st.mark_to_market(s) - spec.initial_wealth(market.s0),
        })
        .collect();

    RunResult {
        seed,
        n_steps: steps,
        dealers: outcomes,
        path,
        clamped,
    }
}

/// Replication `r` of the ensemble.
pub fn simulate_replication(config: &ValidConfig, r: usize) -> RunResult {
    simulate_run(config, replication_seed(config.seed, r))
}

/// All `runs` replications, in replication order.
pub fn simulate_ensemble(config: &ValidConfig) -> Vec<RunResult> {
    (0..config.runs).map(|r| simulate_replication(config, r)).collect()
}
