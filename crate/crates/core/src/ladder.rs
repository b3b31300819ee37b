//! Discrete period-by-period value ladder.
//!
//! Dealers quote at `t_0 .. t_{n-1}` and trade immediately after each quoting
//! instant. Over the last period the expected utility under the closed-form
//! quotes is the frozen-inventory value times the bracket
//! `1 - γΔt/(c + γ)·(λ^a + λ^b)`. Earlier periods multiply in one
//! `h`-factor per downstream step, obtained by linearizing the arrival terms
//! around zero offsets.
//!
//! Two independent checks live here as well:
//!
//! - [`BestResponse`] maximizes the exact one-period expected utility by brute
//!   force (coarse grid, then golden-section refinement) with the other
//!   dealers' quotes held fixed.
//! - [`exact_small_dp`] evaluates the closed-form policy by backward induction
//!   with exact (non-linearized) arrival probabilities on a bounded inventory
//!   grid.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::math;
use crate::model::{DealerSpec, DealerState, MarketParams, QuotePair, TimeGrid};
use crate::orderflow::IntensityInputs;
use crate::quoting::{inactive_value, optimal_quotes, QuoteContext};

/// Largest grid [`exact_small_dp`] accepts.
pub const MAX_DP_STEPS: usize = 50;

/// Default inventory bound of [`exact_small_dp`].
pub const DEFAULT_Q_MAX: i64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LadderError {
    #[error("value bracket {value} left (0, 1]; step too large for the linearization")]
    BracketOutOfRange { value: f64 },
    #[error("argmax ({delta:.6}) on the search window edge [{lo}, {hi}]")]
    MaximumOnBoundary { delta: f64, lo: f64, hi: f64 },
    #[error("inventory {q} with {steps} steps may leave the bound |q| <= {q_max}")]
    InventoryBoundHit { q: i64, steps: usize, q_max: i64 },
    #[error("fill probabilities sum to {mass} > 1 at q = {q}, step {step}")]
    FillMassExceedsOne { q: i64, step: usize, mass: f64 },
    #[error("{0} steps exceeds the exact DP limit")]
    TooManySteps(usize),
    #[error("dealer {0} out of range")]
    DealerOutOfRange(usize),
}

/// Denominator of the value bracket `1 - γΔt/D·(λ^a + λ^b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BracketDenominator {
    /// `D = (k + 1 - 1/N)·β + γ`.
    #[default]
    WithGamma,
    /// `D = (k + 1 - 1/N)·β`.
    WithoutGamma,
}

/// The h-factors of every dealer on a grid, plus what is needed to evaluate
/// ladder values.
#[derive(Debug, Clone)]
pub struct PeriodLadder {
    market: MarketParams,
    dealers: Vec<DealerSpec>,
    grid: TimeGrid,
    denominator: BracketDenominator,
    // h[i][l]
    h: Vec<Vec<f64>>,
}

impl PeriodLadder {
    pub fn new(
        market: MarketParams,
        dealers: Vec<DealerSpec>,
        grid: TimeGrid,
        denominator: BracketDenominator,
    ) -> Self {
        let h = (0..dealers.len())
            .map(|i| {
                (0..grid.n_steps)
                    .map(|l| h_factor(&market, &dealers, i, grid.remaining(l), grid.step_len(l)))
                    .collect()
            })
            .collect();
        Self {
            market,
            dealers,
            grid,
            denominator,
            h,
        }
    }

    pub fn market(&self) -> &MarketParams {
        &self.market
    }

    pub fn dealers(&self) -> &[DealerSpec] {
        &self.dealers
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn n_dealers(&self) -> usize {
        self.dealers.len()
    }

    pub fn h(&self, i: usize, l: usize) -> f64 {
        self.h[i][l]
    }

    pub fn h_factors(&self, i: usize) -> &[f64] {
        &self.h[i]
    }

    /// `Π_{m=l+1}^{n-1} h_m^i` (empty product is 1).
    pub fn downstream_product(&self, i: usize, l: usize) -> f64 {
        self.h[i][l + 1..].iter().product()
    }

    pub fn context(&self, i: usize, q: i64, tau: f64) -> QuoteContext {
        QuoteContext::new(&self.dealers[i], &self.market, self.n_dealers(), q, tau)
    }

    /// Closed-form quotes of every dealer given their inventories.
    pub fn quotes_at(&self, inventories: &[i64], tau: f64) -> Vec<QuotePair> {
        inventories
            .iter()
            .enumerate()
            .map(|(i, &q)| optimal_quotes(&self.context(i, q, tau)))
            .collect()
    }

    /// Dealer `i`'s ask and bid arrival rates under `quotes`.
    pub fn rates(&self, i: usize, quotes: &[QuotePair]) -> (f64, f64) {
        side_rates(&self.market, &self.dealers, i, quotes)
    }

    /// `1 - γΔt/D·(λ^a + λ^b)`, required to lie in `(0, 1]`.
    pub fn bracket(&self, i: usize, quotes: &[QuotePair], dt: f64) -> Result<f64, LadderError> {
        let spec = &self.dealers[i];
        let c = (self.market.k + 1.0 - 1.0 / self.n_dealers() as f64) * spec.beta;
        let denom = match self.denominator {
            BracketDenominator::WithGamma => c + spec.gamma,
            BracketDenominator::WithoutGamma => c,
        };
        let (la, lb) = self.rates(i, quotes);
        let value = 1.0 - spec.gamma * dt / denom * (la + lb);
        if value > 0.0 && value <= 1.0 {
            Ok(value)
        } else {
            Err(LadderError::BracketOutOfRange { value })
        }
    }

    /// Value of the last trading period: frozen-inventory value times the
    /// bracket, with every dealer quoting `quotes`.
    pub fn one_period_value(
        &self,
        i: usize,
        state: &DealerState,
        s: f64,
        quotes: &[QuotePair],
        tau: f64,
        dt: f64,
    ) -> Result<f64, LadderError> {
        let kernel = inactive_value(state.x, s, &self.context(i, state.q, tau));
        Ok(kernel * self.bracket(i, quotes, dt)?)
    }

    /// Ladder value at step `l` with every dealer quoting in closed form from
    /// `inventories`: bracket at `l` times the downstream h-factors times the
    /// frozen-inventory kernel.
    pub fn n_period_value(
        &self,
        i: usize,
        x: f64,
        s: f64,
        inventories: &[i64],
        l: usize,
    ) -> Result<f64, LadderError> {
        let tau = self.grid.remaining(l);
        let quotes = self.quotes_at(inventories, tau);
        let state = DealerState {
            q: inventories[i],
            x,
            fills_ask: 0,
            fills_bid: 0,
        };
        let last = self.one_period_value(i, &state, s, &quotes, tau, self.grid.step_len(l))?;
        Ok(last * self.downstream_product(i, l))
    }
}

fn side_rates(market: &MarketParams, dealers: &[DealerSpec], i: usize, quotes: &[QuotePair]) -> (f64, f64) {
    // tiny N; allocation-free would need const generics, not worth it here
    let betas: Vec<f64> = dealers.iter().map(|d| d.beta).collect();
    let asks: Vec<f64> = quotes.iter().map(|q| q.delta_a).collect();
    let bids: Vec<f64> = quotes.iter().map(|q| q.delta_b).collect();
    let ask = IntensityInputs::new(&asks, &betas, market.a_rate, market.k)
        .and_then(|f| f.dealer_rate(i))
        .expect("quotes and dealers have equal length");
    let bid = IntensityInputs::new(&bids, &betas, market.a_rate, market.k)
        .and_then(|f| f.dealer_rate(i))
        .expect("quotes and dealers have equal length");
    (ask, bid)
}

/// Inventory-free spread of dealer `j` at time remaining `tau`:
/// `(2/γ_j)·ln(1 + γ_j/c_j) + γ_jσ²τ`.
fn dealer_spread(market: &MarketParams, dealers: &[DealerSpec], j: usize, tau: f64) -> f64 {
    let ctx = QuoteContext::new(&dealers[j], market, dealers.len(), 0, tau);
    crate::quoting::spread(&ctx)
}

/// Correction factor `h` for dealer `i` at a step with time remaining `tau`
/// and length `dt`:
///
/// ```text
/// h = 1 - AγΔt/(c_i + γ_i) · { 2 - c_i·S_i(τ) - k·Σ_{j≠i} β_j·S_j(τ) }
/// ```
///
/// where `S_j` is dealer `j`'s closed-form spread and `c_j = (k + 1 - 1/N)β_j`.
pub fn h_factor(market: &MarketParams, dealers: &[DealerSpec], i: usize, tau: f64, dt: f64) -> f64 {
    let n = dealers.len();
    let spec = &dealers[i];
    let c = (market.k + 1.0 - 1.0 / n as f64) * spec.beta;
    let own = c * dealer_spread(market, dealers, i, tau);
    let others: f64 = (0..n)
        .filter(|&j| j != i)
        .map(|j| dealers[j].beta * dealer_spread(market, dealers, j, tau))
        .sum();
    let linear_flow = 2.0 - own - market.k * others;
    1.0 - market.a_rate * spec.gamma * dt / (c + spec.gamma) * linear_flow
}

/// Brute-force search settings for [`BestResponse::solve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSearch {
    pub lo: f64,
    pub hi: f64,
    /// Coarse grid points per offset.
    pub coarse_points: usize,
    /// Final bracket width of the refinement.
    pub tolerance: f64,
}

impl Default for OracleSearch {
    fn default() -> Self {
        Self {
            lo: -10.0,
            hi: 10.0,
            coarse_points: 2001,
            tolerance: 1e-6,
        }
    }
}

impl OracleSearch {
    fn widened(self) -> Self {
        let mid = 0.5 * (self.lo + self.hi);
        let half = self.hi - self.lo;
        Self {
            lo: mid - half,
            hi: mid + half,
            coarse_points: 2 * self.coarse_points - 1,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOutcome {
    pub quotes: QuotePair,
    /// Exact expected utility at `quotes`.
    pub expected_utility: f64,
    /// The objective did not vary over the coarse grid (no order flow).
    pub degenerate: bool,
}

/// Dealer `i`'s one-period best-response problem with everyone else's
/// quotes fixed.
///
/// Trades happen immediately after the quoting instant at mid `s`; after that
/// inventory is frozen until the horizon, `tau` away. Outcomes are one ask
/// fill (probability `λ^aΔt`), one bid fill (`λ^bΔt`) or none.
#[derive(Debug, Clone)]
pub struct BestResponse<'a> {
    pub market: &'a MarketParams,
    pub dealers: &'a [DealerSpec],
    pub dealer: usize,
    pub state: DealerState,
    pub s: f64,
    pub tau: f64,
    pub dt: f64,
    /// Quotes of all dealers; entry `dealer` is replaced by the candidate.
    pub quotes: &'a [QuotePair],
}

impl BestResponse<'_> {
    fn spec(&self) -> &DealerSpec {
        &self.dealers[self.dealer]
    }

    fn rates_with(&self, candidate: QuotePair) -> (f64, f64) {
        let mut quotes = self.quotes.to_vec();
        quotes[self.dealer] = candidate;
        side_rates(self.market, self.dealers, self.dealer, &quotes)
    }

    fn frozen(&self, q: i64) -> f64 {
        let g = self.spec().gamma;
        let q = q as f64;
        0.5 * g * g * self.market.sigma * self.market.sigma * q * q * self.tau
    }

    /// Exact one-period expected utility of quoting `candidate`.
    pub fn expected_utility(&self, candidate: QuotePair) -> f64 {
        let g = self.spec().gamma;
        let q = self.state.q;
        let wealth = self.state.x + q as f64 * self.s;
        let (la, lb) = self.rates_with(candidate);
        let pa = la * self.dt;
        let pb = lb * self.dt;
        let sold = pa * math::exp(-g * (wealth + candidate.delta_a) + self.frozen(q - 1));
        let bought = pb * math::exp(-g * (wealth + candidate.delta_b) + self.frozen(q + 1));
        let idle = (1.0 - pa - pb) * math::exp(-g * wealth + self.frozen(q));
        -(sold + bought + idle)
    }

    // Expected utility = kernel·(1 - ask_gain - bid_gain) with kernel < 0, so
    // each side is maximized on its own gain.
    fn ask_gain(&self, delta: f64) -> f64 {
        let (la, _) = self.rates_with(QuotePair::new(self.quotes[self.dealer].delta_b, delta));
        let g = self.spec().gamma;
        let carry = self.frozen(self.state.q - 1) - self.frozen(self.state.q);
        la * self.dt * (1.0 - math::exp(carry - g * delta))
    }

    fn bid_gain(&self, delta: f64) -> f64 {
        let (_, lb) = self.rates_with(QuotePair::new(delta, self.quotes[self.dealer].delta_a));
        let g = self.spec().gamma;
        let carry = self.frozen(self.state.q + 1) - self.frozen(self.state.q);
        lb * self.dt * (1.0 - math::exp(carry - g * delta))
    }

    pub fn solve(&self, search: &OracleSearch) -> Result<OracleOutcome, LadderError> {
        let ask = maximize_1d(|d| self.ask_gain(d), search)?;
        let bid = maximize_1d(|d| self.bid_gain(d), search)?;
        let quotes = QuotePair::new(bid.0, ask.0);
        Ok(OracleOutcome {
            quotes,
            expected_utility: self.expected_utility(quotes),
            degenerate: ask.1 || bid.1,
        })
    }

    /// Like [`solve`](Self::solve), doubling the window on
    /// [`LadderError::MaximumOnBoundary`] until it spans `max_width`.
    pub fn solve_widening(&self, search: &OracleSearch, max_width: f64) -> Result<OracleOutcome, LadderError> {
        let mut search = *search;
        loop {
            match self.solve(&search) {
                Err(LadderError::MaximumOnBoundary { .. }) if search.hi - search.lo < max_width => {
                    search = search.widened();
                }
                other => return other,
            }
        }
    }
}

/// Returns `(argmax, degenerate)`.
fn maximize_1d(f: impl Fn(f64) -> f64, search: &OracleSearch) -> Result<(f64, bool), LadderError> {
    let n = search.coarse_points.max(3);
    let spacing = (search.hi - search.lo) / (n - 1) as f64;
    let at = |j: usize| search.lo + j as f64 * spacing;

    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    let mut lowest = f64::INFINITY;
    for j in 0..n {
        let v = f(at(j));
        if v > best_val {
            best_val = v;
            best = j;
        }
        lowest = lowest.min(v);
    }
    if best_val == lowest {
        return Ok((0.5 * (search.lo + search.hi), true));
    }
    if best == 0 || best == n - 1 {
        return Err(LadderError::MaximumOnBoundary {
            delta: at(best),
            lo: search.lo,
            hi: search.hi,
        });
    }

    // golden section on the two cells around the coarse maximum
    let inv_phi = 0.5 * (math::sqrt(5.0) - 1.0);
    let (mut a, mut b) = (at(best - 1), at(best + 1));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > search.tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    Ok((0.5 * (a + b), false))
}

/// Backward-induction value of the closed-form policy with exact arrival
/// probabilities.
///
/// Values factor as `V(x, s, q, t_l) = -exp(-γ(x + qs))·W(q, l)`; the table
/// stores `W`. Cell `(q, l)` exists for `|q| <= q_max - (n - l)`, i.e. every
/// inventory from which no path can leave `±q_max` by the horizon.
#[derive(Debug, Clone)]
pub struct DpTable {
    gamma: f64,
    sigma: f64,
    grid: TimeGrid,
    q_max: i64,
    // w[l][q + q_max]
    w: Vec<Vec<f64>>,
    active: Vec<Vec<bool>>,
}

impl DpTable {
    pub fn n_steps(&self) -> usize {
        self.grid.n_steps
    }

    /// Inventories present at step `l`.
    pub fn inventory_range(&self, l: usize) -> core::ops::RangeInclusive<i64> {
        let r = self.q_max - (self.grid.n_steps - l) as i64;
        -r..=r
    }

    fn slot(&self, q: i64) -> usize {
        (q + self.q_max) as usize
    }

    pub fn risk_factor(&self, q: i64, l: usize) -> f64 {
        self.w[l][self.slot(q)]
    }

    /// Whether any fill had positive probability at this cell.
    pub fn trades(&self, q: i64, l: usize) -> bool {
        self.active[l][self.slot(q)]
    }

    /// `exp(γ²σ²q²(T - t_l)/2)`: the factor of holding `q` untouched.
    pub fn inactive_factor(&self, q: i64, l: usize) -> f64 {
        let q = q as f64;
        math::exp(0.5 * self.gamma * self.gamma * self.sigma * self.sigma * q * q * self.grid.remaining(l))
    }

    pub fn value(&self, q: i64, l: usize, x: f64, s: f64) -> f64 {
        -math::exp(-self.gamma * (x + q as f64 * s)) * self.risk_factor(q, l)
    }

    /// Every cell `(q, l, V_exact / V_inactive)`; the ratio is below one
    /// exactly when the exact value beats holding inventory.
    pub fn cells(&self) -> impl Iterator<Item = (i64, usize, f64)> + '_ {
        (0..self.grid.n_steps).flat_map(move |l| {
            self.inventory_range(l)
                .map(move |q| (q, l, self.risk_factor(q, l) / self.inactive_factor(q, l)))
        })
    }
}

/// Evaluates dealer `i`'s closed-form policy exactly on the ladder's grid.
///
/// Other dealers quote in closed form from their entries in `inventories`,
/// held fixed over the horizon; dealer `i` starts from `inventories[i]`.
pub fn exact_small_dp(
    ladder: &PeriodLadder,
    i: usize,
    inventories: &[i64],
    q_max: i64,
) -> Result<DpTable, LadderError> {
    if i >= ladder.n_dealers() {
        return Err(LadderError::DealerOutOfRange(i));
    }
    let grid = ladder.grid();
    let n = grid.n_steps;
    if n > MAX_DP_STEPS {
        return Err(LadderError::TooManySteps(n));
    }
    let q0 = inventories[i];
    if q0.unsigned_abs() as i64 + n as i64 > q_max {
        return Err(LadderError::InventoryBoundHit { q: q0, steps: n, q_max });
    }

    let spec = ladder.dealers()[i];
    let g = spec.gamma;
    let sigma = ladder.market().sigma;
    let width = (2 * q_max + 1) as usize;
    let mut w = vec![vec![f64::NAN; width]; n + 1];
    let mut active = vec![vec![false; width]; n + 1];
    w[n].iter_mut().for_each(|v| *v = 1.0);

    let mut quotes = vec![QuotePair::new(0.0, 0.0); ladder.n_dealers()];
    for l in (0..n).rev() {
        let tau = grid.remaining(l);
        let dt = grid.step_len(l);
        for (j, &qj) in inventories.iter().enumerate() {
            quotes[j] = optimal_quotes(&ladder.context(j, qj, tau));
        }
        let carry = |q: i64| math::exp(0.5 * g * g * sigma * sigma * (q * q) as f64 * dt);
        let r = q_max - (n - l) as i64;
        for q in -r..=r {
            quotes[i] = optimal_quotes(&ladder.context(i, q, tau));
            let (la, lb) = ladder.rates(i, &quotes);
            let (pa, pb) = (la * dt, lb * dt);
            if pa + pb > 1.0 {
                return Err(LadderError::FillMassExceedsOne { q, step: l, mass: pa + pb });
            }
            let next = &w[l + 1];
            let at = |q: i64| next[(q + q_max) as usize];
            let sold = pa * math::exp(-g * quotes[i].delta_a) * carry(q - 1) * at(q - 1);
            let bought = pb * math::exp(-g * quotes[i].delta_b) * carry(q + 1) * at(q + 1);
            let idle = (1.0 - pa - pb) * carry(q) * at(q);
            let slot = (q + q_max) as usize;
            w[l][slot] = sold + bought + idle;
            active[l][slot] = pa + pb > 0.0;
        }
    }

    Ok(DpTable {
        gamma: g,
        sigma,
        grid,
        q_max,
        w,
        active,
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // mpmath, 30 digits
    const H_EXAMPLE: f64 = 0.997338058993062163;

    fn mono_market(horizon: f64) -> MarketParams {
        MarketParams {
            horizon,
            ..MarketParams::baseline()
        }
    }

    fn mono() -> Vec<DealerSpec> {
        vec![DealerSpec::new(0.1, 1.0)]
    }

    #[test]
    fn h_is_one_without_flow() {
        let m = MarketParams {
            a_rate: 0.0,
            ..MarketParams::baseline()
        };
        assert_eq!(h_factor(&m, &mono(), 0, 0.3, 0.005), 1.0);
    }

    #[test]
    fn h_example() {
        let h = h_factor(&MarketParams::baseline(), &mono(), 0, 0.005, 0.005);
        assert_relative_eq!(h, H_EXAMPLE, max_relative = 1e-14);
    }

    #[test]
    fn h_prefactor_approaches_a_dt_for_large_gamma() {
        // AγΔt/(c + γ) -> AΔt as γ grows with c fixed
        let m = MarketParams::baseline();
        let c = 1.5;
        let mut prev_gap = f64::INFINITY;
        for gamma in [1.0, 10.0, 100.0, 1000.0] {
            let pre = m.a_rate * gamma * m.dt / (c + gamma);
            let gap = m.a_rate * m.dt - pre;
            assert!(gap > 0.0 && gap < prev_gap);
            assert_relative_eq!(gap, m.a_rate * m.dt * c / (c + gamma), max_relative = 1e-12);
            prev_gap = gap;
        }
    }

    #[test]
    fn ladder_h_uses_grid_remaining_time() {
        let m = mono_market(0.01);
        let ladder = PeriodLadder::new(m, mono(), m.grid().unwrap(), BracketDenominator::WithGamma);
        assert_relative_eq!(ladder.h(0, 1), H_EXAMPLE, max_relative = 1e-14);
        assert_eq!(ladder.downstream_product(0, 1), 1.0);
        assert_eq!(ladder.downstream_product(0, 0), ladder.h(0, 1));
    }

    fn one_period_ladder() -> PeriodLadder {
        let m = mono_market(1.0);
        PeriodLadder::new(m, mono(), m.grid().unwrap(), BracketDenominator::WithGamma)
    }

    #[test]
    fn one_period_value_without_window_or_flow_is_inactive() {
        let ladder = one_period_ladder();
        let st = DealerState {
            q: 2,
            x: 5.0,
            fills_ask: 0,
            fills_bid: 0,
        };
        let ctx = ladder.context(0, 2, 1.0);
        let quotes = vec![optimal_quotes(&ctx)];
        let inactive = inactive_value(5.0, 100.0, &ctx);
        assert_eq!(ladder.one_period_value(0, &st, 100.0, &quotes, 1.0, 0.0).unwrap(), inactive);

        let m = MarketParams {
            a_rate: 0.0,
            ..MarketParams::baseline()
        };
        let quiet = PeriodLadder::new(m, mono(), m.grid().unwrap(), BracketDenominator::WithGamma);
        assert_eq!(quiet.one_period_value(0, &st, 100.0, &quotes, 1.0, 0.005).unwrap(), inactive);
    }

    #[test]
    fn active_one_period_beats_inactive() {
        let ladder = one_period_ladder();
        for q in -4..=4 {
            let st = DealerState {
                q,
                x: 0.0,
                fills_ask: 0,
                fills_bid: 0,
            };
            let ctx = ladder.context(0, q, 0.3);
            let quotes = vec![optimal_quotes(&ctx)];
            let v = ladder.one_period_value(0, &st, 100.0, &quotes, 0.3, 0.005).unwrap();
            assert!(v > inactive_value(0.0, 100.0, &ctx), "q = {q}");
        }
    }

    #[test]
    fn bracket_rejects_oversized_step() {
        let ladder = one_period_ladder();
        let quotes = vec![QuotePair::new(-5.0, -5.0)];
        assert!(matches!(
            ladder.bracket(0, &quotes, 1.0),
            Err(LadderError::BracketOutOfRange { .. })
        ));
    }

    #[test]
    fn last_step_of_ladder_is_one_period_value() {
        let m = MarketParams::baseline();
        let dealers = vec![DealerSpec::new(0.1, 0.5), DealerSpec::new(0.3, 0.5)];
        let ladder = PeriodLadder::new(m, dealers, m.grid().unwrap(), BracketDenominator::WithGamma);
        let l = ladder.grid().n_steps - 1;
        let tau = ladder.grid().remaining(l);
        let inv = [2, -1];
        let quotes = ladder.quotes_at(&inv, tau);
        let st = DealerState {
            q: 2,
            x: 1.0,
            fills_ask: 0,
            fills_bid: 0,
        };
        let direct = ladder.one_period_value(0, &st, 100.0, &quotes, tau, m.dt).unwrap();
        assert_eq!(ladder.n_period_value(0, 1.0, 100.0, &inv, l).unwrap(), direct);
    }

    #[test]
    fn two_step_value_composes_bracket_h_and_kernel() {
        let m = mono_market(0.01);
        let ladder = PeriodLadder::new(m, mono(), m.grid().unwrap(), BracketDenominator::WithGamma);
        let v = ladder.n_period_value(0, 0.0, 100.0, &[0], 0).unwrap();

        // independent composition from the defining formulas
        let delta = 10.0 * (1.0f64 + 0.1 / 1.5).ln() + 0.1 * 4.0 * 0.01 / 2.0;
        let lam = 140.0 * (-1.5 * delta).exp();
        let bracket = 1.0 - 0.1 * 0.005 / (1.5 + 0.1) * (2.0 * lam);
        let kernel = -(-0.1f64 * 0.0).exp();
        assert_relative_eq!(v, kernel * bracket * H_EXAMPLE, max_relative = 1e-13);
    }

    #[test]
    fn ladder_without_flow_is_inactive() {
        let m = MarketParams {
            a_rate: 0.0,
            ..MarketParams::baseline()
        };
        let dealers = vec![DealerSpec::new(0.1, 0.5), DealerSpec::new(0.1, 0.5)];
        let ladder = PeriodLadder::new(m, dealers, m.grid().unwrap(), BracketDenominator::WithGamma);
        for l in [0, 50, 199] {
            let ctx = ladder.context(0, 3, ladder.grid().remaining(l));
            assert_eq!(
                ladder.n_period_value(0, 2.0, 100.0, &[3, 0], l).unwrap(),
                inactive_value(2.0, 100.0, &ctx)
            );
        }
    }

    #[test]
    fn alternative_denominator_deepens_bracket() {
        let m = MarketParams::baseline();
        let grid = m.grid().unwrap();
        let a = PeriodLadder::new(m, mono(), grid, BracketDenominator::WithGamma);
        let b = PeriodLadder::new(m, mono(), grid, BracketDenominator::WithoutGamma);
        let q = a.quotes_at(&[0], 0.5);
        assert!(b.bracket(0, &q, m.dt).unwrap() < a.bracket(0, &q, m.dt).unwrap());
    }

    fn best_response<'a>(
        market: &'a MarketParams,
        dealers: &'a [DealerSpec],
        quotes: &'a [QuotePair],
        q: i64,
        tau: f64,
    ) -> BestResponse<'a> {
        BestResponse {
            market,
            dealers,
            dealer: 0,
            state: DealerState {
                q,
                x: 0.0,
                fills_ask: 0,
                fills_bid: 0,
            },
            s: 100.0,
            tau,
            dt: market.dt,
            quotes,
        }
    }

    #[test]
    fn oracle_recovers_single_dealer_quotes() {
        let m = MarketParams::baseline();
        let dealers = mono();
        let quotes = [QuotePair::new(0.0, 0.0)];
        let out = best_response(&m, &dealers, &quotes, 0, 1.0)
            .solve(&OracleSearch::default())
            .unwrap();
        assert!(!out.degenerate);
        assert!((out.quotes.delta_b - 0.845385211375712).abs() < 1e-3);
        assert!((out.quotes.delta_a - 0.845385211375712).abs() < 1e-3);
    }

    #[test]
    fn oracle_recovers_skewed_duopoly_quotes() {
        let m = MarketParams::baseline();
        let dealers = [DealerSpec::new(0.1, 0.5), DealerSpec::new(0.1, 0.5)];
        let ladder = PeriodLadder::new(m, dealers.to_vec(), m.grid().unwrap(), BracketDenominator::WithGamma);
        let quotes = ladder.quotes_at(&[3, 0], 1.0);
        let out = best_response(&m, &dealers, &quotes, 3, 1.0)
            .solve(&OracleSearch::default())
            .unwrap();
        assert!((out.quotes.delta_b - 2.353101798043249).abs() < 1e-3);
        assert!((out.quotes.delta_a + 0.046898201956751).abs() < 1e-3);
    }

    #[test]
    fn oracle_flags_flat_objective() {
        let m = MarketParams {
            a_rate: 0.0,
            ..MarketParams::baseline()
        };
        let dealers = mono();
        let quotes = [QuotePair::new(1.0, 1.0)];
        let out = best_response(&m, &dealers, &quotes, 0, 1.0)
            .solve(&OracleSearch::default())
            .unwrap();
        assert!(out.degenerate);
    }

    #[test]
    fn oracle_reports_boundary_and_widens() {
        let m = MarketParams::baseline();
        let dealers = [DealerSpec::new(1.0, 1.0)];
        let quotes = [QuotePair::new(0.0, 0.0)];
        let br = best_response(&m, &dealers, &quotes, 5, 1.0);
        assert!(matches!(
            br.solve(&OracleSearch::default()),
            Err(LadderError::MaximumOnBoundary { .. })
        ));
        let ctx = QuoteContext::new(&dealers[0], &m, 1, 5, 1.0);
        let expect = optimal_quotes(&ctx);
        let out = br.solve_widening(&OracleSearch::default(), 200.0).unwrap();
        assert!((out.quotes.delta_b - expect.delta_b).abs() < 1e-3);
        assert!((out.quotes.delta_a - expect.delta_a).abs() < 1e-3);
    }

    #[test]
    fn oracle_ignores_competitor_quotes() {
        let m = MarketParams::baseline();
        let dealers = [
            DealerSpec::new(0.1, 1.0 / 3.0),
            DealerSpec::new(0.5, 1.0 / 3.0),
            DealerSpec::new(0.01, 1.0 / 3.0),
        ];
        let base = [QuotePair::new(1.0, 1.0), QuotePair::new(2.0, 0.5), QuotePair::new(1.0, 3.0)];
        let moved = [QuotePair::new(1.0, 1.0), QuotePair::new(-1.0, 4.0), QuotePair::new(0.2, 0.1)];
        let a = best_response(&m, &dealers, &base, -2, 0.4)
            .solve(&OracleSearch::default())
            .unwrap();
        let b = best_response(&m, &dealers, &moved, -2, 0.4)
            .solve(&OracleSearch::default())
            .unwrap();
        assert!((a.quotes.delta_b - b.quotes.delta_b).abs() < 1e-5);
        assert!((a.quotes.delta_a - b.quotes.delta_a).abs() < 1e-5);
    }

    #[test]
    fn oracle_utility_at_closed_form_matches_bracket_value() {
        let m = MarketParams::baseline();
        let ladder = one_period_ladder();
        let ctx = ladder.context(0, 1, 0.6);
        let quotes = [optimal_quotes(&ctx)];
        let dealers = mono();
        let br = best_response(&m, &dealers, &quotes, 1, 0.6);
        let st = br.state;
        let v = ladder.one_period_value(0, &st, 100.0, &quotes, 0.6, m.dt).unwrap();
        assert_relative_eq!(br.expected_utility(quotes[0]), v, max_relative = 1e-12);
    }

    #[test]
    fn single_step_dp_matches_one_period_value() {
        let m = MarketParams::baseline();
        let tail = PeriodLadder::new(m, mono(), TimeGrid::new(0.005, 0.005, 1), BracketDenominator::WithGamma);
        let dp = exact_small_dp(&tail, 0, &[0], DEFAULT_Q_MAX).unwrap();
        for q in dp.inventory_range(0) {
            let ctx = tail.context(0, q, 0.005);
            let quotes = [optimal_quotes(&ctx)];
            let st = DealerState {
                q,
                x: 1.0,
                fills_ask: 0,
                fills_bid: 0,
            };
            let v = tail.one_period_value(0, &st, 100.0, &quotes, 0.005, 0.005).unwrap();
            assert_relative_eq!(dp.value(q, 0, 1.0, 100.0), v, max_relative = 1e-12);
        }
    }

    #[test]
    fn dp_without_flow_is_inactive() {
        let m = MarketParams {
            a_rate: 0.0,
            horizon: 0.05,
            ..MarketParams::baseline()
        };
        let ladder = PeriodLadder::new(m, mono(), m.grid().unwrap(), BracketDenominator::WithGamma);
        let dp = exact_small_dp(&ladder, 0, &[0], DEFAULT_Q_MAX).unwrap();
        for (q, l, ratio) in dp.cells() {
            assert_relative_eq!(ratio, 1.0, max_relative = 1e-12);
            assert!(!dp.trades(q, l));
        }
    }

    #[test]
    fn dp_rejects_unbounded_paths() {
        let m = mono_market(0.1);
        let ladder = PeriodLadder::new(m, mono(), m.grid().unwrap(), BracketDenominator::WithGamma);
        assert!(matches!(
            exact_small_dp(&ladder, 0, &[0], DEFAULT_Q_MAX),
            Err(LadderError::InventoryBoundHit { .. })
        ));
        let big = PeriodLadder::new(m, mono(), TimeGrid::new(0.3, 0.005, 60), BracketDenominator::WithGamma);
        assert!(matches!(exact_small_dp(&big, 0, &[0], 100), Err(LadderError::TooManySteps(60))));
    }

    #[test]
    fn dp_beats_inactive_on_every_trading_cell() {
        let m = mono_market(0.1);
        let ladder = PeriodLadder::new(m, mono(), m.grid().unwrap(), BracketDenominator::WithGamma);
        let dp = exact_small_dp(&ladder, 0, &[0], 20).unwrap();
        let mut checked = 0;
        for (q, l, ratio) in dp.cells() {
            assert!(dp.trades(q, l));
            assert!(ratio < 1.0, "q = {q}, l = {l}, ratio = {ratio}");
            checked += 1;
        }
        assert_eq!(checked, (0..20).map(|l| 2 * l + 1).sum::<usize>());
    }
}
