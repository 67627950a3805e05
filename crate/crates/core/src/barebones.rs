//! Two-sector economy with land paying a constant rent and a linear capital
//! technology available to a random fraction `pi` of agents each period.
//!
//! Log utility makes aggregates exact: agents consume `1 - beta` of wealth,
//! and once every entrepreneur invests (`phi = pi`) the land price follows
//! the affine map `P_t = rho P_{t-1} + c D`.

use crate::error::{check, ModelError, Result};
use crate::path::EquilibriumPath;
use crate::recur::{classify_terms, AffineRecurrence, SeriesClass, UNIT_SLOPE_TOL, MIN_SERIES_HORIZON};
use crate::seq::Sequence;

/// Productivity within this distance of a threshold sits on it.
pub const THRESHOLD_TOL: f64 = 1e-12;
/// Relative tolerance on `R_t <= A + 1 - delta`.
pub const ARBITRAGE_TOL: f64 = 1e-10;
/// Largest pre-phase length tried by [`construct_equilibrium`].
pub const MAX_PRE_PHASE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareBonesParams {
    /// Probability of an investment opportunity.
    pub pi: f64,
    pub beta: f64,
    pub delta: f64,
    /// Capital productivity `A`.
    pub productivity: f64,
    /// Land rent `D`.
    pub rent: f64,
    pub land_supply: f64,
}

impl BareBonesParams {
    pub fn new(pi: f64, beta: f64, delta: f64, productivity: f64, rent: f64) -> Result<Self> {
        let p = Self {
            pi,
            beta,
            delta,
            productivity,
            rent,
            land_supply: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// `pi = 0.1, beta = 0.95, delta = 0.08, D = 1, X = 1` with the given `A`.
    /// Not validated.
    pub fn baseline(productivity: f64) -> Self {
        Self {
            pi: 0.1,
            beta: 0.95,
            delta: 0.08,
            productivity,
            rent: 1.0,
            land_supply: 1.0,
        }
    }

    pub fn with_land(mut self, land_supply: f64) -> Result<Self> {
        self.land_supply = land_supply;
        self.validate()?;
        Ok(self)
    }

    pub fn with_productivity(mut self, productivity: f64) -> Result<Self> {
        self.productivity = productivity;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.pi > 0.0 && self.pi < 1.0, "pi", self.pi, "0 < pi < 1")?;
        check(self.beta > 0.0 && self.beta < 1.0, "beta", self.beta, "0 < beta < 1")?;
        check((0.0..=1.0).contains(&self.delta), "delta", self.delta, "0 <= delta <= 1")?;
        check(self.productivity >= 0.0, "A", self.productivity, "A >= 0")?;
        check(self.rent > 0.0, "D", self.rent, "D > 0")?;
        check(self.land_supply > 0.0, "X", self.land_supply, "X > 0")
    }

    /// Gross return on capital `A + 1 - delta`.
    pub fn capital_return(&self) -> f64 {
        self.productivity + 1.0 - self.delta
    }

    fn denom(&self) -> f64 {
        1.0 - self.beta + self.beta * self.pi
    }

    /// Slope of the full-investment price map at productivity `a`.
    /// Values within [`UNIT_SLOPE_TOL`] of 1 are returned as exactly 1.
    pub fn slope_at(&self, a: f64) -> f64 {
        let rho = self.beta * self.pi * (a + 1.0 - self.delta) / self.denom();
        if (rho - 1.0).abs() <= UNIT_SLOPE_TOL {
            1.0
        } else {
            rho
        }
    }

    pub fn slope(&self) -> f64 {
        self.slope_at(self.productivity)
    }

    /// Price-map intercept per unit of rent.
    fn drift_per_rent(&self) -> f64 {
        self.beta * (1.0 - self.pi) / self.denom()
    }

    pub fn drift(&self) -> f64 {
        self.drift_per_rent() * self.rent
    }

    /// Smallest initial wealth for which full investment never violates
    /// `R_t <= A + 1 - delta`.
    pub fn wealth_bound(&self) -> f64 {
        self.rent * self.land_supply
            / (self.beta * (1.0 - self.pi) * (1.0 - self.beta) * self.capital_return())
    }

    /// Smallest initial wealth consistent with nonnegative initial capital
    /// under full investment.
    pub fn min_wealth(&self) -> f64 {
        self.rent * self.land_supply / self.denom()
    }

    /// Land price implied by wealth under full investment.
    pub fn price_from_wealth(&self, w: f64) -> f64 {
        self.beta * (1.0 - self.pi) * w / self.land_supply
    }

    pub fn wealth_from_price(&self, p: f64) -> f64 {
        p * self.land_supply / (self.beta * (1.0 - self.pi))
    }

    pub fn recurrence(&self, p0: f64) -> Result<AffineRecurrence> {
        AffineRecurrence::new(self.slope(), self.drift(), p0)
    }

    /// The bubbleless steady-state rate at this `A`, evaluated even where
    /// that steady state does not exist.
    pub fn fundamental_rate(&self) -> f64 {
        (1.0 - self.beta * self.pi * self.capital_return()) / (self.beta * (1.0 - self.pi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub a_low: f64,
    pub a_high: f64,
}

pub fn thresholds(p: &BareBonesParams) -> Thresholds {
    Thresholds {
        a_low: (1.0 - p.beta) / p.beta + p.delta,
        a_high: (1.0 - p.beta) / (p.beta * p.pi) + p.delta,
    }
}

/// Upper threshold when rents grow at gross rate `growth`.
pub fn threshold_high_with_growth(p: &BareBonesParams, growth: f64) -> f64 {
    (1.0 - p.beta) / (p.beta * p.pi) + growth - 1.0 + p.delta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    LandOnly,
    FundamentalBalanced,
    BoundaryNoBubble,
    BubblyUnbalanced,
}

impl Regime {
    pub fn is_bubbly(self) -> bool {
        self == Regime::BubblyUnbalanced
    }

    pub fn name(self) -> &'static str {
        match self {
            Regime::LandOnly => "land_only",
            Regime::FundamentalBalanced => "fundamental_balanced",
            Regime::BoundaryNoBubble => "boundary_no_bubble",
            Regime::BubblyUnbalanced => "bubbly_unbalanced",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn regime_of(p: &BareBonesParams, th: &Thresholds) -> Regime {
    let a = p.productivity;
    if a <= th.a_low + THRESHOLD_TOL {
        Regime::LandOnly
    } else if a < th.a_high - THRESHOLD_TOL {
        Regime::FundamentalBalanced
    } else if a <= th.a_high + THRESHOLD_TOL {
        Regime::BoundaryNoBubble
    } else {
        Regime::BubblyUnbalanced
    }
}

/// `(R, G_d, G)` of the necessity condition `R < G_d < G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecessityTriple {
    pub rate: f64,
    pub dividend_growth: f64,
    pub growth: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    pub thresholds: Thresholds,
    pub slope: f64,
    pub necessity: NecessityTriple,
}

pub fn classify_regime(p: &BareBonesParams) -> RegimeReport {
    let th = thresholds(p);
    let regime = regime_of(p, &th);
    let slope = p.slope();
    let rate = if regime == Regime::LandOnly {
        1.0 / p.beta
    } else {
        p.fundamental_rate()
    };
    let growth = slope.max(1.0);
    RegimeReport {
        regime,
        thresholds: th,
        slope,
        necessity: NecessityTriple {
            rate,
            dividend_growth: 1.0,
            growth,
            holds: rate < 1.0 && 1.0 < growth,
        },
    }
}

/// Long-run gross rate: `1/beta`, the bubbleless rate, or the growth factor
/// of the bubbly price.
pub fn longrun_rate(p: &BareBonesParams) -> f64 {
    let th = thresholds(p);
    match regime_of(p, &th) {
        Regime::LandOnly => 1.0 / p.beta,
        Regime::FundamentalBalanced => p.fundamental_rate(),
        Regime::BoundaryNoBubble | Regime::BubblyUnbalanced => p.slope(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub rate: f64,
    pub price: f64,
    pub phi: f64,
    pub capital: f64,
    pub wealth: f64,
    pub regime: Regime,
    /// `A` sits on the lower threshold, where any `phi` in `[0, pi]` works;
    /// `phi = 0` is reported.
    pub phi_indeterminate: bool,
}

pub fn steady_state(p: &BareBonesParams) -> Result<SteadyState> {
    p.validate()?;
    let th = thresholds(p);
    let regime = regime_of(p, &th);
    let (d, x) = (p.rent, p.land_supply);
    match regime {
        Regime::LandOnly => {
            let rate = 1.0 / p.beta;
            let price = d / (rate - 1.0);
            Ok(SteadyState {
                rate,
                price,
                phi: 0.0,
                capital: 0.0,
                wealth: (price + d) * x,
                regime,
                phi_indeterminate: (p.productivity - th.a_low).abs() <= THRESHOLD_TOL,
            })
        }
        Regime::FundamentalBalanced => {
            let rate = p.fundamental_rate();
            let price = d / (rate - 1.0);
            let wealth = p.wealth_from_price(price);
            Ok(SteadyState {
                rate,
                price,
                phi: p.pi,
                capital: p.beta * p.pi * wealth,
                wealth,
                regime,
                phi_indeterminate: false,
            })
        }
        _ => Err(ModelError::NoSteadyState {
            productivity: p.productivity,
            threshold: th.a_high,
        }),
    }
}

/// The steady state repeated over rows `0..=horizon`.
pub fn steady_state_path(p: &BareBonesParams, horizon: usize) -> Result<EquilibriumPath> {
    let s = steady_state(p)?;
    let n = horizon + 1;
    let mut path = EquilibriumPath::new(0, vec![s.price; n], vec![p.rent; n]);
    path.rate = Some(vec![s.rate; n]);
    path.wealth = Some(vec![s.wealth; n]);
    path.capital = Some(vec![s.capital; n]);
    path.phi = Some(vec![s.phi; n]);
    Ok(path)
}

/// A full-investment path with the arbitrage slack
/// `A_{t+1} + 1 - delta - R_t` of every row.
#[derive(Debug, Clone, PartialEq)]
pub struct FullInvestmentPath {
    pub path: EquilibriumPath,
    pub arbitrage_slack: Vec<f64>,
    /// Capital return `A_{t+1} + 1 - delta` faced by savings at each row.
    pub capital_return: Vec<f64>,
}

impl FullInvestmentPath {
    /// Periods where the rate exceeds the capital return beyond tolerance.
    pub fn violations(&self) -> Vec<i64> {
        self.arbitrage_slack
            .iter()
            .zip(&self.capital_return)
            .enumerate()
            .filter(|(_, (s, rk))| **s < -ARBITRAGE_TOL * **rk)
            .map(|(i, _)| self.path.time(i))
            .collect()
    }

    fn first_violation(&self) -> Option<ModelError> {
        let row = self.violations().first().map(|&t| (t - self.path.start) as usize)?;
        Some(ModelError::ArbitrageViolated {
            t: self.path.time(row),
            rate: self.path.rate.as_ref().map_or(f64::NAN, |r| r[row]),
            capital_return: self.capital_return[row],
        })
    }
}

/// Iterates the full-investment dynamics from `p0`.
///
/// `a` and `d` hold `A_t` and `D_t` for `t = 0..=horizon + 1`; the extra
/// term gives the last row its rate. Capital installed at `t - 1` earns
/// `A_t + 1 - delta` at `t`.
fn full_investment(
    p: &BareBonesParams,
    a: &[f64],
    d: &[f64],
    p0: f64,
    horizon: usize,
) -> FullInvestmentPath {
    debug_assert!(a.len() >= horizon + 2 && d.len() >= horizon + 2);
    let c = p.drift_per_rent();
    let mut price = Vec::with_capacity(horizon + 2);
    price.push(p0);
    for t in 1..=horizon + 1 {
        let prev = price[t - 1];
        price.push(p.slope_at(a[t]) * prev + c * d[t]);
    }
    let rows = horizon + 1;
    let wealth: Vec<f64> = price[..rows].iter().map(|&x| p.wealth_from_price(x)).collect();
    let mut capital = Vec::with_capacity(rows);
    capital.push((wealth[0] - (p0 + d[0]) * p.land_supply) / (a[0] + 1.0 - p.delta));
    capital.extend(wealth[..rows - 1].iter().map(|w| p.beta * p.pi * w));
    let rate: Vec<f64> = (0..rows).map(|t| (price[t + 1] + d[t + 1]) / price[t]).collect();
    let capital_return: Vec<f64> = (0..rows).map(|t| a[t + 1] + 1.0 - p.delta).collect();
    let arbitrage_slack = capital_return.iter().zip(&rate).map(|(k, r)| k - r).collect();

    let mut path = EquilibriumPath::new(0, price[..rows].to_vec(), d[..rows].to_vec());
    path.rate = Some(rate);
    path.wealth = Some(wealth);
    path.capital = Some(capital);
    path.phi = Some(vec![p.pi; rows]);
    FullInvestmentPath {
        path,
        arbitrage_slack,
        capital_return,
    }
}

fn constant_inputs(p: &BareBonesParams, horizon: usize) -> (Vec<f64>, Vec<f64>) {
    (vec![p.productivity; horizon + 2], vec![p.rent; horizon + 2])
}

/// Land price dynamics under full investment from an arbitrary `P_0`.
///
/// Nothing is rejected: the arbitrage slack is returned for inspection.
/// Starting prices below `beta (1-pi) W0bar / X` produce early periods in
/// which the rate exceeds the return on capital.
pub fn price_dynamics(p: &BareBonesParams, p0: f64, horizon: usize) -> Result<FullInvestmentPath> {
    p.validate()?;
    check(p0 > 0.0, "p0", p0, "P0 > 0")?;
    let (a, d) = constant_inputs(p, horizon);
    Ok(full_investment(p, &a, &d, p0, horizon))
}

fn assert_investment(path: &EquilibriumPath) -> Result<()> {
    if let Some(phi) = &path.phi {
        if let Some((i, &v)) = phi.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(ModelError::InvestmentShare {
                t: path.time(i),
                phi: v,
            });
        }
    }
    Ok(())
}

fn require_capital_sector(p: &BareBonesParams) -> Result<()> {
    let th = thresholds(p);
    if p.productivity <= th.a_low + THRESHOLD_TOL {
        return Err(ModelError::ProductivityTooLow {
            productivity: p.productivity,
            threshold: th.a_low,
        });
    }
    Ok(())
}

/// Full-investment equilibrium from initial wealth `w0`, rows `0..=horizon`.
pub fn simulate_forward(p: &BareBonesParams, w0: f64, horizon: usize) -> Result<EquilibriumPath> {
    p.validate()?;
    require_capital_sector(p)?;
    let bound = p.wealth_bound();
    if !(w0 >= bound) {
        return Err(ModelError::WealthBelowBound { w0, bound });
    }
    check(
        w0 >= p.min_wealth() * (1.0 - 1e-12),
        "w0",
        w0,
        "w0 >= DX/(1-beta+beta*pi), nonnegative initial capital",
    )?;
    let (a, d) = constant_inputs(p, horizon);
    let mut out = full_investment(p, &a, &d, p.price_from_wealth(w0), horizon);
    if let Some(capital) = out.path.capital.as_mut() {
        capital[0] = capital[0].max(0.0);
    }
    if let Some(err) = out.first_violation() {
        return Err(err);
    }
    assert_investment(&out.path)?;
    Ok(out.path)
}

/// Equilibrium reached from initial capital `k0` through a pre-phase of
/// `pre_phase` periods with partial investment.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructedEquilibrium {
    pub pre_phase: usize,
    /// Wealth when full investment starts.
    pub w0: f64,
    /// Rows `-pre_phase..=horizon`.
    pub path: EquilibriumPath,
}

fn closing_wealth(p: &BareBonesParams, k0: f64, j: usize) -> f64 {
    let rk = p.capital_return();
    let dx = p.rent * p.land_supply;
    let jf = j as i32;
    let sum: f64 = (0..=j).map(|i| rk.powi(i as i32)).sum();
    p.beta.powi(jf) * (rk.powi(jf + 1) * k0 + dx * sum) / (1.0 - p.beta.powi(jf + 1) * (1.0 - p.pi))
}

/// `phi_{-i}` for a pre-phase that ends at wealth `w0`.
fn pre_phase_share(p: &BareBonesParams, w0: f64, i: usize) -> f64 {
    let rk = p.capital_return();
    let dx = p.rent * p.land_supply;
    let ii = i as i32;
    let sum: f64 = (0..i).map(|s| rk.powi(s as i32)).sum();
    1.0 - p.beta.powi(ii) * (1.0 - p.pi) - p.beta.powi(ii - 1) * dx / w0 * sum
}

/// Searches the pre-phase length upward from 0 and returns the first that
/// is consistent with `k0`, then appends the full-investment path.
pub fn construct_equilibrium(
    p: &BareBonesParams,
    k0: f64,
    horizon: usize,
) -> Result<ConstructedEquilibrium> {
    p.validate()?;
    require_capital_sector(p)?;
    check(k0 >= 0.0, "k0", k0, "K0 >= 0")?;
    let rk = p.capital_return();
    let bound = p.wealth_bound();
    for j in 0..=MAX_PRE_PHASE {
        let w0 = closing_wealth(p, k0, j);
        if !w0.is_finite() {
            break;
        }
        if !(w0 >= bound) {
            continue;
        }
        if j > 0 && !(w0 / (p.beta * rk) < bound) {
            continue;
        }
        let shares: Vec<f64> = (1..=j).map(|i| pre_phase_share(p, w0, i)).collect();
        if shares.iter().any(|&s| !(s > 0.0 && s < p.pi)) {
            continue;
        }
        return Ok(assemble(p, k0, j, w0, &shares, horizon));
    }
    Err(ModelError::NoFeasiblePrePhase {
        searched: MAX_PRE_PHASE,
    })
}

fn assemble(
    p: &BareBonesParams,
    k0: f64,
    j: usize,
    w0: f64,
    shares: &[f64],
    horizon: usize,
) -> ConstructedEquilibrium {
    let (a, d) = constant_inputs(p, horizon);
    let fwd = full_investment(p, &a, &d, p.price_from_wealth(w0), horizon).path;
    let rk = p.capital_return();
    let x = p.land_supply;

    // rows -j..=-1, oldest first
    let mut price = Vec::with_capacity(j + fwd.len());
    let mut wealth = Vec::with_capacity(j + fwd.len());
    let mut capital = Vec::with_capacity(j + fwd.len());
    let mut phi = Vec::with_capacity(j + fwd.len());
    for i in (1..=j).rev() {
        let w = w0 / (p.beta * rk).powi(i as i32);
        let share = shares[i - 1];
        wealth.push(w);
        phi.push(share);
        price.push(p.beta * (1.0 - share) * w / x);
        capital.push(if i == j {
            k0
        } else {
            p.beta * shares[i] * w / (p.beta * rk)
        });
    }
    price.extend_from_slice(&fwd.price);
    wealth.extend_from_slice(fwd.wealth.as_deref().unwrap_or_default());
    phi.extend_from_slice(fwd.phi.as_deref().unwrap_or_default());
    let mut fwd_capital = fwd.capital.clone().unwrap_or_default();
    fwd_capital[0] = if j == 0 {
        k0
    } else {
        p.beta * shares[0] * w0 / (p.beta * rk)
    };
    capital.extend_from_slice(&fwd_capital);

    let fwd_rate = fwd.rate.clone().unwrap_or_default();
    // interior investment share: arbitrage pins the rate to the capital return
    let mut rate = vec![rk; j];
    rate.extend_from_slice(&fwd_rate);

    let n = price.len();
    let mut path = EquilibriumPath::new(-(j as i64), price, vec![p.rent; n]);
    path.rate = Some(rate);
    path.wealth = Some(wealth);
    path.capital = Some(capital);
    path.phi = Some(phi);
    ConstructedEquilibrium {
        pre_phase: j,
        w0,
        path,
    }
}

/// Starts at the steady state of `base`; productivity jumps to that of
/// `shock` at `t_on` and reverts at `t_off`. Each change is unanticipated,
/// so prices follow the full-investment map with the `A` in force.
pub fn simulate_regime_switch(
    base: &BareBonesParams,
    shock: &BareBonesParams,
    t_on: usize,
    t_off: usize,
    horizon: usize,
) -> Result<FullInvestmentPath> {
    base.validate()?;
    shock.validate()?;
    let same = BareBonesParams {
        productivity: base.productivity,
        ..*shock
    };
    check(
        same == *base,
        "p_shock",
        shock.productivity,
        "shock parameters differ from the base only in A",
    )?;
    check(t_on <= t_off, "t_off", t_off as f64, "t_on <= t_off")?;
    require_capital_sector(base)?;
    require_capital_sector(shock)?;
    let s = steady_state(base)?;
    let a: Vec<f64> = (0..horizon + 2)
        .map(|t| {
            if (t_on..t_off).contains(&t) {
                shock.productivity
            } else {
                base.productivity
            }
        })
        .collect();
    let d = vec![base.rent; horizon + 2];
    let mut out = full_investment(base, &a, &d, s.price, horizon);
    if let Some(capital) = out.path.capital.as_mut() {
        capital[0] = s.capital;
    }
    assert_investment(&out.path)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeVaryingOutcome {
    pub full: FullInvestmentPath,
    pub price_rent: Vec<f64>,
    /// Smallest `rho_t / G_t` over the last 10% of rows.
    pub liminf_slope: f64,
    /// Dividend-yield series test; `None` below the minimum horizon.
    pub yield_series: Option<SeriesClass>,
}

impl TimeVaryingOutcome {
    /// Whether the tail slope of the price-rent map exceeds 1.
    pub fn bubble_predicted(&self) -> bool {
        self.liminf_slope > 1.0 + UNIT_SLOPE_TOL
    }
}

/// Full-investment dynamics with productivity `A_t` and rent `D_t` from
/// initial wealth `w0`. Periods violating the arbitrage condition are
/// flagged in the outcome rather than rejected.
pub fn simulate_timevarying(
    p: &BareBonesParams,
    productivity: &Sequence,
    rent: &Sequence,
    w0: f64,
    horizon: usize,
) -> Result<TimeVaryingOutcome> {
    p.validate()?;
    productivity.check_positive("A", horizon + 2)?;
    rent.check_positive("D", horizon + 2)?;
    let a = productivity.take("A", horizon + 2)?;
    let d = rent.take("D", horizon + 2)?;
    check(w0 > 0.0, "w0", w0, "w0 > 0")?;
    let p0 = p.price_from_wealth(w0);
    let k0 = (w0 - (p0 + d[0]) * p.land_supply) / (a[0] + 1.0 - p.delta);
    check(k0 >= -1e-12 * w0, "w0", w0, "w0 >= D0 X/(1-beta+beta*pi), nonnegative initial capital")?;
    let mut full = full_investment(p, &a, &d, p0, horizon);
    if let Some(capital) = full.path.capital.as_mut() {
        capital[0] = capital[0].max(0.0);
    }
    assert_investment(&full.path)?;

    let price_rent = full.path.price_rent();
    let tail = (horizon / 10).max(1);
    let liminf_slope = (horizon + 1 - tail..=horizon)
        .map(|t| p.slope_at(a[t]) * d[t - 1] / d[t])
        .fold(f64::INFINITY, f64::min);
    let yield_series = if horizon >= MIN_SERIES_HORIZON {
        Some(classify_terms(&full.path.dividend_yield()[1..])?)
    } else {
        None
    };
    Ok(TimeVaryingOutcome {
        full,
        price_rent,
        liminf_slope,
        yield_series,
    })
}

/// Largest relative residuals of the aggregate identities along a path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IdentityResiduals {
    /// `W_t = (A+1-delta) K_t + (P_t + D_t) X`
    pub goods: f64,
    /// `K_{t+1} + P_t X = beta W_t`
    pub savings: f64,
    /// `C_t = (1-beta) W_t` with `C_t = W_t - K_{t+1} - P_t X`
    pub consumption: f64,
    /// Rate against capital return: `R_t >= A + 1 - delta` when `phi = 0`,
    /// equality when `0 < phi < pi`, `R_t <= A + 1 - delta` when `phi = pi`.
    pub arbitrage: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        self.goods.max(self.savings).max(self.consumption).max(self.arbitrage)
    }
}

/// Checks the aggregate identities on every row that has a successor.
/// `productivity[row]` is the `A` in force at that row.
pub fn check_identities_with(
    p: &BareBonesParams,
    productivity: &[f64],
    path: &EquilibriumPath,
) -> Result<IdentityResiduals> {
    let w = path.wealth.as_deref().ok_or(ModelError::MissingData("wealth"))?;
    let k = path.capital.as_deref().ok_or(ModelError::MissingData("capital"))?;
    let phi = path.phi.as_deref().ok_or(ModelError::MissingData("phi"))?;
    let r = path.rates()?;
    let x = p.land_supply;
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
    let mut res = IdentityResiduals::default();
    for t in 0..path.len() {
        let rk = productivity[t] + 1.0 - p.delta;
        let goods = rk * k[t] + (path.price[t] + path.dividend[t]) * x;
        res.goods = res.goods.max(rel(goods, w[t]));
        if t + 1 < path.len() {
            let saved = k[t + 1] + path.price[t] * x;
            res.savings = res.savings.max(rel(saved, p.beta * w[t]));
            res.consumption = res.consumption.max(rel(w[t] - saved, (1.0 - p.beta) * w[t]));
            let rk_next = productivity[t + 1] + 1.0 - p.delta;
            let gap = if phi[t] == 0.0 {
                ((rk_next - r[t]) / rk_next).max(0.0)
            } else if phi[t] < p.pi * (1.0 - 1e-12) {
                rel(r[t], rk_next)
            } else {
                ((r[t] - rk_next) / rk_next).max(0.0)
            };
            res.arbitrage = res.arbitrage.max(gap);
        }
    }
    Ok(res)
}

pub fn check_identities(p: &BareBonesParams, path: &EquilibriumPath) -> Result<IdentityResiduals> {
    check_identities_with(p, &vec![p.productivity; path.len()], path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recur::{LimitClass, SeriesVerdict};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn thresholds_with_baseline_parameters() {
        let th = thresholds(&BareBonesParams::baseline(0.4));
        assert!(close(th.a_low, 0.132632, 1e-6));
        assert!(close(th.a_high, 0.606316, 1e-6));
        // oracle: the price map slope crosses 1 exactly at the upper threshold
        let at = BareBonesParams::baseline(th.a_high);
        assert_eq!(at.slope(), 1.0);

        let near_one = BareBonesParams::new(0.1, 1.0 - 1e-9, 0.08, 0.4, 1.0).unwrap();
        let th1 = thresholds(&near_one);
        assert!(close(th1.a_low, 0.08, 1e-8) && close(th1.a_high, 0.08, 1e-7));
        let full = BareBonesParams {
            pi: 1.0,
            ..BareBonesParams::baseline(0.4)
        };
        let th2 = thresholds(&full);
        assert_eq!(th2.a_low, th2.a_high);
    }

    #[test]
    fn slope_and_drift() {
        let p = BareBonesParams::baseline(0.4);
        assert!(close(p.slope(), 0.864828, 1e-6));
        assert!(close(p.drift(), 5.896552, 1e-6));
        assert!(close(BareBonesParams::baseline(0.7).slope(), 1.061379, 1e-6));
    }

    #[test]
    fn steady_states() {
        let s = steady_state(&BareBonesParams::baseline(0.4)).unwrap();
        assert!(close(s.rate, 1.022924, 1e-6));
        assert!(close(s.price, 43.6225, 1e-4));
        assert_eq!(s.phi, 0.1);
        // oracle: fixed point of the price map by iteration
        let p = BareBonesParams::baseline(0.4);
        let mut x = 5.0;
        for _ in 0..5000 {
            x = p.slope() * x + p.drift();
        }
        assert!(close(x, s.price, 1e-9));
        assert!(close(s.price, 1.0 / (s.rate - 1.0), 1e-9));

        let low = steady_state(&BareBonesParams::baseline(0.1)).unwrap();
        assert!(close(low.rate, 1.0 / 0.95, 1e-15));
        assert!(close(low.price, 19.0, 1e-12));
        assert_eq!(low.phi, 0.0);
        assert!(!low.phi_indeterminate);

        let edge = BareBonesParams::baseline(thresholds(&BareBonesParams::baseline(0.1)).a_low);
        assert!(steady_state(&edge).unwrap().phi_indeterminate);

        assert!(matches!(
            steady_state(&BareBonesParams::baseline(0.7)),
            Err(ModelError::NoSteadyState { .. })
        ));

        for a in [0.1, 0.3, 0.5] {
            let path = steady_state_path(&BareBonesParams::baseline(a), 10).unwrap();
            let res = check_identities(&BareBonesParams::baseline(a), &path).unwrap();
            assert!(res.max() < 1e-12, "{a}: {res:?}");
        }
    }

    #[test]
    fn regimes_and_necessity() {
        let p = BareBonesParams::baseline(0.4);
        assert_eq!(classify_regime(&p).regime, Regime::FundamentalBalanced);
        assert!(!classify_regime(&p).necessity.holds);

        let high = classify_regime(&BareBonesParams::baseline(0.7));
        assert_eq!(high.regime, Regime::BubblyUnbalanced);
        let n = high.necessity;
        assert!(close(n.rate, 0.8461 / 0.855, 1e-12));
        assert!(close(n.rate, 0.989591, 1e-6));
        assert!(n.rate < 1.0 && n.growth > 1.0 && n.holds);
        assert!(close(n.growth, 1.061379, 1e-6));

        let a_high = thresholds(&p).a_high;
        let edge = classify_regime(&BareBonesParams::baseline(a_high));
        assert_eq!(edge.regime, Regime::BoundaryNoBubble);
        assert!(!edge.necessity.holds);
        assert_eq!(classify_regime(&BareBonesParams::baseline(0.05)).regime, Regime::LandOnly);
    }

    #[test]
    fn longrun_rate_is_continuous() {
        let p = BareBonesParams::baseline(0.4);
        let th = thresholds(&p);
        assert_eq!(longrun_rate(&BareBonesParams::baseline(th.a_low)), 1.0 / 0.95);
        let rf_low = BareBonesParams::baseline(th.a_low).fundamental_rate();
        assert!(close(rf_low, 1.0 / 0.95, 1e-12));
        assert!(close(longrun_rate(&BareBonesParams::baseline(th.a_high)), 1.0, 1e-12));
        let rf_high = BareBonesParams::baseline(th.a_high).fundamental_rate();
        assert!(close(rf_high, 1.0, 1e-12));
        assert!(close(longrun_rate(&BareBonesParams::baseline(0.7)), 1.061379, 1e-6));
    }

    #[test]
    fn figure_one_dynamics() {
        let low = price_dynamics(&BareBonesParams::baseline(0.4), 5.0, 500).unwrap();
        let prices = &low.path.price;
        assert!(prices[..200].windows(2).all(|w| w[1] > w[0]));
        assert!(prices.windows(2).all(|w| w[1] >= w[0]));
        assert!(close(prices[500], 43.6225, 1e-4));
        let second: Vec<f64> = prices.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
        assert!(second[..50].iter().all(|&s| s < 0.0));
        // the figure's start sits below the arbitrage bound
        assert!(!low.violations().is_empty());

        let high = price_dynamics(&BareBonesParams::baseline(0.7), 5.0, 500).unwrap();
        let hp = &high.path.price;
        assert!(close(hp[500] / hp[499], 1.061379, 1e-6));
        let r = high.path.rates().unwrap();
        assert!(close(r[499], BareBonesParams::baseline(0.7).slope(), 1e-8));

        let p = BareBonesParams::baseline(0.4);
        let edge = BareBonesParams::baseline(thresholds(&p).a_high);
        let lin = price_dynamics(&edge, 5.0, 200).unwrap();
        for (t, &x) in lin.path.price.iter().enumerate() {
            assert!(close(x, 5.0 + edge.drift() * t as f64, 1e-9 * x));
        }
    }

    #[test]
    fn forward_simulation() {
        for a in [0.4, 0.7] {
            let p = BareBonesParams::baseline(a);
            let w0 = p.wealth_bound().max(p.min_wealth());
            let path = simulate_forward(&p, w0, 300).unwrap();
            let res = check_identities(&p, &path).unwrap();
            assert!(res.max() < 1e-10, "{a}: {res:?}");
            // oracle: closed form of the price map
            let rec = p.recurrence(path.price[0]).unwrap();
            for t in [1, 10, 100, 300] {
                let exact = rec.solve(t as u64);
                assert!(close(path.price[t], exact, 1e-10 * exact));
            }
        }
        let p = BareBonesParams::baseline(0.4);
        assert!(close(p.wealth_bound(), 17.72107, 1e-5));
        assert!(matches!(
            simulate_forward(&p, 13.0, 10),
            Err(ModelError::WealthBelowBound { .. })
        ));
        assert!(matches!(
            simulate_forward(&BareBonesParams::baseline(0.1), 100.0, 10),
            Err(ModelError::ProductivityTooLow { .. })
        ));
    }

    #[test]
    fn bound_is_the_arbitrage_condition() {
        // starting just below the bound breaks R_0 <= A + 1 - delta
        let p = BareBonesParams::baseline(0.4);
        let w = p.wealth_bound() * (1.0 - 1e-6);
        let out = price_dynamics(&p, p.price_from_wealth(w), 5).unwrap();
        assert_eq!(out.violations(), vec![0]);
        let at = price_dynamics(&p, p.price_from_wealth(p.wealth_bound()), 5).unwrap();
        assert!(at.violations().is_empty());
        assert!(close(at.arbitrage_slack[0], 0.0, 1e-12));
    }

    #[test]
    fn backward_construction() {
        let p = BareBonesParams::baseline(0.7);
        let c = construct_equilibrium(&p, 0.01, 50).unwrap();
        assert_eq!(c.pre_phase, 2);
        assert!(close(c.w0, 20.894, 1e-3));
        assert_eq!(c.path.start, -2);
        let phi = c.path.phi.as_ref().unwrap();
        assert!(close(phi[0], 0.0686, 1e-4) && close(phi[1], 0.0971, 1e-4));
        let res = check_identities(&p, &c.path).unwrap();
        assert!(res.max() < 1e-10, "{res:?}");
        let r = c.path.rates().unwrap();
        for row in 0..2 {
            assert!(close(r[row], p.capital_return(), 1e-12));
        }
        // one-step recursion 1 - phi_t = beta (1 - phi_{t+1}) + DX / W_{t+1}
        let w = c.path.wealth.as_ref().unwrap();
        for row in 0..2 {
            let lhs = 1.0 - phi[row];
            let rhs = p.beta * (1.0 - phi[row + 1]) + p.rent * p.land_supply / w[row + 1];
            assert!(close(lhs, rhs, 1e-12));
        }

        let rich = construct_equilibrium(&p, 50.0, 20).unwrap();
        assert_eq!(rich.pre_phase, 0);
        let direct = simulate_forward(&p, rich.w0, 20).unwrap();
        assert_eq!(rich.path.price, direct.price);
        assert!(check_identities(&p, &rich.path).unwrap().max() < 1e-10);
    }

    #[test]
    fn regime_switch() {
        let base = BareBonesParams::baseline(0.4);
        let steady = steady_state(&base).unwrap().price;
        for (a, convex) in [(0.5, false), (0.7, true)] {
            let shock = BareBonesParams::baseline(a);
            let out = simulate_regime_switch(&base, &shock, 1, 11, 200).unwrap();
            let pr = &out.path.price;
            for t in 1..10 {
                let second = pr[t + 1] - 2.0 * pr[t] + pr[t - 1];
                assert_eq!(second > 0.0, convex, "A={a} t={t}");
            }
            assert!(pr[10] > pr[11]);
            assert!((pr[200] - steady).abs() < (pr[11] - steady).abs() * 1e-6);
        }
        let half = simulate_regime_switch(&base, &BareBonesParams::baseline(0.5), 1, 11, 20).unwrap();
        assert!(half.path.price[10] < 84.654);
        let none = simulate_regime_switch(&base, &BareBonesParams::baseline(0.7), 5, 5, 50).unwrap();
        assert!(none.path.price.iter().all(|&x| close(x, steady, 1e-10 * steady)));
        assert!(simulate_regime_switch(&BareBonesParams::baseline(0.7), &base, 1, 2, 10).is_err());
        let mut other = BareBonesParams::baseline(0.7);
        other.beta = 0.9;
        assert!(simulate_regime_switch(&base, &other, 1, 2, 10).is_err());
    }

    #[test]
    fn steady_price_at_half() {
        let p = BareBonesParams::baseline(0.5);
        assert!(close(p.slope(), 0.930345, 1e-6));
        assert!(close(steady_state(&p).unwrap().price, 84.654, 1e-3));
    }

    #[test]
    fn timevarying_growth_boundary() {
        let p = BareBonesParams::baseline(0.4);
        let g = 1.02;
        assert!(close(threshold_high_with_growth(&p, g), 0.626316, 1e-6));
        let rent = Sequence::Geometric { scale: 1.0, growth: g };
        for (a, bubbly) in [(0.60, false), (0.65, true)] {
            let q = BareBonesParams::baseline(a);
            let w0 = 2.0 * q.wealth_bound().max(q.min_wealth());
            let out = simulate_timevarying(&q, &Sequence::constant(a), &rent, w0, 2000).unwrap();
            assert_eq!(out.bubble_predicted(), bubbly);
            let verdict = out.yield_series.unwrap().verdict;
            let expect = if bubbly { SeriesVerdict::Convergent } else { SeriesVerdict::Divergent };
            assert_eq!(verdict, expect, "A={a}");
            assert!(out.full.violations().is_empty());
            // price-rent recursion
            let d = &out.full.path.dividend;
            for t in 1..out.price_rent.len() {
                let pred = q.slope() * d[t - 1] / d[t] * out.price_rent[t - 1] + q.drift_per_rent();
                assert!(close(out.price_rent[t], pred, 1e-12 * pred));
            }
            let prod = vec![a; out.full.path.len()];
            assert!(check_identities_with(&q, &prod, &out.full.path).unwrap().max() < 1e-10);
        }
    }

    #[test]
    fn timevarying_reduces_to_constant() {
        let p = BareBonesParams::baseline(0.4);
        let w0 = p.wealth_bound();
        let out = simulate_timevarying(&p, &Sequence::constant(0.4), &Sequence::constant(1.0), w0, 100).unwrap();
        let fwd = simulate_forward(&p, w0, 100).unwrap();
        assert_eq!(out.full.path.price, fwd.price);
    }

    #[test]
    fn timevarying_rising_productivity() {
        // A_t climbs from 0.4 to 0.8 over 200 periods, then stays
        let a: Vec<f64> = (0..1502).map(|t| 0.4 + 0.4 * (t as f64 / 200.0).min(1.0)).collect();
        let p = BareBonesParams::baseline(0.4);
        let out = simulate_timevarying(&p, &Sequence::Explicit(a), &Sequence::constant(1.0), 30.0, 1500).unwrap();
        assert!(out.bubble_predicted());
        assert_eq!(out.yield_series.unwrap().verdict, SeriesVerdict::Convergent);
        let pr = &out.price_rent;
        assert!(pr[50] < 100.0);
        assert!(pr[1500] > 1e10);
    }

    #[test]
    fn regime_matches_limit_class_on_grid() {
        for i in 0..200 {
            let a = 0.14 + 0.8 * i as f64 / 199.0;
            let p = BareBonesParams::baseline(a);
            let class = p.recurrence(5.0).unwrap().classify().unwrap();
            let regime = classify_regime(&p).regime;
            match regime {
                Regime::FundamentalBalanced => assert!(matches!(class, LimitClass::ConvergesTo(_))),
                Regime::BoundaryNoBubble => assert!(matches!(class, LimitClass::LinearDivergence(_))),
                Regime::BubblyUnbalanced => {
                    assert!(matches!(class, LimitClass::ExponentialDivergence(_)))
                }
                Regime::LandOnly => unreachable!(),
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn wealth_stays_above_bound(
            pi in 0.02f64..0.9,
            beta in 0.5f64..0.99,
            delta in 0.0f64..1.0,
            excess in 0.0f64..2.0,
            scale in 0.0f64..3.0,
        ) {
            let base = BareBonesParams::new(pi, beta, delta, 1.0, 1.0).unwrap();
            let a = thresholds(&base).a_low + 1e-6 + excess;
            let p = base.with_productivity(a).unwrap();
            let w0 = p.wealth_bound().max(p.min_wealth()) * (1.0 + scale);
            let path = simulate_forward(&p, w0, 200).unwrap();
            let bound = p.wealth_bound();
            for w in path.wealth.as_ref().unwrap() {
                prop_assert!(*w >= bound * (1.0 - 1e-12));
            }
            prop_assert!(path.phi.as_ref().unwrap().iter().all(|&f| f > 0.0));
            prop_assert!(check_identities(&p, &path).unwrap().max() < 1e-10);
        }
    }
}
