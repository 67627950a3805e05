//! OLG economy with Cobb-Douglas production and a pure bubble: fundamental
//! and bubbly steady states, and the variant where only a fraction `pi` of
//! the young can run the technology.

use crate::error::{check, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiroleParams {
    pub beta: f64,
    /// Capital share.
    pub alpha: f64,
    pub delta: f64,
    pub tfp: f64,
    /// Probability of entrepreneurial ability; 1 is the baseline model.
    pub entrepreneur_prob: f64,
}

impl TiroleParams {
    pub fn new(beta: f64, alpha: f64, delta: f64, tfp: f64) -> Result<Self> {
        Self::with_entrepreneurs(beta, alpha, delta, tfp, 1.0)
    }

    pub fn with_entrepreneurs(beta: f64, alpha: f64, delta: f64, tfp: f64, pi: f64) -> Result<Self> {
        let p = Self {
            beta,
            alpha,
            delta,
            tfp,
            entrepreneur_prob: pi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.beta > 0.0 && self.beta < 1.0, "beta", self.beta, "0 < beta < 1")?;
        check(self.alpha > 0.0 && self.alpha < 1.0, "alpha", self.alpha, "0 < alpha < 1")?;
        check(self.delta > 0.0 && self.delta <= 1.0, "delta", self.delta, "0 < delta <= 1")?;
        check(self.tfp > 0.0, "A", self.tfp, "A > 0")?;
        check(
            self.entrepreneur_prob > 0.0 && self.entrepreneur_prob <= 1.0,
            "pi",
            self.entrepreneur_prob,
            "0 < pi <= 1",
        )
    }

    pub fn wage(&self, k: f64) -> f64 {
        self.tfp * (1.0 - self.alpha) * k.powf(self.alpha)
    }

    /// Gross return on capital `A alpha K^(alpha-1) + 1 - delta`.
    pub fn capital_return(&self, k: f64) -> f64 {
        self.tfp * self.alpha * k.powf(self.alpha - 1.0) + 1.0 - self.delta
    }

    /// `beta delta (1-alpha)/alpha - 1`; the bubble price is `K_b` times this.
    fn bubble_factor(&self) -> f64 {
        self.beta * self.delta * (1.0 - self.alpha) / self.alpha - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crowding {
    Out,
    In,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubblySteadyState {
    pub capital: f64,
    pub price: f64,
    /// Always 1: the return on a pure bubble in a stationary state.
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiroleSteadyStates {
    pub k_fundamental: f64,
    pub r_fundamental: f64,
    pub bubbly: Option<BubblySteadyState>,
    pub crowding: Crowding,
}

fn bubbly_state(p: &TiroleParams) -> Option<BubblySteadyState> {
    let factor = p.bubble_factor();
    // factor == 0 is the P = 0 boundary
    if factor <= crate::recur::UNIT_SLOPE_TOL {
        return None;
    }
    let capital = (p.tfp * p.alpha / p.delta).powf(1.0 / (1.0 - p.alpha));
    Some(BubblySteadyState {
        capital,
        price: capital * factor,
        rate: 1.0,
    })
}

fn crowding(k_fundamental: f64, bubbly: Option<&BubblySteadyState>) -> Crowding {
    match bubbly {
        Some(b) if b.capital > k_fundamental => Crowding::In,
        Some(b) if b.capital < k_fundamental => Crowding::Out,
        _ => Crowding::None,
    }
}

/// Steady states of the baseline model. `entrepreneur_prob` is ignored.
pub fn tirole_steady(p: &TiroleParams) -> TiroleSteadyStates {
    let k_fundamental = (p.beta * p.tfp * (1.0 - p.alpha)).powf(1.0 / (1.0 - p.alpha));
    let r_fundamental = p.alpha / (p.beta * (1.0 - p.alpha)) + 1.0 - p.delta;
    let bubbly = bubbly_state(p);
    TiroleSteadyStates {
        k_fundamental,
        r_fundamental,
        crowding: crowding(k_fundamental, bubbly.as_ref()),
        bubbly,
    }
}

/// Steady states when only a fraction `pi` of capital is productive and
/// the rest is stored at return `1 - delta`.
///
/// The bubbly state is the baseline one: unproductive agents hold the
/// bubble, productive agents hold all capital. `r_fundamental` is the
/// return on productive capital `A alpha (pi K_f)^(alpha-1) + 1 - delta`.
pub fn tirole_crowdin_steady(p: &TiroleParams) -> TiroleSteadyStates {
    let pi = p.entrepreneur_prob;
    let k_fundamental =
        (p.beta * p.tfp * (1.0 - p.alpha) * pi.powf(p.alpha)).powf(1.0 / (1.0 - p.alpha));
    let r_fundamental = p.capital_return(pi * k_fundamental);
    let bubbly = bubbly_state(p);
    TiroleSteadyStates {
        k_fundamental,
        r_fundamental,
        crowding: crowding(k_fundamental, bubbly.as_ref()),
        bubbly,
    }
}

/// Entrepreneur probability at which the fundamental capital stock equals
/// the bubbly one, found by bisection on `[1e-6, 1]`.
///
/// `None` when there is no bubbly steady state or no sign change on the
/// bracket.
pub fn crowding_crossover(p: &TiroleParams) -> Option<f64> {
    let k_bubbly = bubbly_state(p)?.capital;
    let gap = |pi: f64| {
        let q = TiroleParams {
            entrepreneur_prob: pi,
            ..*p
        };
        tirole_crowdin_steady(&q).k_fundamental - k_bubbly
    };
    let (mut lo, mut hi) = (1e-6, 1.0);
    if gap(lo) > 0.0 || gap(hi) < 0.0 {
        return None;
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}
