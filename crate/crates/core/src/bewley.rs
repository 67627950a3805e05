//! Two infinitely-lived agents with alternating endowments and a pure
//! bubble asset that cannot be shorted.

use crate::error::{check, ModelError, Result};
use crate::path::EquilibriumPath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BewleyParams {
    pub beta: f64,
    /// Relative risk aversion.
    pub gamma: f64,
    /// Gross endowment growth.
    pub growth: f64,
    pub rich_endow: f64,
    pub poor_endow: f64,
}

impl BewleyParams {
    pub fn new(beta: f64, gamma: f64, growth: f64, rich_endow: f64, poor_endow: f64) -> Result<Self> {
        let p = Self {
            beta,
            gamma,
            growth,
            rich_endow,
            poor_endow,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.beta > 0.0, "beta", self.beta, "beta > 0")?;
        check(self.gamma > 0.0, "gamma", self.gamma, "gamma > 0")?;
        check(self.growth > 0.0, "growth", self.growth, "G > 0")?;
        check(self.poor_endow > 0.0, "b", self.poor_endow, "b > 0")?;
        check(
            self.rich_endow > self.poor_endow,
            "a",
            self.rich_endow,
            "a > b",
        )
    }

    /// `beta G^(1-gamma)`; must be below 1 for optimality.
    pub fn effective_discount(&self) -> f64 {
        self.beta * self.growth.powf(1.0 - self.gamma)
    }

    pub fn marginal_utility(&self, c: f64) -> f64 {
        if self.gamma == 1.0 {
            1.0 / c
        } else {
            c.powf(-self.gamma)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Existence {
    Exists,
    /// `beta G^(1-gamma) >= 1`.
    TransversalityFails,
    /// `b >= (beta G^(1-gamma))^(1/gamma) a`.
    PriceNotPositive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BewleyEquilibrium {
    /// `p` in `P_t = p G^t`.
    pub price_level: f64,
    pub exists: bool,
    pub existence: Existence,
    pub effective_discount: f64,
}

/// Solves the rich agent's Euler equation for the detrended price.
pub fn bewley_price(p: &BewleyParams) -> BewleyEquilibrium {
    let disc = p.effective_discount();
    let k = if p.gamma == 1.0 {
        disc
    } else {
        disc.powf(1.0 / p.gamma)
    };
    let price_level = (k * p.rich_endow - p.poor_endow) / (1.0 + k);
    let existence = if !(disc < 1.0) {
        Existence::TransversalityFails
    } else if !(p.poor_endow < k * p.rich_endow) {
        Existence::PriceNotPositive
    } else {
        Existence::Exists
    };
    BewleyEquilibrium {
        price_level,
        exists: existence == Existence::Exists,
        existence,
        effective_discount: disc,
    }
}

impl BewleyEquilibrium {
    pub fn path(&self, p: &BewleyParams, horizon: usize) -> EquilibriumPath {
        let price: Vec<f64> = (0..=horizon)
            .map(|t| self.price_level * p.growth.powi(t as i32))
            .collect();
        let n = price.len();
        let mut path = EquilibriumPath::new(0, price, vec![0.0; n]);
        path.rate = Some(vec![p.growth; n]);
        path
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BewleyDiagnostics {
    pub max_rich_residual: f64,
    /// Smallest relative slack of the poor agent's inequality.
    pub min_poor_slack: f64,
    pub transversality_holds: bool,
}

/// Checks both first-order conditions each period up to `horizon`.
///
/// The rich residual is relative:
/// `|u'(c^r_t) P_t - beta u'(c^p_{t+1}) P_{t+1}| / (u'(c^r_t) P_t)`.
pub fn bewley_validate(
    eq: &BewleyEquilibrium,
    p: &BewleyParams,
    horizon: usize,
) -> Result<BewleyDiagnostics> {
    if !eq.exists {
        return Err(ModelError::NoBubble);
    }
    let (a, b, g, pl) = (p.rich_endow, p.poor_endow, p.growth, eq.price_level);
    let mut max_rich: f64 = 0.0;
    let mut min_slack = f64::INFINITY;
    for t in 0..horizon {
        let gt = g.powi(t as i32);
        let price = pl * gt;
        let next = pl * gt * g;
        let rich_now = p.marginal_utility((a - pl) * gt) * price;
        let poor_next = p.beta * p.marginal_utility((b + pl) * gt * g) * next;
        let rich_res = (rich_now - poor_next).abs() / rich_now;
        if !(rich_res <= 1e-10) {
            return Err(ModelError::FocViolation {
                agent: "rich",
                period: t,
                residual: rich_res,
            });
        }
        max_rich = max_rich.max(rich_res);

        let poor_now = p.marginal_utility((b + pl) * gt) * price;
        let rich_next = p.beta * p.marginal_utility((a - pl) * gt * g) * next;
        let slack = (poor_now - rich_next) / poor_now;
        if slack < -1e-12 {
            return Err(ModelError::FocViolation {
                agent: "poor",
                period: t,
                residual: slack,
            });
        }
        min_slack = min_slack.min(slack);
    }
    Ok(BewleyDiagnostics {
        max_rich_residual: max_rich,
        min_poor_slack: min_slack,
        transversality_holds: eq.effective_discount < 1.0,
    })
}
