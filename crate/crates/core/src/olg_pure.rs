//! Two-period OLG economy with an intrinsically useless asset in unit
//! supply, and its stochastic-bubble variant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check, ModelError, Result};
use crate::par::Execution;
use crate::path::EquilibriumPath;

/// Cobb-Douglas weight `beta` on old-age consumption and the endowments
/// `a` (young) and `b` (old).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamuelsonParams {
    pub beta: f64,
    pub young_endow: f64,
    pub old_endow: f64,
}

impl SamuelsonParams {
    pub fn new(beta: f64, young_endow: f64, old_endow: f64) -> Result<Self> {
        let p = Self {
            beta,
            young_endow,
            old_endow,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.beta > 0.0 && self.beta < 1.0, "beta", self.beta, "0 < beta < 1")?;
        check(self.young_endow > 0.0, "a", self.young_endow, "a > 0")?;
        check(self.old_endow > 0.0, "b", self.old_endow, "b > 0")
    }

    /// `beta a - (1 - beta) b`, positive exactly when bubbles can exist.
    fn surplus(&self) -> f64 {
        self.beta * self.young_endow - (1.0 - self.beta) * self.old_endow
    }

    /// Slope of the recurrence in `1/P_t`.
    pub fn inverse_price_slope(&self) -> f64 {
        self.beta * self.young_endow / ((1.0 - self.beta) * self.old_endow)
    }

    /// Gross interest rate at the autarky allocation.
    pub fn autarky_rate(&self) -> f64 {
        1.0 / self.inverse_price_slope()
    }

    /// Young's consumption given the current and next price.
    pub fn young_consumption(&self, price: f64, next_price: f64) -> f64 {
        (1.0 - self.beta) * (self.young_endow + price / next_price * self.old_endow)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamuelsonEquilibriumSet {
    pub fundamental_exists: bool,
    /// Upper end of the admissible initial prices `(0, upper]`; `None` when
    /// the only equilibrium is fundamental.
    pub bubbly_upper: Option<f64>,
    pub stationary_price: Option<f64>,
}

impl SamuelsonEquilibriumSet {
    pub fn admits(&self, p0: f64) -> bool {
        matches!(self.bubbly_upper, Some(u) if p0 > 0.0 && p0 <= u)
    }
}

pub fn samuelson_equilibria(p: &SamuelsonParams) -> SamuelsonEquilibriumSet {
    let surplus = p.surplus();
    let upper = (surplus > 0.0).then_some(surplus);
    SamuelsonEquilibriumSet {
        fundamental_exists: true,
        bubbly_upper: upper,
        stationary_price: upper,
    }
}

/// Bubbly price path from `p0`, rows `t = 0..=horizon`.
///
/// Iterates `1/P_{t+1} = slope / P_t - 1/((1-beta) b)`. Starting at the
/// stationary price returns the constant path exactly, since the fixed
/// point of that recursion is unstable.
pub fn samuelson_price_path(
    p: &SamuelsonParams,
    p0: f64,
    horizon: usize,
) -> Result<EquilibriumPath> {
    p.validate()?;
    let set = samuelson_equilibria(p);
    let upper = set.bubbly_upper.unwrap_or(0.0);
    if !set.admits(p0) {
        return Err(ModelError::InadmissiblePrice { p0, upper });
    }
    let rows = horizon + 1;
    let price: Vec<f64> = if p0 == upper {
        vec![upper; rows + 1]
    } else {
        let slope = p.inverse_price_slope();
        let drift = -1.0 / ((1.0 - p.beta) * p.old_endow);
        let mut inv = 1.0 / p0;
        let mut out = Vec::with_capacity(rows + 1);
        for _ in 0..=rows {
            out.push(1.0 / inv);
            inv = slope * inv + drift;
        }
        out
    };
    let rate = price.windows(2).map(|w| w[1] / w[0]).collect();
    let mut path = EquilibriumPath::new(0, price[..rows].to_vec(), vec![0.0; rows]);
    path.rate = Some(rate);
    Ok(path)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeilParams {
    pub base: SamuelsonParams,
    /// Per-period survival probability of the bubble.
    pub survival: f64,
}

impl WeilParams {
    pub fn new(base: SamuelsonParams, survival: f64) -> Result<Self> {
        let p = Self { base, survival };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        check(
            self.survival > 0.0 && self.survival <= 1.0,
            "survival",
            self.survival,
            "0 < upsilon <= 1",
        )
    }
}

/// Stationary price of the stochastic bubble, or `None` when the survival
/// probability is too low to sustain one.
pub fn weil_stationary_price(p: &WeilParams) -> Option<f64> {
    let SamuelsonParams {
        beta,
        young_endow: a,
        old_endow: b,
    } = p.base;
    let u = p.survival;
    let num = u * beta * a - (1.0 - beta) * b;
    (num > 0.0).then(|| num / (1.0 - beta + u * beta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeilPath {
    pub path: EquilibriumPath,
    /// First period at which the asset is worthless, if within the horizon.
    pub collapse: Option<usize>,
}

/// One realization: constant price until the collapse, zero afterwards.
///
/// One uniform draw per period `t >= 1` from ChaCha8 seeded with `seed`;
/// the bubble survives period `t` when the draw is below `survival`.
pub fn weil_sample_path(p: &WeilParams, seed: u64, horizon: usize) -> Result<WeilPath> {
    p.validate()?;
    let price = weil_stationary_price(p).ok_or(ModelError::NoBubble)?;
    let collapse = collapse_time(p.survival, seed, horizon);
    let prices = (0..=horizon)
        .map(|t| match collapse {
            Some(c) if t >= c => 0.0,
            _ => price,
        })
        .collect::<Vec<_>>();
    let n = prices.len();
    Ok(WeilPath {
        path: EquilibriumPath::new(0, prices, vec![0.0; n]),
        collapse,
    })
}

fn collapse_time(survival: f64, seed: u64, horizon: usize) -> Option<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=horizon).find(|_| rng.gen::<f64>() >= survival)
}

/// Collapse times for a batch of seeds, in seed order.
pub fn weil_collapse_times(
    p: &WeilParams,
    seeds: std::ops::Range<u64>,
    horizon: usize,
    exec: Execution,
) -> Result<Vec<Option<usize>>> {
    p.validate()?;
    weil_stationary_price(p).ok_or(ModelError::NoBubble)?;
    let survival = p.survival;
    Ok(exec.map_range(seeds, |s| collapse_time(survival, s, horizon)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SamuelsonParams {
        SamuelsonParams::new(0.5, 3.0, 1.0).unwrap()
    }

    #[test]
    fn equilibrium_sets() {
        let set = samuelson_equilibria(&base());
        assert!(set.fundamental_exists);
        assert_eq!(set.bubbly_upper, Some(1.0));
        assert_eq!(set.stationary_price, Some(1.0));
        // oracle: the inverse-price map sends 1 to 1
        let p = base();
        let inv = p.inverse_price_slope() * 1.0 - 1.0 / ((1.0 - p.beta) * p.old_endow);
        assert_eq!(inv, 1.0);

        let none = samuelson_equilibria(&SamuelsonParams::new(0.5, 1.0, 2.0).unwrap());
        assert_eq!(none.bubbly_upper, None);
        let boundary = samuelson_equilibria(&SamuelsonParams::new(0.5, 3.0, 3.0).unwrap());
        assert_eq!(boundary.bubbly_upper, None);
    }

    #[test]
    fn price_paths() {
        let p = base();
        let path = samuelson_price_path(&p, 0.5, 3).unwrap();
        assert_eq!(path.len(), 4);
        assert!((path.price[1] - 0.25).abs() < 1e-15);

        let flat = samuelson_price_path(&p, 1.0, 500).unwrap();
        assert!(flat.price.iter().all(|&x| x == 1.0));
        assert!(flat.rates().unwrap().iter().all(|&r| r == 1.0));

        assert!(matches!(
            samuelson_price_path(&p, 1.5, 10),
            Err(ModelError::InadmissiblePrice { .. })
        ));
        assert!(samuelson_price_path(&p, 0.0, 10).is_err());
        let none = SamuelsonParams::new(0.5, 1.0, 2.0).unwrap();
        assert!(samuelson_price_path(&none, 0.1, 10).is_err());
    }

    #[test]
    fn price_above_interval_eventually_nonpositive() {
        // oracle: iterate the inverse recursion until it crosses zero
        let p = base();
        let mut inv = 1.0 / 1.01;
        let mut hit = false;
        for _ in 0..100 {
            inv = 3.0 * inv - 2.0;
            if inv <= 0.0 {
                hit = true;
                break;
            }
        }
        assert!(hit);
        assert!(samuelson_price_path(&p, 1.01, 10).is_err());
    }

    #[test]
    fn market_clears_and_bubble_vanishes() {
        let p = base();
        let path = samuelson_price_path(&p, 0.5, 200).unwrap();
        let r = path.rates().unwrap();
        for t in 0..path.len() {
            let next = path.price[t] * r[t];
            let y = p.young_consumption(path.price[t], next);
            assert!((y + path.price[t] - p.young_endow).abs() < 1e-12);
            assert!(path.price[t] > 0.0);
        }
        assert!(path.price[200] < 1e-6);
    }

    #[test]
    fn autarky_rate_below_one_iff_bubbles() {
        for (a, b) in [(3.0, 1.0), (1.0, 2.0), (2.0, 2.0), (1.2, 1.0)] {
            let p = SamuelsonParams::new(0.5, a, b).unwrap();
            let bubbly = samuelson_equilibria(&p).bubbly_upper.is_some();
            assert_eq!(p.autarky_rate() < 1.0, bubbly, "a={a} b={b}");
            assert!((p.autarky_rate() - (1.0 - p.beta) * b / (p.beta * a)).abs() < 1e-15);
        }
    }

    #[test]
    fn weil_prices() {
        let w = WeilParams::new(base(), 0.8).unwrap();
        let price = weil_stationary_price(&w).unwrap();
        assert!((price - 0.7 / 0.9).abs() < 1e-12);
        // oracle: young's first-order condition at x = 1
        let foc = -(1.0 - 0.5) / (3.0 - price) + 0.8 * 0.5 / (1.0 + price);
        assert!(foc.abs() < 1e-12);

        let det = WeilParams::new(base(), 1.0).unwrap();
        assert_eq!(
            weil_stationary_price(&det),
            samuelson_equilibria(&base()).stationary_price
        );
        let low = WeilParams::new(base(), 0.3).unwrap();
        assert_eq!(weil_stationary_price(&low), None);
        assert!(WeilParams::new(base(), 0.0).is_err());
        assert!(WeilParams::new(base(), 1.1).is_err());
    }

    #[test]
    fn weil_paths() {
        let det = WeilParams::new(base(), 1.0).unwrap();
        for seed in 0..20 {
            let wp = weil_sample_path(&det, seed, 300).unwrap();
            assert_eq!(wp.collapse, None);
            assert!(wp.path.price.iter().all(|&x| x == 1.0));
        }

        let w = WeilParams::new(base(), 0.8).unwrap();
        let a = weil_sample_path(&w, 7, 200).unwrap();
        let b = weil_sample_path(&w, 7, 200).unwrap();
        assert_eq!(a, b);
        let c = a.collapse.expect("collapse within 200 periods");
        assert!(c >= 1);
        assert!(a.path.price[..c].iter().all(|&x| x > 0.0));
        assert!(a.path.price[c..].iter().all(|&x| x == 0.0));

        let low = WeilParams::new(base(), 0.3).unwrap();
        assert_eq!(weil_sample_path(&low, 1, 10), Err(ModelError::NoBubble));
    }

    #[test]
    fn weil_mean_collapse_time() {
        let w = WeilParams::new(base(), 0.8).unwrap();
        let times = weil_collapse_times(&w, 0..100_000, 1000, Execution::default()).unwrap();
        assert!(times.iter().all(Option::is_some));
        let mean = times.iter().map(|t| t.unwrap() as f64).sum::<f64>() / times.len() as f64;
        let expected = 1.0 / (1.0 - 0.8);
        assert!((mean - expected).abs() < 0.02 * expected, "mean {mean}");

        let seq = weil_collapse_times(&w, 0..500, 1000, Execution::Sequential).unwrap();
        assert_eq!(seq, times[..500].to_vec());
    }
}
