//! Dividend-paying OLG economy where the young save their whole asset
//! demand in a single long-lived asset: the price is `beta a_t` and the
//! bubble question reduces to the summability of `D_t / a_t`.

use crate::error::{check, Result};
use crate::path::EquilibriumPath;
use crate::recur::{classify_series, SeriesClass, SeriesVerdict, MIN_SERIES_HORIZON};
use crate::seq::Sequence;

pub const DEFAULT_HORIZON: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct WilsonParams {
    pub beta: f64,
    pub young_endow: Sequence,
    pub dividend: Sequence,
}

impl WilsonParams {
    pub fn new(beta: f64, young_endow: Sequence, dividend: Sequence) -> Result<Self> {
        let p = Self {
            beta,
            young_endow,
            dividend,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check(self.beta > 0.0 && self.beta < 1.0, "beta", self.beta, "0 < beta < 1")?;
        let n = |s: &Sequence| s.available().unwrap_or(1);
        self.young_endow.check_positive("young_endow", n(&self.young_endow))?;
        self.dividend.check_positive("dividend", n(&self.dividend))
    }
}

/// Rows `t = 0..=horizon` with `P_t = beta a_t`.
///
/// The rate column is `(P_{t+1} + D_{t+1}) / P_t`, so explicit sequences
/// need `horizon + 2` terms.
pub fn wilson_path(p: &WilsonParams, horizon: usize) -> Result<EquilibriumPath> {
    p.validate()?;
    let a = p.young_endow.take("young_endow", horizon + 2)?;
    let d = p.dividend.take("dividend", horizon + 2)?;
    let price: Vec<f64> = a.iter().map(|x| p.beta * x).collect();
    let rate = (0..=horizon)
        .map(|t| (price[t + 1] + d[t + 1]) / price[t])
        .collect();
    let mut path = EquilibriumPath::new(
        0,
        price[..=horizon].to_vec(),
        d[..=horizon].to_vec(),
    );
    path.rate = Some(rate);
    Ok(path)
}

/// Classifies `sum_t D_t / a_t`; convergent means the equilibrium is bubbly.
///
/// When both sequences are generators the ratio test is decided from their
/// asymptotic forms. Otherwise the terms `t = 1..=horizon` go through the
/// numeric tail test.
pub fn wilson_bubble_test(p: &WilsonParams, horizon: usize) -> Result<SeriesClass> {
    p.validate()?;
    if horizon < MIN_SERIES_HORIZON {
        return Err(crate::error::ModelError::HorizonTooShort {
            horizon,
            min: MIN_SERIES_HORIZON,
        });
    }
    if let (Some((ga, ka)), Some((gd, kd))) =
        (p.young_endow.asymptotic(), p.dividend.asymptotic())
    {
        let g = gd / ga;
        let k = kd - ka;
        let verdict = if (g - 1.0).abs() > f64::EPSILON * 4.0 {
            if g < 1.0 {
                SeriesVerdict::Convergent
            } else {
                SeriesVerdict::Divergent
            }
        } else if k < -1.0 {
            SeriesVerdict::Convergent
        } else {
            SeriesVerdict::Divergent
        };
        return Ok(SeriesClass::exact(verdict, g, -k));
    }
    let a = p.young_endow.take("young_endow", horizon + 1)?;
    let d = p.dividend.take("dividend", horizon + 1)?;
    classify_series(|t| d[t] / a[t], horizon)
}

/// The counterfactual rate, dividend growth and endowment growth compared
/// by the necessity condition `R < G_d < G`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NecessityReport {
    pub autarky_rate: f64,
    pub dividend_growth: f64,
    pub growth: f64,
    pub holds: bool,
}

/// Necessity condition for a Cobb-Douglas economy with positive old-age
/// endowment `b`. The autarky rate is the marginal rate of substitution
/// `(1-beta) b / (beta a)` at the endowment point.
pub fn necessity_report(
    beta: f64,
    young: f64,
    old: f64,
    growth: f64,
    dividend_growth: f64,
) -> Result<NecessityReport> {
    check(beta > 0.0 && beta < 1.0, "beta", beta, "0 < beta < 1")?;
    check(young > 0.0, "young_endow", young, "a > 0")?;
    check(old > 0.0, "old_endow", old, "b > 0")?;
    check(growth > 0.0, "growth", growth, "G > 0")?;
    check(dividend_growth > 0.0, "dividend_growth", dividend_growth, "G_d > 0")?;
    let autarky_rate = (1.0 - beta) * old / (beta * young);
    Ok(NecessityReport {
        autarky_rate,
        dividend_growth,
        growth,
        holds: autarky_rate < dividend_growth && dividend_growth < growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometric(scale: f64, growth: f64) -> Sequence {
        Sequence::Geometric { scale, growth }
    }

    fn linear() -> Sequence {
        Sequence::Polynomial {
            scale: 1.0,
            power: 1.0,
        }
    }

    #[test]
    fn prices_follow_endowments() {
        let p = WilsonParams::new(0.5, geometric(1.0, 2.0), Sequence::constant(1.0)).unwrap();
        let path = wilson_path(&p, 10).unwrap();
        assert_eq!(path.price[3], 4.0);
        assert_eq!(path.dividend_yield()[3], 0.25);
        assert_eq!(path.price[0], 0.5);

        let q = WilsonParams::new(0.5, linear(), Sequence::constant(1.0)).unwrap();
        assert_eq!(wilson_path(&q, 20).unwrap().price[9], 5.0);
    }

    #[test]
    fn budget_identity_and_rates() {
        let p = WilsonParams::new(0.3, geometric(2.0, 1.05), geometric(0.5, 1.01)).unwrap();
        let path = wilson_path(&p, 200).unwrap();
        let a = p.young_endow.take("a", 201).unwrap();
        for t in 0..=200 {
            let young_consumption = (1.0 - p.beta) * a[t];
            assert!((young_consumption + path.price[t] - a[t]).abs() <= 1e-15 * a[t]);
        }
        let r = path.rates().unwrap();
        for t in 0..200 {
            let lhs = path.price[t] * r[t];
            let rhs = path.price[t + 1] + path.dividend[t + 1];
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn bubble_tests() {
        let bubbly = WilsonParams::new(0.5, geometric(1.0, 2.0), Sequence::constant(1.0)).unwrap();
        assert_eq!(
            wilson_bubble_test(&bubbly, DEFAULT_HORIZON).unwrap().verdict,
            SeriesVerdict::Convergent
        );
        let harmonic = WilsonParams::new(0.5, linear(), Sequence::constant(1.0)).unwrap();
        assert_eq!(
            wilson_bubble_test(&harmonic, DEFAULT_HORIZON).unwrap().verdict,
            SeriesVerdict::Divergent
        );
        let same = WilsonParams::new(0.5, geometric(3.0, 1.1), geometric(3.0, 1.1)).unwrap();
        assert_eq!(
            wilson_bubble_test(&same, DEFAULT_HORIZON).unwrap().verdict,
            SeriesVerdict::Divergent
        );
        let square = Sequence::Polynomial {
            scale: 1.0,
            power: 2.0,
        };
        let fast = WilsonParams::new(0.5, square, Sequence::constant(1.0)).unwrap();
        assert_eq!(
            wilson_bubble_test(&fast, DEFAULT_HORIZON).unwrap().verdict,
            SeriesVerdict::Convergent
        );
        assert!(wilson_bubble_test(&fast, 10).is_err());
    }

    #[test]
    fn exact_and_numeric_tests_agree() {
        let cases = [
            (geometric(1.0, 1.3), Sequence::constant(1.0)),
            (linear(), Sequence::constant(1.0)),
            (geometric(1.0, 1.05), geometric(1.0, 1.02)),
            (geometric(1.0, 1.02), geometric(1.0, 1.05)),
            (geometric(2.0, 1.03), geometric(1.0, 1.03)),
        ];
        for (a, d) in cases {
            let n = 2001;
            let exact = WilsonParams::new(0.5, a.clone(), d.clone()).unwrap();
            let listed = WilsonParams::new(
                0.5,
                Sequence::Explicit(a.take("a", n).unwrap()),
                Sequence::Explicit(d.take("d", n).unwrap()),
            )
            .unwrap();
            assert_eq!(
                wilson_bubble_test(&exact, 2000).unwrap().verdict,
                wilson_bubble_test(&listed, 2000).unwrap().verdict,
            );
        }
    }

    #[test]
    fn necessity_with_slow_dividends() {
        let p = WilsonParams::new(0.5, geometric(1.0, 1.05), geometric(1.0, 1.02)).unwrap();
        assert_eq!(
            wilson_bubble_test(&p, DEFAULT_HORIZON).unwrap().verdict,
            SeriesVerdict::Convergent
        );
        let rep = necessity_report(0.5, 3.0, 1.0, 1.05, 1.02).unwrap();
        assert!((rep.autarky_rate - 1.0 / 3.0).abs() < 1e-15);
        assert!(rep.holds);
        assert!(!necessity_report(0.5, 1.0, 2.0, 1.05, 1.02).unwrap().holds);
        assert!(necessity_report(0.5, 1.0, 0.0, 1.05, 1.02).is_err());
    }

    #[test]
    fn short_explicit_lists_are_rejected() {
        let p = WilsonParams::new(
            0.5,
            Sequence::Explicit(vec![1.0; 5]),
            Sequence::constant(1.0),
        )
        .unwrap();
        assert!(wilson_path(&p, 3).is_ok());
        assert!(wilson_path(&p, 4).is_err());
        assert!(WilsonParams::new(0.5, Sequence::Explicit(vec![1.0, -1.0]), Sequence::constant(1.0)).is_err());
    }
}
