use crate::error::{ModelError, Result};

/// Time-indexed equilibrium quantities.
///
/// Row `i` is period `start + i`. `rate[i]` is the gross risk-free rate
/// between that period and the next. Columns a model does not define are
/// `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumPath {
    pub start: i64,
    pub price: Vec<f64>,
    pub dividend: Vec<f64>,
    pub rate: Option<Vec<f64>>,
    pub wealth: Option<Vec<f64>>,
    /// Beginning-of-period aggregate capital K_t.
    pub capital: Option<Vec<f64>>,
    /// Share of savings flowing to capital.
    pub phi: Option<Vec<f64>>,
}

impl EquilibriumPath {
    /// A path with only prices and dividends.
    pub fn new(start: i64, price: Vec<f64>, dividend: Vec<f64>) -> Self {
        debug_assert_eq!(price.len(), dividend.len());
        Self {
            start,
            price,
            dividend,
            rate: None,
            wealth: None,
            capital: None,
            phi: None,
        }
    }

    pub fn len(&self) -> usize {
        self.price.len()
    }

    pub fn is_empty(&self) -> bool {
        self.price.is_empty()
    }

    pub fn time(&self, row: usize) -> i64 {
        self.start + row as i64
    }

    /// Row index of period `t`, if it is on the path.
    pub fn row(&self, t: i64) -> Option<usize> {
        let r = t - self.start;
        (r >= 0 && (r as usize) < self.len()).then_some(r as usize)
    }

    pub fn price_at(&self, t: i64) -> Option<f64> {
        self.row(t).map(|r| self.price[r])
    }

    pub fn rates(&self) -> Result<&[f64]> {
        self.rate.as_deref().ok_or(ModelError::MissingData("rate"))
    }

    pub fn price_rent(&self) -> Vec<f64> {
        self.price
            .iter()
            .zip(&self.dividend)
            .map(|(p, d)| p / d)
            .collect()
    }

    pub fn dividend_yield(&self) -> Vec<f64> {
        self.price
            .iter()
            .zip(&self.dividend)
            .map(|(p, d)| d / p)
            .collect()
    }

    /// Rows from `from` onwards, keeping the time index.
    pub fn slice_from(&self, from: usize) -> Self {
        let cut = |v: &Option<Vec<f64>>| v.as_ref().map(|v| v[from..].to_vec());
        Self {
            start: self.time(from),
            price: self.price[from..].to_vec(),
            dividend: self.dividend[from..].to_vec(),
            rate: cut(&self.rate),
            wealth: cut(&self.wealth),
            capital: cut(&self.capital),
            phi: cut(&self.phi),
        }
    }
}
