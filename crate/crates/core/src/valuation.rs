//! Arrow-Debreu discounting, fundamental value and the bubble component of
//! any path that carries gross rates.

use crate::error::{ModelError, Result};
use crate::path::EquilibriumPath;
use crate::recur::{classify_terms, SeriesClass, SeriesVerdict, MIN_SERIES_HORIZON};

/// Largest tail spread of rates (and dividend growth) for which the
/// geometric tail estimate is trusted.
pub const TAIL_SPREAD_TOL: f64 = 1e-6;
/// A bubble must exceed this many tail bounds to count.
pub const BOUND_MULTIPLE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Bubbly,
    Fundamental,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Bubbly => "bubbly",
            Verdict::Fundamental => "fundamental",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    pub fn is_conclusive(self) -> bool {
        self != Verdict::Inconclusive
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// State prices in logs, so long explosive paths do not underflow.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountPath {
    /// `ln q_t` for `t = 0..=len`; `ln q_0 = 0`.
    pub log_q: Vec<f64>,
}

impl DiscountPath {
    pub fn q(&self, t: usize) -> f64 {
        self.log_q[t].exp()
    }

    /// `q_{t+s} / q_t`
    pub fn ratio(&self, t: usize, s: usize) -> f64 {
        (self.log_q[t + s] - self.log_q[t]).exp()
    }

    pub fn len(&self) -> usize {
        self.log_q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_q.is_empty()
    }
}

/// `q_t = prod_{s<t} 1/R_s`, one more entry than the path has rows.
pub fn discount_factors(path: &EquilibriumPath) -> Result<DiscountPath> {
    let rates = path.rates()?;
    let mut log_q = Vec::with_capacity(rates.len() + 1);
    log_q.push(0.0);
    for (row, &r) in rates.iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(ModelError::NonPositiveRate { row, rate: r });
        }
        log_q.push(log_q[row] - r.ln());
    }
    Ok(DiscountPath { log_q })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BubbleReport {
    pub truncation: usize,
    /// `V_t` including the tail estimate, rows `0..len - truncation`.
    pub fundamental: Vec<f64>,
    /// Discounted dividends over the next `truncation` periods only.
    pub partial: Vec<f64>,
    /// `P_t - V_t`
    pub bubble: Vec<f64>,
    /// Upper bound on the neglected tail of each `V_t`.
    pub tail_bound: Vec<f64>,
    pub limiting_rate: f64,
    pub dividend_growth: f64,
    /// Largest spread of rates or dividend growth over the tail.
    pub tail_spread: f64,
    pub tail_trusted: bool,
    /// Discounted dividends do not converge: `R <= G_d` with positive rents.
    pub infinite_pv: bool,
    /// `q_t P_t` at the last row.
    pub tvc_estimate: f64,
    pub verdict: Verdict,
}

impl BubbleReport {
    pub fn bubble_share(&self, t: usize, path: &EquilibriumPath) -> f64 {
        self.bubble[t] / path.price[t]
    }
}

fn tail_window(n: usize) -> usize {
    (n / 10).max(2).min(n)
}

fn mean_and_spread(xs: &[f64]) -> (f64, f64) {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, hi - lo)
}

/// Fundamental value of every row that has `truncation` periods after it.
///
/// The tail beyond the truncation is the geometric continuation at the
/// limiting rate and dividend growth, both estimated as means over the last
/// 10% of the path. Since a bubble is either positive at every date or
/// absent, the verdict is bubbly when `P_t - V_t` exceeds three tail bounds
/// at some row, and fundamental when it stays within three tail bounds at
/// every row and those bounds are negligible against the price.
pub fn fundamental_value(path: &EquilibriumPath, truncation: usize) -> Result<BubbleReport> {
    if truncation < MIN_SERIES_HORIZON {
        return Err(ModelError::HorizonTooShort {
            horizon: truncation,
            min: MIN_SERIES_HORIZON,
        });
    }
    let n = path.len();
    if n <= truncation {
        return Err(ModelError::HorizonTooShort {
            horizon: n,
            min: truncation + 1,
        });
    }
    let disc = discount_factors(path)?;
    let rates = path.rates()?;
    let d = &path.dividend;
    if let Some((i, &v)) = d.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(ModelError::InvalidTerm { index: i, value: v });
    }

    let w = tail_window(n);
    let (limiting_rate, rate_spread) = mean_and_spread(&rates[n - w..]);
    let d_tail = &d[n - w..];
    let pays = d_tail.iter().any(|&x| x > 0.0);
    let (dividend_growth, growth_spread) = if pays && d_tail.iter().all(|&x| x > 0.0) {
        let g: Vec<f64> = d_tail.windows(2).map(|p| p[1] / p[0]).collect();
        mean_and_spread(&g)
    } else {
        (1.0, if pays { f64::INFINITY } else { 0.0 })
    };
    let tail_spread = rate_spread.max(growth_spread);
    let tail_trusted = tail_spread < TAIL_SPREAD_TOL;
    let infinite_pv = pays && limiting_rate <= dividend_growth;
    let (estimate, bound) = if !pays {
        (0.0, 0.0)
    } else if infinite_pv {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let gap = limiting_rate - dividend_growth;
        (dividend_growth / gap, limiting_rate / gap)
    };

    let m = n - truncation;
    let mut partial = vec![0.0; m];
    let last = m - 1;
    partial[last] = (1..=truncation)
        .map(|s| disc.ratio(last, s) * d[last + s])
        .sum();
    for t in (0..last).rev() {
        let dropped = disc.ratio(t + 1, truncation) * d[t + 1 + truncation];
        partial[t] = (d[t + 1] + partial[t + 1] - dropped) / rates[t];
    }

    let mut fundamental = Vec::with_capacity(m);
    let mut tail_bound = Vec::with_capacity(m);
    for (t, s) in partial.iter().enumerate() {
        let end = disc.ratio(t, truncation) * d[t + truncation];
        fundamental.push(if end == 0.0 { *s } else { s + end * estimate });
        tail_bound.push(if end == 0.0 { 0.0 } else { end * bound });
    }
    let bubble: Vec<f64> = fundamental
        .iter()
        .zip(&path.price)
        .map(|(v, p)| p - v)
        .collect();

    let verdict = if !tail_trusted || infinite_pv {
        Verdict::Inconclusive
    } else {
        let rows = || {
            bubble
                .iter()
                .zip(&tail_bound)
                .zip(&path.price)
                .map(|((b, e), p)| (*b, BOUND_MULTIPLE * e, *p))
        };
        if rows().any(|(b, e, p)| b > e.max(1e-9 * p)) {
            Verdict::Bubbly
        } else if rows().all(|(b, e, p)| b.abs() <= e + 1e-9 * p && e <= 1e-6 * p) {
            Verdict::Fundamental
        } else {
            Verdict::Inconclusive
        }
    };

    Ok(BubbleReport {
        truncation,
        fundamental,
        partial,
        bubble,
        tail_bound,
        limiting_rate,
        dividend_growth,
        tail_spread,
        tail_trusted,
        infinite_pv,
        tvc_estimate: disc.q(n - 1) * path.price[n - 1],
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaReport {
    pub series: SeriesClass,
    pub verdict: Verdict,
}

/// Bubble test through the summability of dividend yields `D_t / P_t`,
/// `t >= 1`: a finite sum means a bubble.
pub fn detect_bubble_lemma(path: &EquilibriumPath) -> Result<LemmaReport> {
    if let Some((row, &price)) = path.price.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
        return Err(ModelError::NonPositivePrice { row, price });
    }
    if path.len() < 2 {
        return Err(ModelError::HorizonTooShort {
            horizon: path.len(),
            min: MIN_SERIES_HORIZON + 1,
        });
    }
    let series = classify_terms(&path.dividend_yield()[1..])?;
    let verdict = match series.verdict {
        SeriesVerdict::Convergent => Verdict::Bubbly,
        SeriesVerdict::Divergent => Verdict::Fundamental,
        SeriesVerdict::Inconclusive => Verdict::Inconclusive,
    };
    Ok(LemmaReport { series, verdict })
}
