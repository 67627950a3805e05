//! First-order affine recurrences `x_{t+1} = slope * x_t + drift` and
//! series convergence classification.

use crate::error::{ModelError, Result};

/// Slopes within this distance of 1 are treated as exactly 1.
pub const UNIT_SLOPE_TOL: f64 = 1e-12;

/// Margin by which the tail ratio must clear 1 for a conclusive verdict.
pub const SERIES_RATIO_MARGIN: f64 = 1e-3;

const SLOW_DECAY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineRecurrence {
    pub slope: f64,
    pub drift: f64,
    pub initial: f64,
}

impl AffineRecurrence {
    pub fn new(slope: f64, drift: f64, initial: f64) -> Result<Self> {
        crate::error::check(slope >= 0.0, "slope", slope, "slope >= 0")?;
        crate::error::check(drift.is_finite(), "drift", drift, "finite")?;
        crate::error::check(initial.is_finite(), "initial", initial, "finite")?;
        Ok(Self {
            slope,
            drift,
            initial,
        })
    }

    /// `drift / (1 - slope)`; `None` when the slope is 1.
    pub fn fixed_point(&self) -> Option<f64> {
        if (self.slope - 1.0).abs() <= UNIT_SLOPE_TOL {
            None
        } else {
            Some(self.drift / (1.0 - self.slope))
        }
    }

    pub fn solve(&self, t: u64) -> f64 {
        solve_affine(self, t)
    }

    pub fn classify(&self) -> Result<LimitClass> {
        classify_limit(self)
    }
}

/// `x_t` in closed form.
///
/// Evaluated as `slope^t x_0 + drift * (slope^t - 1)/(slope - 1)` with the
/// geometric sum computed through `expm1`/`ln_1p`, which equals the
/// fixed-point form but stays accurate when the slope is close to 1.
pub fn solve_affine(rec: &AffineRecurrence, t: u64) -> f64 {
    debug_assert!(rec.slope >= 0.0);
    if t == 0 {
        return rec.initial;
    }
    let tf = t as f64;
    let rho = rec.slope;
    if rho == 1.0 {
        return rec.initial + rec.drift * tf;
    }
    let power = rho.powf(tf);
    let geometric_sum = if rho == 0.0 {
        1.0
    } else {
        (tf * (rho - 1.0).ln_1p()).exp_m1() / (rho - 1.0)
    };
    power * rec.initial + rec.drift * geometric_sum
}

/// Asymptotic behaviour of an affine recurrence.
///
/// For divergent classes the sign of the divergence follows the sign of
/// `x_0 - fixed point` (exponential) or of the drift (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitClass {
    ConvergesTo(f64),
    ConvergesToZero,
    /// Payload is the per-period increment.
    LinearDivergence(f64),
    /// Payload is the asymptotic growth factor.
    ExponentialDivergence(f64),
}

impl LimitClass {
    pub fn converges(&self) -> bool {
        matches!(self, LimitClass::ConvergesTo(_) | LimitClass::ConvergesToZero)
    }
}

fn converges(value: f64) -> LimitClass {
    if value == 0.0 {
        LimitClass::ConvergesToZero
    } else {
        LimitClass::ConvergesTo(value)
    }
}

pub fn classify_limit(rec: &AffineRecurrence) -> Result<LimitClass> {
    let rho = rec.slope;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(ModelError::InvalidParameter {
            name: "slope",
            value: rho,
            constraint: "slope >= 0",
        });
    }
    if (rho - 1.0).abs() <= UNIT_SLOPE_TOL {
        return Ok(if rec.drift == 0.0 {
            converges(rec.initial)
        } else {
            LimitClass::LinearDivergence(rec.drift)
        });
    }
    let fixed = rec.drift / (1.0 - rho);
    if rho < 1.0 || rec.initial == fixed {
        Ok(converges(fixed))
    } else {
        Ok(LimitClass::ExponentialDivergence(rho))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVerdict {
    Convergent,
    Divergent,
    Inconclusive,
}

/// Outcome of a series test, with the tail evidence it was based on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesClass {
    pub verdict: SeriesVerdict,
    /// Mean ratio `a_{t+1}/a_t` over the tail.
    pub tail_ratio: f64,
    /// Local power-law decay exponent `-dln a / dln t` over the tail.
    pub tail_exponent: f64,
}

impl SeriesClass {
    pub fn exact(verdict: SeriesVerdict, tail_ratio: f64, tail_exponent: f64) -> Self {
        Self {
            verdict,
            tail_ratio,
            tail_exponent,
        }
    }
}

pub const MIN_SERIES_HORIZON: usize = 100;

/// Classifies `sum_{t=1}^inf a_t` from the terms `a_1..=a_horizon`.
pub fn classify_series<F>(terms: F, horizon: usize) -> Result<SeriesClass>
where
    F: Fn(usize) -> f64,
{
    if horizon < MIN_SERIES_HORIZON {
        return Err(ModelError::HorizonTooShort {
            horizon,
            min: MIN_SERIES_HORIZON,
        });
    }
    let values: Vec<f64> = (1..=horizon).map(terms).collect();
    classify_terms(&values)
}

/// Same as [`classify_series`] for terms already in memory; `terms[0]` is
/// `a_1`.
pub fn classify_terms(terms: &[f64]) -> Result<SeriesClass> {
    let n = terms.len();
    if n < MIN_SERIES_HORIZON {
        return Err(ModelError::HorizonTooShort {
            horizon: n,
            min: MIN_SERIES_HORIZON,
        });
    }
    if let Some((i, &v)) = terms
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
    {
        return Err(ModelError::InvalidTerm {
            index: i + 1,
            value: v,
        });
    }

    let tail_start = n - (n / 10).max(2);
    let tail = &terms[tail_start..];
    if tail.iter().all(|&a| a == 0.0) {
        return Ok(SeriesClass::exact(SeriesVerdict::Convergent, 0.0, f64::INFINITY));
    }

    let ratios: Vec<f64> = tail
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    let ratio = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };

    let (first, last) = (tail[0], tail[tail.len() - 1]);
    let exponent = if first > 0.0 && last > 0.0 {
        let t0 = (tail_start + 1) as f64;
        let t1 = n as f64;
        -(last.ln() - first.ln()) / (t1.ln() - t0.ln())
    } else {
        f64::INFINITY
    };

    let verdict = if ratio < 1.0 - SERIES_RATIO_MARGIN {
        SeriesVerdict::Convergent
    } else if ratio > 1.0 + SERIES_RATIO_MARGIN || exponent <= 1.0 + SLOW_DECAY_TOL {
        SeriesVerdict::Divergent
    } else {
        SeriesVerdict::Inconclusive
    };
    Ok(SeriesClass::exact(verdict, ratio, exponent))
}
