//! Deterministic sequences for endowments, dividends and productivity.
//!
//! Geometric and polynomial generators carry an exact asymptotic form
//! `x_t ~ C g^t t^k`, which lets ratio-type tests be decided exactly
//! instead of numerically.

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Sequence {
    /// `scale * growth^t`
    Geometric { scale: f64, growth: f64 },
    /// `scale * (1 + t)^power`
    Polynomial { scale: f64, power: f64 },
    /// Terms indexed from t = 0.
    Explicit(Vec<f64>),
}

impl Sequence {
    pub fn constant(value: f64) -> Self {
        Sequence::Geometric {
            scale: value,
            growth: 1.0,
        }
    }

    pub fn at(&self, t: usize) -> Option<f64> {
        match self {
            Sequence::Geometric { scale, growth } => Some(scale * growth.powf(t as f64)),
            Sequence::Polynomial { scale, power } => Some(scale * (1.0 + t as f64).powf(*power)),
            Sequence::Explicit(v) => v.get(t).copied(),
        }
    }

    /// Number of available terms; `None` for generators.
    pub fn available(&self) -> Option<usize> {
        match self {
            Sequence::Explicit(v) => Some(v.len()),
            _ => None,
        }
    }

    /// `(g, k)` with `x_t ~ C g^t t^k`, or `None` for explicit lists.
    pub fn asymptotic(&self) -> Option<(f64, f64)> {
        match self {
            Sequence::Geometric { growth, .. } => Some((*growth, 0.0)),
            Sequence::Polynomial { power, .. } => Some((1.0, *power)),
            Sequence::Explicit(_) => None,
        }
    }

    /// Terms `0..n` as a vector; errors if an explicit list is too short.
    pub fn take(&self, name: &'static str, n: usize) -> Result<Vec<f64>> {
        if let Some(len) = self.available() {
            if len < n {
                return Err(ModelError::SequenceTooShort {
                    name,
                    len,
                    needed: n,
                });
            }
        }
        Ok((0..n).map(|t| self.at(t).expect("length checked")).collect())
    }

    /// Requires every term in `0..n` to be strictly positive and finite.
    pub fn check_positive(&self, name: &'static str, n: usize) -> Result<()> {
        match self {
            Sequence::Geometric { scale, growth } => {
                crate::error::check(*scale > 0.0, name, *scale, "scale > 0")?;
                crate::error::check(*growth > 0.0, name, *growth, "growth > 0")
            }
            Sequence::Polynomial { scale, power } => {
                crate::error::check(*scale > 0.0, name, *scale, "scale > 0")?;
                crate::error::check(power.is_finite(), name, *power, "finite power")
            }
            Sequence::Explicit(v) => {
                if v.len() < n {
                    return Err(ModelError::SequenceTooShort {
                        name,
                        len: v.len(),
                        needed: n,
                    });
                }
                for &x in &v[..n] {
                    crate::error::check(x > 0.0, name, x, "all terms > 0")?;
                }
                Ok(())
            }
        }
    }
}
