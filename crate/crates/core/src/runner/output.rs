use std::str::FromStr;

use thiserror::Error;

use crate::path::EquilibriumPath;
use crate::valuation::BubbleReport;

#[derive(Debug, Error, PartialEq)]
pub enum OutputError {
    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{column}` is not available: {reason}")]
    Unavailable {
        column: &'static str,
        reason: &'static str,
    },

    #[error("csv: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Column {
    T,
    P,
    D,
    R,
    W,
    K,
    Phi,
    PriceRent,
    Yield,
    V,
    Bubble,
}

impl Column {
    pub const ALL: [Column; 11] = [
        Column::T,
        Column::P,
        Column::D,
        Column::R,
        Column::W,
        Column::K,
        Column::Phi,
        Column::PriceRent,
        Column::Yield,
        Column::V,
        Column::Bubble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Column::T => "t",
            Column::P => "P",
            Column::D => "D",
            Column::R => "R",
            Column::W => "W",
            Column::K => "K",
            Column::Phi => "phi",
            Column::PriceRent => "price_rent",
            Column::Yield => "yield",
            Column::V => "V",
            Column::Bubble => "bubble",
        }
    }

    /// Columns the path (and valuation, if any) can fill.
    pub fn available(path: &EquilibriumPath, valuation: Option<&BubbleReport>) -> Vec<Column> {
        Column::ALL
            .into_iter()
            .filter(|c| match c {
                Column::R => path.rate.is_some(),
                Column::W => path.wealth.is_some(),
                Column::K => path.capital.is_some(),
                Column::Phi => path.phi.is_some(),
                Column::V | Column::Bubble => valuation.is_some(),
                _ => true,
            })
            .collect()
    }
}

impl FromStr for Column {
    type Err = OutputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Column::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| OutputError::UnknownColumn(s.to_string()))
    }
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros
/// dropped, exponent form outside `1e-4 <= |x| < 1e12`.
pub fn fmt_g12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// CSV text for the selected columns: header plus one row per period, LF
/// line endings. `V` and `bubble` need a valuation report and are blank on
/// rows it does not cover.
pub fn emit_csv(
    path: &EquilibriumPath,
    columns: &[Column],
    valuation: Option<&BubbleReport>,
) -> Result<String, OutputError> {
    let need = |col: Column, v: &Option<Vec<f64>>| -> Result<(), OutputError> {
        if columns.contains(&col) && v.is_none() {
            return Err(OutputError::Unavailable {
                column: col.name(),
                reason: "the model does not produce it",
            });
        }
        Ok(())
    };
    need(Column::R, &path.rate)?;
    need(Column::W, &path.wealth)?;
    need(Column::K, &path.capital)?;
    need(Column::Phi, &path.phi)?;
    for col in [Column::V, Column::Bubble] {
        if columns.contains(&col) && valuation.is_none() {
            return Err(OutputError::Unavailable {
                column: col.name(),
                reason: "valuation did not run (set `truncation`)",
            });
        }
    }

    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| OutputError::Csv(e.to_string());
    w.write_record(columns.iter().map(|c| c.name())).map_err(csv_err)?;
    let opt = |v: &Option<Vec<f64>>, i: usize| fmt_g12(v.as_ref().expect("checked")[i]);
    let from_report = |f: fn(&BubbleReport) -> &Vec<f64>, i: usize| {
        valuation
            .and_then(|r| f(r).get(i))
            .map(|&x| fmt_g12(x))
            .unwrap_or_default()
    };
    for i in 0..path.len() {
        let row = columns.iter().map(|c| match c {
            Column::T => path.time(i).to_string(),
            Column::P => fmt_g12(path.price[i]),
            Column::D => fmt_g12(path.dividend[i]),
            Column::R => opt(&path.rate, i),
            Column::W => opt(&path.wealth, i),
            Column::K => opt(&path.capital, i),
            Column::Phi => opt(&path.phi, i),
            Column::PriceRent => fmt_g12(path.price[i] / path.dividend[i]),
            Column::Yield => fmt_g12(path.dividend[i] / path.price[i]),
            Column::V => from_report(|r| &r.fundamental, i),
            Column::Bubble => from_report(|r| &r.bubble, i),
        });
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| OutputError::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}
