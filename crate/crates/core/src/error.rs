use thiserror::Error;

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Errors raised by the model and valuation modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("parameter `{name}` = {value} violates {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("initial price {p0} outside the admissible interval (0, {upper}]")]
    InadmissiblePrice { p0: f64, upper: f64 },

    #[error("no bubbly equilibrium exists for these parameters")]
    NoBubble,

    #[error("{agent} first-order condition violated at t={period} (residual {residual:e})")]
    FocViolation {
        agent: &'static str,
        period: usize,
        residual: f64,
    },

    #[error("initial wealth W0 = {w0} is below the full-investment bound W0bar = {bound}")]
    WealthBelowBound { w0: f64, bound: f64 },

    #[error("full-investment arbitrage fails at t={t}: R_t = {rate} > A + 1 - delta = {capital_return}")]
    ArbitrageViolated {
        t: i64,
        rate: f64,
        capital_return: f64,
    },

    #[error("productivity A = {productivity} must exceed the lower threshold {threshold}")]
    ProductivityTooLow { productivity: f64, threshold: f64 },

    #[error("no steady state: A = {productivity} >= upper threshold {threshold}")]
    NoSteadyState { productivity: f64, threshold: f64 },

    #[error("no feasible pre-phase length j found in 0..={searched}")]
    NoFeasiblePrePhase { searched: usize },

    #[error("investment share phi_t = {phi} at t={t} outside (0, pi)")]
    InvestmentShare { t: i64, phi: f64 },

    #[error("nonpositive or non-finite gross rate {rate} at row {row}")]
    NonPositiveRate { row: usize, rate: f64 },

    #[error("nonpositive price {price} at row {row}")]
    NonPositivePrice { row: usize, price: f64 },

    #[error("horizon {horizon} is shorter than the required minimum {min}")]
    HorizonTooShort { horizon: usize, min: usize },

    #[error("sequence `{name}` has {len} terms but {needed} are required")]
    SequenceTooShort {
        name: &'static str,
        len: usize,
        needed: usize,
    },

    #[error("term {index} of series is negative or not finite ({value})")]
    InvalidTerm { index: usize, value: f64 },

    #[error("path has no `{0}` data")]
    MissingData(&'static str),
}

pub(crate) fn check(
    ok: bool,
    name: &'static str,
    value: f64,
    constraint: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            name,
            value,
            constraint,
        })
    }
}
