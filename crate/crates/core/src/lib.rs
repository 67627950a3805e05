//! Closed-form rational bubble models and a valuation engine.
//!
//! Every model family lives in its own module and produces an
//! [`EquilibriumPath`]; [`valuation`] decomposes any such path into
//! fundamental value and bubble, and [`recur`] holds the affine-recurrence
//! and series-classification toolkit the models share.
//!
//! ```
//! use bubblelab::barebones::{BareBonesParams, classify_regime, Regime};
//!
//! let high = BareBonesParams::baseline(0.7);
//! assert_eq!(classify_regime(&high).regime, Regime::BubblyUnbalanced);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barebones;
pub mod bewley;
pub mod error;
pub mod olg_pure;
pub mod par;
pub mod path;
pub mod recur;
pub mod runner;
pub mod seq;
pub mod tirole;
pub mod valuation;
pub mod wilson;

pub use error::{ModelError, Result};
pub use par::Execution;
pub use path::EquilibriumPath;
pub use seq::Sequence;
