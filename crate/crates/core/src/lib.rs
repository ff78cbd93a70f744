//! SWAP regression: estimating, per observation, which of two related
//! series plays the predictor role.
//!
//! The crate is organised bottom-up: [`data`] loads and aligns quarterly
//! series, [`model`] holds the monotone model families and their losses,
//! [`swap`] runs the alternating fit, and [`gof`], [`causality`] and
//! [`timeline`] post-process the results. [`synth`] generates data with known
//! truth and provides brute-force reference answers.

// `!(v > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causality;
pub mod data;
pub mod densities;
pub mod error;
pub mod exec;
pub mod gof;
pub mod model;
pub mod numeric;
pub mod simplex;
pub mod swap;
pub mod synth;
pub mod timeline;

pub use data::{QuarterIndex, RawSeries, SeriesPair};
pub use densities::{KsResult, Marginals, RateEstimate};
pub use error::{Result, SwapError};
pub use exec::Execution;
pub use model::{ModelFamily, ModelSpec};
pub use swap::{run_swap, SwapConfig, SwapFit, Variant};
