//! Change-point likelihood-ratio statistics and the extremes of the Gaussian
//! fields behind them.
//!
//! The crate is organised bottom-up:
//!
//! - [`stats`]: exact Z1–Z4 scan statistics over all index pairs.
//! - [`normal`]: normal survival function (linear and log domain) and Γ.
//! - [`asymptotics`]: closed-form tail approximations for the supremum of
//!   Gaussian fields with trend, and the mapping from the discrete statistics
//!   to their continuous-time limits.
//! - [`fbm`] and [`pickands`]: fractional Brownian motion on a grid and Monte
//!   Carlo estimators of the Pickands and Piterbarg-type constants.
//! - [`fieldsim`]: direct simulation of Brownian-bridge field suprema with
//!   Wilson intervals, plus the Kuiper-series oracle.
//! - [`report`]: the serialized run report emitted by the `cpscan` binary.

// `!(x > 0.0)` is how parameter checks reject NaN along with non-positives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod fbm;
pub mod fieldsim;
pub mod normal;
pub mod pickands;
pub mod report;
pub mod seed;
pub mod stats;
mod sum;

pub use error::{Error, Result};
