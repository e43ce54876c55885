#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Uncertainty-quantification benchmark toolkit for multi-step time-series
//! regression: data windows, MLP/LSTM forecasters with stochastic variants,
//! predictive distributions, calibration metrics and experiment reports.

pub mod dataio;
pub mod error;
pub mod fsutil;
pub mod harness;
pub mod metrics;
pub mod ndcore;
pub mod neural;
pub mod uq;

pub use error::{Error, Result};
