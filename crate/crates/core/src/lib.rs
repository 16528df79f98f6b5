//! Kernel density estimation with cache-blocked, tree-reduced bandwidth
//! selectors and approximate range aggregates.
//!
//! The numerical kernels ([`reduce`], [`pairwise`]) evaluate one fixed
//! summation tree in every [`ExecMode`], so sequential, lane-blocked and
//! threaded runs agree bit for bit.

// `!(x > 0.0)` is used deliberately so that NaN takes the error path
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aqp;
pub mod bandwidth;
pub mod dataset;
pub mod error;
pub mod exec;
pub mod kde;
pub mod linalg;
pub mod pairwise;
pub mod reduce;
pub mod synth;

pub use aqp::{
    aqp_avg, aqp_count, aqp_evaluate, aqp_sum, integrate_1d, Aggregate, RangeQuery, Weight,
};
pub use bandwidth::{
    lscv_h_bandwidth, lscv_matrix_bandwidth, plugin_bandwidth, Bandwidth, BandwidthResult,
    LscvHConfig, LscvMatrixConfig,
};
pub use dataset::{load_csv, read_csv, CsvOptions, Dataset};
pub use error::{Error, Result};
pub use exec::ExecMode;
pub use kde::{kde_eval, kde_eval_batch, KdeModel};
pub use linalg::SquareMatrix;
