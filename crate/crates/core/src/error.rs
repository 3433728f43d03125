//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid construction: {0}")]
    InvalidGrid(String),

    #[error("operation mixes fields living on different grids")]
    GridMismatch,

    #[error("rank mismatch: expected ({expected_up},{expected_down}), got ({got_up},{got_down})")]
    RankMismatch {
        expected_up: usize,
        expected_down: usize,
        got_up: usize,
        got_down: usize,
    },

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("unsupported finite-difference order {0} (supported: 2, 4)")]
    UnsupportedFdOrder(u32),

    #[error("metric not symmetric at node {node} (asymmetry {defect:e})")]
    AsymmetricMetric { node: usize, defect: f64 },

    #[error("metric lost positive-definiteness at node {node} (eigenvalue {eigenvalue:e})")]
    LostPositivity { node: usize, eigenvalue: f64 },

    #[error("metric inverse check failed at node {node} (|g*g^-1 - id| = {defect:e})")]
    SingularMetric { node: usize, defect: f64 },

    #[error("Einstein tensor not invertible at node {node} (|det| ratio {ratio:e})")]
    NonInvertibleEinstein { node: usize, ratio: f64 },

    #[error(
        "sigma-adjusted Einstein tensor not negative-definite at node {node} \
         (margin eigenvalue {eigenvalue:e})"
    )]
    DefinitenessViolated { node: usize, eigenvalue: f64 },

    #[error("non-finite value produced in {context}")]
    NonFinite { context: String },

    #[error("flow specification invalid: {0}")]
    InvalidFlowSpec(String),

    #[error("operation requires the {required} backend, got {got}")]
    WrongBackend {
        required: &'static str,
        got: &'static str,
    },

    #[error("time series too short: need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
