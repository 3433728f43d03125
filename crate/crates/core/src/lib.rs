//! # curveflow-core
//!
//! A numerical engine for intrinsic curvature flows on discretized
//! geometries, together with the machinery needed to audit uniqueness of
//! their solutions by the energy method.
//!
//! The crate has two backends:
//!
//! * a **chart backend**: tensor fields on periodic structured grids
//!   (dimensions 2–4) with centered finite-difference stencils, carrying a
//!   full Riemannian calculus — connection, curvature tensors, iterated
//!   Laplacians — and the right-hand sides of the supported flows
//!   (Ricci, the squared-curvature gradient flow, a quasilinear
//!   higher-order family, and the cross term flow's static algebra);
//! * a **frame backend**: left-invariant metrics on three-dimensional
//!   unimodular Lie groups, diagonal in a fixed frame, where the same flows
//!   reduce to ordinary differential equations with closed-form curvature.
//!
//! On top of the calculus sit:
//!
//! * [`flows`] — flow specifications and right-hand sides;
//! * [`runtime`] — explicit four-stage time integration with stability
//!   control, trajectory diagnostics, checkpointing, and finite-difference
//!   verification of the evolution identities;
//! * [`prolongation`] — difference systems between two solutions, their
//!   energies, and the exponential-bound audit used to certify uniqueness
//!   numerically;
//! * [`identities`] — a registered suite of discrete tensor-identity checks
//!   over a built-in corpus of metrics.
//!
//! All numerical types are generic over the scalar via the [`scalar::Real`]
//! trait; the crate root exports `f64` aliases (the default working
//! precision) and `f32` variants for storage-light experiments.

pub mod error;
pub mod field;
pub mod flows;
pub mod grid;
pub mod homogeneous;
pub mod identities;
pub mod io;
pub mod linalg;
pub mod metric;
pub mod prolongation;
pub mod runtime;
pub mod scalar;
pub mod tensor;

pub use error::{Error, Result};
pub use flows::{FlowSpec, LambdaPreset};
pub use grid::FdOrder;
pub use identities::{run_suite, suite_passed, IdentityReport, SuiteOptions};
pub use prolongation::{GronwallReport, Verdict, Weights};
pub use runtime::{EvolutionIdentity, RunConfig, RunManifest, StopReason};
pub use scalar::Real;

/// Default-precision (f64) concrete aliases.
pub type ChartGrid = grid::ChartGrid<f64>;
pub type TensorField = field::TensorField<f64>;
pub type MetricField = metric::MetricField<f64>;
pub type FrameMetric = homogeneous::FrameMetric<f64>;
pub type DifferencePack = prolongation::DifferencePack<f64>;
pub type EnergySeries = prolongation::EnergySeries<f64>;
pub type GridTrajectory = runtime::GridTrajectory<f64>;
pub type FrameTrajectory = runtime::FrameTrajectory<f64>;

/// Reduced-precision (f32) variants.
pub type ChartGrid32 = grid::ChartGrid<f32>;
pub type TensorField32 = field::TensorField<f32>;
pub type MetricField32 = metric::MetricField<f32>;
pub type FrameMetric32 = homogeneous::FrameMetric<f32>;
pub type GridTrajectory32 = runtime::GridTrajectory<f32>;
pub type FrameTrajectory32 = runtime::FrameTrajectory<f32>;
