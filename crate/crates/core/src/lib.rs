//! Multi-sensor data fusion with the Grünwald–Letnikov fractional operator,
//! and threshold-crossing fault prognosis on fitted trends.
//!
//! The layers, bottom up:
//!
//! - [`glcalc`]: G-L weights, truncated differintegral, operator gain.
//! - [`lsqfit`]: polynomial least squares and order selection.
//! - [`fusion`]: outlier gating, sensor summaries and the fusion loop.
//! - [`prognosis`]: thresholds, diagnosis, warning time, vehicle verdict.
//! - [`io`], [`pipeline`]: dataset files, configuration, reports.
//! - [`synth`]: seeded synthetic datasets.

pub mod error;
pub mod fixtures;
pub mod fusion;
pub mod glcalc;
pub mod io;
pub mod lsqfit;
pub mod pipeline;
pub mod prognosis;
pub mod stats;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use fusion::{
    check_consistency, fuse, improvement_ratio, reference_true_value, summarize, FusionConfig,
    FusionResult, QualityGate, SensorSeries, SensorSummary,
};
pub use glcalc::{
    amplitude_curve, gl_differintegral, gl_weights, operator_gain, FracOrder, GlGrid, GlOperator,
};
pub use lsqfit::{fit_poly, select_order, OrderCriterion, Point2, Polynomial};
pub use pipeline::{predict, run_component, run_pipeline, run_vehicle, Stage};
pub use prognosis::{
    aggregate, assess, diagnose, fit_trend, threshold, warning_time, Status, TrendModel,
    WarningPolicy,
};
