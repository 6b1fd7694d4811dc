//! Charts, fields on charts and the finite-difference derivative engine.

pub mod chart;
pub mod fd;
pub mod field;
pub mod models;

pub use chart::Chart;
pub use fd::{FdConfig, FdOrder};
pub use field::{
    gradient, metric_partial, partial, partial2, second_derivatives, MetricField, ScalarField,
};
