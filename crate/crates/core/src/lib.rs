//! Simulation and estimation tools for critical long-range percolation on
//! the line.
//!
//! * [`model`]: discrete and continuous samplers.
//! * [`metric`]: exact distances, diameters and segment distances.
//! * [`scaling`]: Monte Carlo scaling series, exponent fits and structural checks.
//! * [`coupling`]: rescaling and the cell-wise maximal coupling of the two models.
//! * [`census`]: exhaustive enumeration of proper-path classes on a fine lattice.
//! * [`stats`]: goodness-of-fit tests and bootstrap helpers.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod census;
pub mod coupling;
pub mod error;
pub mod metric;
pub mod model;
pub mod rng;
pub mod scaling;
pub mod stats;

pub use error::{LrpError, Result};
pub use metric::{Diameter, Geodesic, MetricMode, SegmentQuery};
pub use model::{ContinuousEdgeSet, ContinuousParams, DiscreteGraph, DiscreteParams};
