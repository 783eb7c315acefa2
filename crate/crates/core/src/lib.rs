//! Verification engine for anti-self-dual Einstein metrics admitting a
//! nonnull Killing vector.

pub mod calibration;
pub mod chart;
pub mod curvature;
pub mod error;
pub mod expr;
pub mod formalisms;
pub mod jet;
pub mod killing;
pub mod metric;
pub mod report;
pub mod sampling;
pub mod solutions;

pub use chart::{Chart, FieldTag, LocusKind};
pub use error::{Error, Result};
pub use expr::{Expr, Params};
pub use jet::{Jet2, C};
pub use metric::MetricField;
