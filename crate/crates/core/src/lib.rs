//! Unbounded, smooth private continual counting.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod approx;
pub mod baselines;
pub mod error;
pub mod factor;
pub mod mechanism;
pub mod noise;
pub mod quad;
pub mod sensitivity;
pub mod series;
mod special;

pub use approx::{ApproxCounter, ExpansionContext};
pub use baselines::{HybridConfig, HybridCounter, HybridModel, UnboundedVariant};
pub use error::{Error, Result};
pub use factor::{FactorPair, FactorParams, Sides};
pub use mechanism::{ErrorMetrics, LogMatrixCounter, PrivacyParams, SideInfo};
pub use noise::GaussianStream;
pub use sensitivity::SensitivityResult;
pub use series::{CoeffSeries, MulBudget, QuotientStream, SeriesContext};
