//! Exact tropical reduction data of q-differentials on non-Archimedean curves.

pub mod annulus;
pub mod cli;
pub mod curves;
pub mod cyclo;
pub mod datum;
pub mod error;
pub mod fixtures;
pub mod lifting;
pub mod model;
pub mod psd;
pub mod rational;
pub mod scalar;
pub mod series;
pub mod validate;

pub use cyclo::CycloRational;
pub use error::{Error, Result};
pub use scalar::ValuedScalar;
pub use series::{Coeff, LaurentSeries, ResidueSeries, ScalarSeries};
