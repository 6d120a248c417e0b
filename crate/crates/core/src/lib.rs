//! Cluster-aware connectedness analysis for vector autoregressions.
//!
//! Pipeline: daily prices → weekly log returns → adaptive elastic-net VAR →
//! identification (orthogonalized, generalized, or clustered) → forecast-error
//! variance decomposition → network connectedness measures, optionally over
//! rolling windows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod connect;
pub mod error;
pub mod identify;
pub mod io;
pub mod linalg;
pub mod returns;
pub mod rolling;
pub mod synth;
pub mod varnet;

pub use connect::{decompose, measures, ConnectednessReport, OrderingMode, VdMatrix};
pub use error::{Error, Result};
pub use identify::{ClusterSpec, Identification, MaCoefficients, Scheme};
pub use returns::{PricePanel, ReturnPanel};
pub use rolling::{roll, MeasureSeries, RollingConfig};
pub use varnet::{fit_var, VarModel, VarOptions};
