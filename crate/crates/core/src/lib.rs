//! Numerical laboratory for passive-scalar mixing by randomly shifted cellular flows.

// Negated comparisons deliberately reject NaN parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod lagrangian;
pub mod rng;
pub mod solver;
pub mod spectral;
pub mod twopoint;
pub mod verify;

pub use config::KeyValueConfig;
pub use error::{Error, Result};
pub use experiments::DecayFit;
pub use flow::{FlowKind, FlowSpec};
pub use solver::{InitialDatum, NormSeries, SimulationConfig};
pub use spectral::{GridField6D, SpectralField2D};
pub use twopoint::{CoefficientSet, TwoPointOps};
