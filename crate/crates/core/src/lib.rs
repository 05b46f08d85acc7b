//! Symplectic capacities, closed Reeb orbits and Legendrian Reeb chords of
//! toric domains, plus numerical Reeb dynamics on star-shaped perturbations.

// Negated comparisons are used to reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacities;
pub mod error;
pub mod exec;
pub mod moment_region;
pub mod numerics;
pub mod starshaped_flow;
pub mod toric_reeb;

pub use error::{Error, Result};
pub use exec::Execution;
pub use moment_region::{MomentRegion, MonotonicityClass, MonotonicityReport, Shape};
