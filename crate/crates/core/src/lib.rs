//! Sharp heat-flow estimates in Lebesgue norms: exponent algebra, sharp
//! constants, closed-form Gaussian calculus, grid evolution and the
//! verification experiments built on them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod fit;
pub mod format;
pub mod gaussian;
pub mod gridfn;
pub mod quad;
pub mod record;
pub mod selftest;

pub use constants::{ExtremalBeta, SharpConstants};
pub use error::{HeatError, Result};
pub use experiments::{DecayModulus, Probe, Route};
pub use exponents::{young_r, Exponent, YoungTriple};
pub use gaussian::Gaussian;
pub use gridfn::{FunctionSpec, GridFunction};
pub use record::{BoundSense, ExperimentRecord, Row, Verdict};
