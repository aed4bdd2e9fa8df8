//! Bodies of minimal resistance moving through a rarefied medium whose
//! particles have thermal velocities.

// `!(x > y)` is used on purpose so that NaN takes the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod envelope;
pub mod error;
pub mod flow;
pub mod medium;
pub mod montecarlo;
pub mod pressure;
pub mod profile;
pub mod quad;
pub mod roots;
pub mod solve2d;
pub mod solve_nd;

pub use error::{Error, Result};
pub use flow::{solve, FlowAnalysis, SolveReport};
pub use pressure::{FlowContext, Side};
pub use profile::{BodyProfile, SolutionKind};
