//! Spectra, eigenfunctions and nodal-domain counts of Schrödinger operators
//! on compact metric graphs.

// `!(x > 0.0)` deliberately rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigenfunctions;
pub mod error;
pub mod fundamental;
pub mod graph;
pub mod nodal;
pub mod plaplacian;
pub mod random;
pub mod secular;
pub mod solution;
mod unionfind;

pub use error::{Error, Result};
pub use graph::{ConditionSpec, GraphBuilder, MetricGraph, SubsetLengthSet};
pub use secular::{Eigenvalue, SolverConfig, SpectralProblem};
pub use solution::{EdgeCoefficients, EdgewiseSolution};
