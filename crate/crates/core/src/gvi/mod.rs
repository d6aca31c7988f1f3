//! Gaussian variational inference on factor graphs.

pub mod factor;
pub mod format;
pub mod solver;
pub mod sparse;

pub use factor::{Factor, FactorGraph, FactorKind, FactorRegistry};
pub use format::{parse_graph, serialize_graph};
pub use solver::{
    gvi_sparse_solve, gvi_step_dense, map_newton_solve, GaussianState, GviOptions, GviTermination, GviTrace,
    MarginalRoute,
};
pub use sparse::{Pattern, SparseLdl, SparseSymmetric};
