//! Variational Bayesian inference as iterative Euclidean projection in a
//! Bayesian Hilbert space.
//!
//! Probability densities `p(x) = c exp(-phi(x))` are treated as vectors:
//! addition is pointwise multiplication, scalar multiplication is powering and
//! the inner product is the covariance of log-densities under a measure. On top
//! of that algebra the crate provides
//!
//! * numerical expectations ([`quadrature`]),
//! * exponentiated Hermite bases on R and R^N ([`hermite`]),
//! * the indefinite-Gaussian subspace with its orthonormal basis ([`gaussian`]),
//! * projections, KL derivatives and the iterative-projection optimizer
//!   ([`variational`]),
//! * sparse Gaussian variational inference on factor graphs ([`gvi`]),
//! * the desk-scale experiments used by the `bh` command line tool
//!   ([`experiments`]).

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod error;
pub mod experiments;
pub mod gaussian;
pub mod gvi;
pub mod hermite;
pub mod linalg;
pub mod quadrature;
pub mod variational;

pub use bayes::{BayesElement, GaussianMeasure, Normalized};
pub use error::{Error, Result};
pub use quadrature::{QuadratureKind, QuadratureSpec, Rule};
pub use variational::{BasisSet, Coordinates, Measure};
