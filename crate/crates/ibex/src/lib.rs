//! Exact discrete information-bottleneck (IB) machinery built around the
//! convex IB Lagrangian family.
//!
//! The crate provides:
//!
//! - [`prob`]: finite-alphabet probability core (entropies, mutual
//!   information, KL divergence, encoder-induced quantities, cross-entropy
//!   cost and its MI bound);
//! - [`lagrangian`]: the convex Lagrangian family `I(T;Y) - beta_u u(I(X;T))`
//!   with the multiplier <-> compression mappings and multiplier ranges;
//! - [`solver`]: Blahut-Arimoto style maximization of the classic and convex
//!   objectives, a finite-difference gradient oracle, sweeps and
//!   compression-targeted "aim" mode;
//! - [`curve`]: IB-curve construction, Pareto filtering and explorability
//!   reports;
//! - [`estimators`]: sample-based kernel MI upper bound and DBSCAN cluster
//!   counting;
//! - [`dataset`] and [`io`]: instance generation and file formats backing the
//!   `ibex` command-line tool.
//!
//! All information quantities are reported in bits.

pub mod curve;
pub mod dataset;
pub mod estimators;
pub mod io;
pub mod lagrangian;
pub mod prob;
pub mod solver;

pub use curve::{CurveEstimate, CurvePoint};
pub use lagrangian::{CurveSpec, MultiplierRange, UFamily, VFamily};
pub use prob::{Decoder, Distribution, Encoder, InducedQuantities, JointDistribution};
pub use solver::{SolveResult, SolverConfig};
