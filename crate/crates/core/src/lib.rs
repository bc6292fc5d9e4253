//! Uniform avoidance couplings of two simple random walks on finite graphs.
//!
//! The crate decides whether a graph admits a uniform avoidance coupling
//! (forbidden-state analysis over max-flow pair tests), builds explicit
//! coupling kernels from named constructions and from certifying flows, and
//! verifies any joint kernel exactly (rational arithmetic) and statistically.

pub mod couplings;
pub mod forbidden;
pub mod graph;
pub mod kernel;
pub mod maxflow;
pub mod report;
pub mod verifier;

pub use forbidden::{admits_uac, extract_uac_kernel, forbidden_closure, ClosureTrace, PairSet, Verdict};
pub use graph::{build, parse_graph, Family, Graph, GraphError, VertexId};
pub use kernel::{JointKernel, Rational, StatePair};
