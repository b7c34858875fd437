//! Coxeter reflection functors and locally scalar representations of graphs
//! in Hilbert spaces.
//!
//! The crate is organized around five layers:
//!
//! * [`graph`] — trees with a canonical bipartition, the Tits form, simple
//!   reflections and partial Coxeter transformations, root enumeration and
//!   classification of graphs by representation type. Exact rational
//!   arithmetic throughout.
//! * [`rep`] — concrete representations (one complex matrix per edge), the
//!   local-scalarity verdict and characters, direct sums, gauge changes,
//!   morphisms and numerical unitary equivalence.
//! * [`functor`] — the even and odd reflection functors on representations
//!   and morphisms, and the pure (dimension, character) pair transport.
//! * [`classifier`] — growth, construction of indecomposables from simplest
//!   objects, exhaustive enumeration over Dynkin graphs, the h/T/L tables,
//!   and decomposition into indecomposable classes.
//! * [`bridges`] — quiver unitarization, orthoprojector families summing to
//!   a scalar, the all-ones representation, and the parity trace balance.
//!
//! [`io`] defines the text formats used by the `coxrep` command line tool.

pub mod bridges;
pub mod classifier;
pub mod functor;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod rep;

pub use graph::{Graph, GraphClass, GVector, Parity, VertexId};
pub use rep::{CharVector, DimVector, Representation};
