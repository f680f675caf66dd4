//! Desk-scale laboratory for generalized indiscernible sequences.
//!
//! The crate builds finite index models (linearly ordered, predicate-labelled,
//! optionally hypergraph-structured), computes quantifier-free types over
//! parameter tuples, and uses a literal-diagram consistency oracle for generic
//! graph/hypergraph theories to construct and verify *shearing*: families of
//! formula instances, indexed by the realizations of one qf-type, that are
//! individually consistent but jointly contradictory.
//!
//! On top of the shearing machinery sit the circle-property witnesses
//! (invariant equivalence pairs with a fixed-point-free partial pairing), the
//! translations between circle witnesses and width-2 collision labelings, the
//! eq-extension construction with its indistinguishable-pair search, and the
//! exhaustive desk-scale sweeps that separate the clique-free hypergraph
//! theories from the random graph.

pub mod circle;
pub mod eq_extension;
pub mod oracle;
pub mod rational;
pub mod shearing;
pub mod structures;
pub mod sweep;

pub use rational::Coord;
pub use structures::{ClassDescriptor, IndexModel, QfType, VertexId};
