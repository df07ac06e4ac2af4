//! Graph correspondences, tails and relative graph algebras in exact
//! arithmetic.

pub mod ck;
pub mod corpus;
pub mod correspondence;
pub mod error;
pub mod graph;
pub mod lattice;
pub mod linalg;
pub mod transforms;

pub use error::{Error, Result};
pub use graph::{
    classify_vertices, Degree, Edge, Graph, Multiplicity, TailRay, VertexClass, VertexId,
    VertexSet, VertexTag,
};
