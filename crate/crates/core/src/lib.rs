//! Exact distance machinery for graphs given together with a clique-width
//! expression.

pub mod graph;
pub mod kexpr;
pub(crate) mod par;

pub use graph::{Dist, DistanceVector, Graph, Vertex, WeightedGraph};
pub use kexpr::{KExpression, LabeledGraph};
