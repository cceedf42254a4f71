//! Invariants and decision procedures for move equivalence and Cuntz move
//! equivalence of finite directed graphs.
//!
//! Graphs are stored as adjacency matrices with `adj(u, v)` the number of
//! edges `u → v`. K-theory is read off transposed matrices explicitly, so
//! `K₀ = cok((B•)ᵀ)` where `B = A − I` and `B•` drops sink rows. Block
//! indices follow the component order with predecessors first: if there
//! is a path from component `i` to component `j ≠ i` then `i < j`.

pub mod equivalence;
pub mod error;
pub mod graph;
pub mod lens;
pub mod linalg;
pub mod moves;
pub mod structure;

pub use error::{Error, Result};
pub use graph::Graph;
pub use linalg::{AbelianGroupInvariants, IntMatrix};
