//! Exact integer linear algebra.

pub mod abelian;
pub mod block;
pub mod hnf;
mod matrix;
pub mod snf;

pub use abelian::{cokernel, kernel_rank, AbelianGroupInvariants};
pub use block::{BlockMatrix, BlockStructure, KWebInvariants};
pub use hnf::{hermite_normal_form, solve_integer, Hermite, IntegerSolution, LinearSolver};
pub use matrix::IntMatrix;
pub use snf::{smith_diagonal, smith_normal_form, Smith};
