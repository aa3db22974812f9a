//! Exact computation of the linear inequalities satisfied by flag
//! f-vectors of graded posets.

pub mod algebra;
mod bitset;
pub mod cone;
pub mod intervals;
pub mod polyhedra;
pub mod poset;
pub mod rankset;

pub use algebra::Form;
pub use rankset::RankSet;
