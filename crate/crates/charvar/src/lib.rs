//! Character-variety toolkit for free groups in SL2: marked metric graphs,
//! length functions, the spin weight semigroup and its polytopes, graph
//! tensor evaluation, tropical valuations, and the moment-map contraction
//! with its torus action.

pub mod error;
pub mod graph;
pub mod spin;
pub mod tensor;
pub mod valuation;
pub mod mat2;
pub mod moment;
pub mod words;

pub use error::{Error, Result};
