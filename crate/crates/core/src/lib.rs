//! Universal sampling discretization of sparse function classes over
//! uniformly bounded Riesz dictionaries on `[0, 1)`.
//!
//! The crate builds point sets, verifies two-sided Marcinkiewicz-type
//! inequalities for every `v`-sparse combination, and evaluates entropy,
//! greedy-approximation and Chernoff budget quantities at small scale.

pub mod error;
mod linalg;
pub mod registry;
pub mod rng;

pub mod function_space;
pub mod sampling;
pub mod verifier;
pub mod entropy;
pub mod greedy;
pub mod budget;
pub mod oracle;
pub mod study;

pub use error::{Error, Result};
