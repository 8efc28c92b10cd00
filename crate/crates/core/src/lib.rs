//! Numerical and exact tools for the weighted operator `L_a = div(|y|^a ∇)`
//! on `R^n x R` and its thin-space boundary problems.

#![allow(clippy::needless_range_loop, clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gauge;
pub mod exact;
pub mod experiments;
pub mod extension;
pub mod grid;
pub mod metrics;
pub mod poly;
pub mod quad;
pub mod solver;
pub mod trace;
pub mod weight;

pub use error::{Error, Result};
