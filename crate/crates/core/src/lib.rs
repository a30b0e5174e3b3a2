#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bernstein;
pub mod error;
pub mod estimates;
pub mod kernels;
pub mod montecarlo;
pub mod quad;
pub mod solutions;
pub mod special;
pub mod subordinator;
pub mod validate;

pub use error::{Error, Result};
