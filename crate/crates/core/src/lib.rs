// `!(x >= c)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod filters;
pub mod kernels;
pub mod simlab;
pub mod spectral;
pub mod spectrum;

pub use error::{Error, Result};
