// Guards written as `!(x > 0.0)` reject NaN along with the wrong sign;
// rewriting them as `x <= 0.0` would silently admit NaN parameters.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comb;
pub mod config;
pub mod error;
pub mod lattice;
pub mod numeric;
pub mod run;
pub mod scheme;
pub mod spectral;
pub mod tol;
pub mod weights;
