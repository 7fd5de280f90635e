//! Exact Kolmogorov distances between normalized sums of discrete random
//! variables and the normal law (with its Edgeworth correction), and the
//! Diophantine quantities of the support that govern their decay.

// `!(x > 0.0)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod charfn;
pub mod dioph;
pub mod distkit;
pub mod edgeworth;
pub(crate) mod numeric;
pub mod quad;
pub mod rates;
pub mod regress;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
