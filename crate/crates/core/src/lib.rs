// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod error;
pub mod extreal;
pub mod gridfn;
pub mod oracle;
pub mod orders;
pub mod random;
pub mod riskmeasures;
pub mod transform;

pub use error::{Error, Result};
pub use extreal::{ExtendedPositive, ProductMode};
