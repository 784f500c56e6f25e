// `!(x > 0.0)` forms reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod content;
pub mod dash;
pub mod endpoints;
pub mod error;
pub mod experiments;
pub mod icn;
pub mod layering;
pub mod naming;
pub mod netsim;
pub mod sim;
pub mod wire;

pub use error::{Error, Result};
