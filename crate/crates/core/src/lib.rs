// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod error;
pub mod market;
pub mod oracle;
pub mod scenario;
pub mod transport;
