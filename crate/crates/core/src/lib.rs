//! Price equilibria of a Hotelling duopoly in which each firm keeps a
//! captive segment at its own end of the line.
//!
//! Pure equilibria have closed forms. Mixed equilibria are built from
//! the `g`/`h` kernel family, which involves the exponential integral, and
//! are checked by integrating expected profit against the rival's price
//! distribution.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

mod error;
pub mod mapper;
pub mod market;
pub mod mixed;
pub mod par;
pub mod pure;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
pub use par::Execution;
