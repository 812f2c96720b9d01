//! Finite-scale exploration of infinite sumsets `B+B+t` inside sets of
//! natural numbers.

pub mod bitmap;
pub mod cli;
pub mod constructions;
pub mod correspondence;
pub mod density;
pub mod error;
pub mod rational;
pub mod search;
pub mod setexpr;

pub use bitmap::Bitmap;
pub use error::{Error, Result};
pub use setexpr::{parse, IndexExpr, Limits, SetExpr};
