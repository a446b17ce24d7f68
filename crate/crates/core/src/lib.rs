//! Numerical laboratory for metric Diophantine approximation.
//!
//! Exact and certified arithmetic for real inputs, approximating functions,
//! counting functions, criterion series, finite stages of limsup sets,
//! box-counting dimension estimates and inhomogeneous scans.

pub mod arith;
pub mod error;
pub mod frac;
pub mod hausdorff;
pub mod interval;
pub mod limsupset;
pub mod psifun;
pub mod realnum;
pub mod series;
pub mod twisted;

pub use error::{Error, Result};
