//! Ring-BKW on two-power cyclotomic Ring-LWE.
//!
//! The pipeline: BKW reduction in a prioritized ζ-basis (optionally keyed on
//! signed-rotation orbits) until `a` lies in a cyclotomic subring `S_q`, trace
//! reduction to `m/k` independent subring instances, exhaustive hypothesis testing
//! on each, and reconstruction of the full secret by linear algebra over F_q.

pub mod bkw;
mod error;
pub mod formats;
pub mod fqring;
pub mod harness;
mod linalg;
pub mod reduce;
pub mod sampling;
pub mod solve;
pub mod tower;

pub use error::{Error, Result};
