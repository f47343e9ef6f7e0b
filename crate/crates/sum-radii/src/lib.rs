//! Exact primal–dual solver for minimum sum of radii clustering, with
//! outliers and generalized lower bounds, over finite metric instances.
//!
//! All arithmetic is exact rational arithmetic; Euclidean inputs are
//! rationalized on construction. The library exposes the full machinery —
//! candidate pair universes, dual raising, the fixed-λ covering subroutine,
//! the λ search, mixing, and rounding — plus a brute-force oracle and
//! instance generators for verification at small scale.

pub mod dual;
pub mod envelope;
pub mod error;
pub mod instance;
pub mod no_outliers;
pub mod oracle;
pub mod outliers;
pub mod pipeline;
pub mod pointset;
pub mod rat;
pub mod rounding;

pub use error::{Error, Result};
