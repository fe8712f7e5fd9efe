//! Numerical analysis of composition operators acting from a model space
//! into the Hardy space of the unit disk.
//!
//! The crate evaluates analytic self-maps and inner functions, computes the
//! Nevanlinna counting function by two independent engines, measures norms
//! by both boundary integrals and area counting-function integrals, builds
//! Clark (spectral) measure diagnostics, and rolls everything into a
//! compactness verdict for a configured operator. Start with the examples
//! directory; `scenario::run_analyze` is the top-level entry point.

pub mod analyzer;
pub mod blaschke;
pub mod clark;
pub mod counting;
pub mod error;
pub mod inner;
pub mod kernels;
pub mod maps;
pub mod poly;
pub mod quad;
pub mod scenario;
pub mod util;

pub use error::{Error, Result};
