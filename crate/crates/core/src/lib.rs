//! Coherence-minimizing antenna placement for colocated MIMO virtual arrays.
//!
//! The library places `M` transmit and `N` receive elements on half-wavelength
//! grids so that the coherence of the resulting virtual-array measurement
//! matrix is small. Two placement algorithms are provided:
//!
//! * [`riap`] — alternating convex relaxation over selection probabilities,
//!   followed by randomized rounding (optionally expurgated over many draws);
//! * [`diap`] — the same alternation interleaved with deterministic
//!   elimination of the lowest-probability grid points until exactly `M` and
//!   `N` survive.
//!
//! The convex subproblems are min-max-of-complex-modulus programs solved as
//! SOCPs by [`conic`]. The array geometry, steering vectors and coherence
//! evaluation live in [`model`].

pub mod conic;
pub mod diap;
pub mod model;
pub mod riap;
pub mod weights;

mod error;

pub use error::Error;

/// Entries below this magnitude are treated as zero when counting the
/// support of a weight vector.
pub const ZERO_THRESHOLD: f64 = 1e-6;

pub type Result<T> = std::result::Result<T, Error>;
