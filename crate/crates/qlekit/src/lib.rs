//! Simulation and verification kernels for quantum Loewner evolution (QLE).
//!
//! The crate covers lattice and disk Gaussian free fields, lattice LQG measures,
//! Eden/DLA/η-DBM growth on graphs, measure-driven radial Loewner evolution,
//! radial SLE and its coupling functionals, the δ-approximation chain for QLE,
//! exact planar-map combinatorics, and closed-form exponent calculators.
//!
//! Randomness is always supplied through a 64-bit master seed; see [`rng`] for
//! the stream-splitting rule used by parallel drivers.

pub mod acceptance;
pub mod error;
pub mod field;
pub mod growth;
pub mod io;
pub mod loewner;
pub mod lqg;
pub mod maps;
pub mod oracle;
pub mod qle;
pub mod rng;
pub mod scaling;
pub mod sle;
pub mod stats;

pub use error::{Error, Result};

/// Complex numbers used throughout.
pub type C64 = num_complex::Complex64;
