//! Gaussian free fields on grids and harmonic fields on the unit disk.

pub mod harmonic;
pub mod lattice;
pub mod transform;

pub use harmonic::{green_disk, sample_harmonic_fbgff, GreenKind, HarmonicDiskField};
pub use lattice::{circle_average, sample_dgff, sample_dgff_seeded, Boundary, LatticeField};
