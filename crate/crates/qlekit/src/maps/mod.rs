//! Planar-map combinatorics and exploration dynamics.

pub mod counting;
pub mod dla;
pub mod mullin;
pub mod peeling;
pub mod spanning;

pub use counting::{enumerate_triangulations, phi};
pub use dla::{compare_dla_lerw, DlaParams, DlaStats};
pub use mullin::{mullin, mullin_inverse, DecoratedMap, MullinWalk, Step};
pub use peeling::{explore_until_target, peel_step, reshuffle_necklaces, KernelTable, Mode, PeelingState};
pub use spanning::{lerw, wilson_ust};
