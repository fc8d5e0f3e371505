pub mod dbm;
pub mod fpp;
pub mod graph;
pub mod harmonic;
pub mod tiling;

pub use dbm::{grow_dbm, selection_law, Clock, DbmParams, GrowthCluster, GrowthStep, Sampler, Status};
pub use fpp::{eden_kernel, fpp_ball, fpp_kernel, Stop, Weights};
pub use graph::Graph;
pub use harmonic::{harmonic_measure_exact, harmonic_measure_walk, walk_vs_exact_tv, HarmonicMeasure};
pub use tiling::{tiling_graph, TilingGraph};
