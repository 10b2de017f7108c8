//! Convoy discovery over trajectory databases.
//!
//! A convoy is a group of at least `m` objects that stay density-connected
//! (with respect to a neighbourhood range `e`) for at least `k` consecutive
//! ticks. This crate holds the pure algorithmic core:
//!
//! - [`geometry`]: point, segment and box distances, plus the time-synchronised
//!   closest-point-of-approach distance between two moving segments.
//! - [`trajectory`]: the trajectory model, interpolation at missing ticks and
//!   time-domain partitioning.
//! - [`simplify`]: three Douglas-Peucker style simplifiers that record the
//!   actual deviation of every produced segment.
//! - [`clustering`]: DBSCAN over snapshot positions and over simplified
//!   polylines with conservative, tolerance-expanded range search.
//! - [`convoy`]: the exact snapshot algorithm (CMC), the simplification-based
//!   filter/refinement pipeline (CuTS, CuTS+, CuTS*), the moving-cluster
//!   baseline and a brute-force oracle.
//! - [`autoparam`]: heuristics for the simplification tolerance and the
//!   partition length.
//!
//! The crate is `no_std` and only needs `alloc`. IO, timing and parallelism
//! are injected through the [`exec`] traits by the caller.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod autoparam;
pub mod clustering;
pub mod convoy;
pub mod exec;
pub mod geometry;
pub mod simplify;
pub mod trajectory;

pub use autoparam::{compute_delta, compute_lambda, DeltaChoice, ToleranceTrace};
pub use clustering::{dbscan_points, neighborhood_polylines, omega, traj_dbscan, Cluster, RangeSearchMode};
pub use convoy::{
    accuracy_report, brute_force, cmc, cuts_filter, cuts_refine, discover, discover_with, mc2, normalize,
    refinement_unit, Accuracy, Candidate, Convoy, ConvoyError, FilterOutput, QueryParams, RunStats, Variant,
    VariantConfig, Discovery, PartitionClusters,
};
pub use geometry::{BoundingBox, Point2, TimedSegment};
pub use simplify::{Segment, SimplifiedTrajectory, Simplifier};
pub use trajectory::{ObjectId, Partition, Tick, TimeDomain, TimedPoint, Trajectory, TrajectoryError};
