//! Simulation of Boolean models driven by Cox point processes.
//!
//! The pipeline is: realize a random environment (the directing measure),
//! sample a Cox point process conditional on it, attach i.i.d. radii, build
//! the cluster structure of the resulting union of balls, and estimate
//! percolation observables (vacant probability, crossing curves, critical
//! intensity, cluster-moment ladders, stabilization tails, deviation
//! integrals) over seeded replicates.

pub mod cluster;
pub mod cox;
pub mod env;
pub mod error;
pub mod estimators;
pub mod geom;
pub mod harness;
pub mod radius;
pub mod report;
pub mod seed;
pub mod stats;

pub use cluster::{build_clusters, ClusterLabels, UnionFind};
pub use cox::{attach_marks, sample_cox, sample_marked, MarkedPointSet};
pub use env::{
    essential_connectedness_audit, make_environment, measure_of_ball, phi_hat, radius_field,
    EnvRealization, EnvironmentSpec,
};
pub use error::CoxError;
pub use geom::{balls_overlap, Point, Window};
pub use radius::RadiusLaw;
pub use seed::Seed;
pub use stats::{
    crossing_exists, g_event, giant_cluster_count, origin_cluster, union_volume_mc, ClusterStats,
    GEventVariant,
};
