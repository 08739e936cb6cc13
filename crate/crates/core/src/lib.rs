//! Consensus clustering on the orbit space of partitions.
//!
//! Partitions of `m` points into at most `l` clusters are `l x m` membership
//! matrices taken up to relabeling of the clusters. On top of that
//! representation the crate provides
//!
//! - exact optimal relabeling via linear assignment ([`align`]),
//! - the permutation-minimized `l_p` metrics, geodesic midpoints and set
//!   distances ([`metrics`]),
//! - soft extensions of pair-counting, cluster-matching and information
//!   theoretic comparison criteria ([`criteria`]),
//! - Frechet mean partitions and variations ([`consensus`]),
//! - sampling models and Monte-Carlo consistency / CLT experiments ([`simlab`]).

pub mod align;
pub mod consensus;
pub mod criteria;
pub mod error;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod seeding;
pub mod simlab;

pub use error::{Error, Result};
pub use partition::{canonicalize, Partition, PartitionMatrix, Permutation, TOL};
