//! Co-follower network analysis of institutions.
//!
//! Given the follower lists of a set of institutional accounts, this crate
//! builds the weighted one-mode projection (institutions linked by shared
//! followers that follow at least a threshold number of institutions), and
//! runs the analyses layered on top of it:
//!
//! * [`projection`]: qualified followers, edge weights, normalization,
//!   truncation bias, density and connectivity.
//! * [`metrics`]: degree, closeness, betweenness and eigenvector centrality,
//!   weighted local clustering, and their correlation matrix.
//! * [`community`]: Louvain partitioning with a resolution parameter,
//!   modularity, the induced cluster-level graph and cluster naming.
//! * [`stats`]: monadic, dyadic and cluster-membership designs with OLS and
//!   logistic fits and significance screening.
//! * [`topics`]: follower self-description normalization, the token
//!   co-occurrence network and topic extraction/assignment.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel drivers live in the `cofollow` crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod community;
pub mod data_model;
mod error;
pub mod graph;
pub mod metrics;
pub mod projection;
pub mod stats;
pub mod topics;

pub use error::{Error, Result};
pub use graph::WeightedGraph;
