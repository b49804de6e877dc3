//! Intrinsic dimension of networks.
//!
//! The crate estimates the dimension of the Euclidean space that best explains
//! a network. Weighted networks (or plain dissimilarity matrices) are fed
//! straight to the twoNN estimator, which only needs each node's first and
//! second nearest-neighbour distances. Unweighted networks are first embedded
//! with the eigenvectors of the graph Laplacian `L = D - W`, and twoNN is run on
//! the embedded points for a sweep of trial dimensions until its estimate
//! plateaus.
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`graph`] | dissimilarity / similarity / adjacency / point-cloud types and conversions |
//! | [`io`] | edge lists, MatrixMarket, dense CSV matrices, point CSV and result tables |
//! | [`spectral`] | Laplacian, low-end spectrum, spectral embedding |
//! | [`neighbors`] | exact k-nearest-neighbour search (kd-tree and brute force) |
//! | [`twonn`] | neighbour ratios, per-index dimension curve, windowed estimate |
//! | [`constructors`] | samplers, KNN and radius graphs, edge-flip noise, cube volume |
//! | [`pipeline`] | embedding + twoNN and the trial-dimension sweep |

pub mod constructors;
pub mod error;
pub mod graph;
pub mod io;
pub mod neighbors;
pub mod pipeline;
pub mod spectral;
pub mod twonn;

pub use error::{Error, Result};
pub use graph::{DissimilarityMatrix, PointCloud, UnweightedGraph, WeightedGraph};
