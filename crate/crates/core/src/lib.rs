//! Multi-scale community detection in temporal networks with spectral graph
//! wavelets on the normalized supra-Laplacian.

pub mod benchmarks;
pub mod clustering;
pub mod error;
pub mod io;
pub mod metrics;
pub mod sparse;
pub mod spectral;
pub mod temporal_graph;
pub mod wavelet;

pub use error::{Error, Result};
