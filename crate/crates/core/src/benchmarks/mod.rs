//! Synthetic temporal networks with planted communities.
//!
//! Two families: time-varying Sales-Pardo networks with three nested scales
//! ([`generate_sp_temporal`]) and the Grow / Merge / Mixed planted-partition
//! models with one true partition per layer ([`generate_granell`]). Each layer
//! draws from its own ChaCha stream, so output depends only on the parameters
//! and the seed. Granell layers are independent; Sales-Pardo layers may carry
//! pairs over from the previous layer (`SPParams::persistence`).

mod granell;
mod sales_pardo;

pub use granell::{generate_granell, GranellConfig, GranellMetadata, GranellModel};
pub use sales_pardo::{generate_sp_temporal, ChangeClass, SPParams, SpMetadata, SpProbabilities};

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::temporal_graph::TemporalNetwork;

/// A generated network with its planted truth and generator metadata.
#[derive(Debug, Clone)]
pub struct Benchmark<M> {
    pub network: TemporalNetwork,
    pub truth: GroundTruth,
    pub metadata: M,
}

/// Planted labels for every node at every layer, per named scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    n_nodes: usize,
    n_layers: usize,
    /// `scales[name][t][i]`
    scales: BTreeMap<String, Vec<Vec<usize>>>,
}

impl GroundTruth {
    pub fn new(n_nodes: usize, n_layers: usize) -> Self {
        Self { n_nodes, n_layers, scales: BTreeMap::new() }
    }

    pub fn insert(&mut self, name: &str, labels: Vec<Vec<usize>>) -> Result<()> {
        if labels.len() != self.n_layers || labels.iter().any(|l| l.len() != self.n_nodes) {
            return Err(Error::Consistency(format!(
                "truth '{name}' must hold {} layers of {} labels",
                self.n_layers, self.n_nodes
            )));
        }
        self.scales.insert(name.to_string(), labels);
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn scale_names(&self) -> impl Iterator<Item = &str> {
        self.scales.keys().map(String::as_str)
    }

    pub fn scale(&self, name: &str) -> Result<&[Vec<usize>]> {
        self.scales
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Domain(format!("no truth scale '{name}' (have {:?})", self.scales.keys().collect::<Vec<_>>())))
    }

    /// Layer-major labels of all node-times at one scale.
    pub fn flat(&self, name: &str) -> Result<Vec<usize>> {
        Ok(self.scale(name)?.iter().flatten().copied().collect())
    }

    /// `node,layer,community` rows with 1-based layers.
    pub fn write_csv<W: Write>(&self, name: &str, mut out: W) -> Result<()> {
        writeln!(out, "node,layer,community")?;
        for (t, layer) in self.scale(name)?.iter().enumerate() {
            for (i, c) in layer.iter().enumerate() {
                writeln!(out, "{i},{},{c}", t + 1)?;
            }
        }
        Ok(())
    }
}

/// Per-layer random stream derived from the generator seed.
pub(crate) fn layer_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64 + 1);
    rng
}

/// Draws each pair `i < j` independently with probability `p(i, j)`.
pub(crate) fn sample_layer(n: usize, rng: &mut ChaCha8Rng, p: impl Fn(usize, usize) -> f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p(i, j) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// Gives every isolated node one edge to a random member of its own
/// community (any other node if it is alone). Returns the number added.
pub(crate) fn repair_isolated(n: usize, edges: &mut Vec<(usize, usize)>, community: &[usize], rng: &mut ChaCha8Rng) -> usize {
    let mut degree = vec![0usize; n];
    for &(i, j) in edges.iter() {
        degree[i] += 1;
        degree[j] += 1;
    }
    let mut added = 0;
    for i in 0..n {
        if degree[i] > 0 || n < 2 {
            continue;
        }
        let mates: Vec<usize> = (0..n).filter(|&j| j != i && community[j] == community[i]).collect();
        let j = if mates.is_empty() {
            let k = rng.random_range(0..n - 1);
            if k >= i {
                k + 1
            } else {
                k
            }
        } else {
            mates[rng.random_range(0..mates.len())]
        };
        edges.push((i.min(j), i.max(j)));
        degree[i] += 1;
        degree[j] += 1;
        added += 1;
    }
    added
}

#[cfg(test)]
mod tests;
