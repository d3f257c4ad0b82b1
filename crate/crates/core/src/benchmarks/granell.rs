use serde::{Deserialize, Serialize};

use super::{layer_rng, repair_isolated, sample_layer, Benchmark, GroundTruth};
use crate::error::{Error, Result};
use crate::temporal_graph::TemporalNetwork;

/// Smallest planted group accepted.
const MIN_GROUP_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GranellModel {
    /// Group 0 absorbs nodes of group 1 at a constant rate.
    Grow,
    /// Groups 0 and 1 merge progressively, then split.
    Merge,
    /// Groups 0 and 1 follow Grow while groups 2 and 3 follow Merge.
    Mixed,
}

/// Planted-partition models with one true partition per layer.
///
/// Every layer is a planted-partition graph: pairs in the same current group
/// connect with `p_in`, other pairs with `p_out`, except the merging pair
/// whose cross probability follows the merge schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GranellConfig {
    pub model: GranellModel,
    pub n_nodes: usize,
    pub n_layers: usize,
    /// Initial groups of near-equal size.
    pub n_groups: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Fraction of the donor group transferred by the last layer (Grow).
    pub grow_fraction: f64,
    /// Peak cross probability of the merging pair, as a fraction of the way
    /// from `p_out` to `p_in` (Merge).
    pub merge_strength: f64,
    /// Layer fractions `[ramp up, merged, ramp down, separate]` at which the
    /// merge phases start; before the first, the pair is separate.
    pub merge_phases: [f64; 4],
    /// The pair counts as one community once its cross probability has
    /// covered this fraction of the way from `p_out` to `p_in`.
    pub merged_threshold: f64,
    pub seed: u64,
}

impl Default for GranellConfig {
    fn default() -> Self {
        Self {
            model: GranellModel::Grow,
            n_nodes: 128,
            n_layers: 100,
            n_groups: 4,
            p_in: 0.45,
            p_out: 0.02,
            grow_fraction: 0.5,
            merge_strength: 1.0,
            merge_phases: [0.2, 0.4, 0.6, 0.8],
            merged_threshold: 0.5,
            seed: 0,
        }
    }
}

impl GranellConfig {
    pub fn new(model: GranellModel, n_nodes: usize, n_layers: usize, seed: u64) -> Self {
        Self { model, n_nodes, n_layers, seed, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.n_nodes == 0 || self.n_layers == 0 {
            return Err(Error::Domain("N and T must be positive".into()));
        }
        let min_groups = if self.model == GranellModel::Mixed { 4 } else { 2 };
        if self.n_groups < min_groups {
            return Err(Error::Domain(format!("{:?} needs at least {min_groups} groups", self.model)));
        }
        if self.n_nodes < self.n_groups * MIN_GROUP_SIZE {
            return Err(Error::Domain(format!(
                "N = {} too small for {} groups of at least {MIN_GROUP_SIZE} nodes",
                self.n_nodes, self.n_groups
            )));
        }
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if !(prob(self.p_in) && prob(self.p_out) && self.p_in > self.p_out) {
            return Err(Error::Domain(format!("need 0 <= p_out < p_in <= 1, got {} and {}", self.p_out, self.p_in)));
        }
        if !(prob(self.grow_fraction) && prob(self.merge_strength) && self.merged_threshold > 0.0 && self.merged_threshold <= 1.0) {
            return Err(Error::Domain("grow_fraction and merge_strength lie in [0, 1], merged_threshold in (0, 1]".into()));
        }
        let ph = self.merge_phases;
        if !(ph.iter().all(|&f| prob(f)) && ph.windows(2).all(|w| w[0] <= w[1])) {
            return Err(Error::Domain(format!("merge phases must be non-decreasing in [0, 1]: {ph:?}")));
        }
        Ok(())
    }

    fn grows(&self) -> bool {
        matches!(self.model, GranellModel::Grow | GranellModel::Mixed)
    }

    fn merging_pair(&self) -> Option<(usize, usize)> {
        match self.model {
            GranellModel::Grow => None,
            GranellModel::Merge => Some((0, 1)),
            GranellModel::Mixed => Some((2, 3)),
        }
    }

    /// Nodes moved from group 1 to group 0 by layer `t` (0-based).
    fn transferred(&self, t: usize, donor_size: usize) -> usize {
        if !self.grows() || self.n_layers < 2 {
            return 0;
        }
        let total = self.grow_fraction * donor_size as f64;
        (total * t as f64 / (self.n_layers - 1) as f64).round() as usize
    }

    /// Progress of the merge at layer `t` in `[0, merge_strength]`.
    fn merge_level(&self, t: usize) -> f64 {
        let x = if self.n_layers < 2 { 0.0 } else { t as f64 / (self.n_layers - 1) as f64 };
        let [up, full, down, apart] = self.merge_phases;
        let ramp = |a: f64, b: f64| if b > a { ((x - a) / (b - a)).clamp(0.0, 1.0) } else { 1.0 };
        let level = if x < up {
            0.0
        } else if x < full {
            ramp(up, full)
        } else if x < down {
            1.0
        } else if x < apart {
            1.0 - ramp(down, apart)
        } else {
            0.0
        };
        level * self.merge_strength
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GranellMetadata {
    pub config: GranellConfig,
    /// Initial group of every node.
    pub initial_groups: Vec<usize>,
    /// Nodes moved from group 1 to group 0 at each layer.
    pub transferred: Vec<usize>,
    /// Cross probability of the merging pair at each layer.
    pub merge_cross_probability: Vec<f64>,
    /// Layers (1-based) on which the merging pair is one true community.
    pub merged_layers: Vec<usize>,
    pub forced_edges: Vec<usize>,
}

/// Generates one realization with a single truth scale named `truth`.
pub fn generate_granell(cfg: &GranellConfig) -> Result<Benchmark<GranellMetadata>> {
    cfg.validate()?;
    let (n, n_layers, q) = (cfg.n_nodes, cfg.n_layers, cfg.n_groups);
    let initial: Vec<usize> = (0..n).map(|i| i * q / n).collect();
    let donor: Vec<usize> = (0..n).filter(|&i| initial[i] == 1).collect();

    let mut truth_layers = Vec::with_capacity(n_layers);
    let mut edges = Vec::new();
    let mut meta = GranellMetadata {
        config: cfg.clone(),
        initial_groups: initial.clone(),
        transferred: Vec::with_capacity(n_layers),
        merge_cross_probability: Vec::with_capacity(n_layers),
        merged_layers: Vec::new(),
        forced_edges: Vec::with_capacity(n_layers),
    };
    for t in 0..n_layers {
        let moved = cfg.transferred(t, donor.len());
        let mut groups = initial.clone();
        // the donor's last `moved` nodes now belong to group 0
        for &i in &donor[donor.len() - moved..] {
            groups[i] = 0;
        }
        let level = cfg.merging_pair().map_or(0.0, |_| cfg.merge_level(t));
        let p_cross = cfg.p_out + level * (cfg.p_in - cfg.p_out);
        let merged = cfg.merging_pair().is_some() && level > 0.0 && level >= cfg.merged_threshold;
        let pair = cfg.merging_pair();
        let is_pair = |a: usize, b: usize| pair.is_some_and(|(x, y)| (a, b) == (x, y) || (a, b) == (y, x));

        let mut rng = layer_rng(cfg.seed, t);
        let mut layer = sample_layer(n, &mut rng, |i, j| {
            let (a, b) = (groups[i], groups[j]);
            if a == b {
                cfg.p_in
            } else if is_pair(a, b) {
                p_cross
            } else {
                cfg.p_out
            }
        });
        let labels: Vec<usize> = match pair {
            Some((x, y)) if merged => groups.iter().map(|&g| if g == y { x } else { g }).collect(),
            _ => groups,
        };
        meta.forced_edges.push(repair_isolated(n, &mut layer, &labels, &mut rng));
        meta.transferred.push(moved);
        meta.merge_cross_probability.push(p_cross);
        if merged {
            meta.merged_layers.push(t + 1);
        }
        edges.extend(layer.into_iter().map(|(i, j)| (t, i, j, 1.0)));
        truth_layers.push(labels);
    }

    let network = TemporalNetwork::from_edges(n, n_layers, edges)?;
    let mut truth = GroundTruth::new(n, n_layers);
    truth.insert("truth", truth_layers)?;
    Ok(Benchmark { network, truth, metadata: meta })
}
