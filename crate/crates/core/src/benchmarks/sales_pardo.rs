use serde::{Deserialize, Serialize};

use rand::Rng;

use super::{layer_rng, repair_isolated, Benchmark, GroundTruth};
use crate::error::{Error, Result};
use crate::temporal_graph::TemporalNetwork;

/// Which scale of the hierarchy changes over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChangeClass {
    /// Two small groups of one medium group merge, then split.
    Ssc,
    /// Two medium groups of one large group merge, then split.
    Msc,
    /// Two large groups merge, then split.
    Lsc,
}

impl ChangeClass {
    pub fn default_layers(self) -> usize {
        match self {
            ChangeClass::Ssc => 21,
            ChangeClass::Msc => 17,
            ChangeClass::Lsc => 33,
        }
    }

    fn level(self) -> usize {
        match self {
            ChangeClass::Ssc => 0,
            ChangeClass::Msc => 1,
            ChangeClass::Lsc => 2,
        }
    }
}

/// Time-varying three-level hierarchical network.
///
/// Nodes are numbered so that small group `g` holds nodes
/// `g * small_size .. (g + 1) * small_size`, and medium / large groups are
/// contiguous runs of small groups.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SPParams {
    /// Level separation: the expected degree contributed by each level is
    /// `2 rho / 3` times that of the level inside it, so larger values blur
    /// the hierarchy. Must stay below 5 to keep the probabilities ordered.
    pub rho: f64,
    /// Expected degree per layer.
    pub k_bar: f64,
    pub n_large: usize,
    pub medium_per_large: usize,
    pub small_per_medium: usize,
    pub small_size: usize,
    /// Defaults to [`ChangeClass::default_layers`].
    pub n_layers: Option<usize>,
    pub change: ChangeClass,
    /// Probability that a pair keeps its previous-layer state when its
    /// connection probability is unchanged; otherwise the pair is redrawn.
    /// Marginal edge probabilities do not depend on it.
    pub persistence: f64,
    pub seed: u64,
}

impl Default for SPParams {
    fn default() -> Self {
        Self {
            rho: 1.0,
            k_bar: 16.0,
            n_large: 4,
            medium_per_large: 4,
            small_per_medium: 4,
            small_size: 10,
            n_layers: None,
            change: ChangeClass::Ssc,
            persistence: 0.25,
            seed: 0,
        }
    }
}

impl SPParams {
    pub fn n_nodes(&self) -> usize {
        self.n_large * self.medium_per_large * self.small_per_medium * self.small_size
    }

    pub fn layers(&self) -> usize {
        self.n_layers.unwrap_or_else(|| self.change.default_layers())
    }

    fn group_sizes(&self) -> [usize; 3] {
        let small = self.small_size;
        let medium = small * self.small_per_medium;
        [small, medium, medium * self.medium_per_large]
    }

    /// Group of `node` at level 0 (small), 1 (medium) or 2 (large).
    fn group(&self, node: usize, level: usize) -> usize {
        node / self.group_sizes()[level]
    }

    /// 1-based layers at which the changing pair merges and splits again.
    pub fn merge_split_layers(&self) -> (usize, usize) {
        let t = self.layers();
        (t.div_ceil(3), (2 * t).div_ceil(3))
    }
}

/// Connection probabilities solved from `(rho, k_bar)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpProbabilities {
    pub p_small: f64,
    pub p_medium: f64,
    pub p_large: f64,
    pub p_background: f64,
    /// Expected degree contributed by each level, innermost first; sums to `k_bar`.
    pub degree_shares: [f64; 4],
}

impl SpProbabilities {
    /// Shares `k_l = k_small * r^l` with `r = 2 rho / 3`, `l = 0..3`, summing
    /// to `k_bar`; each probability is its share over the number of partners
    /// at that level.
    pub fn solve(params: &SPParams) -> Result<Self> {
        let SPParams { rho, k_bar, .. } = *params;
        if !(rho.is_finite() && rho > 0.0) || !(k_bar.is_finite() && k_bar > 0.0) {
            return Err(Error::Domain(format!("rho and k_bar must be positive, got {rho} and {k_bar}")));
        }
        if !(0.0..=1.0).contains(&params.persistence) {
            return Err(Error::Domain(format!("persistence must lie in [0, 1], got {}", params.persistence)));
        }
        if params.n_large < 2 || params.medium_per_large < 2 || params.small_per_medium < 2 || params.small_size < 2 {
            return Err(Error::Domain("every level needs at least two groups and small groups at least two nodes".into()));
        }
        let [s, m, l] = params.group_sizes();
        let n = params.n_nodes();
        let partners = [s - 1, m - s, l - m, n - l].map(|v| v as f64);
        let r = rho * 2.0 / 3.0;
        let k0 = k_bar / (1.0 + r + r * r + r * r * r);
        let degree_shares = [k0, k0 * r, k0 * r * r, k0 * r * r * r];
        let p: Vec<f64> = degree_shares.iter().zip(partners).map(|(k, c)| k / c).collect();
        if p.iter().any(|&v| v > 1.0) {
            return Err(Error::Domain(format!("k_bar = {k_bar} with rho = {rho} needs a probability above 1: {p:?}")));
        }
        if !(p[0] > p[1] && p[1] > p[2] && p[2] > p[3]) {
            return Err(Error::Domain(format!(
                "rho = {rho} breaks the ordering p_small > p_medium > p_large > p_background: {p:?}"
            )));
        }
        Ok(Self { p_small: p[0], p_medium: p[1], p_large: p[2], p_background: p[3], degree_shares })
    }

    fn by_level(&self) -> [f64; 4] {
        [self.p_small, self.p_medium, self.p_large, self.p_background]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpMetadata {
    pub params: SPParams,
    pub n_nodes: usize,
    pub n_layers: usize,
    pub probabilities: SpProbabilities,
    /// The two sibling groups, at the changing level, that merge.
    pub merged_groups: (usize, usize),
    /// 1-based; merged on layers `merge_layer..split_layer`.
    pub merge_layer: usize,
    pub split_layer: usize,
    /// Edges added per layer to give isolated nodes a neighbour.
    pub forced_edges: Vec<usize>,
}

/// Generates a time-varying Sales-Pardo network with truths `small`,
/// `medium` and `large`.
///
/// Two sibling groups (the first two at the changing level) behave as one
/// group on the merged layers: pairs across them connect with that level's
/// probability and share a label in that level's truth.
pub fn generate_sp_temporal(params: &SPParams) -> Result<Benchmark<SpMetadata>> {
    let probs = SpProbabilities::solve(params)?;
    let n = params.n_nodes();
    let n_layers = params.layers();
    if n_layers == 0 {
        return Err(Error::Domain("need at least one layer".into()));
    }
    let (merge_layer, split_layer) = params.merge_split_layers();
    let level_changed = params.change.level();
    let by_level = probs.by_level();

    let mut truth_layers: [Vec<Vec<usize>>; 3] = Default::default();
    let mut edges = Vec::new();
    let mut forced_edges = Vec::with_capacity(n_layers);
    // sampled state and probability of pair (i, j), i < j, at index i * n + j
    let mut prev: Option<(Vec<bool>, Vec<f64>)> = None;
    for t in 0..n_layers {
        let merged = (merge_layer..split_layer).contains(&(t + 1));
        let labels: [Vec<usize>; 3] = std::array::from_fn(|level| {
            (0..n)
                .map(|i| {
                    let g = params.group(i, level);
                    if merged && level == level_changed && g == 1 {
                        0
                    } else {
                        g
                    }
                })
                .collect()
        });
        let mut rng = layer_rng(params.seed, t);
        let mut state = vec![false; n * n];
        let mut prob = vec![0.0; n * n];
        let mut layer = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let shared = (0..3).find(|&lv| labels[lv][i] == labels[lv][j]).unwrap_or(3);
                let p = by_level[shared];
                let keep = rng.random::<f64>() < params.persistence;
                let fresh = rng.random::<f64>() < p;
                let e = match &prev {
                    Some((s, q)) if keep && q[i * n + j] == p => s[i * n + j],
                    _ => fresh,
                };
                state[i * n + j] = e;
                prob[i * n + j] = p;
                if e {
                    layer.push((i, j));
                }
            }
        }
        prev = Some((state, prob));
        forced_edges.push(repair_isolated(n, &mut layer, &labels[0], &mut rng));
        edges.extend(layer.into_iter().map(|(i, j)| (t, i, j, 1.0)));
        for (level, l) in labels.into_iter().enumerate() {
            truth_layers[level].push(l);
        }
    }

    let network = TemporalNetwork::from_edges(n, n_layers, edges)?;
    let mut truth = GroundTruth::new(n, n_layers);
    for (name, labels) in ["small", "medium", "large"].into_iter().zip(truth_layers) {
        truth.insert(name, labels)?;
    }
    let metadata = SpMetadata {
        params: params.clone(),
        n_nodes: n,
        n_layers,
        probabilities: probs,
        merged_groups: (0, 1),
        merge_layer,
        split_layer,
        forced_edges,
    };
    Ok(Benchmark { network, truth, metadata })
}
