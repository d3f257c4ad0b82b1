//! Temporal networks, inter-layer couplings and the normalized supra-Laplacian.
//!
//! Layers are indexed from 0 in the API and from 1 in the on-disk edge-list
//! format. Node-time pairs are flattened layer-major: node `i` of layer `t`
//! sits at `i + t * N`.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use log::warn;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// An ordered sequence of undirected layers on a shared node set.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalNetwork {
    n_nodes: usize,
    layers: Vec<CsrMatrix>,
    node_labels: Option<Vec<String>>,
}

impl TemporalNetwork {
    /// Validates dimensions, symmetry, zero diagonal and non-negative weights.
    pub fn new(n_nodes: usize, layers: Vec<CsrMatrix>) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::Domain("a temporal network needs at least one node".into()));
        }
        if layers.is_empty() {
            return Err(Error::Domain("a temporal network needs at least one layer".into()));
        }
        for (t, a) in layers.iter().enumerate() {
            if a.dim() != n_nodes {
                return Err(Error::Consistency(format!("layer {t} is {0}x{0}, expected {n_nodes}", a.dim())));
            }
            if !a.is_symmetric() {
                return Err(Error::Consistency(format!("layer {t} is not symmetric")));
            }
            for i in 0..n_nodes {
                let (cols, vals) = a.row(i);
                if cols.contains(&i) {
                    return Err(Error::Consistency(format!("layer {t} has a self-loop on node {i}")));
                }
                if vals.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Consistency(format!("layer {t} has a negative or non-finite weight")));
                }
            }
        }
        Ok(Self { n_nodes, layers, node_labels: None })
    }

    /// Builds a network from `(layer, i, j, weight)` edges, `layer` 0-based.
    pub fn from_edges(n_nodes: usize, n_layers: usize, edges: impl IntoIterator<Item = (usize, usize, usize, f64)>) -> Result<Self> {
        let mut per_layer: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); n_layers];
        for (t, i, j, w) in edges {
            if t >= n_layers {
                return Err(Error::Domain(format!("layer {t} out of range for T = {n_layers}")));
            }
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::Domain(format!("edge ({i}, {j}) out of range for N = {n_nodes}")));
            }
            if i == j {
                return Err(Error::Domain(format!("self-loop on node {i} in layer {t}")));
            }
            per_layer[t].push((i.min(j), i.max(j), w));
        }
        let layers = per_layer.into_iter().map(|e| CsrMatrix::symmetric_from_upper(n_nodes, e)).collect();
        Self::new(n_nodes, layers)
    }

    pub fn with_node_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_nodes {
            return Err(Error::Consistency(format!("{} labels for {} nodes", labels.len(), self.n_nodes)));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, t: usize) -> &CsrMatrix {
        &self.layers[t]
    }

    pub fn layers(&self) -> &[CsrMatrix] {
        &self.layers
    }

    pub fn node_labels(&self) -> Option<&[String]> {
        self.node_labels.as_deref()
    }

    /// Within-layer degrees `d_i^t`.
    pub fn layer_degrees(&self, t: usize) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.layers[t].row_sum(i)).collect()
    }

    /// Number of undirected edges summed over layers.
    pub fn n_edges(&self) -> usize {
        self.layers.iter().map(|a| a.nnz() / 2).sum()
    }

    /// Mean within-layer degree over all node-time pairs (unweighted).
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.n_edges() as f64 / (self.n_nodes * self.n_layers()) as f64
    }

    /// Writes the TSV edge-list format: a `N <n> T <t>` header, then `t i j w`
    /// lines with 1-based `t` and `i < j`.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "N {} T {}", self.n_nodes, self.n_layers())?;
        for (t, a) in self.layers.iter().enumerate() {
            for i in 0..self.n_nodes {
                let (cols, vals) = a.row(i);
                for (&j, &w) in cols.iter().zip(vals) {
                    if j > i {
                        writeln!(out, "{}\t{}\t{}\t{}", t + 1, i, j, fmt_f64(w))?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_field<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse { line, msg: format!("cannot parse {what} from '{tok}'") })
}

/// Reads the TSV edge-list format (see [`TemporalNetwork::write_edge_list`]).
///
/// Blank lines and lines starting with `#` are skipped. A pair may be listed
/// in both orientations only with identical weights.
pub fn load_temporal_network<R: BufRead>(source: R) -> Result<TemporalNetwork> {
    let mut header: Option<(usize, usize)> = None;
    let mut seen: HashMap<(usize, usize, usize), f64> = HashMap::new();
    let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new();

    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((n, n_layers)) = header else {
            if toks.len() != 4 || toks[0] != "N" || toks[2] != "T" {
                return Err(Error::Parse { line: lineno, msg: "expected header 'N <int> T <int>'".into() });
            }
            let n: usize = parse_field(toks[1], lineno, "N")?;
            let t: usize = parse_field(toks[3], lineno, "T")?;
            if n == 0 || t == 0 {
                return Err(Error::Parse { line: lineno, msg: "N and T must be positive".into() });
            }
            header = Some((n, t));
            continue;
        };
        if toks.len() != 4 {
            return Err(Error::Parse { line: lineno, msg: format!("expected 't i j w', got {} fields", toks.len()) });
        }
        let t: usize = parse_field(toks[0], lineno, "layer")?;
        let i: usize = parse_field(toks[1], lineno, "node")?;
        let j: usize = parse_field(toks[2], lineno, "node")?;
        let w: f64 = parse_field(toks[3], lineno, "weight")?;
        if t == 0 || t > n_layers {
            return Err(Error::Parse { line: lineno, msg: format!("layer {t} outside 1..={n_layers}") });
        }
        for idx in [i, j] {
            if idx >= n {
                return Err(Error::Range { line: lineno, index: idx, n });
            }
        }
        if i == j {
            return Err(Error::SelfLoop { line: lineno, node: i, layer: t });
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::Parse { line: lineno, msg: format!("weight must be positive, got {w}") });
        }
        if seen.insert((t, i, j), w).is_some() {
            return Err(Error::Duplicate { line: lineno, layer: t, i, j });
        }
        match seen.get(&(t, j, i)) {
            Some(&other) if other != w => {
                return Err(Error::Consistency(format!(
                    "line {lineno}: edge ({i}, {j}) in layer {t} listed with weights {other} and {w}"
                )))
            }
            Some(_) => {}
            None => edges.push((t - 1, i, j, w)),
        }
    }
    let (n, n_layers) = header.ok_or(Error::Parse { line: 0, msg: "missing header".into() })?;
    TemporalNetwork::from_edges(n, n_layers, edges)
}

/// Couplings `w[t][i]` between node `i` in layer `t` and in layer `t + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterLayerWeights {
    n_nodes: usize,
    w: Vec<Vec<f64>>,
}

impl InterLayerWeights {
    pub fn new(n_nodes: usize, w: Vec<Vec<f64>>) -> Result<Self> {
        for row in &w {
            if row.len() != n_nodes {
                return Err(Error::Consistency(format!("weight row of length {} for N = {n_nodes}", row.len())));
            }
            if row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Domain("inter-layer weights must be finite and non-negative".into()));
            }
        }
        Ok(Self { n_nodes, w })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of layer transitions, `T - 1`.
    pub fn n_transitions(&self) -> usize {
        self.w.len()
    }

    pub fn get(&self, t: usize, i: usize) -> f64 {
        self.w[t][i]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.w
    }

    /// Applies `t i omega` override lines (1-based `t`, coupling `t -> t+1`).
    pub fn apply_overrides<R: BufRead>(&mut self, source: R) -> Result<()> {
        for (idx, line) in source.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = trimmed.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse { line: lineno, msg: "expected 't i omega'".into() });
            }
            let t: usize = parse_field(toks[0], lineno, "layer")?;
            let i: usize = parse_field(toks[1], lineno, "node")?;
            let omega: f64 = parse_field(toks[2], lineno, "omega")?;
            if t == 0 || t > self.w.len() {
                return Err(Error::Parse { line: lineno, msg: format!("transition {t} outside 1..={}", self.w.len()) });
            }
            if i >= self.n_nodes {
                return Err(Error::Range { line: lineno, index: i, n: self.n_nodes });
            }
            if !(omega.is_finite() && omega >= 0.0) {
                return Err(Error::Parse { line: lineno, msg: format!("omega must be non-negative, got {omega}") });
            }
            self.w[t - 1][i] = omega;
        }
        Ok(())
    }
}

/// Neighbourhood-overlap couplings: half the number of neighbours node `i`
/// shares between consecutive layers. Weighted layers are binarized at `> 0`
/// for the overlap count only.
pub fn lart_weights(net: &TemporalNetwork) -> InterLayerWeights {
    let nonbinary = net
        .layers()
        .iter()
        .any(|a| (0..net.n_nodes()).any(|i| a.row(i).1.iter().any(|&v| v != 1.0)));
    if nonbinary {
        warn!("non-binary layer weights binarized at > 0 for neighbourhood-overlap couplings");
    }
    let w = (0..net.n_layers().saturating_sub(1))
        .map(|t| {
            let (a, b) = (net.layer(t), net.layer(t + 1));
            (0..net.n_nodes())
                .map(|i| sorted_overlap(a.row(i), b.row(i)) as f64 / 2.0)
                .collect()
        })
        .collect();
    InterLayerWeights { n_nodes: net.n_nodes(), w }
}

fn sorted_overlap((ca, va): (&[usize], &[f64]), (cb, vb): (&[usize], &[f64])) -> usize {
    let (mut p, mut q, mut count) = (0, 0, 0);
    while p < ca.len() && q < cb.len() {
        match ca[p].cmp(&cb[q]) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                if va[p] > 0.0 && vb[q] > 0.0 {
                    count += 1;
                }
                p += 1;
                q += 1;
            }
        }
    }
    count
}

/// The same coupling `omega` for every node and transition.
pub fn constant_weights(net: &TemporalNetwork, omega: f64) -> Result<InterLayerWeights> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::Domain(format!("omega must be non-negative, got {omega}")));
    }
    Ok(InterLayerWeights {
        n_nodes: net.n_nodes(),
        w: vec![vec![omega; net.n_nodes()]; net.n_layers().saturating_sub(1)],
    })
}

/// Supra-adjacency, multilayer degrees and the normalized supra-Laplacian.
#[derive(Debug, Clone)]
pub struct SupraSystem {
    n_nodes: usize,
    n_layers: usize,
    adjacency: CsrMatrix,
    degrees: Vec<f64>,
    laplacian: CsrMatrix,
}

impl SupraSystem {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    /// `N * T`
    pub fn dim(&self) -> usize {
        self.n_nodes * self.n_layers
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn laplacian(&self) -> &CsrMatrix {
        &self.laplacian
    }

    /// Flat index of node `i` in layer `t` (both 0-based).
    pub fn flat_index(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.n_nodes && t < self.n_layers);
        i + t * self.n_nodes
    }

    /// Inverse of [`flat_index`](Self::flat_index): `(node, layer)`.
    pub fn node_layer(&self, flat: usize) -> (usize, usize) {
        (flat % self.n_nodes, flat / self.n_nodes)
    }

    /// Safe upper bound on the largest Laplacian eigenvalue.
    pub fn lambda_max_estimate(&self) -> f64 {
        self.laplacian.gershgorin_bound().min(2.0)
    }
}

/// Assembles the block-tridiagonal supra-adjacency and its normalized Laplacian
/// `D^{-1/2} (D - A) D^{-1/2}`.
pub fn build_supra_system(net: &TemporalNetwork, weights: &InterLayerWeights) -> Result<SupraSystem> {
    let (n, n_layers) = (net.n_nodes(), net.n_layers());
    if weights.n_nodes() != n || weights.n_transitions() + 1 != n_layers {
        return Err(Error::Consistency(format!(
            "weights are {}x{}, network needs {}x{n}",
            weights.n_transitions(),
            weights.n_nodes(),
            n_layers - 1
        )));
    }
    let mut upper = Vec::with_capacity(net.n_edges() + n * (n_layers - 1));
    for (t, a) in net.layers().iter().enumerate() {
        let off = t * n;
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j > i {
                    upper.push((off + i, off + j, v));
                }
            }
        }
    }
    for t in 0..n_layers - 1 {
        for i in 0..n {
            let w = weights.get(t, i);
            if w > 0.0 {
                upper.push((t * n + i, (t + 1) * n + i, w));
            }
        }
    }
    let adjacency = CsrMatrix::symmetric_from_upper(n * n_layers, upper);
    let degrees: Vec<f64> = (0..n * n_layers).map(|k| adjacency.row_sum(k)).collect();
    if let Some(k) = degrees.iter().position(|&d| d <= 0.0) {
        return Err(Error::DegenerateDegree { node: k % n, layer: k / n });
    }
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let lap_upper = (0..n * n_layers).flat_map(|i| {
        let (cols, vals) = adjacency.row(i);
        let inv_sqrt = &inv_sqrt;
        std::iter::once((i, i, 1.0)).chain(
            cols.iter()
                .zip(vals)
                .filter(move |(&j, _)| j > i)
                .map(move |(&j, &v)| (i, j, -v * inv_sqrt[i] * inv_sqrt[j])),
        )
    });
    let laplacian = CsrMatrix::symmetric_from_upper(n * n_layers, lap_upper);
    Ok(SupraSystem { n_nodes: n, n_layers, adjacency, degrees, laplacian })
}
