//! Partition comparison: adjusted Rand index, normalized variation of
//! information, per-layer similarity curves and the top-five success rate.
//!
//! Degenerate conventions: when the Rand index cannot be adjusted (both
//! partitions all-singletons, both one block, or fewer than two items) the
//! ARI is 1 if the partitions agree and 0 otherwise. The variation of
//! information is normalized by `ln n`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Joint counts of two labelings over the same items.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    counts: HashMap<(usize, usize), u64>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(p: &[usize], q: &[usize]) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::Domain(format!("label arrays of length {} and {}", p.len(), q.len())));
        }
        let (rp, kp) = relabel(p);
        let (rq, kq) = relabel(q);
        let mut counts = HashMap::new();
        let mut rows = vec![0u64; kp];
        let mut cols = vec![0u64; kq];
        for (&a, &b) in rp.iter().zip(&rq) {
            *counts.entry((a, b)).or_insert(0) += 1;
            rows[a] += 1;
            cols[b] += 1;
        }
        Ok(Self { counts, rows, cols, total: p.len() as u64 })
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts.get(&(i, j)).copied().unwrap_or(0)
    }

    /// Non-zero cells.
    pub fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.values().copied()
    }

    pub fn row_sums(&self) -> &[u64] {
        &self.rows
    }

    pub fn col_sums(&self) -> &[u64] {
        &self.cols
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

/// Maps arbitrary labels to `0..k` in order of first appearance.
pub fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

fn pairs(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

pub fn adjusted_rand_index(p: &[usize], q: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(p, q)?;
    let index: f64 = t.cells().map(pairs).sum();
    let a: f64 = t.rows.iter().copied().map(pairs).sum();
    let b: f64 = t.cols.iter().copied().map(pairs).sum();
    let all = pairs(t.total);
    if all == 0.0 {
        return Ok(1.0);
    }
    let expected = a * b / all;
    let max = (a + b) / 2.0;
    if max == expected {
        return Ok(if index == max { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `(H(p|q) + H(q|p)) / ln n`, in `[0, 1]`.
pub fn normalized_variation_of_information(p: &[usize], q: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(p, q)?;
    if t.total <= 1 {
        return Ok(0.0);
    }
    let cells = t.counts.len();
    if cells == t.rows.len() && cells == t.cols.len() {
        // one-to-one label correspondence
        return Ok(0.0);
    }
    let n = t.total as f64;
    let joint = entropy(t.cells(), n);
    let hp = entropy(t.rows.iter().copied(), n);
    let hq = entropy(t.cols.iter().copied(), n);
    let vi = (2.0 * joint - hp - hq).max(0.0);
    Ok((vi / n.ln()).min(1.0))
}

/// Mean and population standard deviation of per-layer ARIs at one scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mean: f64,
    pub std: f64,
}

impl CurvePoint {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Self { mean, std: var.sqrt() }
    }
}

/// For each labeling of all `N * T` node-times (layer-major), the ARI per
/// layer against `truth[t]` (length `N`), averaged over layers.
pub fn per_layer_similarity(partitions: &[&[usize]], truth: &[Vec<usize>], n_nodes: usize) -> Result<Vec<CurvePoint>> {
    let n_layers = truth.len();
    if n_layers == 0 || truth.iter().any(|l| l.len() != n_nodes) {
        return Err(Error::Consistency(format!("truth must hold {n_layers} layers of {n_nodes} labels")));
    }
    partitions
        .iter()
        .map(|labels| {
            if labels.len() != n_nodes * n_layers {
                return Err(Error::Consistency(format!(
                    "partition of {} node-times, truth covers {}",
                    labels.len(),
                    n_nodes * n_layers
                )));
            }
            let aris = truth
                .iter()
                .enumerate()
                .map(|(t, tl)| adjusted_rand_index(&labels[t * n_nodes..(t + 1) * n_nodes], tl))
                .collect::<Result<Vec<_>>>()?;
            Ok(CurvePoint::from_values(&aris))
        })
        .collect()
}

/// Mean of the five largest values, or of all values when fewer than five.
pub fn success_rate(curve: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::Domain("success rate of an empty curve".into()));
    }
    let mut v = curve.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let top = &v[..v.len().min(5)];
    Ok(top.iter().sum::<f64>() / top.len() as f64)
}

/// Mean pairwise ARI over all pairs of labelings, clamped to `[0, 1]`.
pub fn mean_pairwise_ari(labelings: &[&[usize]]) -> Result<f64> {
    if labelings.len() < 2 {
        return Err(Error::Domain(format!("need at least two labelings, got {}", labelings.len())));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..labelings.len() {
        for j in i + 1..labelings.len() {
            sum += adjusted_rand_index(labelings[i], labelings[j])?;
            count += 1;
        }
    }
    Ok((sum / count as f64).clamp(0.0, 1.0))
}
