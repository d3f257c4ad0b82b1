use serde::{Deserialize, Serialize};

use super::Dendrogram;
use crate::error::{Error, Result};

/// Community labels for all node-times at one scale. Labels are `0..k`,
/// numbered in order of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub scale: f64,
    pub n_communities: usize,
}

impl Partition {
    pub fn from_labels(labels: &[usize], scale: f64) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Domain("empty partition".into()));
        }
        let (labels, n_communities) = crate::metrics::relabel(labels);
        Ok(Self { labels, scale, n_communities })
    }
}

/// Midpoint of the largest gap between consecutive non-synthetic merge
/// heights on each root-to-leaf path, averaged over leaves.
///
/// Ties keep the gap nearest the root. Leaves whose path holds fewer than two
/// non-synthetic merges have no gap and are left out; `None` when no leaf has
/// one.
pub fn max_gap_cut_height(dend: &Dendrogram) -> Option<f64> {
    let n = dend.n_leaves();
    let merges = dend.merges();
    // best (gap, midpoint) on the path from the component root down to each merge
    let mut best: Vec<Option<(f64, f64)>> = vec![None; merges.len()];
    let (mut sum, mut count) = (0.0, 0usize);
    for k in (0..merges.len()).rev() {
        let m = merges[k];
        if m.synthetic {
            continue;
        }
        for child in [m.a, m.b] {
            if child < n {
                if let Some((_, mid)) = best[k] {
                    sum += mid;
                    count += 1;
                }
                continue;
            }
            let c = child - n;
            let gap = m.height - merges[c].height;
            let mid = m.height - gap / 2.0;
            best[c] = match best[k] {
                Some((g, md)) if g >= gap => Some((g, md)),
                _ => Some((gap, mid)),
            };
        }
    }
    (count > 0).then(|| sum / count as f64)
}

/// Cuts at [`max_gap_cut_height`]: communities are the clusters formed by
/// merges strictly below the cut. Without any gap the partition is a single
/// community.
pub fn cut_max_gap(dend: &Dendrogram, scale: f64) -> Partition {
    let n = dend.n_leaves();
    let Some(cut) = max_gap_cut_height(dend) else {
        return Partition { labels: vec![0; n], scale, n_communities: 1 };
    };
    cut_at(dend, cut, scale)
}

/// Partition induced by the merges with height strictly below `height`.
pub fn cut_at(dend: &Dendrogram, height: f64, scale: f64) -> Partition {
    let n = dend.n_leaves();
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (k, m) in dend.merges().iter().enumerate() {
        if m.height < height {
            let id = n + k;
            let ra = find(&mut parent, m.a);
            let rb = find(&mut parent, m.b);
            parent[ra] = id;
            parent[rb] = id;
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    Partition::from_labels(&roots, scale).expect("non-empty")
}
