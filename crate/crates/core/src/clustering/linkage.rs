//! Connectivity-constrained average-linkage agglomeration.
//!
//! Leaves are the rows of a [`NormalizedRows`] table, so the distance between
//! leaves `a` and `b` is `1 - <u_a, u_b>`. The mean distance between two
//! clusters then depends only on their member sums `S_A`, `S_B`:
//! `1 - <S_A, S_B> / (|A| |B|)`, which gives the exact unweighted average
//! linkage without a distance matrix.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::wavelet::NormalizedRows;

/// One agglomeration step. Cluster ids follow the usual convention: leaves
/// are `0..n`, the cluster created by merge `k` has id `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
    /// Joins two components of a disconnected supra-graph.
    pub synthetic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    /// Checks ids, sizes and monotone heights.
    pub fn new(n_leaves: usize, merges: Vec<Merge>) -> Result<Self> {
        if n_leaves == 0 {
            return Err(Error::Domain("a dendrogram needs at least one leaf".into()));
        }
        if merges.len() + 1 != n_leaves {
            return Err(Error::Consistency(format!("{} merges for {n_leaves} leaves", merges.len())));
        }
        let mut size = vec![1usize; n_leaves];
        let mut used = vec![false; 2 * n_leaves - 1];
        let mut last = f64::NEG_INFINITY;
        for (k, m) in merges.iter().enumerate() {
            let id = n_leaves + k;
            if m.a >= id || m.b >= id || m.a == m.b || used[m.a] || used[m.b] {
                return Err(Error::Consistency(format!("merge {k} joins invalid clusters ({}, {})", m.a, m.b)));
            }
            if !(m.height >= last) {
                return Err(Error::Consistency(format!("merge {k} height {} below {last}", m.height)));
            }
            if size[m.a] + size[m.b] != m.size {
                return Err(Error::Consistency(format!("merge {k} has wrong size {}", m.size)));
            }
            used[m.a] = true;
            used[m.b] = true;
            size.push(m.size);
            last = m.height;
        }
        Ok(Self { n_leaves, merges })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn n_synthetic(&self) -> usize {
        self.merges.iter().filter(|m| m.synthetic).count()
    }

    /// Leaf members of cluster `id`, ascending.
    pub fn members(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(c) = stack.pop() {
            if c < self.n_leaves {
                out.push(c);
            } else {
                let m = &self.merges[c - self.n_leaves];
                stack.push(m.a);
                stack.push(m.b);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Heap entry ordered by height, then smaller first id, then smaller second id.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    height: f64,
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.height.total_cmp(&other.height).then(self.a.cmp(&other.a)).then(self.b.cmp(&other.b))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Clusters<'a> {
    rows: &'a NormalizedRows,
    sums: Vec<Vec<f64>>,
    sizes: Vec<usize>,
    /// Adjacent live clusters with their linkage, ascending id.
    neighbours: Vec<Vec<(usize, f64)>>,
    alive: Vec<bool>,
    /// Smallest candidate touching each cluster, if it has a neighbour.
    best: Vec<Option<Candidate>>,
    /// Bumped whenever `best` changes; heap entries carry the stamp they saw.
    stamp: Vec<u32>,
}

impl Clusters<'_> {
    fn sum(&self, id: usize) -> &[f64] {
        if id < self.rows.rows() {
            self.rows.row(id)
        } else {
            &self.sums[id - self.rows.rows()]
        }
    }

    fn linkage(&self, x: usize, y: usize) -> f64 {
        let dot = crate::wavelet::dot(self.sum(x), self.sum(y));
        1.0 - dot / (self.sizes[x] * self.sizes[y]) as f64
    }

    fn rescan(&mut self, v: usize) {
        self.best[v] = self.neighbours[v].iter().map(|&(u, d)| candidate(v, u, d)).min();
        self.stamp[v] += 1;
    }
}

fn candidate(v: usize, u: usize, height: f64) -> Candidate {
    Candidate { height, a: v.min(u), b: v.max(u) }
}

fn union_ids(x: &[(usize, f64)], y: &[(usize, f64)], skip: [usize; 2]) -> Vec<usize> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let v = match (x.get(i), y.get(j)) {
            (Some(&(a, _)), Some(&(b, _))) if a == b => {
                i += 1;
                j += 1;
                a
            }
            (Some(&(a, _)), Some(&(b, _))) if a < b => {
                i += 1;
                a
            }
            (Some(&(a, _)), None) => {
                i += 1;
                a
            }
            (_, Some(&(b, _))) => {
                j += 1;
                b
            }
            (None, None) => unreachable!(),
        };
        if !skip.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Agglomerates the rows of `rows`, merging only clusters joined by an edge
/// of `adjacency`.
///
/// Each step merges the adjacent pair with the smallest `(linkage, a, b)`.
/// Heights are the average linkage at merge time, made non-decreasing by a
/// running maximum (the constraint can otherwise produce inversions). When
/// the graph is disconnected, the remaining roots are joined in id order at
/// one plus the largest height, with `synthetic` set.
pub fn constrained_average_linkage(rows: &NormalizedRows, adjacency: &CsrMatrix) -> Result<Dendrogram> {
    let n = rows.rows();
    if adjacency.dim() != n {
        return Err(Error::Consistency(format!("{n} feature rows for a graph on {} vertices", adjacency.dim())));
    }
    if n == 0 {
        return Err(Error::Domain("nothing to cluster".into()));
    }
    let mut cl = Clusters {
        rows,
        sums: Vec::with_capacity(n - 1),
        sizes: vec![1; n],
        neighbours: Vec::with_capacity(2 * n - 1),
        alive: vec![true; n],
        best: vec![None; n],
        stamp: vec![0; n],
    };
    for i in 0..n {
        let list = adjacency.row(i).0.iter().filter(|&&j| j != i).map(|&j| (j, cl.linkage(i, j))).collect();
        cl.neighbours.push(list);
    }
    let mut heap = BinaryHeap::with_capacity(2 * n);
    for v in 0..n {
        cl.rescan(v);
        if let Some(c) = cl.best[v] {
            heap.push(Reverse((c, v, cl.stamp[v])));
        }
    }

    let mut merges = Vec::with_capacity(n - 1);
    let mut top = f64::NEG_INFINITY;
    while let Some(Reverse((c, v, stamp))) = heap.pop() {
        if !cl.alive[v] || cl.stamp[v] != stamp {
            continue;
        }
        let (a, b) = (c.a, c.b);
        let id = n + merges.len();
        let sum: Vec<f64> = cl.sum(a).iter().zip(cl.sum(b)).map(|(x, y)| x + y).collect();
        let size = cl.sizes[a] + cl.sizes[b];
        cl.sums.push(sum);
        cl.sizes.push(size);
        cl.alive[a] = false;
        cl.alive[b] = false;
        cl.alive.push(true);
        let joined = union_ids(&cl.neighbours[a], &cl.neighbours[b], [a, b]);
        cl.neighbours[a] = Vec::new();
        cl.neighbours[b] = Vec::new();
        // free member sums that can no longer be read
        for old in [a, b] {
            if old >= n {
                cl.sums[old - n] = Vec::new();
            }
        }
        cl.best.push(None);
        cl.stamp.push(0);
        let mut list = Vec::with_capacity(joined.len());
        for &w in &joined {
            let d = cl.linkage(w, id);
            list.push((w, d));
            let nb = &mut cl.neighbours[w];
            nb.retain(|&(x, _)| x != a && x != b);
            nb.push((id, d));
            let lost_best = cl.best[w].is_some_and(|bw| [bw.a, bw.b].iter().any(|&x| x == a || x == b));
            if lost_best {
                cl.rescan(w);
            } else {
                let cand = candidate(w, id, d);
                if cl.best[w].is_some_and(|bw| cand >= bw) {
                    continue;
                }
                cl.best[w] = Some(cand);
                cl.stamp[w] += 1;
            }
            if let Some(bw) = cl.best[w] {
                heap.push(Reverse((bw, w, cl.stamp[w])));
            }
        }
        cl.neighbours.push(list);
        cl.rescan(id);
        if let Some(bc) = cl.best[id] {
            heap.push(Reverse((bc, id, cl.stamp[id])));
        }
        top = top.max(c.height);
        merges.push(Merge { a, b, height: top, size, synthetic: false });
    }

    if merges.len() + 1 < n {
        let roots: Vec<usize> = (0..cl.alive.len()).filter(|&i| cl.alive[i]).collect();
        log::warn!("supra-graph has {} components; joining them with synthetic merges", roots.len());
        let height = if top.is_finite() { top + 1.0 } else { 1.0 };
        let mut acc = roots[0];
        let mut size = cl.sizes[acc];
        for &r in &roots[1..] {
            size += cl.sizes[r];
            merges.push(Merge { a: acc.min(r), b: acc.max(r), height, size, synthetic: true });
            acc = n + merges.len() - 1;
        }
    }
    Dendrogram::new(n, merges)
}
