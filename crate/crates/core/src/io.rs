//! Result, label and evaluation files.
//!
//! A detection run writes `result.json`, one `labels_scale_XX.csv` per scale
//! and `stability.csv`. Label and truth files share the row format
//! `node,layer,community` with 0-based nodes and 1-based layers.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::{DetectConfig, Diagnostics, Mode, MultiScaleResult, Partition};
use crate::error::{Error, Result};
use crate::metrics::{per_layer_similarity, success_rate, CurvePoint};
use crate::wavelet::{WaveletFilterSpec, Y4Rule};

pub const RESULT_FORMAT: &str = "tempowave-result/1";
pub const EVALUATION_FORMAT: &str = "tempowave-evaluation/1";
pub const RESULT_FILE: &str = "result.json";
pub const STABILITY_FILE: &str = "stability.csv";

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Serializes into memory with `f`, then writes atomically.
pub fn write_atomic_with(path: &Path, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    write_atomic(path, &buf)
}

pub fn labels_file_name(scale_index: usize) -> String {
    format!("labels_scale_{scale_index:02}.csv")
}

pub fn truth_file_name(scale: &str) -> String {
    format!("truth_{scale}.csv")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEntry {
    pub index: usize,
    pub scale: f64,
    pub n_communities: usize,
    pub gamma: Option<f64>,
    pub labels_file: String,
}

/// Everything a detection run reports, apart from the labels themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub format: String,
    /// Seconds since the Unix epoch; the only field that varies between
    /// identical runs.
    pub created_unix: u64,
    pub mode: Mode,
    pub n_nodes: usize,
    pub n_layers: usize,
    pub weights: String,
    pub seed: u64,
    pub n_scales: usize,
    pub eta: usize,
    pub repetitions: usize,
    pub residual_threshold: f64,
    pub chebyshev_order: usize,
    pub lambda_star: f64,
    pub q_index: usize,
    pub lambda_capped: bool,
    pub residual_norms: Vec<f64>,
    pub lambda_next: Option<f64>,
    pub filter: WaveletFilterSpec,
    pub y4_rule: Y4Rule,
    pub scales: Vec<ScaleEntry>,
    pub diagnostics: Diagnostics,
}

impl ResultRecord {
    pub fn new(result: &MultiScaleResult, n_nodes: usize, n_layers: usize, weights: &str, cfg: &DetectConfig) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let scales = result
            .partitions
            .iter()
            .enumerate()
            .map(|(k, p)| ScaleEntry {
                index: k,
                scale: p.scale,
                n_communities: p.n_communities,
                gamma: result.stability.as_ref().map(|g| g[k]),
                labels_file: labels_file_name(k),
            })
            .collect();
        Self {
            format: RESULT_FORMAT.into(),
            created_unix,
            mode: result.mode,
            n_nodes,
            n_layers,
            weights: weights.into(),
            seed: cfg.seed,
            n_scales: cfg.n_scales,
            eta: cfg.eta,
            repetitions: cfg.repetitions,
            residual_threshold: cfg.residual_threshold,
            chebyshev_order: cfg.chebyshev_order,
            lambda_star: result.lambda.lambda_star,
            q_index: result.lambda.q_index,
            lambda_capped: result.lambda.capped,
            residual_norms: result.lambda.residual_norms.clone(),
            lambda_next: result.lambda_next,
            filter: result.design.filter,
            y4_rule: result.design.y4_rule,
            scales,
            diagnostics: result.diagnostics.clone(),
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let rec: Self = serde_json::from_slice(bytes)?;
        if rec.format != RESULT_FORMAT {
            return Err(Error::Consistency(format!("unsupported result format '{}'", rec.format)));
        }
        Ok(rec)
    }

    pub fn instability(&self) -> Option<Vec<f64>> {
        self.scales.iter().map(|s| s.gamma.map(|g| 1.0 - g)).collect()
    }
}

/// Writes `result.json`, the per-scale label files and `stability.csv` into
/// `dir`, each atomically.
pub fn write_detection(dir: &Path, record: &ResultRecord, partitions: &[Partition]) -> Result<Vec<PathBuf>> {
    if partitions.len() != record.scales.len() {
        return Err(Error::Consistency(format!("{} partitions for {} scales", partitions.len(), record.scales.len())));
    }
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (entry, p) in record.scales.iter().zip(partitions) {
        let path = dir.join(&entry.labels_file);
        write_atomic_with(&path, |buf| write_labels_csv(buf, &p.labels, record.n_nodes))?;
        written.push(path);
    }
    let path = dir.join(STABILITY_FILE);
    write_atomic_with(&path, |buf| write_stability_csv(buf, record))?;
    written.push(path);
    let path = dir.join(RESULT_FILE);
    write_atomic(&path, &record.to_json()?)?;
    written.push(path);
    Ok(written)
}

/// `node,layer,community` rows for layer-major labels.
pub fn write_labels_csv<W: Write>(mut out: W, labels: &[usize], n_nodes: usize) -> Result<()> {
    if n_nodes == 0 || labels.len() % n_nodes != 0 {
        return Err(Error::Consistency(format!("{} labels do not split into layers of {n_nodes}", labels.len())));
    }
    writeln!(out, "node,layer,community")?;
    for (k, c) in labels.iter().enumerate() {
        writeln!(out, "{},{},{c}", k % n_nodes, k / n_nodes + 1)?;
    }
    Ok(())
}

/// Reads `node,layer,community` rows into `labels[t][i]`. Dimensions are
/// inferred from the largest indices; every node-time must appear once.
pub fn read_labels_csv<R: BufRead>(source: R) -> Result<Vec<Vec<usize>>> {
    let mut rows = Vec::new();
    let (mut n, mut t) = (0usize, 0usize);
    for (k, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || (k == 0 && trimmed.starts_with("node")) {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::Parse { line: lineno, msg: format!("expected node,layer,community, got '{trimmed}'") });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse { line: lineno, msg: format!("bad {what} '{s}'") })
        };
        let (i, layer, c) = (parse(fields[0], "node")?, parse(fields[1], "layer")?, parse(fields[2], "community")?);
        if layer == 0 {
            return Err(Error::Parse { line: lineno, msg: "layers are 1-based".into() });
        }
        n = n.max(i + 1);
        t = t.max(layer);
        rows.push((lineno, i, layer - 1, c));
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no label rows".into() });
    }
    let mut labels = vec![vec![None; n]; t];
    for (lineno, i, layer, c) in rows {
        if labels[layer][i].replace(c).is_some() {
            return Err(Error::Parse { line: lineno, msg: format!("node {i} layer {} listed twice", layer + 1) });
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(layer, l)| {
            l.into_iter()
                .enumerate()
                .map(|(i, c)| c.ok_or_else(|| Error::Consistency(format!("node {i} missing in layer {}", layer + 1))))
                .collect()
        })
        .collect()
}

/// `scale_index,scale,n_communities,gamma,instability`; the last two are empty
/// without stability.
pub fn write_stability_csv<W: Write>(mut out: W, record: &ResultRecord) -> Result<()> {
    writeln!(out, "scale_index,scale,n_communities,gamma,instability")?;
    for s in &record.scales {
        let (g, i) = match s.gamma {
            Some(g) => (fmt(g), fmt(1.0 - g)),
            None => (String::new(), String::new()),
        };
        writeln!(out, "{},{},{},{g},{i}", s.index, fmt(s.scale), s.n_communities)?;
    }
    Ok(())
}

fn fmt(v: f64) -> String {
    crate::temporal_graph::fmt_f64(v)
}

/// Similarity of every scale to one truth scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEvaluation {
    pub name: String,
    pub curve: Vec<CurvePoint>,
    pub success_rate: f64,
    /// Scale index with the highest mean ARI (first on ties).
    pub best_scale: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub format: String,
    pub scales: Vec<f64>,
    pub truths: Vec<TruthEvaluation>,
    pub instability: Option<Vec<f64>>,
}

/// Compares per-scale labelings against each named truth.
pub fn evaluate(
    partitions: &[&[usize]],
    scales: &[f64],
    truths: &[(String, Vec<Vec<usize>>)],
    n_nodes: usize,
    instability: Option<Vec<f64>>,
) -> Result<Evaluation> {
    if partitions.len() != scales.len() || instability.as_ref().is_some_and(|i| i.len() != scales.len()) {
        return Err(Error::Consistency("partitions, scales and instability must have one entry per scale".into()));
    }
    if truths.is_empty() {
        return Err(Error::Domain("no truth to evaluate against".into()));
    }
    let truths = truths
        .iter()
        .map(|(name, truth)| {
            let curve = per_layer_similarity(partitions, truth, n_nodes)?;
            let means: Vec<f64> = curve.iter().map(|c| c.mean).collect();
            let success = success_rate(&means)?;
            let best_scale = (0..means.len()).fold(0, |b, k| if means[k] > means[b] { k } else { b });
            Ok(TruthEvaluation { name: name.clone(), curve, success_rate: success, best_scale })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Evaluation { format: EVALUATION_FORMAT.into(), scales: scales.to_vec(), truths, instability })
}

impl Evaluation {
    pub fn to_json(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_vec_pretty(self)?;
        v.push(b'\n');
        Ok(v)
    }

    /// One row per scale: index, scale, `ari_<truth>` and `std_<truth>` per
    /// truth, then instability (empty when unknown).
    pub fn write_plot_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut header = vec!["scale_index".to_string(), "scale".to_string()];
        for t in &self.truths {
            header.push(format!("ari_{}", t.name));
            header.push(format!("std_{}", t.name));
        }
        header.push("instability".into());
        writeln!(out, "{}", header.join(","))?;
        for (k, s) in self.scales.iter().enumerate() {
            let mut row = vec![k.to_string(), fmt(*s)];
            for t in &self.truths {
                row.push(fmt(t.curve[k].mean));
                row.push(fmt(t.curve[k].std));
            }
            row.push(self.instability.as_ref().map_or(String::new(), |i| fmt(i[k])));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("summary of no values".into()));
        }
        let p = CurvePoint::from_values(values);
        Ok(Self { mean: p.mean, std: p.std, n: values.len() })
    }
}
