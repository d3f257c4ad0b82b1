//! Per-scale community detection and the end-to-end multi-scale pipeline.
//!
//! At each scale the node-times are clustered by the correlation distance
//! between their wavelets, with merges restricted to supra-graph neighbours,
//! and the dendrogram is cut by the max-gap rule. Stability at a scale is the
//! mean pairwise ARI between partitions from independent random sketches.

mod cut;
mod linkage;

pub use cut::{cut_at, cut_max_gap, max_gap_cut_height, Partition};
pub use linkage::{constrained_average_linkage, Dendrogram, Merge};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::mean_pairwise_ari;
use crate::spectral::{self, chebyshev_coefficients, EigenConfig, LambdaStar, SpectralBasis};
use crate::temporal_graph::{build_supra_system, InterLayerWeights, SupraSystem, TemporalNetwork};
use crate::wavelet::{
    self, derive_filter_and_scales, filter_signals, random_signals, FilterDesign, NormalizedRows, WaveletFilterSpec,
};

/// Eigenvalues closer than this count as one repeated eigenvalue.
const EIGEN_TIE: f64 = 1e-10;
/// Extra eigenpairs beyond `T + 1`, so that a distinct next eigenvalue is
/// usually available for the outer filter knot.
const EXTRA_EIGENPAIRS: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full eigendecomposition and Pearson correlations of exact wavelets.
    Exact,
    /// Chebyshev-filtered random sketches.
    Fast,
}

#[derive(Debug, Clone)]
pub struct DetectConfig {
    pub mode: Mode,
    /// Number of scales `M`.
    pub n_scales: usize,
    /// Random signals per sketch.
    pub eta: usize,
    /// Sketch repetitions `R`; stability needs at least two.
    pub repetitions: usize,
    pub residual_threshold: f64,
    pub chebyshev_order: usize,
    pub seed: u64,
    pub eigen: EigenConfig,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Fast,
            n_scales: 50,
            eta: wavelet::DEFAULT_ETA,
            repetitions: 20,
            residual_threshold: spectral::DEFAULT_RESIDUAL_THRESHOLD,
            chebyshev_order: wavelet::DEFAULT_CHEBYSHEV_ORDER,
            seed: 0,
            eigen: EigenConfig::default(),
        }
    }
}

impl DetectConfig {
    fn validate(&self) -> Result<()> {
        if self.n_scales < 2 {
            return Err(Error::Domain(format!("need at least two scales, got {}", self.n_scales)));
        }
        if self.eta == 0 || self.repetitions == 0 {
            return Err(Error::Domain("eta and repetitions must be positive".into()));
        }
        if !(self.residual_threshold > 0.0 && self.residual_threshold <= 1.0) {
            return Err(Error::Domain(format!("residual threshold {} outside (0, 1]", self.residual_threshold)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub lambda_max_estimate: f64,
    pub eigenpairs_computed: usize,
    /// Max Chebyshev approximation error per scale (fast mode).
    pub chebyshev_errors: Vec<f64>,
    /// Zero-variance feature rows per scale (main repetition).
    pub degenerate_rows: Vec<usize>,
    /// Synthetic merges per scale; non-zero only for a disconnected supra-graph.
    pub synthetic_merges: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct MultiScaleResult {
    pub mode: Mode,
    pub lambda: LambdaStar,
    pub lambda_next: Option<f64>,
    pub design: FilterDesign,
    /// One partition per scale, ascending scale; from the first sketch in fast mode.
    pub partitions: Vec<Partition>,
    pub dendrograms: Vec<Dendrogram>,
    /// `gamma_a` per scale, when at least two sketches were drawn.
    pub stability: Option<Vec<f64>>,
    pub repetitions: usize,
    pub diagnostics: Diagnostics,
}

impl MultiScaleResult {
    pub fn scales(&self) -> &[f64] {
        self.design.grid.scales()
    }

    /// `1 - gamma_a` per scale.
    pub fn instability(&self) -> Option<Vec<f64>> {
        self.stability.as_ref().map(|g| g.iter().map(|v| 1.0 - v).collect())
    }
}

/// Seed of sketch repetition `rep`, a splitmix64 step away from `seed`.
pub fn repetition_seed(seed: u64, rep: usize) -> u64 {
    let mut z = seed.wrapping_add((rep as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct ScaleOutcome {
    partition: Partition,
    dendrogram: Dendrogram,
    degenerate: usize,
}

fn cluster_rows(rows: &NormalizedRows, sys: &SupraSystem, scale: f64) -> Result<ScaleOutcome> {
    let dendrogram = constrained_average_linkage(rows, sys.adjacency())?;
    let partition = cut_max_gap(&dendrogram, scale);
    Ok(ScaleOutcome { partition, dendrogram, degenerate: rows.n_degenerate() })
}

/// Clusters every scale from one sketch drawn with `seed`.
fn sketch_partitions(sys: &SupraSystem, filter: &WaveletFilterSpec, scales: &[f64], eta: usize, order: usize, seed: u64) -> Result<(Vec<ScaleOutcome>, Vec<f64>)> {
    let lambda_max = sys.lambda_max_estimate();
    let expansions = scales
        .iter()
        .map(|&s| chebyshev_coefficients(filter, s, order, lambda_max))
        .collect::<Result<Vec<_>>>()?;
    let errors = expansions.iter().map(|e| e.max_error).collect();
    let signals = random_signals(sys.dim(), eta, seed);
    let blocks = filter_signals(sys, &expansions, &signals, eta)?;
    drop(signals);
    let outcomes = blocks
        .into_par_iter()
        .zip(scales.par_iter())
        .map(|(block, &s)| cluster_rows(&NormalizedRows::from_rows(&block, sys.dim(), eta, false), sys, s))
        .collect::<Result<Vec<_>>>()?;
    Ok((outcomes, errors))
}

fn exact_partitions(sys: &SupraSystem, basis: &SpectralBasis, filter: &WaveletFilterSpec, scales: &[f64]) -> Result<Vec<ScaleOutcome>> {
    scales
        .par_iter()
        .map(|&s| {
            let f = wavelet::wavelet_matrix_exact(basis, filter, s)?;
            let rows = NormalizedRows::from_features(&f);
            drop(f);
            cluster_rows(&rows, sys, s)
        })
        .collect()
}

/// `gamma_a(s)` from `cfg.repetitions` independent sketches at one scale.
pub fn stability_gamma(sys: &SupraSystem, filter: &WaveletFilterSpec, scale: f64, cfg: &DetectConfig) -> Result<f64> {
    if cfg.mode == Mode::Exact {
        return Err(Error::Precondition(
            "stability needs resampling; exact wavelets have no randomness, use fast mode".into(),
        ));
    }
    if cfg.repetitions < 2 {
        return Err(Error::Domain(format!("stability needs at least two repetitions, got {}", cfg.repetitions)));
    }
    let labels = (0..cfg.repetitions)
        .map(|r| {
            let (mut out, _) = sketch_partitions(sys, filter, &[scale], cfg.eta, cfg.chebyshev_order, repetition_seed(cfg.seed, r))?;
            Ok(out.pop().unwrap().partition.labels)
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[usize]> = labels.iter().map(Vec::as_slice).collect();
    mean_pairwise_ari(&refs)
}

/// The first eigenvalue after `lambda_star` that is not a repeat of it.
fn next_distinct(basis: &SpectralBasis, q_index: usize, lambda_star: f64) -> Option<f64> {
    basis.eigenvalues()[q_index..].iter().copied().find(|&l| l - lambda_star >= EIGEN_TIE)
}

/// Runs the whole pipeline on one network.
pub fn detect_multiscale(net: &TemporalNetwork, weights: &InterLayerWeights, cfg: &DetectConfig) -> Result<MultiScaleResult> {
    cfg.validate()?;
    let sys = build_supra_system(net, weights).map_err(Error::at("supra-system"))?;
    detect_on_system(net, &sys, cfg)
}

/// Pipeline from an assembled supra-system onwards.
pub fn detect_on_system(net: &TemporalNetwork, sys: &SupraSystem, cfg: &DetectConfig) -> Result<MultiScaleResult> {
    cfg.validate()?;
    let basis = spectral_basis_for(sys, net.n_layers(), cfg)?;
    detect_with_basis(net, sys, &basis, cfg)
}

/// The eigenpairs the pipeline needs: all of them in exact mode, the
/// `T + 12` smallest in fast mode.
pub fn spectral_basis_for(sys: &SupraSystem, n_layers: usize, cfg: &DetectConfig) -> Result<SpectralBasis> {
    Ok(match cfg.mode {
        Mode::Exact => spectral::full_spectrum(sys),
        Mode::Fast => {
            let k = sys.dim().min(n_layers + 1 + EXTRA_EIGENPAIRS);
            spectral::leading_eigenpairs(sys, k, &cfg.eigen).map_err(Error::at("eigenpairs"))?
        }
    })
}

/// Pipeline with precomputed eigenpairs, as returned by [`spectral_basis_for`].
pub fn detect_with_basis(net: &TemporalNetwork, sys: &SupraSystem, basis: &SpectralBasis, cfg: &DetectConfig) -> Result<MultiScaleResult> {
    cfg.validate()?;
    if basis.dim() != sys.dim() || (cfg.mode == Mode::Exact && !basis.is_full()) {
        return Err(Error::Consistency(format!(
            "{} eigenpairs of dimension {} do not fit {:?} mode on a system of dimension {}",
            basis.len(),
            basis.dim(),
            cfg.mode,
            sys.dim()
        )));
    }
    let nulls = spectral::layer_null_basis(net, sys);
    let lambda = spectral::select_lambda_star(basis, &nulls, cfg.residual_threshold).map_err(Error::at("lambda-star"))?;
    let lambda_next = next_distinct(basis, lambda.q_index, lambda.lambda_star);
    info!("lambda* = {:.6e} at q = {} (next {:?})", lambda.lambda_star, lambda.q_index, lambda_next);
    let design = derive_filter_and_scales(lambda.lambda_star, lambda_next, cfg.n_scales).map_err(Error::at("scales"))?;
    info!("scales [{:.6e}, {:.6e}], y4 = {:.6e} ({:?})", design.grid.s_min(), design.grid.s_max(), design.filter.y4, design.y4_rule);
    let scales = design.grid.scales().to_vec();

    let (main, chebyshev_errors, stability) = match cfg.mode {
        Mode::Exact => {
            let main = exact_partitions(sys, basis, &design.filter, &scales).map_err(Error::at("clustering"))?;
            (main, Vec::new(), None)
        }
        Mode::Fast => {
            let run = |rep: usize| sketch_partitions(sys, &design.filter, &scales, cfg.eta, cfg.chebyshev_order, repetition_seed(cfg.seed, rep));
            let (main, errors) = run(0).map_err(Error::at("clustering"))?;
            let stability = if cfg.repetitions >= 2 {
                let mut labels: Vec<Vec<Vec<usize>>> = vec![main.iter().map(|o| o.partition.labels.clone()).collect()];
                for rep in 1..cfg.repetitions {
                    let (outcomes, _) = run(rep).map_err(Error::at("stability"))?;
                    labels.push(outcomes.into_iter().map(|o| o.partition.labels).collect());
                }
                let gammas = (0..scales.len())
                    .map(|s| {
                        let refs: Vec<&[usize]> = labels.iter().map(|rep| rep[s].as_slice()).collect();
                        mean_pairwise_ari(&refs)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Some(gammas)
            } else {
                None
            };
            (main, errors, stability)
        }
    };

    let diagnostics = Diagnostics {
        lambda_max_estimate: sys.lambda_max_estimate(),
        eigenpairs_computed: basis.len(),
        chebyshev_errors,
        degenerate_rows: main.iter().map(|o| o.degenerate).collect(),
        synthetic_merges: main.iter().map(|o| o.dendrogram.n_synthetic()).collect(),
    };
    let (partitions, dendrograms) = main.into_iter().map(|o| (o.partition, o.dendrogram)).unzip();
    Ok(MultiScaleResult {
        mode: cfg.mode,
        lambda,
        lambda_next,
        design,
        partitions,
        dendrograms,
        stability,
        repetitions: cfg.repetitions,
        diagnostics,
    })
}
