//! Wavelet feature vectors for every node-time pair.
//!
//! Exact mode forms `Psi_s = chi G_s chi^T` from a full decomposition. Fast
//! mode filters `eta` random signals with a Chebyshev expansion of `g(s L)`:
//! row `a` of `Psi_s R` is a random projection of the wavelet centred at `a`.
//! The signals are centred to zero mean, so inner products of sketch rows
//! estimate mean-centred inner products of the wavelets.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::WaveletFilterSpec;
use crate::error::{Error, Result};
use crate::spectral::{chebyshev_coefficients, ChebyshevExpansion, ChebyshevOperator, SpectralBasis};
use crate::temporal_graph::SupraSystem;

/// Default Chebyshev truncation order.
pub const DEFAULT_CHEBYSHEV_ORDER: usize = 80;
/// Default number of random signals per sketch.
pub const DEFAULT_ETA: usize = 100;

/// Bytes of Chebyshev terms held at once while filtering a block of signals.
const TERM_BUDGET_BYTES: usize = 512 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureMode {
    Exact,
    Sketch { eta: usize, seed: u64 },
}

/// Row `a` is the feature vector of flat node-time index `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFeatures {
    pub scale: f64,
    pub mode: FeatureMode,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl WaveletFeatures {
    pub fn new(scale: f64, mode: FeatureMode, rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Consistency(format!("{} values for a {rows}x{cols} feature matrix", data.len())));
        }
        Ok(Self { scale, mode, rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.cols..(a + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn write_cache<W: std::io::Write>(&self, w: W) -> Result<()> {
        use crate::spectral::cache::{write_record, Record, KIND_FEATURES};
        let (tag, eta, seed) = match self.mode {
            FeatureMode::Exact => (0.0, 0.0, 0.0),
            FeatureMode::Sketch { eta, seed } => (1.0, eta as f64, f64::from_bits(seed)),
        };
        write_record(
            w,
            &Record {
                kind: KIND_FEATURES,
                scalars: vec![self.scale, tag, eta, seed],
                vector: Vec::new(),
                rows: self.rows,
                cols: self.cols,
                data: self.data.clone(),
            },
        )
    }

    pub fn read_cache<R: std::io::Read>(r: R) -> Result<Self> {
        use crate::spectral::cache::{read_record, KIND_FEATURES};
        let rec = read_record(r, KIND_FEATURES)?;
        let [scale, tag, eta, seed] = rec.scalars[..] else {
            return Err(Error::Consistency("malformed feature record".into()));
        };
        let mode = if tag == 0.0 { FeatureMode::Exact } else { FeatureMode::Sketch { eta: eta as usize, seed: seed.to_bits() } };
        Self::new(scale, mode, rec.rows, rec.cols, rec.data)
    }
}

/// `Psi_s = chi diag(g(s lambda)) chi^T` from a complete decomposition.
pub fn wavelet_matrix_exact(basis: &SpectralBasis, filter: &WaveletFilterSpec, scale: f64) -> Result<WaveletFeatures> {
    wavelet_matrix_with(basis, |lambda| filter.eval(scale * lambda), scale)
}

/// Exact-mode wavelets for an arbitrary spectral response.
pub fn wavelet_matrix_with(basis: &SpectralBasis, response: impl Fn(f64) -> f64, scale: f64) -> Result<WaveletFeatures> {
    if !basis.is_full() {
        return Err(Error::Precondition(format!(
            "exact wavelets need the full spectrum ({} of {} eigenpairs available); use sketch mode",
            basis.len(),
            basis.dim()
        )));
    }
    let chi = basis.eigenvectors();
    let gains: Vec<f64> = basis.eigenvalues().iter().map(|&l| response(l)).collect();
    let mut weighted = chi.clone();
    for (mut col, g) in weighted.column_iter_mut().zip(&gains) {
        col *= *g;
    }
    let psi: DMatrix<f64> = &weighted * chi.transpose();
    let n = basis.dim();
    let mut data = vec![0.0; n * n];
    for r in 0..n {
        for c in r..n {
            let v = 0.5 * (psi[(r, c)] + psi[(c, r)]);
            data[r * n + c] = v;
            data[c * n + r] = v;
        }
    }
    WaveletFeatures::new(scale, FeatureMode::Exact, n, n, data)
}

/// `dim x eta` row-major random signals with entries `+-1/sqrt(eta)`, each
/// column shifted to zero mean.
pub fn random_signals(dim: usize, eta: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amp = 1.0 / (eta as f64).sqrt();
    let mut x: Vec<f64> = (0..dim * eta).map(|_| if rng.random::<bool>() { amp } else { -amp }).collect();
    for c in 0..eta {
        let mean = (0..dim).map(|r| x[r * eta + c]).sum::<f64>() / dim as f64;
        for r in 0..dim {
            x[r * eta + c] -= mean;
        }
    }
    x
}

/// Filters the row-major `signals` block (`dim x width`) by every expansion
/// at once, sharing the Chebyshev recurrence. Returns one row-major
/// `dim x width` block per expansion.
pub fn filter_signals(sys: &SupraSystem, expansions: &[ChebyshevExpansion], signals: &[f64], width: usize) -> Result<Vec<Vec<f64>>> {
    let dim = sys.dim();
    if signals.len() != dim * width || width == 0 {
        return Err(Error::Consistency(format!("signal block of {} values for {dim}x{width}", signals.len())));
    }
    let Some(first) = expansions.first() else {
        return Ok(Vec::new());
    };
    if expansions.iter().any(|e| e.coeffs.is_empty() || e.lambda_max != first.lambda_max) {
        return Err(Error::Domain("expansions must be non-empty and share lambda_max".into()));
    }
    let op = ChebyshevOperator::new(sys.laplacian(), first.lambda_max)?;
    let order = expansions.iter().map(|e| e.coeffs.len() - 1).max().unwrap();
    let n_terms = order + 1;
    // coefficient matrix, first coefficient halved, zero padded to the common order
    let coeffs = DMatrix::from_fn(n_terms, expansions.len(), |k, s| {
        let c = expansions[s].coeffs.get(k).copied().unwrap_or(0.0);
        if k == 0 {
            c / 2.0
        } else {
            c
        }
    });

    let per_column = n_terms * dim * std::mem::size_of::<f64>();
    let block = (TERM_BUDGET_BYTES / per_column).clamp(1, width);
    let mut outputs = vec![vec![0.0; dim * width]; expansions.len()];
    let mut start = 0;
    while start < width {
        let bw = block.min(width - start);
        let mut x = vec![0.0; dim * bw];
        for r in 0..dim {
            x[r * bw..(r + 1) * bw].copy_from_slice(&signals[r * width + start..r * width + start + bw]);
        }
        let rows = dim * bw;
        let mut terms = DMatrix::<f64>::zeros(rows, n_terms);
        op.for_each_term(&x, bw, order, |k, t| {
            terms.column_mut(k).copy_from_slice(t);
        });
        let combined = &terms * &coeffs;
        drop(terms);
        for (s, out) in outputs.iter_mut().enumerate() {
            let col = combined.column(s);
            for r in 0..dim {
                out[r * width + start..r * width + start + bw].copy_from_slice(&col.as_slice()[r * bw..(r + 1) * bw]);
            }
        }
        start += bw;
    }
    Ok(outputs)
}

/// Sketch features for one scale.
pub fn wavelet_sketch_fast(sys: &SupraSystem, filter: &WaveletFilterSpec, scale: f64, eta: usize, seed: u64) -> Result<WaveletFeatures> {
    let mut out = wavelet_sketch_multi(sys, filter, &[scale], eta, seed, DEFAULT_CHEBYSHEV_ORDER)?;
    Ok(out.pop().unwrap())
}

/// Sketch features for several scales from one draw of random signals.
pub fn wavelet_sketch_multi(
    sys: &SupraSystem,
    filter: &WaveletFilterSpec,
    scales: &[f64],
    eta: usize,
    seed: u64,
    order: usize,
) -> Result<Vec<WaveletFeatures>> {
    if eta == 0 {
        return Err(Error::Domain("need at least one random signal".into()));
    }
    let signals = random_signals(sys.dim(), eta, seed);
    let lambda_max = sys.lambda_max_estimate();
    let expansions = scales
        .iter()
        .map(|&s| chebyshev_coefficients(filter, s, order, lambda_max))
        .collect::<Result<Vec<_>>>()?;
    let blocks = filter_signals(sys, &expansions, &signals, eta)?;
    scales
        .iter()
        .zip(blocks)
        .map(|(&s, data)| WaveletFeatures::new(s, FeatureMode::Sketch { eta, seed }, sys.dim(), eta, data))
        .collect()
}
