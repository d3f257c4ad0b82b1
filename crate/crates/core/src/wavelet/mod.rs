//! Spectral graph wavelets on the supra-Laplacian.
//!
//! The wavelet at scale `s` centred on node-time `a` is `Psi_s delta_a` with
//! `Psi_s = g(s L)`. Two node-times are similar at scale `s` when their
//! wavelets are correlated.

mod features;
mod filter;
mod scales;

pub use features::{
    filter_signals, random_signals, wavelet_matrix_exact, wavelet_matrix_with, wavelet_sketch_fast, wavelet_sketch_multi, FeatureMode,
    WaveletFeatures, DEFAULT_CHEBYSHEV_ORDER, DEFAULT_ETA,
};
pub use filter::WaveletFilterSpec;
pub use scales::{derive_filter_and_scales, FilterDesign, ScaleGrid, Y4Rule, ATTENUATION};

/// Feature rows rescaled so that `1 - <u_a, u_b>` is the correlation
/// distance between rows `a` and `b`.
///
/// Exact features are mean-centred per row before normalizing (Pearson).
/// Sketch rows are only normalized, since the signals were centred already.
/// Rows with zero variance become zero vectors and are flagged; their
/// distance to every row is 1.
#[derive(Debug, Clone)]
pub struct NormalizedRows {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    degenerate: Vec<bool>,
}

impl NormalizedRows {
    pub fn from_features(f: &WaveletFeatures) -> Self {
        let center = matches!(f.mode, FeatureMode::Exact);
        Self::from_rows(f.data(), f.rows(), f.cols(), center)
    }

    /// Row-major `rows x cols` input; `center` subtracts each row's mean first.
    pub fn from_rows(values: &[f64], rows: usize, cols: usize, center: bool) -> Self {
        assert_eq!(values.len(), rows * cols);
        let mut data = values.to_vec();
        let mut degenerate = vec![false; rows];
        for (r, row) in data.chunks_mut(cols.max(1)).enumerate().take(rows) {
            if center {
                let mean = row.iter().sum::<f64>() / cols as f64;
                row.iter_mut().for_each(|x| *x -= mean);
            }
            let scale = row.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            // relative cut-off: a centred constant row leaves only rounding noise
            let reference = values[r * cols..(r + 1) * cols].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if norm == 0.0 || scale <= 1e-12 * reference {
                row.iter_mut().for_each(|x| *x = 0.0);
                degenerate[r] = true;
            } else {
                row.iter_mut().for_each(|x| *x /= norm);
            }
        }
        Self { rows, cols, data, degenerate }
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

    pub fn is_degenerate(&self, a: usize) -> bool {
        self.degenerate[a]
    }

    pub fn n_degenerate(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }

    /// `1 - corr(a, b)`, in `[0, 2]`.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let d = 1.0 - dot(self.row(a), self.row(b));
        d.clamp(0.0, 2.0)
    }
}

/// Inner product with eight interleaved partial sums, added pairwise.
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = [0.0f64; 8];
    let (xc, yc) = (x.chunks_exact(8), y.chunks_exact(8));
    let tail: f64 = xc.remainder().iter().zip(yc.remainder()).map(|(a, b)| a * b).sum();
    for (a, b) in xc.zip(yc) {
        for k in 0..8 {
            acc[k] += a[k] * b[k];
        }
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}
