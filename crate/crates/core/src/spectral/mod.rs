//! Spectral decomposition of the supra-Laplacian and selection of the
//! informative eigenvalue.
//!
//! The first few eigenvectors of a weakly coupled supra-Laplacian lie close to
//! the span of the layers' trivial (square-root degree) null vectors and say
//! nothing about communities. [`select_lambda_star`] walks the ascending
//! eigenvectors, projects each onto that span and stops at the first one whose
//! residual exceeds a threshold. Its eigenvalue centres the wavelet filter.

pub(crate) mod cache;
mod chebyshev;
mod eigen;

pub use cache::{read_basis, write_basis};
pub use chebyshev::{apply_filtered_operator, chebyshev_coefficients, chebyshev_expand, ChebyshevExpansion, ChebyshevOperator};
pub use eigen::{EigenConfig, EigenMethod};

use log::warn;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::temporal_graph::{SupraSystem, TemporalNetwork};

/// Default residual threshold separating uninformative eigenvectors.
pub const DEFAULT_RESIDUAL_THRESHOLD: f64 = 0.8;

/// Leading eigenpairs of the supra-Laplacian.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    lambda_max_estimate: f64,
}

impl SpectralBasis {
    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>, lambda_max_estimate: f64) -> Result<Self> {
        if eigenvectors.ncols() != eigenvalues.len() {
            return Err(Error::Consistency(format!(
                "{} eigenvalues for {} eigenvectors",
                eigenvalues.len(),
                eigenvectors.ncols()
            )));
        }
        Ok(Self { eigenvalues, eigenvectors, lambda_max_estimate })
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `NT x k` matrix with orthonormal columns.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn lambda_max_estimate(&self) -> f64 {
        self.lambda_max_estimate
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.dim()
    }
}

/// The `k` smallest eigenpairs of the supra-Laplacian.
pub fn leading_eigenpairs(sys: &SupraSystem, k: usize, cfg: &EigenConfig) -> Result<SpectralBasis> {
    let pairs = eigen::smallest_eigenpairs(sys.laplacian(), k, cfg)?;
    SpectralBasis::from_parts(pairs.values, pairs.vectors, sys.lambda_max_estimate())
}

/// Complete dense decomposition, for exact-mode wavelets.
pub fn full_spectrum(sys: &SupraSystem) -> SpectralBasis {
    let mut pairs = eigen::dense_eigenpairs(sys.laplacian(), sys.dim());
    eigen::canonical_signs(&mut pairs.vectors);
    SpectralBasis { eigenvalues: pairs.values, eigenvectors: pairs.vectors, lambda_max_estimate: sys.lambda_max_estimate() }
}

/// Zero-padded trivial eigenvectors of each layer's own normalized Laplacian.
///
/// Column `t` (for `t < T`) is the unit vector proportional to the square-root
/// within-layer degrees of layer `t`. A layer with several connected
/// components contributes one extra column per additional component, so the
/// span covers that layer's whole null space.
#[derive(Debug, Clone)]
pub struct LayerNullBasis {
    vectors: DMatrix<f64>,
    n_layers: usize,
}

impl LayerNullBasis {
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Number of extra component columns beyond one per layer.
    pub fn n_extra(&self) -> usize {
        self.vectors.ncols() - self.n_layers
    }
}

/// Connected components of one layer, labelled in order of first appearance.
fn layer_components(net: &TemporalNetwork, t: usize) -> (Vec<usize>, usize) {
    let n = net.n_nodes();
    let a = net.layer(t);
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        label[s] = count;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for &v in a.row(u).0 {
                if label[v] == usize::MAX {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    (label, count)
}

pub fn layer_null_basis(net: &TemporalNetwork, sys: &SupraSystem) -> LayerNullBasis {
    let (n, n_layers) = (net.n_nodes(), net.n_layers());
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    let mut extra: Vec<Vec<f64>> = Vec::new();
    for t in 0..n_layers {
        let sqrt_deg: Vec<f64> = net.layer_degrees(t).iter().map(|d| d.sqrt()).collect();
        let (labels, n_comp) = layer_components(net, t);
        let padded = |select: &dyn Fn(usize) -> bool| -> Vec<f64> {
            let mut col = vec![0.0; sys.dim()];
            for i in (0..n).filter(|&i| select(i)) {
                // an isolated node spans its own null direction
                col[sys.flat_index(i, t)] = if sqrt_deg[i] > 0.0 { sqrt_deg[i] } else { 1.0 };
            }
            normalize(&mut col);
            col
        };
        columns.push(padded(&|_| true));
        if n_comp > 1 {
            warn!("layer {t} has {n_comp} connected components; extending the null basis");
            for c in 1..n_comp {
                extra.push(padded(&|i| labels[i] == c));
            }
        }
    }
    columns.extend(extra);
    let vectors = DMatrix::from_fn(sys.dim(), columns.len(), |r, c| columns[c][r]);
    LayerNullBasis { vectors, n_layers }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Outcome of the informative-eigenvalue search.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaStar {
    /// 1-based position of the informative eigenvalue in the ascending spectrum.
    pub q_index: usize,
    pub lambda_star: f64,
    /// Projection residual of eigenvectors `1..=len`, in order.
    pub residual_norms: Vec<f64>,
    /// Set when no residual exceeded the threshold within `T + 1` eigenvectors.
    pub capped: bool,
}

/// Finds the first eigenvector, in ascending eigenvalue order, that is not
/// well approximated by the layers' null vectors.
///
/// Residuals are `||v - Q Q^T v||` with `Q` an orthonormal basis of the layer
/// null vectors. At most `T + 1` eigenvectors are examined.
pub fn select_lambda_star(basis: &SpectralBasis, nulls: &LayerNullBasis, threshold: f64) -> Result<LambdaStar> {
    let n_layers = nulls.n_layers;
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::Domain(format!("residual threshold must lie in (0, 1], got {threshold}")));
    }
    if basis.len() < n_layers + 1 {
        return Err(Error::Precondition(format!(
            "{} eigenpairs computed, the search needs T + 1 = {}",
            basis.len(),
            n_layers + 1
        )));
    }
    if basis.dim() != nulls.vectors.nrows() {
        return Err(Error::Consistency("eigenvector and null-basis dimensions differ".into()));
    }
    let q = orthonormal_columns(&nulls.vectors);
    let mut residual_norms = Vec::with_capacity(n_layers + 1);
    for tau in 0..=n_layers {
        let v = basis.eigenvectors.column(tau);
        let coeffs = q.tr_mul(&v);
        let r = &v - &q * coeffs;
        let norm = r.norm();
        residual_norms.push(norm);
        if norm > threshold {
            return Ok(LambdaStar { q_index: tau + 1, lambda_star: basis.eigenvalues[tau], residual_norms, capped: false });
        }
    }
    warn!("no eigenvector residual exceeded {threshold} within T + 1 = {} eigenvectors", n_layers + 1);
    Ok(LambdaStar { q_index: n_layers + 1, lambda_star: basis.eigenvalues[n_layers], residual_norms, capped: true })
}

/// Modified Gram-Schmidt, dropping numerically dependent columns.
fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut cols: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(m.ncols());
    for c in 0..m.ncols() {
        let mut v = m.column(c).into_owned();
        let scale = v.norm();
        for _ in 0..2 {
            for u in &cols {
                let p = u.dot(&v);
                v.axpy(-p, u, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-10 * scale.max(1e-300) {
            cols.push(v / norm);
        }
    }
    DMatrix::from_columns(&cols)
}

#[cfg(test)]
mod tests;
