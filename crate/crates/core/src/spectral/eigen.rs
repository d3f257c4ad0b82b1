//! Smallest eigenpairs of a sparse symmetric matrix.
//!
//! Dense decomposition for small problems, thick-restart Lanczos with full
//! reorthogonalization otherwise.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Dense when the dimension is at most `dense_limit`, Lanczos otherwise.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone)]
pub struct EigenConfig {
    pub method: EigenMethod,
    /// Largest dimension handled by dense decomposition in `Auto` mode.
    pub dense_limit: usize,
    /// Convergence threshold on `||A v - lambda v||`.
    pub tol: f64,
    /// Cap on matrix-vector products; `None` means `10 * n`.
    pub max_matvecs: Option<usize>,
    pub seed: u64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self { method: EigenMethod::Auto, dense_limit: 4096, tol: 1e-10, max_matvecs: None, seed: 0x5eed }
    }
}

/// Ascending eigenvalues with eigenvectors as matrix columns.
pub(crate) struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub(crate) fn smallest_eigenpairs(a: &CsrMatrix, k: usize, cfg: &EigenConfig) -> Result<Eigenpairs> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::Domain(format!("requested {k} eigenpairs of a {n}x{n} matrix")));
    }
    let dense = match cfg.method {
        EigenMethod::Dense => true,
        EigenMethod::Lanczos => false,
        // Lanczos needs a basis well beyond k; small or nearly full requests go dense
        EigenMethod::Auto => n <= cfg.dense_limit || 3 * k + 40 >= n,
    };
    let mut pairs = if dense { dense_eigenpairs(a, k) } else { lanczos(a, k, cfg)? };
    canonical_signs(&mut pairs.vectors);
    Ok(pairs)
}

pub(crate) fn dense_eigenpairs(a: &CsrMatrix, k: usize) -> Eigenpairs {
    let eig = SymmetricEigen::new(a.to_dense());
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    order.truncate(k);
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(a.dim(), k, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigenpairs { values, vectors }
}

/// Flips each column so that its entry of largest magnitude is positive.
pub(crate) fn canonical_signs(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let pivot = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Basis vectors stored contiguously, one after another.
struct Basis {
    n: usize,
    data: Vec<f64>,
}

impl Basis {
    fn len(&self) -> usize {
        self.data.len() / self.n
    }

    fn vec(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    fn push(&mut self, v: &[f64]) {
        self.data.extend_from_slice(v);
    }

    /// Gram-Schmidt of `w` against all stored vectors, twice. Returns the
    /// accumulated projection coefficients.
    fn orthogonalize(&self, w: &mut [f64]) -> Vec<f64> {
        let mut coeffs = vec![0.0; self.len()];
        for _ in 0..2 {
            for (i, c) in coeffs.iter_mut().enumerate() {
                let v = self.vec(i);
                let p = dot(v, w);
                for (x, y) in w.iter_mut().zip(v) {
                    *x -= p * y;
                }
                *c += p;
            }
        }
        coeffs
    }

    /// Replaces the basis by the first `p` columns of `self * y`.
    fn rotate(&mut self, y: &DMatrix<f64>, p: usize) {
        let n = self.n;
        let mut out = vec![0.0; p * n];
        for c in 0..p {
            let dst = &mut out[c * n..(c + 1) * n];
            for l in 0..self.len() {
                let coef = y[(l, c)];
                if coef != 0.0 {
                    for (d, s) in dst.iter_mut().zip(self.vec(l)) {
                        *d += coef * s;
                    }
                }
            }
        }
        self.data = out;
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Thick-restart Lanczos for the `k` smallest eigenpairs.
fn lanczos(a: &CsrMatrix, k: usize, cfg: &EigenConfig) -> Result<Eigenpairs> {
    let n = a.dim();
    let m = n.min((2 * k + 20).max(k + 40));
    let max_matvecs = cfg.max_matvecs.unwrap_or(10 * n);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut basis = Basis { n, data: Vec::with_capacity(m * n) };
    basis.push(&random_unit(n, &mut rng));
    let mut h = DMatrix::<f64>::zeros(m, m);
    let mut kept = 0;
    let mut matvecs = 0;
    let mut w = vec![0.0; n];

    loop {
        let mut beta_last = 0.0;
        let mut residual = vec![0.0; n];
        for j in kept..m {
            a.matvec(basis.vec(j), &mut w);
            matvecs += 1;
            let coeffs = basis.orthogonalize(&mut w);
            for (i, &c) in coeffs.iter().enumerate() {
                h[(i, j)] = c;
                h[(j, i)] = c;
            }
            let beta = dot(&w, &w).sqrt();
            if j + 1 == m {
                beta_last = beta;
                residual.copy_from_slice(&w);
                break;
            }
            if beta > 1e-12 {
                w.iter_mut().for_each(|x| *x /= beta);
                basis.push(&w);
                h[(j + 1, j)] = beta;
                h[(j, j + 1)] = beta;
            } else {
                // invariant subspace: continue with a fresh orthogonal direction
                let mut fresh = random_unit(n, &mut rng);
                basis.orthogonalize(&mut fresh);
                let norm = dot(&fresh, &fresh).sqrt();
                fresh.iter_mut().for_each(|x| *x /= norm);
                basis.push(&fresh);
                h[(j + 1, j)] = 0.0;
                h[(j, j + 1)] = 0.0;
            }
        }

        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let y = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
        let theta: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let res: Vec<f64> = (0..m).map(|i| (beta_last * y[(m - 1, i)]).abs()).collect();
        let worst = res[..k].iter().copied().fold(0.0, f64::max);

        if worst <= cfg.tol || m == n || matvecs >= max_matvecs {
            if worst > cfg.tol && m < n {
                return Err(Error::NoConvergence { iterations: matvecs, residual: worst });
            }
            basis.rotate(&y, k);
            let vectors = DMatrix::from_fn(n, k, |r, c| basis.vec(c)[r]);
            return Ok(Eigenpairs { values: theta[..k].to_vec(), vectors });
        }

        let p = (k + (m - k) / 2).min(m - 1);
        basis.rotate(&y, p);
        h.fill(0.0);
        for i in 0..p {
            h[(i, i)] = theta[i];
            let s = beta_last * y[(m - 1, i)];
            h[(p, i)] = s;
            h[(i, p)] = s;
        }
        residual.iter_mut().for_each(|x| *x /= beta_last);
        // the residual is orthogonal to the kept Ritz vectors up to rounding
        basis.orthogonalize(&mut residual);
        let norm = dot(&residual, &residual).sqrt();
        residual.iter_mut().for_each(|x| *x /= norm);
        basis.push(&residual);
        kept = p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> CsrMatrix {
        let entries = (0..n).map(|i| (i, i, if i == 0 || i == n - 1 { 1.0 } else { 2.0 }));
        let off = (0..n - 1).map(|i| (i, i + 1, -1.0));
        CsrMatrix::symmetric_from_upper(n, entries.chain(off))
    }

    #[test]
    fn lanczos_matches_dense_on_path() {
        let a = path_laplacian(300);
        let cfg = EigenConfig { method: EigenMethod::Lanczos, ..Default::default() };
        let it = smallest_eigenpairs(&a, 6, &cfg).unwrap();
        let de = smallest_eigenpairs(&a, 6, &EigenConfig { method: EigenMethod::Dense, ..Default::default() }).unwrap();
        for i in 0..6 {
            // analytic: 2 - 2 cos(pi i / n)
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * i as f64 / 300.0).cos();
            assert!((it.values[i] - exact).abs() < 1e-9, "{} vs {}", it.values[i], exact);
            assert!((de.values[i] - exact).abs() < 1e-9);
            let d: f64 = it.vectors.column(i).dot(&de.vectors.column(i));
            assert!((d.abs() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn lanczos_on_tiny_matrix_uses_full_space() {
        let a = path_laplacian(5);
        let cfg = EigenConfig { method: EigenMethod::Lanczos, ..Default::default() };
        let it = smallest_eigenpairs(&a, 5, &cfg).unwrap();
        let de = dense_eigenpairs(&a, 5);
        for i in 0..5 {
            assert!((it.values[i] - de.values[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_k() {
        let a = path_laplacian(4);
        assert!(smallest_eigenpairs(&a, 0, &EigenConfig::default()).is_err());
        assert!(smallest_eigenpairs(&a, 5, &EigenConfig::default()).is_err());
    }
}
