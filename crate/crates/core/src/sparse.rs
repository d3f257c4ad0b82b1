//! Square compressed-row matrices with sorted column indices.
//!
//! Only what the supra-Laplacian needs: symmetric assembly from the upper
//! triangle, matrix-vector and matrix-block products.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, indptr: vec![0; n + 1], indices: Vec::new(), values: Vec::new() }
    }

    /// Builds a symmetric matrix from upper-triangle entries `(i, j, v)` with
    /// `i <= j`. Each off-diagonal value is written to both `(i, j)` and
    /// `(j, i)`, so the result is bit-wise symmetric. Repeated entries are summed.
    pub fn symmetric_from_upper(n: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in entries {
            debug_assert!(i <= j && j < n);
            *rows[i].entry(j).or_insert(0.0) += v;
        }
        // mirror after summation so both halves hold the identical value
        let upper: Vec<(usize, usize, f64)> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |(&j, &v)| (i, j, v)))
            .collect();
        for &(i, j, v) in &upper {
            if i != j {
                rows[j].insert(i, v);
            }
        }
        Self::from_rows(n, rows)
    }

    fn from_rows(n: usize, rows: Vec<BTreeMap<usize, f64>>) -> Self {
        let nnz = rows.iter().map(|r| r.len()).sum();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for r in rows {
            for (j, v) in r {
                indices.push(j);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self { n, indptr, indices, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).1.iter().sum()
    }

    /// Rebuilds the matrix with every stored value mapped through `f(i, j, v)`.
    /// Sparsity pattern is kept as is.
    pub fn map_values(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                values.push(f(i, j, v));
            }
        }
        Self { n: self.n, indptr: self.indptr.clone(), indices: self.indices.clone(), values }
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `Y = A X` for a row-major block `X` of `width` columns.
    pub fn matmul_block(&self, x: &[f64], y: &mut [f64], width: usize) {
        assert_eq!(x.len(), self.n * width);
        assert_eq!(y.len(), self.n * width);
        for (i, yrow) in y.chunks_exact_mut(width).enumerate() {
            yrow.fill(0.0);
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let xrow = &x[j * width..(j + 1) * width];
                for (a, b) in yrow.iter_mut().zip(xrow) {
                    *a += v * b;
                }
            }
        }
    }

    /// Upper bound on the spectral radius by Gershgorin discs.
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                let mut centre = 0.0;
                let mut radius = 0.0;
                for (&j, &v) in cols.iter().zip(vals) {
                    if j == i {
                        centre = v;
                    } else {
                        radius += v.abs();
                    }
                }
                centre.abs() + radius
            })
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).all(|(&j, &v)| self.get(j, i).to_bits() == v.to_bits())
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }
}
