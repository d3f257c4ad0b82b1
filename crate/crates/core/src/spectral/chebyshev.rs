//! Chebyshev polynomial approximation of spectral filters.
//!
//! A filter `h` on `[0, lambda_max]` is expanded as
//! `h(y) ~ c_0 / 2 + sum_k c_k T_k((y - a) / a)` with `a = lambda_max / 2`, and
//! `h(L) x` is evaluated by the three-term recurrence using only sparse
//! matrix-vector products.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::temporal_graph::SupraSystem;
use crate::wavelet::WaveletFilterSpec;

const ERROR_GRID: usize = 1000;

/// Coefficients of a truncated Chebyshev expansion, first one not halved.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevExpansion {
    pub coeffs: Vec<f64>,
    pub lambda_max: f64,
    /// Max absolute error against the target on a uniform 1000-point grid.
    pub max_error: f64,
}

impl ChebyshevExpansion {
    /// Clenshaw evaluation at `y` in `[0, lambda_max]`.
    pub fn eval(&self, y: f64) -> f64 {
        let a = self.lambda_max / 2.0;
        let x = (y - a) / a;
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0] / 2.0
    }
}

/// Expands an arbitrary function on `[0, lambda_max]` to degree `order` by
/// cosine quadrature at `order + 1` Chebyshev nodes.
pub fn chebyshev_expand(f: impl Fn(f64) -> f64, order: usize, lambda_max: f64) -> Result<ChebyshevExpansion> {
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::Domain(format!("lambda_max must be positive, got {lambda_max}")));
    }
    let nodes = order + 1;
    let a = lambda_max / 2.0;
    let samples: Vec<(f64, f64)> = (0..nodes)
        .map(|l| {
            let theta = PI * (l as f64 + 0.5) / nodes as f64;
            (theta, f(a * theta.cos() + a))
        })
        .collect();
    let coeffs = (0..=order)
        .map(|k| 2.0 / nodes as f64 * samples.iter().map(|(th, v)| (k as f64 * th).cos() * v).sum::<f64>())
        .collect();
    let mut exp = ChebyshevExpansion { coeffs, lambda_max, max_error: 0.0 };
    exp.max_error = (0..ERROR_GRID)
        .map(|i| {
            let y = lambda_max * i as f64 / (ERROR_GRID - 1) as f64;
            (exp.eval(y) - f(y)).abs()
        })
        .fold(0.0, f64::max);
    Ok(exp)
}

/// Expansion of `y -> g(scale * y)` for the wavelet filter `g`.
pub fn chebyshev_coefficients(filter: &WaveletFilterSpec, scale: f64, order: usize, lambda_max: f64) -> Result<ChebyshevExpansion> {
    if order < 3 {
        return Err(Error::Domain(format!("Chebyshev order must be at least 3, got {order}")));
    }
    chebyshev_expand(|y| filter.eval(scale * y), order, lambda_max)
}

/// The rescaled operator `(L - a I) / a` driving the recurrence.
pub struct ChebyshevOperator<'a> {
    lap: &'a CsrMatrix,
    half: f64,
}

impl<'a> ChebyshevOperator<'a> {
    pub fn new(lap: &'a CsrMatrix, lambda_max: f64) -> Result<Self> {
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::Domain(format!("lambda_max must be positive, got {lambda_max}")));
        }
        Ok(Self { lap, half: lambda_max / 2.0 })
    }

    pub fn dim(&self) -> usize {
        self.lap.dim()
    }

    fn step(&self, x: &[f64], out: &mut [f64], width: usize) {
        if width == 1 {
            self.lap.matvec(x, out);
        } else {
            self.lap.matmul_block(x, out, width);
        }
        let inv = 1.0 / self.half;
        for (o, xi) in out.iter_mut().zip(x) {
            *o = (*o - self.half * xi) * inv;
        }
    }

    /// Calls `visit(k, T_k X)` for `k = 0..=order` on a row-major block `X`
    /// of `width` columns.
    pub fn for_each_term(&self, x: &[f64], width: usize, order: usize, mut visit: impl FnMut(usize, &[f64])) {
        let len = self.dim() * width;
        assert_eq!(x.len(), len);
        visit(0, x);
        if order == 0 {
            return;
        }
        let mut prev = x.to_vec();
        let mut cur = vec![0.0; len];
        self.step(&prev, &mut cur, width);
        visit(1, &cur);
        let mut next = vec![0.0; len];
        for k in 2..=order {
            self.step(&cur, &mut next, width);
            for (n, p) in next.iter_mut().zip(&prev) {
                *n = 2.0 * *n - p;
            }
            visit(k, &next);
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
    }

    /// `sum_k c_k T_k X` with the first coefficient halved.
    pub fn apply_block(&self, coeffs: &[f64], x: &[f64], width: usize) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.for_each_term(x, width, coeffs.len() - 1, |k, t| {
            let c = if k == 0 { coeffs[0] / 2.0 } else { coeffs[k] };
            for (o, v) in out.iter_mut().zip(t) {
                *o += c * v;
            }
        });
        out
    }
}

/// Approximates `h(L) signal` from the Chebyshev coefficients of `h`.
pub fn apply_filtered_operator(sys: &SupraSystem, expansion: &ChebyshevExpansion, signal: &[f64]) -> Result<Vec<f64>> {
    if expansion.coeffs.is_empty() {
        return Err(Error::Domain("empty coefficient list".into()));
    }
    if signal.len() != sys.dim() {
        return Err(Error::Consistency(format!("signal of length {} for NT = {}", signal.len(), sys.dim())));
    }
    let op = ChebyshevOperator::new(sys.laplacian(), expansion.lambda_max)?;
    Ok(op.apply_block(&expansion.coeffs, signal, 1))
}
