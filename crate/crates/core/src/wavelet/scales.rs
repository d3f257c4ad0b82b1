use serde::{Deserialize, Serialize};

use super::WaveletFilterSpec;
use crate::error::{Error, Result};

/// Attenuation required at the eigenvalue following `lambda_star` at `s_max`.
pub const ATTENUATION: f64 = 10.0;

/// Logarithmically spaced scales, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<f64>,
}

impl ScaleGrid {
    pub fn log_spaced(s_min: f64, s_max: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("need at least two scales, got {m}")));
        }
        if !(s_min > 0.0 && s_min <= s_max && s_max.is_finite()) {
            return Err(Error::Domain(format!("invalid scale range [{s_min}, {s_max}]")));
        }
        let (lo, hi) = (s_min.ln(), s_max.ln());
        let mut scales: Vec<f64> = (0..m).map(|k| (lo + (hi - lo) * k as f64 / (m - 1) as f64).exp()).collect();
        scales[0] = s_min;
        scales[m - 1] = s_max;
        Ok(Self { scales })
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn s_min(&self) -> f64 {
        self.scales[0]
    }

    pub fn s_max(&self) -> f64 {
        *self.scales.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }
}

/// How the outer knot `y4` was fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Y4Rule {
    /// Root of the attenuation equation found by bisection.
    Bisection,
    /// No bracketed root; `y4` halfway between `y3` and `s_max * lambda_next`.
    Midpoint,
    /// No usable next eigenvalue; `y4 = 2 * y2`.
    Doubled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDesign {
    pub filter: WaveletFilterSpec,
    pub grid: ScaleGrid,
    pub y4_rule: Y4Rule,
}

/// Centres the filter on `lambda_star` and bounds the scale range:
/// `y1 = 1`, `s_min = y2 = y3 = 1 / lambda_star`, `s_max = 1 / lambda_star^2`.
/// `y4` is chosen so that at `s_max` the filter response at `lambda_next` is
/// one tenth of its response at `lambda_star`.
///
/// Pass `lambda_next = None`, or one within `1e-10` of `lambda_star`, when no
/// larger eigenvalue is known; `y4` then falls back to `2 * y2`.
pub fn derive_filter_and_scales(lambda_star: f64, lambda_next: Option<f64>, m: usize) -> Result<FilterDesign> {
    if !(lambda_star > 0.0) {
        return Err(Error::Domain(format!("informative eigenvalue must be positive, got {lambda_star}")));
    }
    if lambda_star >= 1.0 {
        return Err(Error::NoScaleRange(lambda_star));
    }
    if m < 2 {
        return Err(Error::Domain(format!("need at least two scales, got {m}")));
    }
    let y1 = 1.0;
    let s_min = y1 / lambda_star;
    let y2 = s_min;
    let s_max = y1 / (lambda_star * lambda_star);

    let next = lambda_next.filter(|&l| l - lambda_star >= 1e-10);
    let (y4, y4_rule) = match next {
        None => (2.0 * y2, Y4Rule::Doubled),
        Some(next) => {
            if next > 2.0 + 1e-9 {
                return Err(Error::Domain(format!("next eigenvalue {next} exceeds 2")));
            }
            let x = s_max * next;
            match bisect_y4(y1, y2, x) {
                Some(y4) => (y4, Y4Rule::Bisection),
                None => {
                    let mid = y2 + (x - y2) / 2.0;
                    if mid > y2 {
                        (mid, Y4Rule::Midpoint)
                    } else {
                        (2.0 * y2, Y4Rule::Doubled)
                    }
                }
            }
        }
    };
    let filter = WaveletFilterSpec::new(y1, y2, y2, y4)?;
    let grid = ScaleGrid::log_spaced(s_min, s_max, m)?;
    Ok(FilterDesign { filter, grid, y4_rule })
}

/// Solves `g(x) = g(y2) / 10` for `y4` on `(y2, 50 y2]`. The returned knot is
/// the lower end of the final bracket, where the attenuation is at least 10.
fn bisect_y4(y1: f64, y2: f64, x: f64) -> Option<f64> {
    let residual = |y4: f64| {
        let g = WaveletFilterSpec { y1, y2, y4 };
        g.eval(x) - g.eval(y2) / ATTENUATION
    };
    let (mut lo, mut hi) = (y2, 50.0 * y2);
    if residual(hi) <= 0.0 {
        return None;
    }
    // residual(y4 -> y2+) = -g(y2)/10 < 0 since x > y2 lies outside the support
    let tol = 1e-12 * y2.max(1.0);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo > y2).then_some(lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_gives_two_and_four() {
        let d = derive_filter_and_scales(0.5, Some(0.7), 50).unwrap();
        assert_eq!(d.grid.s_min(), 2.0);
        assert_eq!(d.filter.y2, 2.0);
        assert_eq!(d.grid.s_max(), 4.0);
        assert_eq!(d.filter.y1, 1.0);
    }

    #[test]
    fn quarter_gives_geometric_grid() {
        let d = derive_filter_and_scales(0.25, Some(0.5), 3).unwrap();
        let s = d.grid.scales();
        assert_eq!(s[0], 4.0);
        assert!((s[1] - 8.0).abs() < 1e-12);
        assert_eq!(s[2], 16.0);
    }

    #[test]
    fn bisection_meets_the_attenuation_equation() {
        let d = derive_filter_and_scales(0.1, Some(0.12), 50).unwrap();
        assert_eq!(d.y4_rule, Y4Rule::Bisection);
        let g = d.filter;
        let s_max = d.grid.s_max();
        let lhs = g.eval(s_max * 0.12);
        let rhs = g.eval(g.y2) / 10.0;
        assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        assert!(g.eval(s_max * 0.1) >= 10.0 * g.eval(s_max * 0.12));
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        assert!(matches!(derive_filter_and_scales(1.0, Some(1.5), 10), Err(Error::NoScaleRange(_))));
        assert!(matches!(derive_filter_and_scales(1.3, Some(1.5), 10), Err(Error::NoScaleRange(_))));
        assert!(derive_filter_and_scales(0.0, Some(0.5), 10).is_err());
        assert!(derive_filter_and_scales(0.5, Some(0.6), 1).is_err());
        let doubled = derive_filter_and_scales(0.3, None, 10).unwrap();
        assert_eq!(doubled.y4_rule, Y4Rule::Doubled);
        assert_eq!(doubled.filter.y4, 2.0 * doubled.filter.y2);
        let tied = derive_filter_and_scales(0.3, Some(0.3 + 1e-12), 10).unwrap();
        assert_eq!(tied.y4_rule, Y4Rule::Doubled);
    }

    #[test]
    fn far_next_eigenvalue_uses_midpoint_rule() {
        // s_max * next = 19000 lies beyond the bracket end 50 * y2 = 5000
        let d = derive_filter_and_scales(0.01, Some(1.9), 5).unwrap();
        assert_eq!(d.y4_rule, Y4Rule::Midpoint);
        let g = d.filter;
        let s_max = d.grid.s_max();
        assert!(g.eval(s_max * 0.01) >= 10.0 * g.eval(s_max * 1.9));
    }

    proptest! {
        #[test]
        fn identities_hold(lambda in 0.001f64..0.999, ratio in 1.01f64..3.0, m in 2usize..80) {
            let next = (lambda * ratio).min(2.0);
            let d = derive_filter_and_scales(lambda, Some(next), m).unwrap();
            prop_assert!((d.grid.s_min() * lambda - 1.0).abs() < 1e-15);
            prop_assert!((d.grid.s_max() * lambda * lambda - 1.0).abs() < 1e-14);
            prop_assert_eq!(d.filter.y2, d.grid.s_min());
            let s = d.grid.scales();
            let r0 = s[1] / s[0];
            for w in s.windows(2) {
                prop_assert!((w[1] / w[0] - r0).abs() < 1e-12);
            }
            let g = d.filter;
            prop_assert!(g.eval(d.grid.s_max() * lambda) >= 10.0 * g.eval(d.grid.s_max() * next) - 1e-15);
        }
    }
}
