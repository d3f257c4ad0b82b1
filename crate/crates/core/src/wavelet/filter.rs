use crate::error::{Error, Result};

/// Cubic B-spline band-pass filter with knots `(0, y1, y2, y2, y4)`.
///
/// The double knot at `y2` makes the spline `C^1` there; it is `C^2`
/// elsewhere on `(0, y4)`, strictly positive inside and zero outside.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WaveletFilterSpec {
    pub y1: f64,
    pub y2: f64,
    pub y4: f64,
}

impl WaveletFilterSpec {
    /// Requires `0 < y1 < y2 = y3 < y4`.
    pub fn new(y1: f64, y2: f64, y3: f64, y4: f64) -> Result<Self> {
        if !(0.0 < y1 && y1 < y2 && y2 == y3 && y3 < y4 && y4.is_finite()) {
            return Err(Error::Domain(format!(
                "filter knots must satisfy 0 < y1 < y2 = y3 < y4, got ({y1}, {y2}, {y3}, {y4})"
            )));
        }
        Ok(Self { y1, y2, y4 })
    }

    pub fn knots(&self) -> [f64; 5] {
        [0.0, self.y1, self.y2, self.y2, self.y4]
    }

    /// Evaluates the spline by the Cox-de Boor recursion.
    pub fn eval(&self, y: f64) -> f64 {
        if !(y > 0.0 && y < self.y4) {
            return 0.0;
        }
        let t = self.knots();
        // degree-0 basis on the four knot spans, half-open
        let mut b = [0.0f64; 4];
        for (i, bi) in b.iter_mut().enumerate() {
            if t[i] <= y && y < t[i + 1] {
                *bi = 1.0;
            }
        }
        for p in 1..=3 {
            for i in 0..4 - p {
                let left = ratio(y - t[i], t[i + p] - t[i]) * b[i];
                let right = ratio(t[i + p + 1] - y, t[i + p + 1] - t[i + 1]) * b[i + 1];
                b[i] = left + right;
            }
        }
        b[0]
    }
}

/// `num / den` with the B-spline convention `x / 0 = 0`.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec() -> WaveletFilterSpec {
        WaveletFilterSpec::new(1.0, 2.0, 2.0, 4.0).unwrap()
    }

    #[test]
    fn vanishes_at_and_outside_the_support() {
        let g = spec();
        for y in [-1.0, 0.0, 4.0, 4.5, f64::NAN] {
            assert_eq!(g.eval(y), 0.0);
        }
    }

    #[test]
    fn matches_symbolic_piecewise_values() {
        // exact rational values of B_3(0,1,2,2,4; y) from a symbolic expansion
        let g = spec();
        let expected = [(0.5, 1.0 / 32.0), (1.0, 0.25), (1.5, 65.0 / 96.0), (2.0, 2.0 / 3.0), (2.5, 9.0 / 32.0), (3.0, 1.0 / 12.0), (3.5, 1.0 / 96.0)];
        for (y, v) in expected {
            assert!((g.eval(y) - v).abs() < 1e-15, "g({y}) = {} != {v}", g.eval(y));
        }
    }

    #[test]
    fn rejects_bad_knots() {
        assert!(WaveletFilterSpec::new(1.0, 2.0, 2.5, 4.0).is_err());
        assert!(WaveletFilterSpec::new(0.0, 2.0, 2.0, 4.0).is_err());
        assert!(WaveletFilterSpec::new(1.0, 2.0, 2.0, 2.0).is_err());
        assert!(WaveletFilterSpec::new(3.0, 2.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn lipschitz_on_a_fine_grid() {
        let g = spec();
        let h = 1e-6;
        let mut y = 1e-3;
        while y < 4.0 - h {
            assert!((g.eval(y + h) - g.eval(y)).abs() <= 2.0 * h, "jump at {y}");
            y += 1e-3;
        }
    }

    proptest! {
        #[test]
        fn positive_inside_support(y1 in 0.1f64..2.0, gap in 0.1f64..3.0, tail in 0.1f64..5.0, u in 0.001f64..0.999) {
            let g = WaveletFilterSpec::new(y1, y1 + gap, y1 + gap, y1 + gap + tail).unwrap();
            prop_assert!(g.eval(u * g.y4) > 0.0);
        }
    }
}
