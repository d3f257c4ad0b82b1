//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "seed": 7,
//!   "input": "edges.tsv",
//!   "output": "out",
//!   "detect": { "mode": "fast", "n_scales": 50, "eta": 100, "repetitions": 20,
//!               "residual_threshold": 0.8, "chebyshev_order": 80, "weights": "lart" },
//!   "benchmark": { "family": "sp", "change": "lsc", "rho": 1.0, "k_bar": 16.0 }
//! }
//! ```
//!
//! Every field but `seed` is optional. Command-line flags override the file.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use tempowave::benchmarks::{GranellConfig, SPParams};
use tempowave::clustering::{DetectConfig, Mode};

use crate::exit::Usage;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub detect: DetectOverrides,
    pub benchmark: Option<BenchmarkSpec>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Usage(format!("config {}: {e}", path.display())))?;
        if cfg.seed.is_none() {
            return Err(Usage(format!("config {} must set \"seed\"", path.display())).into());
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum BenchmarkSpec {
    Sp(SPParams),
    Granell(GranellConfig),
}

impl BenchmarkSpec {
    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            BenchmarkSpec::Sp(p) => BenchmarkSpec::Sp(SPParams { seed, ..p.clone() }),
            BenchmarkSpec::Granell(g) => BenchmarkSpec::Granell(GranellConfig { seed, ..g.clone() }),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectOverrides {
    pub mode: Option<Mode>,
    pub n_scales: Option<usize>,
    pub eta: Option<usize>,
    pub repetitions: Option<usize>,
    pub residual_threshold: Option<f64>,
    pub chebyshev_order: Option<usize>,
    pub weights: Option<String>,
}

impl DetectOverrides {
    /// Fields set in `over` replace ours.
    pub fn merge(&mut self, over: DetectOverrides) {
        self.mode = over.mode.or(self.mode);
        self.n_scales = over.n_scales.or(self.n_scales);
        self.eta = over.eta.or(self.eta);
        self.repetitions = over.repetitions.or(self.repetitions);
        self.residual_threshold = over.residual_threshold.or(self.residual_threshold);
        self.chebyshev_order = over.chebyshev_order.or(self.chebyshev_order);
        self.weights = over.weights.or(self.weights.take());
    }

    pub fn into_config(self, seed: u64) -> Result<(DetectConfig, WeightScheme), Usage> {
        let d = DetectConfig::default();
        let positive = |v: Option<usize>, default: usize, flag: &str| match v {
            Some(0) => Err(Usage(format!("{flag} must be positive"))),
            v => Ok(v.unwrap_or(default)),
        };
        let cfg = DetectConfig {
            mode: self.mode.unwrap_or(d.mode),
            n_scales: positive(self.n_scales, d.n_scales, "--scales")?,
            eta: positive(self.eta, d.eta, "--eta")?,
            repetitions: positive(self.repetitions, d.repetitions, "--repetitions")?,
            residual_threshold: self.residual_threshold.unwrap_or(d.residual_threshold),
            chebyshev_order: positive(self.chebyshev_order, d.chebyshev_order, "--chebyshev-order")?,
            seed,
            eigen: d.eigen,
        };
        if cfg.n_scales < 2 {
            return Err(Usage("--scales must be at least 2".into()));
        }
        if !(cfg.residual_threshold > 0.0 && cfg.residual_threshold <= 1.0) {
            return Err(Usage(format!("--threshold must lie in (0, 1], got {}", cfg.residual_threshold)));
        }
        let weights = self.weights.as_deref().map_or(Ok(WeightScheme::Lart), WeightScheme::parse)?;
        Ok((cfg, weights))
    }
}

/// Inter-layer coupling scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    Lart,
    Constant(f64),
}

impl WeightScheme {
    pub fn parse(s: &str) -> Result<Self, Usage> {
        if s == "lart" {
            return Ok(WeightScheme::Lart);
        }
        let omega = s
            .strip_prefix("constant:")
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Usage(format!("--weights must be 'lart' or 'constant:<omega>', got '{s}'")))?;
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Usage(format!("omega must be non-negative, got {omega}")));
        }
        Ok(WeightScheme::Constant(omega))
    }
}

impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightScheme::Lart => f.write_str("lart"),
            WeightScheme::Constant(omega) => write!(f, "constant:{omega}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_schemes_round_trip() {
        for s in ["lart", "constant:10", "constant:0.5", "constant:0"] {
            assert_eq!(WeightScheme::parse(s).unwrap().to_string(), s);
        }
        for bad in ["", "constant", "constant:-1", "constant:x", "LART"] {
            assert!(WeightScheme::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn later_overrides_win_and_gaps_fall_through() {
        let mut base = DetectOverrides { eta: Some(50), n_scales: Some(10), ..Default::default() };
        base.merge(DetectOverrides { eta: Some(200), ..Default::default() });
        let (cfg, w) = base.into_config(3).unwrap();
        assert_eq!((cfg.eta, cfg.n_scales, cfg.repetitions, cfg.seed), (200, 10, 20, 3));
        assert_eq!(w, WeightScheme::Lart);
    }

    #[test]
    fn out_of_range_settings_are_usage_errors() {
        for o in [
            DetectOverrides { eta: Some(0), ..Default::default() },
            DetectOverrides { n_scales: Some(1), ..Default::default() },
            DetectOverrides { residual_threshold: Some(0.0), ..Default::default() },
            DetectOverrides { residual_threshold: Some(1.5), ..Default::default() },
        ] {
            assert!(o.into_config(0).is_err());
        }
    }

    #[test]
    fn benchmark_section_is_tagged_by_family() {
        let spec: BenchmarkSpec = serde_json::from_str(r#"{"family": "sp", "change": "lsc", "k_bar": 11.0}"#).unwrap();
        let BenchmarkSpec::Sp(p) = spec.with_seed(9) else { panic!("expected sp") };
        assert_eq!((p.k_bar, p.rho, p.seed), (11.0, 1.0, 9));
        assert!(serde_json::from_str::<BenchmarkSpec>(r#"{"family": "other"}"#).is_err());
    }
}
