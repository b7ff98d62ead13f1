use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::cf::CfSpec;

/// Default `k` is the largest member of `K` with `q_k` at most this.
pub const DEFAULT_K_QMAX: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Limits,
    Evl,
    EntryDist,
    Compare,
    Phi,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Limits => "limits",
            Command::Evl => "evl",
            Command::EntryDist => "entry-dist",
            Command::Compare => "compare",
            Command::Phi => "phi",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Sup over the grid of `|Ĥ − H_{q_k}|`.
    pub empirical_vs_finite: f64,
    /// Sup over the grid of `|Ĥ − H|`.
    pub empirical_vs_limit: f64,
    /// Sup over the grid of `|H_{q_k} − H|`.
    pub finite_vs_limit: f64,
    /// Largest admissible width of an exact enclosure.
    pub enclosure_width: f64,
    /// Cauchy-gap tolerance of numeric profiles.
    pub numeric_profile: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            empirical_vs_finite: 0.02,
            empirical_vs_limit: 0.03,
            finite_vs_limit: 0.03,
            enclosure_width: 1e-20,
            numeric_profile: crate::theory::DEFAULT_NUMERIC_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub command: Command,
    /// Continued fraction in the textual spec grammar.
    pub spec: String,
    /// Depth indices; empty means the default.
    pub k: Vec<usize>,
    pub jmax: usize,
    /// `default`, `log:a:b:n` or `list:y1,y2,...`.
    pub grid: String,
    pub samples: u64,
    pub seed: u64,
    pub tolerances: Tolerances,
    /// Depth of the table behind numeric profiles.
    pub numeric_depth: usize,
    pub plot: bool,
    pub out: PathBuf,
    /// Worker threads for sampling; never changes the output.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: Command::Compare,
            spec: "periodic:1".into(),
            k: Vec::new(),
            jmax: 8,
            grid: "default".into(),
            samples: 20_000,
            seed: 20_240_917,
            tolerances: Tolerances::default(),
            numeric_depth: 200,
            plot: false,
            out: PathBuf::from("out"),
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn parsed_spec(&self) -> Result<CfSpec, HarnessError> {
        self.spec
            .parse::<CfSpec>()
            .map_err(|e| HarnessError::Config(format!("spec '{}': {e}", self.spec)))
    }

    /// Checks everything that does not need a computation.
    pub fn validate(&self) -> Result<CfSpec, HarnessError> {
        let spec = self.parsed_spec()?;
        if self.jmax == 0 {
            return Err(HarnessError::Config("jmax must be at least 1".into()));
        }
        if self.command == Command::Compare && self.samples == 0 {
            return Err(HarnessError::Config("samples must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(HarnessError::Config("threads must be at least 1".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("empirical_vs_finite", t.empirical_vs_finite),
            ("empirical_vs_limit", t.empirical_vs_limit),
            ("finite_vs_limit", t.finite_vs_limit),
            ("enclosure_width", t.enclosure_width),
            ("numeric_profile", t.numeric_profile),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HarnessError::Config(format!("tolerance {name} must be positive")));
            }
        }
        for &k in &self.k {
            if !spec.k_subsequence.contains(k) {
                return Err(HarnessError::Config(format!("k = {k} is not in K = {}", spec.k_subsequence)));
            }
        }
        self.grid.parse::<super::GridSpec>()?;
        Ok(spec)
    }

    /// The configured `k`, or the default for the spec.
    pub fn resolved_k(&self, spec: &CfSpec) -> Result<Vec<usize>, HarnessError> {
        if self.k.is_empty() {
            Ok(vec![default_k(spec)?])
        } else {
            Ok(self.k.clone())
        }
    }

    /// The run recorded in a manifest; `out` and `threads` may then be overridden.
    pub fn from_manifest(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        let m: Manifest = serde_json::from_str(&text)?;
        Ok(m.config)
    }
}

/// The largest `k ∈ K` with `q_k ≤ 10⁵`.
pub fn default_k(spec: &CfSpec) -> Result<usize, HarnessError> {
    let limit = BigInt::from(DEFAULT_K_QMAX);
    let avail = spec.available_terms();
    let (mut q_prev, mut q) = (BigInt::from(1), BigInt::from(spec.term(1)?));
    let mut best = spec.k_subsequence.contains(0).then_some(0);
    let mut k = 1;
    while q <= limit {
        if spec.k_subsequence.contains(k) {
            best = Some(k);
        }
        if k >= avail {
            break;
        }
        k += 1;
        let next = BigInt::from(spec.term(k)?) * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
    }
    best.ok_or_else(|| HarnessError::Config(format!("no k in K with q_k <= {DEFAULT_K_QMAX}")))
}

/// Everything needed to reproduce a run's outputs byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// The spec in canonical form.
    pub spec: String,
    pub seed: u64,
    /// The configuration as run, with defaults filled in.
    pub config: RunConfig,
    pub resolved_k: Vec<usize>,
    pub resolved_grid: Vec<f64>,
    pub outputs: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_k_golden() {
        // q_24 = 75025 and q_25 = 121393.
        assert_eq!(default_k(&CfSpec::constant(1)).unwrap(), 24);
        let k = default_k(&CfSpec::block(3)).unwrap();
        assert_eq!(k % 3, 0);
    }

    #[test]
    fn validation_rejects_bad_input() {
        let mut c = RunConfig::default();
        assert!(c.validate().is_ok());
        c.spec = "nonsense".into();
        assert!(matches!(c.validate(), Err(HarnessError::Config(_))));
        c = RunConfig {
            spec: "block:3".into(),
            k: vec![4],
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
        c = RunConfig {
            samples: 0,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_roundtrip() {
        let c = RunConfig {
            k: vec![12, 16],
            ..RunConfig::default()
        };
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), c);
    }
}
