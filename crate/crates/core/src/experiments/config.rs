use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::{ExperimentError, REGISTERED};

/// A JSON experiment description.
///
/// ```json
/// {"name": "mean_variance", "n": [100], "replicates": 100000, "seed": 1,
///  "tolerances": {"mean_dev_se": 4.0}}
/// ```
///
/// `n` may be a number or a list. `params` holds experiment-specific reals
/// such as the paths `s`, `t` of `clt` or the pool size of
/// `psi_convergence`; unknown keys are rejected by [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default, deserialize_with = "one_or_many")]
    pub n: Vec<u64>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<u32>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Directory for raw sample pools as single-column CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_dir: Option<String>,
    /// Write the measured wall-clock into the report. Off by default so that
    /// reports are byte-identical across runs.
    #[serde(default)]
    pub record_timing: bool,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Sizes {
        One(u64),
        Many(Vec<u64>),
    }
    Ok(match Sizes::deserialize(d)? {
        Sizes::One(n) => vec![n],
        Sizes::Many(v) => v,
    })
}

impl ExperimentConfig {
    /// Config with the given name, sizes and replicate count, everything else
    /// left to the experiment's defaults.
    pub fn new(name: &str, n: &[u64], replicates: usize, seed: u64) -> Self {
        ExperimentConfig {
            name: name.to_string(),
            n: n.to_vec(),
            replicates,
            seed,
            k: None,
            levels: None,
            tolerances: BTreeMap::new(),
            params: BTreeMap::new(),
            output: None,
            pool_dir: None,
            record_timing: false,
        }
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    pub fn with_k(mut self, k: u32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_levels(mut self, levels: u32) -> Self {
        self.levels = Some(levels);
        self
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let spec = REGISTERED
            .iter()
            .find(|e| e.name == self.name)
            .ok_or_else(|| ExperimentError::UnknownExperiment(self.name.clone()))?;
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.replicates < 100 {
            return bad(format!("replicates = {} (need at least 100)", self.replicates));
        }
        for (key, &v) in &self.tolerances {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("tolerance {key} = {v} is not positive"));
            }
            if !spec.tolerances.iter().any(|t| t.0 == key) {
                return bad(format!("experiment {} has no tolerance {key}", self.name));
            }
        }
        for (key, v) in &self.params {
            if !v.is_finite() {
                return bad(format!("param {key} = {v} is not finite"));
            }
            if !spec.params.contains(&key.as_str()) {
                return bad(format!("experiment {} has no param {key}", self.name));
            }
        }
        if self.n.contains(&0) {
            return bad("tree size n = 0".to_string());
        }
        if let Some(l) = self.levels {
            if l == 0 || l > crate::limit::MAX_LEVELS {
                return bad(format!("levels = {l} (need 1..=30)"));
            }
        }
        (spec.check)(self)
    }

    /// Value of `params[key]`, or `default`.
    pub fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub(crate) fn param_usize(&self, key: &str, default: usize) -> usize {
        self.params.get(key).map_or(default, |&v| v.max(0.0) as usize)
    }

    /// Tree sizes, or `default` when none are given.
    pub fn sizes(&self, default: &[u64]) -> Vec<u64> {
        if self.n.is_empty() {
            default.to_vec()
        } else {
            self.n.clone()
        }
    }
}
