use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

/// Direction of a gated metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    /// Pass when `metric <= tolerance`.
    AtMost,
    /// Pass when `metric > tolerance`.
    Above,
}

impl Gate {
    pub fn passes(self, metric: f64, tolerance: f64) -> bool {
        match self {
            Gate::AtMost => metric <= tolerance,
            Gate::Above => metric > tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub targets: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, bool>,
    pub pass: bool,
    pub elapsed_seconds: f64,
    /// Where each tolerance comes from.
    pub slack: BTreeMap<String, String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One line per metric, gated ones marked.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{}: {}\n",
            self.experiment,
            if self.pass { "PASS" } else { "FAIL" }
        );
        for (name, value) in &self.metrics {
            let mark = match self.verdicts.get(name) {
                Some(true) => " ok",
                Some(false) => " FAILED",
                None => "",
            };
            let target = self
                .targets
                .get(name)
                .map(|t| format!(" (target {t})"))
                .unwrap_or_default();
            out.push_str(&format!("  {name} = {value}{target}{mark}\n"));
        }
        out
    }
}

/// Collects metrics while an experiment runs.
#[derive(Debug, Default)]
pub(crate) struct Recorder {
    pub metrics: BTreeMap<String, f64>,
    pub targets: BTreeMap<String, f64>,
    gates: BTreeMap<String, (Gate, f64)>,
    pub slack: BTreeMap<String, String>,
}

impl Recorder {
    pub fn metric(&mut self, name: impl Into<String>, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn target(&mut self, name: impl Into<String>, value: f64) {
        self.targets.insert(name.into(), value);
    }

    /// Record `value` and gate it with the tolerance of `base` (the name
    /// before any `@` suffix).
    pub fn gated(&mut self, name: impl Into<String>, value: f64, gate: Gate, tolerance: f64) {
        let name = name.into();
        self.metrics.insert(name.clone(), value);
        self.gates.insert(name, (gate, tolerance));
    }

    pub fn note(&mut self, name: &str, text: &str) {
        self.slack.insert(name.to_string(), text.to_string());
    }

    pub fn finish(self, config: ExperimentConfig, elapsed_seconds: f64) -> Report {
        let verdicts: BTreeMap<String, bool> = self
            .gates
            .iter()
            .map(|(name, &(gate, tol))| (name.clone(), gate.passes(self.metrics[name], tol)))
            .collect();
        let pass = verdicts.values().all(|&v| v);
        Report {
            experiment: config.name.clone(),
            seed: config.seed,
            config,
            metrics: self.metrics,
            targets: self.targets,
            verdicts,
            pass,
            elapsed_seconds,
            slack: self.slack,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gates_are_monotone_in_the_tolerance() {
        for &m in &[-1.0, 0.0, 0.3, 2.0] {
            for w in [0.1, 0.5, 1.0, 3.0].windows(2) {
                if Gate::AtMost.passes(m, w[0]) {
                    assert!(Gate::AtMost.passes(m, w[1]));
                }
                if Gate::Above.passes(m, w[1]) {
                    assert!(Gate::Above.passes(m, w[0]));
                }
            }
        }
    }
}
