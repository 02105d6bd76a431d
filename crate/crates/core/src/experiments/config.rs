//! Experiment configuration, read from TOML.
//!
//! ```toml
//! name = "fig4"
//! mode = "clustered_sweep_k"       # flat_sweep_n | clustered_sweep_k | single_point
//! n = 120                          # fixed n (clustered_sweep_k, single_point)
//! # n_range = [1, 50]              # inclusive range (flat_sweep_n)
//! # k = 4                          # cluster size (single_point with a policy pair)
//! policies = [["DC_RC", "DC_RC"], ["DC_noRC", "DC_noRC"]]   # pairs, or plain names for flat
//! output = "fig4.csv"
//!
//! [[cases]]
//! label = "equal"                  # optional
//! lambda_e = 1.0                   # or alpha = lambda_e / lambda_s, never both
//! lambda_s = 10.0
//! lambda_c = 10.0
//! lambda_g = 0.0
//!
//! [sim]                            # optional Monte Carlo columns
//! cycles = 100000
//! seed = 42
//! estimator = "cycle"              # or "time_average" with horizon = ...
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GossipPolicy, NetworkSpec, Rates};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    FlatSweepN,
    ClusteredSweepK,
    SinglePoint,
}

/// A flat policy, or a `(source stage, cluster stage)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolicyChoice {
    Flat(GossipPolicy),
    Clustered([GossipPolicy; 2]),
}

impl PolicyChoice {
    pub fn pair(source: GossipPolicy, cluster: GossipPolicy) -> Self {
        PolicyChoice::Clustered([source, cluster])
    }
}

impl fmt::Display for PolicyChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyChoice::Flat(p) => write!(f, "{p}"),
            PolicyChoice::Clustered([s, c]) => write!(f, "{s}+{c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCase {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_e: Option<f64>,
    /// `lambda_e / lambda_s`; an alternative to `lambda_e`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub lambda_s: f64,
    #[serde(default)]
    pub lambda_c: f64,
    #[serde(default)]
    pub lambda_g: f64,
}

impl RateCase {
    pub fn explicit(lambda_e: f64, lambda_s: f64, lambda_c: f64, lambda_g: f64) -> Self {
        RateCase {
            label: None,
            lambda_e: Some(lambda_e),
            alpha: None,
            lambda_s,
            lambda_c,
            lambda_g,
        }
    }

    pub fn with_alpha(alpha: f64, lambda_s: f64, lambda_g: f64) -> Self {
        RateCase {
            label: None,
            lambda_e: None,
            alpha: Some(alpha),
            lambda_s,
            lambda_c: 0.0,
            lambda_g,
        }
    }

    pub fn labeled(mut self, label: &str) -> Self {
        self.label = Some(label.to_owned());
        self
    }

    pub fn rates(&self) -> Rates {
        let lambda_e = match (self.lambda_e, self.alpha) {
            (Some(e), _) => e,
            (None, Some(a)) => a * self.lambda_s,
            (None, None) => f64::NAN,
        };
        Rates::new(lambda_e, self.lambda_s, self.lambda_c, self.lambda_g)
    }

    fn problems(&self, idx: usize, out: &mut Vec<String>) {
        match (self.lambda_e, self.alpha) {
            (Some(_), Some(_)) => out.push(format!(
                "cases[{idx}]: alpha and lambda_e are mutually exclusive"
            )),
            (None, None) => out.push(format!("cases[{idx}]: one of alpha or lambda_e is required")),
            (None, Some(a)) => {
                if !(a.is_finite() && a > 0.0) {
                    out.push(format!("cases[{idx}]: alpha must be > 0, got {a}"));
                }
                if self.lambda_s.is_nan() || self.lambda_s <= 0.0 {
                    out.push(format!("cases[{idx}]: alpha needs lambda_s > 0"));
                }
            }
            (Some(_), None) => {}
        }
        if let Some(label) = &self.label {
            if !is_plain_name(label) {
                out.push(format!(
                    "cases[{idx}]: label {label:?} may only use letters, digits, '.', '-' and '_'"
                ));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_cycles")]
    pub cycles: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_estimator")]
    pub estimator: SimEstimator,
    /// Trajectory length for the time-average estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
}

fn default_cycles() -> u64 {
    100_000
}

fn default_estimator() -> SimEstimator {
    SimEstimator::Cycle
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimEstimator {
    Cycle,
    TimeAverage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub mode: Mode,
    pub policies: Vec<PolicyChoice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_range: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub cases: Vec<RateCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
}

fn is_plain_name(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_'))
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_owned(),
            message: e.to_string(),
        })?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    /// Every problem with the config; empty when it can run.
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !is_plain_name(&self.name) {
            out.push(format!(
                "name {:?} may only use letters, digits, '.', '-' and '_'",
                self.name
            ));
        }
        if self.policies.is_empty() {
            out.push("policies must not be empty".into());
        }
        if self.cases.is_empty() {
            out.push("cases must not be empty".into());
        }
        let flat = self
            .policies
            .iter()
            .filter(|p| matches!(p, PolicyChoice::Flat(_)))
            .count();
        let pairs = self.policies.len() - flat;
        match self.mode {
            Mode::FlatSweepN => {
                match self.n_range {
                    None => out.push("flat_sweep_n needs n_range".into()),
                    Some([lo, hi]) if lo == 0 || lo > hi => {
                        out.push(format!("n_range [{lo}, {hi}] must satisfy 1 <= lo <= hi"))
                    }
                    _ => {}
                }
                if self.n.is_some() || self.k.is_some() {
                    out.push("flat_sweep_n takes n_range, not n or k".into());
                }
                if pairs > 0 {
                    out.push("flat_sweep_n takes plain policy names, not pairs".into());
                }
            }
            Mode::ClusteredSweepK => {
                match self.n {
                    None | Some(0) => out.push("clustered_sweep_k needs n >= 1".into()),
                    _ => {}
                }
                if self.n_range.is_some() || self.k.is_some() {
                    out.push("clustered_sweep_k sweeps every divisor k of n; drop n_range and k".into());
                }
                if flat > 0 {
                    out.push("clustered_sweep_k takes [source, cluster] policy pairs".into());
                }
            }
            Mode::SinglePoint => {
                if self.n.is_none() {
                    out.push("single_point needs n".into());
                }
                if self.n_range.is_some() {
                    out.push("single_point takes n, not n_range".into());
                }
                if pairs > 0 && self.k.is_none() {
                    out.push("single_point with policy pairs needs k".into());
                }
                if pairs == 0 && self.k.is_some() {
                    out.push("k only applies to policy pairs".into());
                }
            }
        }
        for p in &self.policies {
            if let PolicyChoice::Clustered([s, _]) = p {
                if s.is_fully_connected() {
                    out.push(format!(
                        "policy {p}: CHs form a DC network, source stage must be DC_noRC or DC_RC"
                    ));
                }
            }
        }
        for (i, case) in self.cases.iter().enumerate() {
            case.problems(i, &mut out);
            if case.lambda_e.is_some() || case.alpha.is_some() {
                let probe = NetworkSpec::flat(1, GossipPolicy::DcNoRc, case.rates());
                out.extend(probe.validate().iter().map(|v| format!("cases[{i}]: {v}")));
            }
        }
        if let Some(sim) = &self.sim {
            match sim.estimator {
                SimEstimator::Cycle if sim.cycles == 0 => out.push("sim.cycles must be >= 1".into()),
                SimEstimator::TimeAverage => match sim.horizon {
                    Some(h) if h.is_finite() && h > 0.0 => {}
                    _ => out.push("sim.horizon must be > 0 for the time_average estimator".into()),
                },
                _ => {}
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        let problems = self.validate();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(problems))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_toml_str(text, Path::new("test.toml"))
    }

    #[test]
    fn parses_clustered_config() {
        let c = parse(
            r#"
            name = "demo"
            mode = "clustered_sweep_k"
            n = 12
            policies = [["DC_RC", "FC_allRC"], ["DC_noRC", "DC_noRC"]]
            [[cases]]
            lambda_e = 1.0
            lambda_s = 2.0
            lambda_c = 3.0
            lambda_g = 4.0
            [sim]
            cycles = 10
            seed = 7
            "#,
        )
        .unwrap();
        assert_eq!(c.policies[0], PolicyChoice::pair(GossipPolicy::DcRc, GossipPolicy::FcAllRc));
        assert_eq!(c.cases[0].rates(), Rates::new(1.0, 2.0, 3.0, 4.0));
        assert_eq!(c.sim.as_ref().unwrap().seed, 7);
        assert_eq!(parse(&c.to_toml_string()).unwrap(), c);
    }

    #[test]
    fn alpha_sets_lambda_e() {
        let c = RateCase::with_alpha(0.1, 2.0, 1.0);
        assert!((c.rates().lambda_e - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = parse(
            r#"
            name = "x"
            mode = "single_point"
            n = 1
            policies = ["DC_noRC"]
            lamda_e = 1.0
            [[cases]]
            lambda_e = 1.0
            lambda_s = 1.0
            "#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("lamda_e"), "{err}");
    }

    #[test]
    fn lists_every_problem() {
        let err = parse(
            r#"
            name = "bad name"
            mode = "clustered_sweep_k"
            policies = [["FC_allRC", "DC_RC"]]
            [[cases]]
            alpha = 0.5
            lambda_e = 1.0
            lambda_s = 1.0
            "#,
        )
        .unwrap_err();
        let Error::InvalidConfig(problems) = err else {
            panic!("{err}")
        };
        let joined = problems.join("\n");
        assert!(joined.contains("name"));
        assert!(joined.contains("needs n"));
        assert!(joined.contains("CHs form a DC network"));
        assert!(joined.contains("mutually exclusive"));
    }
}
