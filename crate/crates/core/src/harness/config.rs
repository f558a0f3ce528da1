use serde::{Deserialize, Serialize};

use crate::algorithms::Schedule;
use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Bias,
    RandomMdps,
    Roulette,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Ql,
    Tsql,
    #[serde(alias = "s-tsql")]
    Stsql,
    #[serde(alias = "d-q", alias = "dq")]
    DoubleQ,
    #[serde(alias = "d-q-avg")]
    DqAvg,
    Sorql,
}

impl AlgorithmKind {
    pub fn display_name(self) -> &'static str {
        match self {
            AlgorithmKind::Ql => "QL",
            AlgorithmKind::Tsql => "TSQL",
            AlgorithmKind::Stsql => "S-TSQL",
            AlgorithmKind::DoubleQ => "D-Q",
            AlgorithmKind::DqAvg => "D-Q-Avg",
            AlgorithmKind::Sorql => "SORQL",
        }
    }

    pub fn is_two_step(self) -> bool {
        matches!(self, AlgorithmKind::Tsql | AlgorithmKind::Stsql)
    }

    pub fn is_double(self) -> bool {
        matches!(self, AlgorithmKind::DoubleQ | AlgorithmKind::DqAvg)
    }
}

/// Per-algorithm overrides of the experiment-wide settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmParams {
    /// Name used in CSV output; defaults to the algorithm's display name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Schedule>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    /// SORQL relaxation weight `w`; defaults to the model-derived optimum.
    #[serde(rename = "w", default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub name: AlgorithmKind,
    #[serde(default)]
    pub params: AlgorithmParams,
}

impl AlgorithmSpec {
    pub fn new(name: AlgorithmKind) -> Self {
        AlgorithmSpec { name, params: AlgorithmParams::default() }
    }

    pub fn label(&self) -> String {
        self.params.label.clone().unwrap_or_else(|| self.name.display_name().to_string())
    }
}

/// Which counter indexes `αₙ`: the global update count or the number of
/// previous updates of the same `(i, a)` pair. `θₙ` always uses the global
/// count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepIndexMode {
    #[default]
    Global,
    PerPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BehaviorKind {
    EpsilonGreedy,
    Uniform,
}

fn default_epsilon() -> f64 {
    0.1
}

fn default_temperature() -> f64 {
    10_000.0
}

fn default_runs() -> usize {
    1
}

fn default_num_mdps() -> usize {
    100
}

fn default_true() -> bool {
    true
}

/// Declarative description of one experiment. Field names are the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub algorithms: Vec<AlgorithmSpec>,
    pub alpha: Schedule,
    pub theta: Schedule,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Defaults: bias 0.95, random-mdps 0.6, roulette 0.99.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount: Option<f64>,
    /// S-TSQL log-sum-exp temperature.
    #[serde(rename = "N", default = "default_temperature")]
    pub temperature: f64,
    /// Episodes (bias, roulette) or updates per MDP (random-mdps).
    #[serde(alias = "episodes", alias = "iterations")]
    pub episodes_or_iterations: u64,
    #[serde(default = "default_runs")]
    pub independent_runs: usize,
    #[serde(default = "default_num_mdps")]
    pub num_mdps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub step_index_mode: StepIndexMode,
    /// Defaults to uniform for roulette, ε-greedy otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub behavior: Option<BehaviorKind>,
    /// Maximum updates per episode; roulette defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub episode_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_states: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_actions: Option<usize>,
    #[serde(default)]
    pub self_loop_floor: f64,
    #[serde(default = "default_true")]
    pub reward_per_transition: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamble_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamble_std: Option<f64>,
    /// Clip Gaussian reward noise at this many standard deviations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_clip_sigmas: Option<f64>,
    /// Record per-step series every this many steps (random-mdps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_every: Option<u64>,
}

fn cfg_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(LabError::Config(msg.into()))
}

impl ExperimentConfig {
    /// Minimal config with the experiment's defaults.
    pub fn new(experiment: Experiment, algorithms: Vec<AlgorithmSpec>, alpha: Schedule, theta: Schedule) -> Self {
        ExperimentConfig {
            experiment,
            algorithms,
            alpha,
            theta,
            epsilon: default_epsilon(),
            discount: None,
            temperature: default_temperature(),
            episodes_or_iterations: 0,
            independent_runs: default_runs(),
            num_mdps: default_num_mdps(),
            seed: 0,
            step_index_mode: StepIndexMode::Global,
            behavior: None,
            episode_cap: None,
            num_states: None,
            num_actions: None,
            self_loop_floor: 0.0,
            reward_per_transition: true,
            gamble_mean: None,
            gamble_std: None,
            noise_clip_sigmas: None,
            record_every: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| LabError::Config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn resolved_discount(&self) -> f64 {
        self.discount.unwrap_or(match self.experiment {
            Experiment::Bias => 0.95,
            Experiment::RandomMdps => 0.6,
            Experiment::Roulette => crate::environments::roulette::DISCOUNT,
        })
    }

    pub fn resolved_behavior(&self) -> BehaviorKind {
        self.behavior.unwrap_or(match self.experiment {
            Experiment::Roulette => BehaviorKind::Uniform,
            _ => BehaviorKind::EpsilonGreedy,
        })
    }

    pub fn resolved_episode_cap(&self) -> Option<u64> {
        match (self.episode_cap, self.experiment) {
            (Some(cap), _) => Some(cap),
            (None, Experiment::Roulette) => Some(1),
            (None, _) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return cfg_err("at least one algorithm is required");
        }
        let mut labels: Vec<String> = self.algorithms.iter().map(AlgorithmSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return cfg_err("algorithm labels must be unique; set params.label to disambiguate");
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return cfg_err(format!("epsilon must lie in [0, 1], got {}", self.epsilon));
        }
        let beta = self.resolved_discount();
        if !(0.0..1.0).contains(&beta) {
            return cfg_err(format!("discount must lie in [0, 1), got {beta}"));
        }
        if self.independent_runs == 0 {
            return cfg_err("independent_runs must be positive");
        }
        if self.experiment == Experiment::RandomMdps {
            if self.num_mdps == 0 {
                return cfg_err("num_mdps must be positive");
            }
            if self.num_states == Some(0) || self.num_actions == Some(0) {
                return cfg_err("random MDPs need positive num_states and num_actions");
            }
            if !(0.0..1.0).contains(&self.self_loop_floor) {
                return cfg_err(format!("self_loop_floor must lie in [0, 1), got {}", self.self_loop_floor));
            }
        }
        if self.episode_cap == Some(0) {
            return cfg_err("episode_cap must be positive");
        }
        if self.record_every == Some(0) {
            return cfg_err("record_every must be positive");
        }
        if let Some(std) = self.gamble_std {
            if !(std >= 0.0) {
                return cfg_err(format!("gamble_std must be non-negative, got {std}"));
            }
        }
        if let Some(clip) = self.noise_clip_sigmas {
            if !(clip > 0.0) {
                return cfg_err(format!("noise_clip_sigmas must be positive, got {clip}"));
            }
        }
        for spec in &self.algorithms {
            let label = spec.label();
            let alpha = spec.params.alpha.unwrap_or(self.alpha);
            alpha.validate_step_size().map_err(|e| LabError::Config(format!("{label}: {e}")))?;
            if spec.name.is_two_step() {
                let theta = spec.params.theta.unwrap_or(self.theta);
                if theta.sup_abs() > 1.0 {
                    return cfg_err(format!("{label}: |theta_0| = {} exceeds 1", theta.sup_abs()));
                }
            }
            let n = spec.params.temperature.unwrap_or(self.temperature);
            if spec.name == AlgorithmKind::Stsql && !(n > 0.0 && n.is_finite()) {
                return cfg_err(format!("{label}: temperature N must be positive, got {n}"));
            }
            if let Some(w) = spec.params.relaxation {
                if !(w > 0.0 && w.is_finite()) {
                    return cfg_err(format!("{label}: relaxation w must be positive, got {w}"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIAS_CONFIG: &str = r#"{
        "experiment": "bias",
        "algorithms": [{"name": "ql"}, {"name": "tsql"}, {"name": "s-tsql"}, {"name": "d-q-avg"}],
        "alpha": {"family": "power-law", "a": 1, "b": 1, "p": 1},
        "theta": {"family": "rational", "a": 1, "b": 10, "q": 2},
        "epsilon": 0.1,
        "N": 10000,
        "episodes": 200,
        "independent_runs": 200,
        "seed": 7
    }"#;

    #[test]
    fn parses_bias_config() {
        let cfg = ExperimentConfig::from_json(BIAS_CONFIG).unwrap();
        assert_eq!(cfg.experiment, Experiment::Bias);
        assert_eq!(cfg.algorithms[2].name, AlgorithmKind::Stsql);
        assert_eq!(cfg.algorithms[3].label(), "D-Q-Avg");
        assert_eq!(cfg.episodes_or_iterations, 200);
        assert_eq!(cfg.resolved_discount(), 0.95);
        assert_eq!(cfg.step_index_mode, StepIndexMode::Global);
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_duplicate_labels() {
        let text = BIAS_CONFIG.replace(r#"{"name": "s-tsql"}"#, r#"{"name": "tsql"}"#);
        assert!(matches!(ExperimentConfig::from_json(&text), Err(LabError::Config(_))));
    }

    #[test]
    fn rejects_bad_step_size() {
        let text = BIAS_CONFIG.replace(r#""a": 1, "b": 1, "p": 1"#, r#""a": 5, "b": 1, "p": 1"#);
        assert!(matches!(ExperimentConfig::from_json(&text), Err(LabError::Config(_))));
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = BIAS_CONFIG.replace(r#""seed": 7"#, r#""seed": 7, "sead": 8"#);
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn roulette_defaults() {
        let text = BIAS_CONFIG.replace(r#""experiment": "bias""#, r#""experiment": "roulette""#);
        let cfg = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(cfg.resolved_behavior(), BehaviorKind::Uniform);
        assert_eq!(cfg.resolved_episode_cap(), Some(1));
        assert_eq!(cfg.resolved_discount(), 0.99);
    }
}
