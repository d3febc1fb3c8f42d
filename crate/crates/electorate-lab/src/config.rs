//! Experiment configuration: a single JSON document with dotted-path
//! overrides, one master seed, and validation that names the offending key.

use crate::choice::ChoiceModel;
use crate::electorate::{ElectorateSpec, RaceSpec, SimError};
use crate::loss::LossSpec;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashSet;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// A configuration problem; the message names the offending key or flag.
#[derive(Debug, Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

/// Which analyses run and their tuning knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Same-party (Case 1) abstention-by-group table.
    pub case1: bool,
    /// Cross-party (Case 2) polarization tables and correlations.
    pub case2: bool,
    /// Platform-competition benchmarks.
    pub equilibrium: bool,
    /// Functional-form classification of the Case 2 points.
    pub classify: bool,
    /// Predictability tie tolerance when picking moderate groups.
    pub eps_mod: f64,
    /// Piecewise split point; defaults to the mean polarization when unset.
    pub piecewise_threshold: Option<f64>,
    /// Platform grid resolution for equilibrium runs.
    pub platform_points: usize,
    /// Move budget for best-response dynamics.
    pub brd_max_iters: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            case1: true,
            case2: true,
            equilibrium: false,
            classify: false,
            eps_mod: 0.02,
            piecewise_threshold: None,
            platform_points: 201,
            brd_max_iters: 10_000,
        }
    }
}

/// The full experiment description accepted by every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed. All randomness flows from it through named substreams,
    /// so there is no wall-clock seeding anywhere.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub electorate: ElectorateSpec,
    #[serde(default)]
    pub races: Vec<RaceSpec>,
    pub loss: LossSpec,
    pub choice: ChoiceModel,
    #[serde(default)]
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.electorate
            .validate()
            .map_err(|e| ConfigError(sim_message(e)))?;
        self.loss
            .validate()
            .map_err(|e| ConfigError(format!("loss: {e}")))?;
        self.choice
            .validate()
            .map_err(|e| ConfigError(format!("choice: {e}")))?;
        let mut seen = HashSet::new();
        for race in &self.races {
            race.validate(self.electorate.dimension)
                .map_err(|e| ConfigError(sim_message(e)))?;
            if !seen.insert(race.race_id.as_str()) {
                return Err(ConfigError(format!(
                    "races: duplicate race_id {:?}",
                    race.race_id
                )));
            }
        }
        let a = &self.analysis;
        if !(a.eps_mod >= 0.0) || !a.eps_mod.is_finite() {
            return Err(ConfigError(format!(
                "analysis.eps_mod must be a nonnegative number, got {}",
                a.eps_mod
            )));
        }
        if a.platform_points < 2 {
            return Err(ConfigError(format!(
                "analysis.platform_points must be >= 2, got {}",
                a.platform_points
            )));
        }
        if a.brd_max_iters == 0 {
            return Err(ConfigError(
                "analysis.brd_max_iters must be >= 1".into(),
            ));
        }
        if let Some(t) = a.piecewise_threshold {
            if !t.is_finite() {
                return Err(ConfigError(format!(
                    "analysis.piecewise_threshold must be finite, got {t}"
                )));
            }
        }
        Ok(())
    }
}

fn sim_message(e: SimError) -> String {
    match e {
        SimError::Config(m) => m,
        other => other.to_string(),
    }
}

/// Parses `KEY=VALUE` and patches the JSON document at the dotted path KEY.
/// Values that parse as JSON are taken as such; anything else is a string.
/// Missing intermediate objects are created; array steps must be in-range
/// indices.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), ConfigError> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        ConfigError(format!("--set {assignment:?} is not of the form KEY=VALUE"))
    })?;
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(ConfigError(format!("--set key {key:?} has an empty segment")));
    }
    let leaf: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let mut cursor = root;
    for part in &parts[..parts.len() - 1] {
        cursor = match cursor {
            Value::Object(map) => map
                .entry(part.to_string())
                .or_insert_with(|| Value::Object(serde_json::Map::new())),
            Value::Array(items) => {
                let index: usize = part.parse().map_err(|_| {
                    ConfigError(format!("--set {key}: {part:?} is not an array index"))
                })?;
                items.get_mut(index).ok_or_else(|| {
                    ConfigError(format!("--set {key}: index {index} is out of range"))
                })?
            }
            _ => {
                return Err(ConfigError(format!(
                    "--set {key}: {part:?} is a scalar, not an object or array"
                )))
            }
        };
    }
    let last = parts[parts.len() - 1];
    match cursor {
        Value::Object(map) => {
            map.insert(last.to_string(), leaf);
        }
        Value::Array(items) => {
            let index: usize = last.parse().map_err(|_| {
                ConfigError(format!("--set {key}: {last:?} is not an array index"))
            })?;
            *items.get_mut(index).ok_or_else(|| {
                ConfigError(format!("--set {key}: index {index} is out of range"))
            })? = leaf;
        }
        _ => {
            return Err(ConfigError(format!(
                "--set {key}: {last:?} cannot be set on a scalar"
            )))
        }
    }
    Ok(())
}

/// Loads a config file, applies `--set` overrides in order, then the
/// `--seed` and `--out` flags, deserializes with key-path error reporting,
/// propagates the master seed into the electorate spec, and validates.
pub fn load_config(
    path: &Path,
    overrides: &[String],
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("{} is not valid JSON: {e}", path.display())))?;
    for assignment in overrides {
        apply_override(&mut value, assignment)?;
    }
    if let Some(seed) = seed {
        apply_override(&mut value, &format!("seed={seed}"))?;
    }
    if let Some(out) = out {
        let raw = serde_json::to_string(&out.to_string_lossy())
            .expect("strings always serialize");
        apply_override(&mut value, &format!("output_dir={raw}"))?;
    }
    let mut config: ExperimentConfig = serde_path_to_error::deserialize(value)
        .map_err(|e| ConfigError(format!("{}: {}", e.path(), e.inner())))?;
    config.electorate.seed = config.seed;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::{Abstention, ChoiceMode, NoiseCdf};
    use crate::electorate::IdealDistribution;
    use crate::loss::LossFamily;
    use serde_json::json;

    fn base_json() -> Value {
        json!({
            "seed": 7,
            "output_dir": "/tmp/run",
            "electorate": {
                "n_voters": 100,
                "dimension": 1,
                "ideal_distribution": {"kind": "uniform", "lo": 0.0, "hi": 10.0},
                "n_measures": 4,
                "dem_position": [2.0],
                "rep_position": [8.0]
            },
            "races": [
                {
                    "race_id": "house",
                    "race_type": "us_house",
                    "cand1_party": "D",
                    "cand2_party": "R",
                    "cand1_pos": [3.0],
                    "cand2_pos": [7.0]
                }
            ],
            "loss": {"family": "reverse_s", "alpha": 1.0, "omega": 2.0},
            "choice": {
                "mode": "probabilistic",
                "cost": 0.05,
                "noise": {"kind": "normal", "scale": 0.1},
                "abstention": {"kind": "stakes"}
            }
        })
    }

    fn load_value(value: Value) -> Result<ExperimentConfig, ConfigError> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
        load_config(&path, &[], None, None)
    }

    #[test]
    fn full_document_round_trips() {
        let config = load_value(base_json()).unwrap();
        assert_eq!(config.seed, 7);
        assert_eq!(config.electorate.seed, 7, "master seed propagates");
        assert_eq!(config.electorate.n_voters, 100);
        assert_eq!(config.loss.family, LossFamily::ReverseS);
        assert_eq!(config.choice.mode, ChoiceMode::Probabilistic);
        assert!(matches!(config.choice.abstention, Abstention::Stakes));
        assert!(matches!(
            config.choice.noise,
            Some(NoiseCdf::Normal { .. })
        ));
        assert!(matches!(
            config.electorate.ideal_distribution,
            IdealDistribution::Uniform { .. }
        ));
        assert!(config.analysis.case1, "analysis defaults apply");
        assert_eq!(config.analysis.eps_mod, 0.02);
    }

    #[test]
    fn overrides_patch_nested_and_indexed_paths() {
        let mut value = base_json();
        apply_override(&mut value, "loss.family=concave").unwrap();
        apply_override(&mut value, "loss.beta=2.0").unwrap();
        apply_override(&mut value, "loss.omega=null").unwrap();
        apply_override(&mut value, "races.0.cand2_pos.0=9.5").unwrap();
        apply_override(&mut value, "analysis.case1=false").unwrap();
        let config = load_value(value).unwrap();
        assert_eq!(config.loss.family, LossFamily::Concave);
        assert_eq!(config.loss.beta, Some(2.0));
        assert_eq!(config.races[0].cand2_pos, vec![9.5]);
        assert!(!config.analysis.case1);
    }

    #[test]
    fn bad_overrides_name_the_key() {
        let mut value = base_json();
        let err = apply_override(&mut value, "races.9.race_id=x").unwrap_err();
        assert!(err.to_string().contains("races.9"), "got: {err}");
        let err = apply_override(&mut value, "seed.deep=1").unwrap_err();
        assert!(err.to_string().contains("seed.deep"), "got: {err}");
        let err = apply_override(&mut value, "no_equals_sign").unwrap_err();
        assert!(err.to_string().contains("KEY=VALUE"), "got: {err}");
    }

    #[test]
    fn unknown_and_invalid_fields_are_named() {
        let mut value = base_json();
        apply_override(&mut value, "loss.alpa=1.0").unwrap();
        let err = load_value(value).unwrap_err();
        assert!(err.to_string().contains("alpa"), "got: {err}");

        let mut value = base_json();
        apply_override(&mut value, "electorate.n_voters=0").unwrap();
        let err = load_value(value).unwrap_err();
        assert!(err.to_string().contains("electorate.n_voters"), "got: {err}");

        let mut value = base_json();
        apply_override(&mut value, "choice.abstention.kind=expressive_constant").unwrap();
        apply_override(&mut value, "choice.abstention.payoff=-0.5").unwrap();
        let err = load_value(value).unwrap_err();
        assert!(err.to_string().contains("choice"), "got: {err}");
    }

    #[test]
    fn seed_and_out_flags_override_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        std::fs::write(&path, serde_json::to_string(&base_json()).unwrap()).unwrap();
        let config = load_config(
            &path,
            &["electorate.n_voters=5".into()],
            Some(99),
            Some(Path::new("/tmp/elsewhere")),
        )
        .unwrap();
        assert_eq!(config.seed, 99);
        assert_eq!(config.electorate.seed, 99);
        assert_eq!(config.electorate.n_voters, 5);
        assert_eq!(config.output_dir, PathBuf::from("/tmp/elsewhere"));
    }
}
