//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::UpdateMode;
use crate::error::{Error, Result};
use crate::grouping::Strategy;
use crate::metrics::MinorityRule;
use crate::population::PopulationConfig;
use crate::rules::{CcTieBreak, MesCompletion, Rule, RuleOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub population: PopulationConfig,
    /// Number of deliberation groups.
    pub g: usize,
    /// Rounds for the iterative strategies; single-round strategies run once.
    pub rounds: usize,
    pub strategies: Vec<Strategy>,
    pub rules: Vec<Rule>,
    pub replications: usize,
    pub master_seed: u64,
    pub eligibility_threshold: f64,
    pub max_attempts: usize,
    pub mes_completion: MesCompletion,
    pub cc_tiebreak: CcTieBreak,
    pub minority_rule: MinorityRule,
    pub update_mode: UpdateMode,
    /// Fill the `ms` column with wall-clock times. Off by default so that
    /// record files are reproducible byte for byte.
    pub record_timing: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            population: PopulationConfig::default(),
            g: 10,
            rounds: 5,
            strategies: Strategy::ALL.to_vec(),
            rules: Rule::ALL.to_vec(),
            replications: 1000,
            master_seed: 0,
            eligibility_threshold: 0.9,
            max_attempts: 1000,
            mes_completion: MesCompletion::default(),
            cc_tiebreak: CcTieBreak::default(),
            minority_rule: MinorityRule::default(),
            update_mode: UpdateMode::default(),
            record_timing: false,
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn rule_options(&self) -> RuleOptions {
        RuleOptions {
            mes_completion: self.mes_completion,
            cc_tiebreak: self.cc_tiebreak,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        self.population.validate()?;
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if !(self.eligibility_threshold > 0.0 && self.eligibility_threshold <= 1.0) {
            return Err(Error::config(format!(
                "eligibility_threshold={} outside (0, 1]",
                self.eligibility_threshold
            )));
        }
        if self.max_attempts == 0 {
            return Err(Error::config("max_attempts must be at least 1"));
        }
        if self.g == 0 || self.g > self.population.n() {
            return Err(Error::config(format!("g={} outside 1..={}", self.g, self.population.n())));
        }
        if self.rules.is_empty() {
            return Err(Error::config("no rules selected"));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(Error::config(format!("strategy {s} listed twice")));
            }
        }
        for (i, r) in self.rules.iter().enumerate() {
            if self.rules[..i].contains(r) {
                return Err(Error::config(format!("rule {r} listed twice")));
            }
        }
        Ok(())
    }

    /// Apply a `key=value` override using TOML syntax for the value, e.g.
    /// `population.phi=0.5` or `strategies=["large"]`.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::config(format!("override {assignment:?} is not key=value")))?;
        let parsed: toml::Value = format!("v = {}", value.trim())
            .parse::<toml::Table>()
            .map(|mut t| t.remove("v").expect("key present"))
            .or_else(|_| Ok::<_, Error>(toml::Value::String(value.trim().to_string())))?;
        let mut doc = toml::Value::try_from(&*self).map_err(|e| Error::config(e.to_string()))?;
        let path: Vec<&str> = key.trim().split('.').collect();
        if !assign(&mut doc, &path, parsed) {
            return Err(Error::config(format!("unknown key {key:?}")));
        }
        let next: ExperimentConfig = doc.try_into().map_err(|e: toml::de::Error| Error::config(e.to_string()))?;
        next.validate()?;
        *self = next;
        Ok(())
    }
}

/// Set `path` inside nested tables. The last component may be new; unknown
/// names are then rejected when the document is deserialised.
fn assign(slot: &mut toml::Value, path: &[&str], value: toml::Value) -> bool {
    let Some(table) = slot.as_table_mut() else {
        return false;
    };
    match path {
        [] => false,
        [last] => {
            table.insert((*last).to_string(), value);
            true
        }
        [head, rest @ ..] => table.get_mut(*head).is_some_and(|next| assign(next, rest, value)),
    }
}
