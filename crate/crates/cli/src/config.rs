//! `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown or repeated
//! keys are errors. [`ExperimentConfig::echo`] writes every effective value
//! back out in the same syntax, so an echoed file reproduces the run.

use std::fmt::Write;
use std::str::FromStr;

use bridging_core::sim::Archetype;
use bridging_core::{Group, SimulationConfig, Thresholds, TrainConfig};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("config line {line}: {msg}")]
pub struct ConfigError {
    pub line: usize,
    pub msg: String,
}

/// Attack settings; the target defaults to the first partisan-B note.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackSettings {
    pub target: Option<String>,
    pub raters: usize,
    pub rating: f64,
    pub alignment: Group,
    pub camouflage: usize,
}

impl Default for AttackSettings {
    fn default() -> Self {
        AttackSettings {
            target: None,
            raters: 100,
            rating: 1.0,
            alignment: Group::B,
            camouflage: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub train: TrainConfig,
    pub thresholds: Thresholds,
    pub sim: SimulationConfig,
    pub attack: AttackSettings,
}

const KEYS: &[&str] = &[
    "seed",
    "init_scale",
    "learning_rate",
    "max_epochs",
    "tolerance",
    "lambda_intercept",
    "lambda_factor",
    "display_threshold",
    "min_votes",
    "factor_penalty",
    "users_per_group",
    "notes_bridging",
    "notes_partisan_a",
    "notes_partisan_b",
    "votes_per_note",
    "p_bridging_a",
    "p_bridging_b",
    "p_partisan_a_a",
    "p_partisan_a_b",
    "p_partisan_b_a",
    "p_partisan_b_b",
    "attack_target",
    "attack_raters",
    "attack_rating",
    "attack_alignment",
    "attack_camouflage",
];

fn approval_cell(key: &str) -> Option<(Archetype, Group)> {
    Some(match key {
        "p_bridging_a" => (Archetype::Bridging, Group::A),
        "p_bridging_b" => (Archetype::Bridging, Group::B),
        "p_partisan_a_a" => (Archetype::PartisanA, Group::A),
        "p_partisan_a_b" => (Archetype::PartisanA, Group::B),
        "p_partisan_b_a" => (Archetype::PartisanB, Group::A),
        "p_partisan_b_b" => (Archetype::PartisanB, Group::B),
        _ => return None,
    })
}

fn parse_value<T: FromStr>(value: &str, line: usize, key: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError {
        line,
        msg: format!("invalid value {value:?} for {key}"),
    })
}

fn parse_real(value: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_value(value, line, key)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(ConfigError {
            line,
            msg: format!("{key} must be finite, got {value:?}"),
        })
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        cfg.merge(text)?;
        Ok(cfg)
    }

    /// Applies the settings in `text` on top of `self`.
    pub fn merge(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError {
                    line,
                    msg: format!("expected `key = value`, found {trimmed:?}"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(ConfigError {
                    line,
                    msg: format!("unknown key {key:?}"),
                });
            }
            if !seen.insert(key) {
                return Err(ConfigError {
                    line,
                    msg: format!("{key} given twice"),
                });
            }
            self.set(key, value, line)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        if let Some((arch, group)) = approval_cell(key) {
            let p = parse_real(value, line, key)?;
            self.sim.approval.set(arch, group, p);
            return Ok(());
        }
        match key {
            "seed" => self.seed = Some(parse_value(value, line, key)?),
            "init_scale" => self.train.init_scale = parse_real(value, line, key)?,
            "learning_rate" => self.train.learning_rate = parse_real(value, line, key)?,
            "max_epochs" => self.train.max_epochs = parse_value(value, line, key)?,
            "tolerance" => self.train.tolerance = parse_real(value, line, key)?,
            "lambda_intercept" => self.train.reg.lambda_intercept = parse_real(value, line, key)?,
            "lambda_factor" => self.train.reg.lambda_factor = parse_real(value, line, key)?,
            "display_threshold" => self.thresholds.display_threshold = parse_real(value, line, key)?,
            "min_votes" => self.thresholds.min_votes = parse_value(value, line, key)?,
            "factor_penalty" => self.thresholds.factor_penalty = parse_value(value, line, key)?,
            "users_per_group" => self.sim.users_per_group = parse_value(value, line, key)?,
            "notes_bridging" => self.sim.notes_per_archetype[0] = parse_value(value, line, key)?,
            "notes_partisan_a" => self.sim.notes_per_archetype[1] = parse_value(value, line, key)?,
            "notes_partisan_b" => self.sim.notes_per_archetype[2] = parse_value(value, line, key)?,
            "votes_per_note" => self.sim.votes_per_note = parse_value(value, line, key)?,
            "attack_target" => {
                bridging_core::dataset::validate_id(value).map_err(|e| ConfigError {
                    line,
                    msg: e.to_string(),
                })?;
                self.attack.target = Some(value.to_owned());
            }
            "attack_raters" => self.attack.raters = parse_value(value, line, key)?,
            "attack_rating" => {
                self.attack.rating = match value {
                    "1" | "+1" => 1.0,
                    "-1" => -1.0,
                    _ => {
                        return Err(ConfigError {
                            line,
                            msg: format!("attack_rating must be 1 or -1, got {value:?}"),
                        })
                    }
                }
            }
            "attack_alignment" => self.attack.alignment = parse_value(value, line, key)?,
            "attack_camouflage" => self.attack.camouflage = parse_value(value, line, key)?,
            _ => unreachable!("key list and setter out of sync: {key}"),
        }
        Ok(())
    }

    /// Every effective setting, one `key = value` per line.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let t = &self.train;
        let s = &self.sim;
        let th = &self.thresholds;
        let a = &self.attack;
        match self.seed {
            Some(seed) => {
                let _ = writeln!(out, "seed = {seed}");
            }
            None => out.push_str("# seed unset\n"),
        }
        let _ = writeln!(out, "init_scale = {:?}", t.init_scale);
        let _ = writeln!(out, "learning_rate = {:?}", t.learning_rate);
        let _ = writeln!(out, "max_epochs = {}", t.max_epochs);
        let _ = writeln!(out, "tolerance = {:?}", t.tolerance);
        let _ = writeln!(out, "lambda_intercept = {:?}", t.reg.lambda_intercept);
        let _ = writeln!(out, "lambda_factor = {:?}", t.reg.lambda_factor);
        let _ = writeln!(out, "display_threshold = {:?}", th.display_threshold);
        let _ = writeln!(out, "min_votes = {}", th.min_votes);
        let _ = writeln!(out, "factor_penalty = {}", th.factor_penalty);
        let _ = writeln!(out, "users_per_group = {}", s.users_per_group);
        let _ = writeln!(out, "notes_bridging = {}", s.notes_per_archetype[0]);
        let _ = writeln!(out, "notes_partisan_a = {}", s.notes_per_archetype[1]);
        let _ = writeln!(out, "notes_partisan_b = {}", s.notes_per_archetype[2]);
        let _ = writeln!(out, "votes_per_note = {}", s.votes_per_note);
        for key in KEYS {
            if let Some((arch, group)) = approval_cell(key) {
                let _ = writeln!(out, "{key} = {:?}", s.approval.get(arch, group));
            }
        }
        match &a.target {
            Some(target) => {
                let _ = writeln!(out, "attack_target = {target}");
            }
            None => out.push_str("# attack_target unset: first PARTISAN_B note\n"),
        }
        let _ = writeln!(out, "attack_raters = {}", a.raters);
        let _ = writeln!(out, "attack_rating = {}", a.rating);
        let _ = writeln!(out, "attack_alignment = {}", a.alignment);
        let _ = writeln!(out, "attack_camouflage = {}", a.camouflage);
        out
    }
}
