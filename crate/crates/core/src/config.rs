//! Run configuration read from TOML. Every key is optional; unknown keys are
//! rejected. A fully commented file with all defaults lives in
//! `configs/default.toml`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio::SpectrogramConfig;
use crate::data::{Scenario, SynthConfig};
use crate::error::{Result, ScfError};
use crate::field::FieldConfig;
use crate::trainer::{mix_seed, ClassifierRecipe, HeadConfig, ModelKind, TrainConfig};

const SYNTH_STREAM: u64 = 0;
const TRAIN_STREAM: u64 = 1;
const INIT_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub folds: usize,
    pub scenario: Scenario,
    pub model: ModelKind,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            scenario: Scenario::Independent,
            model: ModelKind::Scf,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Root of all randomness in a run.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub field: FieldConfig,
    pub head: HeadConfig,
    pub train: TrainConfig,
    pub synth: SynthConfig,
    pub spectrogram: SpectrogramConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            field: FieldConfig::default(),
            head: HeadConfig::default(),
            train: TrainConfig::default(),
            synth: SynthConfig::default(),
            spectrogram: SpectrogramConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates; `origin` names the source in error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| ScfError::config(describe(text, origin, &e)))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ScfError::io(path, e))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run config always serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.field.validate()?;
        self.train.validate()?;
        self.synth.validate().map_err(|e| ScfError::config(format!("[synth] {e}")))?;
        self.spectrogram.validate()?;
        if !(0.0..=1.0).contains(&self.head.dropout) {
            return Err(ScfError::config(format!("head.dropout must be in [0, 1], got {}", self.head.dropout)));
        }
        if self.eval.folds < 2 {
            return Err(ScfError::config(format!("eval.folds must be at least 2, got {}", self.eval.folds)));
        }
        Ok(())
    }

    /// Synthetic-data settings with their seed drawn from the run seed.
    pub fn synth_config(&self) -> SynthConfig {
        SynthConfig {
            seed: mix_seed(self.seed, SYNTH_STREAM),
            ..self.synth.clone()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: mix_seed(self.seed, TRAIN_STREAM),
            ..self.train.clone()
        }
    }

    /// Seed for the initial weights of a single trained classifier.
    pub fn init_seed(&self) -> u64 {
        mix_seed(self.seed, INIT_STREAM)
    }

    pub fn recipe(&self, kind: ModelKind) -> ClassifierRecipe {
        ClassifierRecipe {
            kind,
            field: self.field.clone(),
            head: self.head.clone(),
        }
    }
}

/// `origin:line: key 'k': message`, with the line and key taken from the error span.
fn describe(text: &str, origin: &str, err: &toml::de::Error) -> String {
    let message = err.message().trim();
    let Some(span) = err.span() else {
        return format!("{origin}: {message}");
    };
    let line_no = text[..span.start.min(text.len())].matches('\n').count() + 1;
    let line = text.lines().nth(line_no - 1).unwrap_or("").trim();
    let key = line
        .split_once('=')
        .map(|(k, _)| k.trim())
        .or_else(|| line.starts_with('[').then(|| line.trim_matches(['[', ']'])))
        .filter(|k| !k.is_empty());
    match key {
        Some(key) => format!("{origin}:{line_no}: key '{key}': {message}"),
        None => format!("{origin}:{line_no}: {message}"),
    }
}
