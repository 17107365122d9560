use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::classifier::{mix_seed, Classifier};
use super::mlp::{HeadConfig, MlpHead};
use super::train::{train, TrainConfig};
use crate::data::{split_groups, EmbeddingDataset, Scenario};
use crate::error::{Result, ScfError};
use crate::field::{FieldConfig, ScfModel, ScfParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub scenario: Scenario,
    pub model: String,
    pub accuracies: Vec<f64>,
    /// Group ids present in each test fold.
    pub held_out: Vec<Vec<String>>,
    pub mean: f64,
    /// Population standard deviation over folds.
    pub std: f64,
}

impl FoldReport {
    pub fn new(scenario: Scenario, model: impl Into<String>, accuracies: Vec<f64>, held_out: Vec<Vec<String>>) -> Self {
        let (mean, std) = mean_std(&accuracies);
        Self {
            scenario,
            model: model.into(),
            accuracies,
            held_out,
            mean,
            std,
        }
    }

    /// `"mean (std) [%]"`, both in percent with two decimals.
    pub fn summary(&self) -> String {
        format!("{:.2} ({:.2}) [%]", 100.0 * self.mean, 100.0 * self.std)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "model: {}", self.model).unwrap();
        writeln!(out, "scenario: {}", self.scenario).unwrap();
        writeln!(out, "fold  accuracy  held_out_groups").unwrap();
        for (i, (acc, groups)) in self.accuracies.iter().zip(&self.held_out).enumerate() {
            writeln!(out, "{i:>4}  {:>8.4}  {}", acc, groups.join(",")).unwrap();
        }
        writeln!(out, "mean accuracy (std): {}", self.summary()).unwrap();
        out
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// What sits between the embeddings and the head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Scf,
    Concat,
}

impl std::str::FromStr for ModelKind {
    type Err = ScfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scf" => Ok(ModelKind::Scf),
            "concat" => Ok(ModelKind::Concat),
            other => Err(ScfError::config(format!("unknown model '{other}' (expected scf or concat)"))),
        }
    }
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Scf => "scf",
            ModelKind::Concat => "concat",
        }
    }
}

/// Recipe for a freshly initialized classifier.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierRecipe {
    pub kind: ModelKind,
    pub field: FieldConfig,
    pub head: HeadConfig,
}

impl ClassifierRecipe {
    pub fn build(&self, audio_dim: usize, visual_dim: usize, seed: u64) -> Result<Classifier> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self.kind {
            ModelKind::Scf => {
                let params = ScfParams::from_config(&self.field, &[("audio", audio_dim), ("visual", visual_dim)], &mut rng)?;
                let model = ScfModel::new(params)?;
                let head = MlpHead::new(model.embedding_len(), &self.head, &mut rng)?;
                Classifier::fusion(model, head)
            }
            ModelKind::Concat => {
                let head = MlpHead::new(audio_dim + visual_dim, &self.head, &mut rng)?;
                Classifier::concat(vec![audio_dim, visual_dim], head)
            }
        }
    }
}

/// `k`-fold cross-validation; fold `f` trains a fresh classifier seeded from `(config.seed, f)`.
pub fn cross_validate(
    dataset: &EmbeddingDataset,
    scenario: Scenario,
    k: usize,
    recipe: &ClassifierRecipe,
    config: &TrainConfig,
) -> Result<FoldReport> {
    cross_validate_with(dataset, scenario, k, recipe, config, |_, _| {})
}

/// As [`cross_validate`], calling `on_fold(fold, accuracy)` after each fold.
pub fn cross_validate_with(
    dataset: &EmbeddingDataset,
    scenario: Scenario,
    k: usize,
    recipe: &ClassifierRecipe,
    config: &TrainConfig,
    mut on_fold: impl FnMut(usize, f64),
) -> Result<FoldReport> {
    dataset.validate()?;
    let split = split_groups(dataset, scenario, k, config.seed)?;
    let mut accuracies = Vec::with_capacity(k);
    let mut held_out = Vec::with_capacity(k);
    for fold in 0..k {
        let test = dataset.subset(&split.test_indices(dataset, fold));
        let train_set = dataset.subset(&split.train_indices(dataset, fold));
        let fold_seed = mix_seed(config.seed, fold as u64);
        let classifier = recipe.build(dataset.audio_dim, dataset.visual_dim, fold_seed)?;
        let fold_config = TrainConfig {
            seed: fold_seed,
            ..config.clone()
        };
        let outcome = train(classifier, &train_set.samples(), &fold_config)?;
        let (_, acc) = outcome.classifier.evaluate(&test.samples(), config.threshold)?;
        on_fold(fold, acc);
        accuracies.push(acc);
        held_out.push(test.groups());
    }
    Ok(FoldReport::new(scenario, recipe.kind.name(), accuracies, held_out))
}
