use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::EmbeddingDataset;
use crate::error::{Result, ScfError};

/// Whether test speakers/videos also appear in training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Instance-level folds; a group may sit on both sides, an instance never.
    Dependent,
    /// Group-level folds; held-out groups are never seen in training.
    Independent,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Dependent => "dependent",
            Scenario::Independent => "independent",
        })
    }
}

impl FromStr for Scenario {
    type Err = ScfError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dependent" => Ok(Scenario::Dependent),
            "independent" => Ok(Scenario::Independent),
            other => Err(ScfError::config(format!(
                "unknown scenario '{other}' (expected dependent or independent)"
            ))),
        }
    }
}

/// Test-fold membership: clip ids for the dependent scenario, group ids for the independent one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldAssignment {
    pub scenario: Scenario,
    pub folds: Vec<Vec<String>>,
}

impl FoldAssignment {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    fn held_out(&self, dataset: &EmbeddingDataset, fold: usize) -> Vec<bool> {
        let ids: HashSet<&str> = self.folds[fold].iter().map(String::as_str).collect();
        dataset
            .instances
            .iter()
            .map(|inst| match self.scenario {
                Scenario::Dependent => ids.contains(inst.clip_id.as_str()),
                Scenario::Independent => ids.contains(inst.group_id.as_str()),
            })
            .collect()
    }

    /// Indices of instances in test fold `fold`.
    pub fn test_indices(&self, dataset: &EmbeddingDataset, fold: usize) -> Vec<usize> {
        let held = self.held_out(dataset, fold);
        (0..dataset.len()).filter(|&i| held[i]).collect()
    }

    /// Indices of every instance outside test fold `fold`.
    pub fn train_indices(&self, dataset: &EmbeddingDataset, fold: usize) -> Vec<usize> {
        let held = self.held_out(dataset, fold);
        (0..dataset.len()).filter(|&i| !held[i]).collect()
    }
}

/// Deterministic `k`-fold assignment.
///
/// Dependent: instances are shuffled within each label and dealt round-robin,
/// so folds differ in size by at most one and keep the label balance.
/// Independent: the sorted group ids are shuffled and dealt round-robin.
pub fn split_groups(dataset: &EmbeddingDataset, scenario: Scenario, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(ScfError::input(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    match scenario {
        Scenario::Dependent => {
            if dataset.len() < k {
                return Err(ScfError::input(format!(
                    "{} instances cannot fill {k} folds",
                    dataset.len()
                )));
            }
            let mut dealt = 0;
            for label in [0u8, 1] {
                let mut ids: Vec<&str> = dataset
                    .instances
                    .iter()
                    .filter(|i| i.label == label)
                    .map(|i| i.clip_id.as_str())
                    .collect();
                ids.shuffle(&mut rng);
                for id in ids {
                    folds[dealt % k].push(id.to_string());
                    dealt += 1;
                }
            }
        }
        Scenario::Independent => {
            let mut groups = dataset.groups();
            if groups.len() < k {
                return Err(ScfError::input(format!(
                    "independent split needs at least {k} groups, dataset has {}",
                    groups.len()
                )));
            }
            groups.shuffle(&mut rng);
            for (i, g) in groups.into_iter().enumerate() {
                folds[i % k].push(g);
            }
        }
    }
    Ok(FoldAssignment { scenario, folds })
}
