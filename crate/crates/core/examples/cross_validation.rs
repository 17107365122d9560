//! Group-independent cross-validation of the fusion layer against the
//! concatenation baseline on a reduced synthetic task.
//!
//! Pass `--dependent` to stratify instances instead of holding out groups.

use scf::data::{synth_generate, Scenario, SynthConfig};
use scf::field::FieldConfig;
use scf::trainer::{cross_validate_with, ClassifierRecipe, HeadConfig, ModelKind, TrainConfig};

fn main() -> scf::Result<()> {
    let scenario = if std::env::args().any(|a| a == "--dependent") {
        Scenario::Dependent
    } else {
        Scenario::Independent
    };
    let data = synth_generate(&SynthConfig {
        rows: 9,
        cols: 9,
        audio_dim: 24,
        visual_dim: 24,
        instances: 800,
        groups: 10,
        ..SynthConfig::default()
    })?
    .dataset;
    let config = TrainConfig {
        max_epochs: 12,
        ..TrainConfig::default()
    };
    for kind in [ModelKind::Scf, ModelKind::Concat] {
        let recipe = ClassifierRecipe {
            kind,
            field: FieldConfig {
                rows: 9,
                cols: 9,
                ..FieldConfig::default()
            },
            head: HeadConfig::default(),
        };
        let report = cross_validate_with(&data, scenario, 5, &recipe, &config, |fold, acc| {
            eprintln!("fold {fold}: {acc:.4}")
        })?;
        println!("{}", report.to_table());
    }
    Ok(())
}
