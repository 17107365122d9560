//! Trains the fusion classifier on a reduced synthetic task and reports
//! accuracy on a held-out group.

use scf::data::{synth_generate, SynthConfig};
use scf::field::FieldConfig;
use scf::trainer::{train, ClassifierRecipe, HeadConfig, ModelKind, TrainConfig};

fn main() -> scf::Result<()> {
    let data = synth_generate(&SynthConfig {
        rows: 11,
        cols: 11,
        audio_dim: 32,
        visual_dim: 32,
        instances: 1200,
        groups: 8,
        seed: 3,
        ..SynthConfig::default()
    })?
    .dataset;

    let (train_idx, test_idx): (Vec<usize>, Vec<usize>) =
        (0..data.len()).partition(|&i| data.instances[i].group_id != data.instances[0].group_id);
    let recipe = ClassifierRecipe {
        kind: ModelKind::Scf,
        field: FieldConfig {
            rows: 11,
            cols: 11,
            ..FieldConfig::default()
        },
        head: HeadConfig::default(),
    };
    let classifier = recipe.build(data.audio_dim, data.visual_dim, 1)?;
    let config = TrainConfig {
        max_epochs: 15,
        seed: 1,
        ..TrainConfig::default()
    };
    let outcome = train(classifier, &data.subset(&train_idx).samples(), &config)?;
    print!("{}", outcome.history.to_table());

    let (loss, acc) = outcome.classifier.evaluate(&data.subset(&test_idx).samples(), 0.5)?;
    println!("held-out group {}: loss {loss:.4}, accuracy {acc:.4}", data.instances[0].group_id);
    Ok(())
}
