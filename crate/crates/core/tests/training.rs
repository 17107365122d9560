use scf::data::{synth_generate, Scenario, SynthConfig};
use scf::field::FieldConfig;
use scf::trainer::{cross_validate, train, ClassifierRecipe, HeadConfig, ModelKind, TrainConfig};

fn tiny_synth(noise_sigma: f64) -> scf::data::EmbeddingDataset {
    synth_generate(&SynthConfig {
        rows: 7,
        cols: 7,
        audio_dim: 6,
        visual_dim: 6,
        instances: 160,
        groups: 5,
        noise_sigma,
        seed: 4,
        ..SynthConfig::default()
    })
    .unwrap()
    .dataset
}

fn tiny_field() -> FieldConfig {
    FieldConfig {
        rows: 5,
        cols: 5,
        steps: 4,
        ..FieldConfig::default()
    }
}

fn recipe(kind: ModelKind) -> ClassifierRecipe {
    ClassifierRecipe {
        kind,
        field: tiny_field(),
        head: HeadConfig {
            hidden: vec![16],
            dropout: 0.1,
        },
    }
}

fn quick() -> TrainConfig {
    TrainConfig {
        max_epochs: 4,
        batch_size: 16,
        learning_rate: 1e-2,
        seed: 21,
        ..TrainConfig::default()
    }
}

#[test]
fn training_is_deterministic() {
    let data = tiny_synth(0.1).samples();
    let run = || {
        let c = recipe(ModelKind::Scf).build(6, 6, 3).unwrap();
        train(c, &data, &quick()).unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.history, b.history);
    assert_eq!(a.classifier.to_params(), b.classifier.to_params());
    assert_eq!(a.optimizer, b.optimizer);
}

#[test]
fn returned_parameters_come_from_the_best_epoch() {
    let data = tiny_synth(0.1).samples();
    let c = recipe(ModelKind::Scf).build(6, 6, 5).unwrap();
    let cfg = TrainConfig {
        max_epochs: 8,
        patience: 2,
        validation_fraction: 0.25,
        ..quick()
    };
    let out = train(c, &data, &cfg).unwrap();
    let best = &out.history.epochs[out.history.best_epoch - 1];
    let min = out.history.epochs.iter().map(|e| e.val_loss).fold(f64::INFINITY, f64::min);
    assert_eq!(best.val_loss, min);

    // the validation split is the same draw train() makes from the seed
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
    let val: Vec<_> = order[data.len() - 40..].iter().map(|&i| data[i].clone()).collect();
    let (loss, _) = out.classifier.evaluate(&val, 0.5).unwrap();
    assert_eq!(loss, best.val_loss);
}

#[test]
fn noiseless_concat_baseline_fits_training_data() {
    let data = tiny_synth(0.0).samples();
    let c = ClassifierRecipe {
        kind: ModelKind::Concat,
        field: tiny_field(),
        head: HeadConfig {
            hidden: vec![64],
            dropout: 0.0,
        },
    }
    .build(6, 6, 1)
    .unwrap();
    let cfg = TrainConfig {
        max_epochs: 400,
        patience: 400,
        validation_fraction: 0.0,
        learning_rate: 1e-2,
        batch_size: 16,
        seed: 2,
        ..TrainConfig::default()
    };
    let out = train(c, &data, &cfg).unwrap();
    let (_, acc) = out.classifier.evaluate(&data, 0.5).unwrap();
    assert_eq!(acc, 1.0, "{}", out.history.to_table());
}

#[test]
fn baseline_and_fusion_reports_have_the_same_shape() {
    let ds = tiny_synth(0.1);
    let cfg = TrainConfig {
        max_epochs: 2,
        ..quick()
    };
    let scf = cross_validate(&ds, Scenario::Independent, 5, &recipe(ModelKind::Scf), &cfg).unwrap();
    let cat = cross_validate(&ds, Scenario::Independent, 5, &recipe(ModelKind::Concat), &cfg).unwrap();
    assert_eq!(scf.accuracies.len(), cat.accuracies.len());
    assert_eq!(scf.held_out, cat.held_out);
    assert_eq!((scf.model.as_str(), cat.model.as_str()), ("scf", "concat"));
    for r in [&scf, &cat] {
        let (m, s) = scf::trainer::mean_std(&r.accuracies);
        assert_eq!((m, s), (r.mean, r.std));
    }
}

#[test]
fn inference_ignores_dropout_seed() {
    let ds = tiny_synth(0.1);
    let c = recipe(ModelKind::Scf).build(6, 6, 8).unwrap();
    let s = ds.instances[0].sample();
    let inputs: Vec<&[f64]> = s.inputs.iter().map(Vec::as_slice).collect();
    let p = c.predict(&inputs).unwrap();
    let g1 = c.gradients(std::slice::from_ref(&s), Some(1)).unwrap();
    let g2 = c.gradients(std::slice::from_ref(&s), Some(2)).unwrap();
    assert_eq!(c.predict(&inputs).unwrap(), p);
    assert_ne!(g1.head, g2.head);
}
