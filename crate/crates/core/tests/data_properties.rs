use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use scf::data::{
    pooled_visual, read_dataset, split_groups, synth_generate, write_dataset, EmbeddingDataset, EmbeddingInstance,
    Scenario, SequenceBundle, SynthConfig,
};

fn dataset_strategy() -> impl Strategy<Value = EmbeddingDataset> {
    (0usize..6, 0usize..6).prop_flat_map(|(da, dv)| {
        let instance = (
            "[a-z0-9]{0,4}",
            "[a-z]{1,3}",
            0u8..2,
            prop::collection::vec(any::<u32>().prop_map(f32::from_bits), da),
            prop::collection::vec(any::<u32>().prop_map(f32::from_bits), dv),
        );
        prop::collection::vec(instance, 0..12).prop_map(move |rows| {
            let mut ds = EmbeddingDataset::new(da, dv);
            for (i, (suffix, group, label, audio, visual)) in rows.into_iter().enumerate() {
                ds.instances.push(EmbeddingInstance {
                    clip_id: format!("c{i}{suffix}"),
                    group_id: group,
                    label,
                    audio,
                    visual,
                });
            }
            ds
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn files_round_trip_bit_for_bit(ds in dataset_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.scfe");
        write_dataset(&ds, &path).unwrap();
        let back = read_dataset(&path).unwrap();
        prop_assert_eq!(back.to_bytes().unwrap(), ds.to_bytes().unwrap());
        prop_assert_eq!(std::fs::read(&path).unwrap(), ds.to_bytes().unwrap());
        prop_assert_eq!(back.len(), ds.len());
    }

    #[test]
    fn padded_slots_never_matter(
        frames in prop::collection::vec(prop::collection::vec(-5.0f32..5.0, 3), 1..6),
        junk in prop::collection::vec(prop::collection::vec(-1e6f32..1e6, 3), 1..6),
    ) {
        let capacity = frames.len() + junk.len();
        let clean = SequenceBundle::padded(frames.clone(), capacity).unwrap();
        let mut dirty = clean.clone();
        for (slot, j) in dirty.frames[frames.len()..].iter_mut().zip(junk) {
            *slot = j;
        }
        prop_assert_eq!(pooled_visual(&clean).unwrap(), pooled_visual(&dirty).unwrap());
    }
}

fn small_synth(seed: u64) -> EmbeddingDataset {
    synth_generate(&SynthConfig {
        rows: 9,
        cols: 9,
        audio_dim: 8,
        visual_dim: 8,
        instances: 400,
        groups: 7,
        seed,
        ..SynthConfig::default()
    })
    .unwrap()
    .dataset
}

#[test]
fn independent_folds_never_share_groups() {
    for seed in 0..5 {
        let ds = small_synth(seed);
        let split = split_groups(&ds, Scenario::Independent, 5, seed).unwrap();
        let mut seen = BTreeSet::new();
        for fold in 0..5 {
            let test: BTreeSet<_> = split.test_indices(&ds, fold).iter().map(|&i| ds.instances[i].group_id.clone()).collect();
            let train: BTreeSet<_> = split.train_indices(&ds, fold).iter().map(|&i| ds.instances[i].group_id.clone()).collect();
            assert!(test.is_disjoint(&train), "fold {fold} leaks {:?}", test.intersection(&train).collect::<Vec<_>>());
            assert!(seen.is_disjoint(&test));
            seen.extend(test);
        }
        assert_eq!(seen.len(), ds.groups().len());
    }
}

#[test]
fn dependent_folds_partition_instances() {
    let ds = small_synth(3);
    let split = split_groups(&ds, Scenario::Dependent, 5, 3).unwrap();
    let mut all: Vec<usize> = (0..5).flat_map(|f| split.test_indices(&ds, f)).collect();
    all.sort_unstable();
    assert_eq!(all, (0..ds.len()).collect::<Vec<_>>());
    for f in 0..5 {
        assert_eq!(split.test_indices(&ds, f).len(), 80);
        assert_eq!(split.test_indices(&ds, f).len() + split.train_indices(&ds, f).len(), ds.len());
    }
}

#[test]
fn positive_rate_within_binomial_bounds() {
    let ds = synth_generate(&SynthConfig {
        instances: 1000,
        audio_dim: 4,
        visual_dim: 4,
        ..SynthConfig::default()
    })
    .unwrap()
    .dataset;
    let positives = ds.instances.iter().filter(|i| i.label == 1).count();
    // 500 +- 2.576 * sqrt(250)
    assert!((460..=540).contains(&positives), "{positives}");
}

fn mutual_information<K: std::hash::Hash + Eq>(pairs: impl Iterator<Item = (K, u8)>) -> f64 {
    let mut joint: HashMap<(K, u8), f64> = HashMap::new();
    let mut n = 0.0;
    for p in pairs {
        *joint.entry(p).or_default() += 1.0;
        n += 1.0;
    }
    let mut px: HashMap<&K, f64> = HashMap::new();
    let mut py = [0.0; 2];
    for ((k, y), c) in &joint {
        *px.entry(k).or_default() += c;
        py[usize::from(*y)] += c;
    }
    joint
        .iter()
        .map(|((k, y), c)| {
            let pxy = c / n;
            pxy * (pxy / (px[k] / n * py[usize::from(*y)] / n)).log2()
        })
        .sum()
}

#[test]
fn label_needs_both_modalities() {
    let out = synth_generate(&SynthConfig {
        instances: 10_000,
        audio_dim: 2,
        visual_dim: 2,
        ..SynthConfig::default()
    })
    .unwrap();
    let labels = out.dataset.instances.iter().map(|i| i.label);
    let joint = mutual_information(
        out.latents
            .iter()
            .zip(labels.clone())
            .map(|(l, y)| (l.audio_location == l.visual_location, y)),
    );
    let audio = mutual_information(out.latents.iter().map(|l| l.audio_location).zip(labels.clone()));
    let visual = mutual_information(out.latents.iter().map(|l| l.visual_location).zip(labels));
    assert!(joint > 0.9, "joint {joint}");
    // plug-in bias with 289 cells and 10k draws is about 0.02 bits
    assert!(audio < 0.05, "audio {audio}");
    assert!(visual < 0.05, "visual {visual}");
}

#[test]
fn same_seed_same_bytes() {
    assert_eq!(small_synth(9).to_bytes().unwrap(), small_synth(9).to_bytes().unwrap());
}
