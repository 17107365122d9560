//! Writes a synthetic dataset in the binary format, reads it back, and shows
//! how the two evaluation scenarios split it.

use scf::data::{read_dataset, split_groups, synth_generate, write_dataset, Scenario, SynthConfig};

fn main() -> scf::Result<()> {
    let out = synth_generate(&SynthConfig {
        instances: 200,
        groups: 6,
        audio_dim: 8,
        visual_dim: 8,
        ..SynthConfig::default()
    })?;
    let path = std::env::temp_dir().join("scf_example.scfe");
    write_dataset(&out.dataset, &path)?;
    let back = read_dataset(&path)?;
    println!(
        "{}: {} bytes, {} instances, identical after reading: {}",
        path.display(),
        std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0),
        back.len(),
        back.to_bytes()? == out.dataset.to_bytes()?
    );
    let positives = back.instances.iter().filter(|i| i.label == 1).count();
    println!("positives {positives}, groups {:?}", back.groups());

    for scenario in [Scenario::Independent, Scenario::Dependent] {
        let split = split_groups(&back, scenario, 3, 0)?;
        println!("{scenario}");
        for fold in 0..split.k() {
            let test = back.subset(&split.test_indices(&back, fold));
            println!("  fold {fold}: {} test instances from groups {:?}", test.len(), test.groups());
        }
    }
    std::fs::remove_file(&path).ok();
    Ok(())
}
