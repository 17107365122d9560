//! Narrowband spectrogram of a synthetic two-tone clip, or of a mono
//! 16-bit wav file given as the first argument.

use scf::audio::{load_audio, spectrogram, Normalization, SpectrogramConfig};

fn main() -> scf::Result<()> {
    let raw = SpectrogramConfig {
        normalization: Normalization::None,
        ..SpectrogramConfig::default()
    };
    let samples = match std::env::args().nth(1) {
        Some(path) => load_audio(path)?.0,
        None => (0..16_000)
            .map(|i| {
                let t = i as f64 / 16_000.0;
                let f = if t < 0.5 { 1000.0 } else { 2500.0 };
                (2.0 * std::f64::consts::PI * f * t).sin()
            })
            .collect(),
    };
    let s = spectrogram(&samples, &raw)?;
    println!("{} frames x {} bins", s.frames.len(), s.bins());
    for (t, frame) in s.frame_times.iter().zip(&s.frames).step_by(10) {
        let peak = (0..frame.len()).max_by(|&a, &b| frame[a].total_cmp(&frame[b])).unwrap();
        println!("t = {t:.3}s  peak bin {peak:>3} ({:.0} Hz)", s.bin_freqs[peak]);
    }

    let z = spectrogram(&samples, &SpectrogramConfig::default())?;
    let ds = z.to_dataset("example");
    println!("as dataset: {} instances, audio dim {}", ds.len(), ds.audio_dim);
    Ok(())
}
