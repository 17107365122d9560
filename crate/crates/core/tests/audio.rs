use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scf::audio::{load_audio, spectrogram, Normalization, SpectrogramConfig};
use scf::ScfError;

fn write_wav(path: &std::path::Path, channels: u16, bits: u16, samples: &[i32]) {
    let spec = hound::WavSpec {
        channels,
        sample_rate: 16_000,
        bits_per_sample: bits,
        sample_format: hound::SampleFormat::Int,
    };
    let mut w = hound::WavWriter::create(path, spec).unwrap();
    for &s in samples {
        w.write_sample(s).unwrap();
    }
    w.finalize().unwrap();
}

#[test]
fn loads_mono_pcm16() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.wav");
    write_wav(&path, 1, 16, &[0; 160]);
    let (samples, rate) = load_audio(&path).unwrap();
    assert_eq!(rate, 16_000);
    assert_eq!(samples, vec![0.0; 160]);

    write_wav(&path, 1, 16, &[-32768, 32767, 16384]);
    let (samples, _) = load_audio(&path).unwrap();
    assert_eq!(samples[0], -1.0);
    assert_eq!(samples[2], 0.5);
    assert!(samples[1] < 1.0);
}

#[test]
fn rejects_other_formats() {
    let dir = tempfile::tempdir().unwrap();
    let stereo = dir.path().join("s.wav");
    write_wav(&stereo, 2, 16, &[0; 320]);
    let err = load_audio(&stereo).unwrap_err();
    assert!(matches!(err, ScfError::Input(_)));
    assert!(err.to_string().contains("2 channels"), "{err}");

    let wide = dir.path().join("w.wav");
    write_wav(&wide, 1, 24, &[0; 10]);
    assert!(load_audio(&wide).unwrap_err().to_string().contains("24-bit"));

    let missing = load_audio(dir.path().join("nope.wav")).unwrap_err();
    assert!(matches!(missing, ScfError::Io { .. }));
    assert_eq!(missing.exit_code(), 1);
}

#[test]
fn identical_input_gives_identical_bytes() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let clip: Vec<f64> = (0..8000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let cfg = SpectrogramConfig::default();
    let a = spectrogram(&clip, &cfg).unwrap();
    let b = spectrogram(&clip.clone(), &cfg).unwrap();
    let bits = |s: &scf::audio::Spectrogram| s.frames.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

fn white_noise_energy(frames: usize, seed: u64) -> f64 {
    let cfg = SpectrogramConfig {
        normalization: Normalization::None,
        ..SpectrogramConfig::default()
    };
    let len = 400 + (frames - 1) * 160;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clip: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut rng)).collect();
    let s = spectrogram(&clip, &cfg).unwrap();
    assert_eq!(s.frames.len(), frames);
    s.frames.iter().flatten().map(|v| v * v).sum()
}

#[test]
fn white_noise_energy_grows_linearly_with_frames() {
    let slopes: Vec<f64> = (0..6)
        .map(|seed| (white_noise_energy(300, seed) - white_noise_energy(100, seed + 100)) / 200.0)
        .collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    for s in &slopes {
        assert!((s - mean).abs() < 0.1 * mean, "slope {s} vs mean {mean}");
    }
    // per-frame energy of the windowed transform: (n_fft/2 + 1 bins) share n_fft * sum(w^2)
    let ratio = white_noise_energy(200, 9) / 200.0 / mean;
    assert!((ratio - 1.0).abs() < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn frame_count_formula(len in 0usize..6000, window in 1usize..512, hop in 1usize..400) {
        let cfg = SpectrogramConfig {
            sample_rate: 1000,
            window_ms: window as f64,
            hop_ms: hop as f64,
            transform_size: 512,
            normalization: Normalization::None,
        };
        let clip = vec![0.1; len];
        match spectrogram(&clip, &cfg) {
            Ok(s) => {
                prop_assert!(len >= window);
                prop_assert_eq!(s.frames.len(), (len - window) / hop + 1);
                prop_assert_eq!(s.frame_times.len(), s.frames.len());
            }
            Err(e) => {
                prop_assert!(len < window);
                prop_assert!(matches!(e, ScfError::Input(_)));
            }
        }
    }
}
