//! Narrowband magnitude spectrograms from 16-bit PCM mono WAV clips.

use std::f64::consts::PI;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::data::{EmbeddingDataset, EmbeddingInstance};
use crate::error::{Result, ScfError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Each frequency bin centered and scaled to unit population variance over frames.
    PerBinZscore,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrogramConfig {
    pub sample_rate: u32,
    pub window_ms: f64,
    pub hop_ms: f64,
    /// FFT length; frames are zero-padded up to it.
    pub transform_size: usize,
    pub normalization: Normalization,
}

impl Default for SpectrogramConfig {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            window_ms: 25.0,
            hop_ms: 10.0,
            transform_size: 512,
            normalization: Normalization::PerBinZscore,
        }
    }
}

impl SpectrogramConfig {
    pub fn window_samples(&self) -> usize {
        (f64::from(self.sample_rate) * self.window_ms / 1000.0).round() as usize
    }

    pub fn hop_samples(&self) -> usize {
        (f64::from(self.sample_rate) * self.hop_ms / 1000.0).round() as usize
    }

    pub fn bins(&self) -> usize {
        self.transform_size / 2 + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(ScfError::config("sample_rate must be positive"));
        }
        let w = self.window_samples();
        if w == 0 || w > self.transform_size {
            return Err(ScfError::config(format!(
                "window of {w} samples must be in [1, transform_size = {}]",
                self.transform_size
            )));
        }
        if self.hop_samples() == 0 {
            return Err(ScfError::config(format!("hop of {} ms is below one sample", self.hop_ms)));
        }
        Ok(())
    }

    /// Number of frames for a clip of `samples` samples, `None` if shorter than one window.
    pub fn frame_count(&self, samples: usize) -> Option<usize> {
        let w = self.window_samples();
        (samples >= w).then(|| (samples - w) / self.hop_samples() + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    /// `F x B` magnitudes, one row per frame.
    pub frames: Vec<Vec<f64>>,
    /// Center of each analysis window, seconds from clip start.
    pub frame_times: Vec<f64>,
    pub bin_freqs: Vec<f64>,
}

/// Symmetric Hamming window of length `len`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let mut w: Vec<f64> = (0..len.div_ceil(2))
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / (len - 1) as f64).cos())
        .collect();
    // mirrored so the symmetry is exact in floating point
    let tail: Vec<f64> = w[..len / 2].iter().rev().copied().collect();
    w.extend(tail);
    w
}

/// Reads a 16-bit PCM mono WAV; samples are scaled by 1/32768.
pub fn load_audio(path: impl AsRef<Path>) -> Result<(Vec<f64>, u32)> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::IoError(io) => ScfError::io(path, io),
        other => ScfError::input(format!("{}: {other}", path.display())),
    })?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(ScfError::input(format!(
            "{}: expected mono audio, found {} channels",
            path.display(),
            spec.channels
        )));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(ScfError::input(format!(
            "{}: expected 16-bit PCM, found {}-bit {:?}",
            path.display(),
            spec.bits_per_sample,
            spec.sample_format
        )));
    }
    let samples = reader
        .into_samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| ScfError::input(format!("{}: {e}", path.display())))?;
    Ok((samples, spec.sample_rate))
}

pub fn spectrogram(samples: &[f64], config: &SpectrogramConfig) -> Result<Spectrogram> {
    config.validate()?;
    let w = config.window_samples();
    let h = config.hop_samples();
    let n_fft = config.transform_size;
    let bins = config.bins();
    let frames_n = config.frame_count(samples.len()).ok_or_else(|| {
        ScfError::input(format!(
            "clip of {} samples is shorter than one {w}-sample window",
            samples.len()
        ))
    })?;

    let window = hamming(w);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let mut buf = vec![Complex::new(0.0, 0.0); n_fft];
    let mut frames = Vec::with_capacity(frames_n);
    for f in 0..frames_n {
        let start = f * h;
        for (i, slot) in buf.iter_mut().enumerate() {
            *slot = if i < w {
                Complex::new(samples[start + i] * window[i], 0.0)
            } else {
                Complex::new(0.0, 0.0)
            };
        }
        fft.process(&mut buf);
        frames.push(buf[..bins].iter().map(|c| c.norm()).collect());
    }
    if config.normalization == Normalization::PerBinZscore {
        zscore_bins(&mut frames);
    }

    let rate = f64::from(config.sample_rate);
    Ok(Spectrogram {
        frames,
        frame_times: (0..frames_n).map(|f| (f * h) as f64 / rate + w as f64 / (2.0 * rate)).collect(),
        bin_freqs: (0..bins).map(|b| b as f64 * rate / n_fft as f64).collect(),
    })
}

/// Zero-variance bins end up all zero.
fn zscore_bins(frames: &mut [Vec<f64>]) {
    let n = frames.len() as f64;
    let bins = frames.first().map_or(0, Vec::len);
    for b in 0..bins {
        let mean = frames.iter().map(|f| f[b]).sum::<f64>() / n;
        let var = frames.iter().map(|f| (f[b] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for f in frames.iter_mut() {
            let centered = f[b] - mean;
            f[b] = if sd > 0.0 { centered / sd } else { 0.0 };
        }
    }
}

impl Spectrogram {
    pub fn bins(&self) -> usize {
        self.bin_freqs.len()
    }

    /// One row per frame, values space-separated.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for frame in &self.frames {
            let row: Vec<String> = frame.iter().map(|v| format!("{v:.9e}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Frames as instances of an embedding file: bins fill the audio
    /// features, the visual part is empty, every frame belongs to group `clip`.
    pub fn to_dataset(&self, clip: &str) -> EmbeddingDataset {
        let mut ds = EmbeddingDataset::new(self.bins(), 0);
        ds.instances = self
            .frames
            .iter()
            .enumerate()
            .map(|(i, frame)| EmbeddingInstance {
                clip_id: format!("{clip}:{i:05}"),
                group_id: clip.to_string(),
                label: 0,
                audio: frame.iter().map(|&v| v as f32).collect(),
                visual: Vec::new(),
            })
            .collect();
        ds
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw() -> SpectrogramConfig {
        SpectrogramConfig {
            normalization: Normalization::None,
            ..SpectrogramConfig::default()
        }
    }

    fn sine(freq: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / 16000.0).sin()).collect()
    }

    #[test]
    fn one_second_gives_98_frames() {
        let cfg = SpectrogramConfig::default();
        assert_eq!((cfg.window_samples(), cfg.hop_samples()), (400, 160));
        let s = spectrogram(&sine(440.0, 16000), &cfg).unwrap();
        assert_eq!(s.frames.len(), 98);
        assert_eq!(s.bins(), 257);
        assert!(s.frames.iter().all(|f| f.len() == 257));
    }

    #[test]
    fn sine_peaks_at_its_bin() {
        let s = spectrogram(&sine(1000.0, 16000), &raw()).unwrap();
        for frame in &s.frames {
            let arg = (0..frame.len()).max_by(|&a, &b| frame[a].total_cmp(&frame[b])).unwrap();
            assert_eq!(arg, 32);
        }
        assert_eq!(s.bin_freqs[32], 1000.0);
    }

    #[test]
    fn silence_is_zero() {
        let s = spectrogram(&vec![0.0; 4000], &raw()).unwrap();
        assert!(s.frames.iter().flatten().all(|&v| v == 0.0));
        let z = spectrogram(&vec![0.0; 4000], &SpectrogramConfig::default()).unwrap();
        assert!(z.frames.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn zscore_bins_have_unit_variance() {
        let samples: Vec<f64> = (0..16000).map(|i| ((i * 7919) % 1013) as f64 / 1013.0 - 0.5).collect();
        let s = spectrogram(&samples, &SpectrogramConfig::default()).unwrap();
        let n = s.frames.len() as f64;
        for b in 0..s.bins() {
            let mean = s.frames.iter().map(|f| f[b]).sum::<f64>() / n;
            let var = s.frames.iter().map(|f| (f[b] - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "bin {b} mean {mean}");
            assert!((var - 1.0).abs() < 1e-6 || var == 0.0, "bin {b} var {var}");
        }
    }

    #[test]
    fn hamming_is_symmetric() {
        for len in [2, 7, 400] {
            let w = hamming(len);
            for n in 0..len {
                assert_eq!(w[n], w[len - 1 - n]);
            }
            assert!((w[0] - 0.08).abs() < 1e-15);
        }
    }

    #[test]
    fn short_clip_is_an_error() {
        assert!(matches!(spectrogram(&[0.0; 399], &raw()), Err(ScfError::Input(_))));
        assert_eq!(spectrogram(&[0.0; 400], &raw()).unwrap().frames.len(), 1);
    }

    #[test]
    fn window_longer_than_transform_rejected() {
        let cfg = SpectrogramConfig {
            window_ms: 40.0,
            ..raw()
        };
        assert!(matches!(cfg.validate(), Err(ScfError::Config(_))));
    }

    #[test]
    fn frame_times_are_window_centers() {
        let s = spectrogram(&vec![0.0; 1000], &raw()).unwrap();
        assert_eq!(s.frame_times.len(), 4);
        assert!((s.frame_times[0] - 0.0125).abs() < 1e-15);
        assert!((s.frame_times[1] - 0.0225).abs() < 1e-15);
    }

    #[test]
    fn dataset_view_has_one_instance_per_frame() {
        let s = spectrogram(&sine(300.0, 2000), &raw()).unwrap();
        let ds = s.to_dataset("clip");
        ds.validate().unwrap();
        assert_eq!(ds.len(), s.frames.len());
        assert_eq!(ds.audio_dim, 257);
    }
}
