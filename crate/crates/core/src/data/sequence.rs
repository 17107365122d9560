use crate::error::{Result, ScfError};

/// Variable-length frame sequence padded into fixed slots.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceBundle {
    pub frames: Vec<Vec<f32>>,
    /// `true` for a real frame, `false` for padding.
    pub mask: Vec<bool>,
}

impl SequenceBundle {
    /// Pads `frames` with zero vectors up to `capacity` slots.
    pub fn padded(frames: Vec<Vec<f32>>, capacity: usize) -> Result<Self> {
        if frames.len() > capacity {
            return Err(ScfError::input(format!(
                "{} frames exceed capacity {capacity}",
                frames.len()
            )));
        }
        let dim = frames.first().map_or(0, Vec::len);
        let valid = frames.len();
        let mut frames = frames;
        frames.resize(capacity, vec![0.0; dim]);
        let mask = (0..capacity).map(|i| i < valid).collect();
        Ok(Self { frames, mask })
    }

    pub fn valid_frames(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

/// Mean of the valid frames; padded slots are never read.
pub fn pooled_visual(bundle: &SequenceBundle) -> Result<Vec<f32>> {
    if bundle.mask.len() != bundle.frames.len() {
        return Err(ScfError::input(format!(
            "mask has {} slots, sequence has {}",
            bundle.mask.len(),
            bundle.frames.len()
        )));
    }
    let mut valid = bundle.frames.iter().zip(&bundle.mask).filter(|(_, &m)| m).map(|(f, _)| f);
    let first = valid
        .next()
        .ok_or_else(|| ScfError::input("sequence has no valid frames"))?;
    let mut sum: Vec<f64> = first.iter().map(|&v| f64::from(v)).collect();
    let mut count = 1usize;
    for frame in valid {
        if frame.len() != sum.len() {
            return Err(ScfError::input(format!(
                "frame dimension {} differs from {}",
                frame.len(),
                sum.len()
            )));
        }
        for (s, &v) in sum.iter_mut().zip(frame) {
            *s += f64::from(v);
        }
        count += 1;
    }
    Ok(sum.into_iter().map(|s| (s / count as f64) as f32).collect())
}
