//! Synthetic audio/visual embeddings whose label is spatial coincidence.
//!
//! Each modality encodes a grid location through its own fixed linear
//! projection of the location's one-hot vector. A positive instance encodes the
//! same location in both modalities; a negative one encodes two locations at
//! least `negative_min_distance` apart. Either modality alone carries no
//! information about the label.

use std::f64::consts::PI;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::dataset::{EmbeddingDataset, EmbeddingInstance};
use crate::error::{Result, ScfError};
use crate::field::circular_distance;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub rows: usize,
    pub cols: usize,
    pub audio_dim: usize,
    pub visual_dim: usize,
    pub noise_sigma: f64,
    /// Probability that an instance is positive.
    pub coincidence_rate: f64,
    pub instances: usize,
    pub groups: usize,
    /// Highest spatial frequency (per axis) of the projection patterns.
    pub max_frequency: i64,
    /// Minimum circular distance between the two locations of a negative.
    pub negative_min_distance: f64,
    /// Not read from config files; derived from the run seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            rows: 17,
            cols: 17,
            audio_dim: 128,
            visual_dim: 128,
            noise_sigma: 0.1,
            coincidence_rate: 0.5,
            instances: 4000,
            groups: 20,
            max_frequency: 1,
            negative_min_distance: 3.0,
            seed: 0,
        }
    }
}

/// Location encoded by each modality, row-major grid index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Latent {
    pub audio_location: usize,
    pub visual_location: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthOutput {
    pub dataset: EmbeddingDataset,
    pub latents: Vec<Latent>,
}

/// Fixed linear map from location one-hots to embeddings: column `l` is a
/// set of periodic plane waves evaluated at location `l`, so nearby
/// locations have correlated embeddings. Entries have unit variance over
/// locations.
#[derive(Clone, Debug, PartialEq)]
pub struct LocationProjection {
    rows: usize,
    cols: usize,
    dim: usize,
    /// `dim x (rows*cols)`, row-major.
    matrix: Vec<f64>,
}

impl LocationProjection {
    pub fn random<R: Rng>(rows: usize, cols: usize, dim: usize, max_frequency: i64, rng: &mut R) -> Self {
        let cells = rows * cols;
        let amp = std::f64::consts::SQRT_2;
        let mut matrix = Vec::with_capacity(dim * cells);
        for _ in 0..dim {
            let fx = rng.random_range(-max_frequency..=max_frequency) as f64;
            let fy = rng.random_range(-max_frequency..=max_frequency) as f64;
            let phase = rng.random_range(0.0..2.0 * PI);
            for x in 0..rows {
                for y in 0..cols {
                    let arg = 2.0 * PI * (fx * x as f64 / rows as f64 + fy * y as f64 / cols as f64) + phase;
                    matrix.push(amp * arg.cos());
                }
            }
        }
        Self { rows, cols, dim, matrix }
    }

    /// Projection of the one-hot vector of `location`.
    pub fn encode(&self, location: usize) -> Vec<f64> {
        let cells = self.rows * self.cols;
        (0..self.dim).map(|d| self.matrix[d * cells + location]).collect()
    }
}

/// Euclidean distance between two grid locations using per-axis circular distances.
pub fn location_distance(a: usize, b: usize, rows: usize, cols: usize) -> f64 {
    let dx = circular_distance(a / cols, b / cols, rows) as f64;
    let dy = circular_distance(a % cols, b % cols, cols) as f64;
    (dx * dx + dy * dy).sqrt()
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let cells = self.rows * self.cols;
        if cells == 0 {
            return Err(ScfError::input("synthetic grid must be non-empty"));
        }
        if !(self.coincidence_rate > 0.0 && self.coincidence_rate < 1.0) {
            return Err(ScfError::input(format!(
                "coincidence_rate must lie in (0, 1), got {}",
                self.coincidence_rate
            )));
        }
        if self.groups == 0 || self.groups > cells {
            return Err(ScfError::input(format!(
                "{} groups need as many distinct locations, grid {}x{} has {cells}",
                self.groups, self.rows, self.cols
            )));
        }
        let max_dist = location_distance(0, (self.rows / 2) * self.cols + self.cols / 2, self.rows, self.cols);
        if max_dist < self.negative_min_distance {
            return Err(ScfError::input(format!(
                "grid {}x{} has no location pairs at distance >= {}",
                self.rows, self.cols, self.negative_min_distance
            )));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(ScfError::input(format!("invalid noise_sigma {}", self.noise_sigma)));
        }
        Ok(())
    }
}

pub fn synth_generate(config: &SynthConfig) -> Result<SynthOutput> {
    config.validate()?;
    let (rows, cols) = (config.rows, config.cols);
    let cells = rows * cols;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let audio_proj = LocationProjection::random(rows, cols, config.audio_dim, config.max_frequency, &mut rng);
    let visual_proj = LocationProjection::random(rows, cols, config.visual_dim, config.max_frequency, &mut rng);

    // locations dealt to groups after a shuffle, so each group covers a scattered subset
    let mut order: Vec<usize> = (0..cells).collect();
    order.shuffle(&mut rng);
    let mut owner = vec![0usize; cells];
    for (i, &loc) in order.iter().enumerate() {
        owner[loc] = i % config.groups;
    }
    let far: Vec<Vec<usize>> = (0..cells)
        .map(|a| {
            (0..cells)
                .filter(|&b| location_distance(a, b, rows, cols) >= config.negative_min_distance)
                .collect()
        })
        .collect();

    let noise = Normal::new(0.0, config.noise_sigma).map_err(|e| ScfError::input(e.to_string()))?;
    let group_width = (config.groups.max(2) - 1).to_string().len();
    let clip_width = (config.instances.max(2) - 1).to_string().len();
    let mut dataset = EmbeddingDataset::new(config.audio_dim, config.visual_dim);
    let mut latents = Vec::with_capacity(config.instances);

    for i in 0..config.instances {
        let positive = rng.random::<f64>() < config.coincidence_rate;
        let audio_location = rng.random_range(0..cells);
        let visual_location = if positive {
            audio_location
        } else {
            *far[audio_location].choose(&mut rng).expect("validated non-empty")
        };
        let mut embed = |proj: &LocationProjection, loc: usize| -> Vec<f32> {
            proj.encode(loc)
                .into_iter()
                .map(|v| (v + noise.sample(&mut rng)) as f32)
                .collect()
        };
        let audio = embed(&audio_proj, audio_location);
        let visual = embed(&visual_proj, visual_location);
        dataset.instances.push(EmbeddingInstance {
            clip_id: format!("clip{i:0clip_width$}"),
            group_id: format!("g{:0group_width$}", owner[audio_location]),
            label: u8::from(positive),
            audio,
            visual,
        });
        latents.push(Latent {
            audio_location,
            visual_location,
        });
    }
    Ok(SynthOutput { dataset, latents })
}
