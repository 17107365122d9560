use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bptt::backprop;
use super::mlp::{bce_logit_grad, bce_loss, MlpHead};
use crate::error::{Result, ScfError};
use crate::field::{ScfModel, ScfParams};

/// One labeled example with stimuli in modality order.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub inputs: Vec<Vec<f64>>,
    pub label: f64,
}

impl Sample {
    fn slices(&self) -> Vec<&[f64]> {
        self.inputs.iter().map(Vec::as_slice).collect()
    }
}

/// Turns per-modality embeddings into the head's input vector.
#[derive(Clone, Debug)]
pub enum Encoder {
    Fusion(ScfModel),
    /// Baseline: plain concatenation of the modality vectors.
    Concat { dims: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum EncoderParams {
    Fusion(ScfParams),
    Concat { dims: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierParams {
    pub encoder: EncoderParams,
    pub head: MlpHead,
}

#[derive(Clone, Debug)]
pub struct Classifier {
    encoder: Encoder,
    head: MlpHead,
}

/// Mean batch loss and its gradient. `field` is `None` for the concatenation baseline.
#[derive(Clone, Debug)]
pub struct Gradients {
    pub loss: f64,
    /// Fraction of the batch classified correctly (training-mode predictions).
    pub accuracy: f64,
    pub field: Option<ScfParams>,
    pub head: MlpHead,
}

impl Gradients {
    /// Flat gradient in the same order as [`Classifier::flatten_trainable`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(field) = &self.field {
            out.extend(field.flatten_trainable());
        }
        self.head.clone().visit_params(|g| out.push(*g));
        out
    }
}

impl Classifier {
    pub fn fusion(model: ScfModel, head: MlpHead) -> Result<Self> {
        if head.input_width() != model.embedding_len() {
            return Err(ScfError::config(format!(
                "head input width {} does not match fused embedding length {}",
                head.input_width(),
                model.embedding_len()
            )));
        }
        Ok(Self {
            encoder: Encoder::Fusion(model),
            head,
        })
    }

    pub fn concat(dims: Vec<usize>, head: MlpHead) -> Result<Self> {
        let total: usize = dims.iter().sum();
        if head.input_width() != total {
            return Err(ScfError::config(format!(
                "head input width {} does not match concatenated width {total}",
                head.input_width()
            )));
        }
        Ok(Self {
            encoder: Encoder::Concat { dims },
            head,
        })
    }

    pub fn from_params(params: ClassifierParams) -> Result<Self> {
        match params.encoder {
            EncoderParams::Fusion(p) => Self::fusion(ScfModel::new(p)?, params.head),
            EncoderParams::Concat { dims } => Self::concat(dims, params.head),
        }
    }

    pub fn to_params(&self) -> ClassifierParams {
        ClassifierParams {
            encoder: match &self.encoder {
                Encoder::Fusion(m) => EncoderParams::Fusion(m.params().clone()),
                Encoder::Concat { dims } => EncoderParams::Concat { dims: dims.clone() },
            },
            head: self.head.clone(),
        }
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn head(&self) -> &MlpHead {
        &self.head
    }

    pub fn field(&self) -> Option<&ScfModel> {
        match &self.encoder {
            Encoder::Fusion(m) => Some(m),
            Encoder::Concat { .. } => None,
        }
    }

    fn check_inputs(&self, inputs: &[&[f64]]) -> Result<()> {
        if let Encoder::Concat { dims } = &self.encoder {
            if inputs.len() != dims.len() || inputs.iter().zip(dims).any(|(x, d)| x.len() != *d) {
                return Err(ScfError::input(format!(
                    "expected modality dimensions {dims:?}, got {:?}",
                    inputs.iter().map(|x| x.len()).collect::<Vec<_>>()
                )));
            }
        }
        Ok(())
    }

    pub fn embed(&self, inputs: &[&[f64]]) -> Result<Vec<f64>> {
        self.check_inputs(inputs)?;
        match &self.encoder {
            Encoder::Fusion(m) => m.embed(inputs),
            Encoder::Concat { .. } => Ok(inputs.concat()),
        }
    }

    /// Inference-mode probability of the positive class.
    pub fn predict(&self, inputs: &[&[f64]]) -> Result<f64> {
        self.head.predict(&self.embed(inputs)?)
    }

    /// Mean inference-mode loss and accuracy at `threshold`.
    pub fn evaluate(&self, samples: &[Sample], threshold: f64) -> Result<(f64, f64)> {
        if samples.is_empty() {
            return Ok((0.0, 0.0));
        }
        let mut loss = 0.0;
        let mut correct = 0usize;
        for s in samples {
            let p = self.predict(&s.slices())?;
            loss += bce_loss(p, s.label);
            correct += usize::from((p >= threshold) == (s.label >= 0.5));
        }
        let n = samples.len() as f64;
        Ok((loss / n, correct as f64 / n))
    }

    pub fn trainable_len(&self) -> usize {
        self.field().map_or(0, |m| m.params().trainable_len()) + self.head.param_count()
    }

    pub fn flatten_trainable(&self) -> Vec<f64> {
        let mut out = self.field().map_or_else(Vec::new, |m| m.params().flatten_trainable());
        self.head.clone().visit_params(|v| out.push(*v));
        out
    }

    pub fn assign_trainable(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.trainable_len() {
            return Err(ScfError::config(format!(
                "expected {} trainable values, got {}",
                self.trainable_len(),
                values.len()
            )));
        }
        let mut offset = 0;
        if let Encoder::Fusion(model) = &mut self.encoder {
            let mut params = model.params().clone();
            let n = params.trainable_len();
            params.assign_trainable(&values[..n])?;
            params.project_to_valid();
            model.set_params(params)?;
            offset = n;
        }
        let mut it = values[offset..].iter();
        self.head.visit_params(|v| *v = *it.next().expect("length checked"));
        Ok(())
    }

    /// Exact gradient of the mean batch loss. With `dropout_seed`, sample `i`
    /// uses dropout masks seeded from `(dropout_seed, i)`; without it the head
    /// runs in inference mode.
    pub fn gradients(&self, batch: &[Sample], dropout_seed: Option<u64>) -> Result<Gradients> {
        if batch.is_empty() {
            return Err(ScfError::input("empty batch"));
        }
        let mut field_grads = self.field().map(|m| m.params().zeros_like());
        let mut head_grads = self.head.zeros_like();
        let mut loss = 0.0;
        let mut correct = 0usize;
        let scale = 1.0 / batch.len() as f64;

        for (i, sample) in batch.iter().enumerate() {
            let inputs = sample.slices();
            self.check_inputs(&inputs)?;
            let mut rng = dropout_seed.map(|seed| ChaCha8Rng::seed_from_u64(mix_seed(seed, i as u64)));
            let (embedding, trace) = match &self.encoder {
                Encoder::Fusion(m) => {
                    let trace = m.trace(&inputs)?;
                    (trace.states.last().unwrap()[inputs.len()].clone(), Some(trace))
                }
                Encoder::Concat { .. } => (inputs.concat(), None),
            };
            let cache = self.head.forward_cached(&embedding, rng.as_mut())?;
            let l = bce_loss(cache.output, sample.label);
            if !l.is_finite() {
                return Err(ScfError::Training(format!(
                    "non-finite loss {l} at batch item {i} (prediction {})",
                    cache.output
                )));
            }
            loss += l;
            correct += usize::from((cache.output >= 0.5) == (sample.label >= 0.5));
            let d_logit = bce_logit_grad(cache.output, sample.label) * scale;
            let d_embedding = self.head.backward(&cache, d_logit, &mut head_grads);
            if let (Encoder::Fusion(m), Some(trace), Some(fg)) = (&self.encoder, &trace, field_grads.as_mut()) {
                backprop(m, trace, &inputs, &d_embedding, fg);
            }
        }

        let grads = Gradients {
            loss: loss * scale,
            accuracy: correct as f64 * scale,
            field: field_grads,
            head: head_grads,
        };
        if let Some(bad) = grads.flatten().iter().position(|g| !g.is_finite()) {
            return Err(ScfError::Training(format!("non-finite gradient at parameter index {bad}")));
        }
        Ok(grads)
    }
}

/// SplitMix64-style derivation of a child seed.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
