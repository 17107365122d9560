use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScfError};
use crate::field::logistic;

/// Fully connected layer; `weights` is `outputs x inputs`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Self {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| rng.random_range(-limit..=limit)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.bias[o] + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeadConfig {
    /// Widths of the rectifier hidden layers.
    pub hidden: Vec<usize>,
    /// Dropout probability applied after every hidden layer during training.
    pub dropout: f64,
}

impl Default for HeadConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64],
            dropout: 0.1,
        }
    }
}

/// Rectifier MLP with a single logistic output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpHead {
    pub layers: Vec<Dense>,
    /// One probability per hidden layer.
    pub dropout: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Clone, Debug)]
pub(crate) struct HeadCache {
    /// Input to each layer (after rectifier and dropout for hidden layers).
    pub layer_inputs: Vec<Vec<f64>>,
    /// Pre-activations of each hidden layer.
    pub hidden_pre: Vec<Vec<f64>>,
    /// Dropout multipliers of each hidden layer (0 or 1/keep).
    pub masks: Vec<Vec<f64>>,
    pub output: f64,
}

impl MlpHead {
    pub fn new<R: Rng>(input: usize, config: &HeadConfig, rng: &mut R) -> Result<Self> {
        if !(0.0..=1.0).contains(&config.dropout) {
            return Err(ScfError::config(format!(
                "dropout must be in [0, 1], got {}",
                config.dropout
            )));
        }
        if config.hidden.contains(&0) {
            return Err(ScfError::config("hidden layers must have at least one unit"));
        }
        let widths: Vec<usize> = std::iter::once(input)
            .chain(config.hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        let layers = widths.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect();
        Ok(Self {
            layers,
            dropout: vec![config.dropout; config.hidden.len()],
        })
    }

    /// A head with every weight and bias zero.
    pub fn zeros(widths: &[usize]) -> Self {
        assert!(widths.len() >= 2 && *widths.last().unwrap() == 1);
        Self {
            layers: widths.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            dropout: vec![0.0; widths.len() - 2],
        }
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| Dense::zeros(l.inputs, l.outputs)).collect(),
            dropout: self.dropout.clone(),
        }
    }

    /// Inference-mode probability.
    pub fn predict(&self, input: &[f64]) -> Result<f64> {
        Ok(self.forward_cached(input, None::<&mut rand_chacha::ChaCha8Rng>)?.output)
    }

    /// Training-mode probability with dropout masks drawn from `rng`.
    pub fn predict_with_dropout<R: Rng>(&self, input: &[f64], rng: &mut R) -> Result<f64> {
        Ok(self.forward_cached(input, Some(rng))?.output)
    }

    pub(crate) fn forward_cached<R: Rng>(&self, input: &[f64], mut rng: Option<&mut R>) -> Result<HeadCache> {
        if input.len() != self.input_width() {
            return Err(ScfError::config(format!(
                "head expects input width {}, got {}",
                self.input_width(),
                input.len()
            )));
        }
        let hidden = self.layers.len() - 1;
        let mut cache = HeadCache {
            layer_inputs: vec![input.to_vec()],
            hidden_pre: Vec::with_capacity(hidden),
            masks: Vec::with_capacity(hidden),
            output: 0.0,
        };
        for (layer, &p) in self.layers[..hidden].iter().zip(&self.dropout) {
            let pre = layer.apply(cache.layer_inputs.last().unwrap());
            let mask: Vec<f64> = match rng.as_deref_mut() {
                Some(rng) if p > 0.0 => {
                    let keep = 1.0 - p;
                    (0..pre.len())
                        .map(|_| if keep > 0.0 && rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                        .collect()
                }
                _ => vec![1.0; pre.len()],
            };
            let out = pre.iter().zip(&mask).map(|(x, m)| x.max(0.0) * m).collect();
            cache.hidden_pre.push(pre);
            cache.masks.push(mask);
            cache.layer_inputs.push(out);
        }
        let logit = self.layers[hidden].apply(cache.layer_inputs.last().unwrap())[0];
        cache.output = logistic(logit);
        Ok(cache)
    }

    /// Accumulates parameter gradients into `grads` given `dL/dlogit`; returns `dL/dinput`.
    pub(crate) fn backward(&self, cache: &HeadCache, d_logit: f64, grads: &mut MlpHead) -> Vec<f64> {
        let mut upstream = vec![d_logit];
        for l in (0..self.layers.len()).rev() {
            let layer = &self.layers[l];
            let g = &mut grads.layers[l];
            let x = &cache.layer_inputs[l];
            let mut dx = vec![0.0; layer.inputs];
            for (o, &d) in upstream.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g.bias[o] += d;
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                let grow = &mut g.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for i in 0..layer.inputs {
                    grow[i] += d * x[i];
                    dx[i] += d * row[i];
                }
            }
            if l > 0 {
                let pre = &cache.hidden_pre[l - 1];
                let mask = &cache.masks[l - 1];
                for ((d, p), m) in dx.iter_mut().zip(pre).zip(mask) {
                    *d *= if *p > 0.0 { *m } else { 0.0 };
                }
            }
            upstream = dx;
        }
        upstream
    }

    pub fn visit_params(&mut self, mut f: impl FnMut(&mut f64)) {
        for layer in &mut self.layers {
            layer.weights.iter_mut().for_each(&mut f);
            layer.bias.iter_mut().for_each(&mut f);
        }
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }
}

const PROB_FLOOR: f64 = 1e-7;

/// Binary cross-entropy with the prediction clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce_loss(prediction: f64, label: f64) -> f64 {
    let p = prediction.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
    -(label * p.ln() + (1.0 - label) * (1.0 - p).ln())
}

/// Derivative of [`bce_loss`] with respect to the output logit.
pub fn bce_logit_grad(prediction: f64, label: f64) -> f64 {
    if prediction < PROB_FLOOR || prediction > 1.0 - PROB_FLOOR {
        0.0
    } else {
        prediction - label
    }
}
