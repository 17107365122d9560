use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::classifier::{Classifier, Sample};
use super::mlp::{HeadConfig, MlpHead};
use crate::error::Result;
use crate::field::{AreaParams, FieldConfig, ScfModel, ScfParams, TrainableGroups};

/// Gradients smaller than this in magnitude are not compared.
pub const MIN_CHECKED_GRADIENT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ParamCheck {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub checked: usize,
    pub skipped: usize,
    pub worst: Option<ParamCheck>,
    pub failures: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn max_relative_error(&self) -> f64 {
        self.worst.as_ref().map_or(0.0, |w| w.relative_error)
    }
}

fn relative_error(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Compares the analytic gradient of the mean inference-mode loss with
/// central differences of step `step`, for every trainable scalar.
pub fn gradient_check(classifier: &Classifier, batch: &[Sample], step: f64, tolerance: f64) -> Result<GradCheckReport> {
    let analytic = classifier.gradients(batch, None)?.flatten();
    let base = classifier.flatten_trainable();
    let mut probe = classifier.clone();
    let mut loss_at = |values: &[f64]| -> Result<f64> {
        probe.assign_trainable(values)?;
        Ok(probe.evaluate(batch, 0.5)?.0)
    };

    let mut report = GradCheckReport {
        checked: 0,
        skipped: 0,
        worst: None,
        failures: Vec::new(),
    };
    let mut values = base.clone();
    for (index, &g) in analytic.iter().enumerate() {
        values[index] = base[index] + step;
        let up = loss_at(&values)?;
        values[index] = base[index] - step;
        let down = loss_at(&values)?;
        values[index] = base[index];
        let numeric = (up - down) / (2.0 * step);
        if g.abs().max(numeric.abs()) <= MIN_CHECKED_GRADIENT {
            report.skipped += 1;
            continue;
        }
        report.checked += 1;
        let check = ParamCheck {
            index,
            analytic: g,
            numeric,
            relative_error: relative_error(g, numeric),
        };
        if report.worst.as_ref().is_none_or(|w| check.relative_error > w.relative_error) {
            report.worst = Some(check.clone());
        }
        if check.relative_error >= tolerance {
            report.failures.push(check);
        }
    }
    Ok(report)
}

/// Settings of the small problem used for routine gradient checks:
/// every parameter group trainable, couplings scaled so no unit saturates.
pub fn small_field_config() -> FieldConfig {
    let area = AreaParams {
        tau: 2.0,
        theta: 0.3,
        slope: 3.0,
        l_ex: 0.8,
        l_in: 0.5,
        sigma_ex: 1.0,
        sigma_in: 2.0,
    };
    FieldConfig {
        rows: 5,
        cols: 5,
        steps: 3,
        unimodal: area,
        multimodal: area,
        gain: 1.5,
        feedback: 0.7,
        rf_init: 0.5,
        trainable: TrainableGroups::all(),
    }
}

/// A 5x5, three-step fusion classifier with 4-dimensional stimuli, a hidden
/// layer of 8 units, and a small random batch.
pub fn small_problem(seed: u64) -> Result<(Classifier, Vec<Sample>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = ScfParams::from_config(&small_field_config(), &[("audio", 4), ("visual", 4)], &mut rng)?;
    let model = ScfModel::new(params)?;
    let head = MlpHead::new(
        model.embedding_len(),
        &HeadConfig {
            hidden: vec![8],
            dropout: 0.0,
        },
        &mut rng,
    )?;
    let classifier = Classifier::fusion(model, head)?;
    let batch = (0..4)
        .map(|i| Sample {
            inputs: (0..2)
                .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect(),
            label: f64::from(i % 2),
        })
        .collect();
    Ok((classifier, batch))
}
