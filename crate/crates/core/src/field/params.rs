use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScfError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(ScfError::config(format!("grid must be non-empty, got {rows}x{cols}")));
        }
        Ok(Self { rows, cols })
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }
}

/// Dynamics and lateral-connectivity constants of one neural area.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AreaParams {
    /// Response time constant; one update moves `1/tau` of the way to the activation.
    pub tau: f64,
    /// Input value at the activation midpoint.
    pub theta: f64,
    /// Activation slope.
    pub slope: f64,
    pub l_ex: f64,
    pub l_in: f64,
    pub sigma_ex: f64,
    pub sigma_in: f64,
}

impl Default for AreaParams {
    fn default() -> Self {
        Self {
            tau: 3.0,
            theta: 0.5,
            slope: 10.0,
            l_ex: 2.0,
            l_in: 1.8,
            sigma_ex: 1.0,
            sigma_in: 4.0,
        }
    }
}

impl AreaParams {
    /// Same dynamics with lateral connections switched off.
    pub fn without_lateral(self) -> Self {
        Self {
            l_ex: 0.0,
            l_in: 0.0,
            ..self
        }
    }

    pub fn validate(&self, area: &str) -> Result<()> {
        let fields = [
            ("tau", self.tau),
            ("theta", self.theta),
            ("slope", self.slope),
            ("l_ex", self.l_ex),
            ("l_in", self.l_in),
            ("sigma_ex", self.sigma_ex),
            ("sigma_in", self.sigma_in),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(ScfError::config(format!("{area}: {name} is not finite ({v})")));
        }
        if self.tau < 1.0 {
            return Err(ScfError::config(format!("{area}: tau must be >= 1, got {}", self.tau)));
        }
        if self.sigma_ex <= 0.0 || self.sigma_in <= 0.0 {
            return Err(ScfError::config(format!(
                "{area}: lateral spreads must be positive, got sigma_ex={} sigma_in={}",
                self.sigma_ex, self.sigma_in
            )));
        }
        Ok(())
    }
}

/// Linear map from a stimulus vector to one scalar drive per neuron.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceptiveField {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    pub trainable: bool,
}

impl ReceptiveField {
    pub fn zeros(neurons: usize, stimulus_dim: usize) -> Self {
        Self {
            rows: neurons,
            cols: stimulus_dim,
            weights: vec![0.0; neurons * stimulus_dim],
            trainable: true,
        }
    }

    pub fn uniform<R: Rng>(neurons: usize, stimulus_dim: usize, scale: f64, rng: &mut R) -> Self {
        let weights = (0..neurons * stimulus_dim)
            .map(|_| rng.random_range(-scale..=scale))
            .collect();
        Self {
            rows: neurons,
            cols: stimulus_dim,
            weights,
            trainable: true,
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(ScfError::config("receptive field rows differ in length"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            weights: rows.into_iter().flatten().collect(),
            trainable: true,
        })
    }

    pub fn neurons(&self) -> usize {
        self.rows
    }

    pub fn stimulus_dim(&self) -> usize {
        self.cols
    }

    pub fn row(&self, neuron: usize) -> &[f64] {
        &self.weights[neuron * self.cols..(neuron + 1) * self.cols]
    }

    pub fn row_mut(&mut self, neuron: usize) -> &mut [f64] {
        &mut self.weights[neuron * self.cols..(neuron + 1) * self.cols]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// One drive per neuron: `r[n] = dot(row n, stimulus)`.
    pub fn project(&self, stimulus: &[f64]) -> Result<Vec<f64>> {
        if stimulus.len() != self.cols {
            return Err(ScfError::input(format!(
                "stimulus has dimension {}, receptive field expects {}",
                stimulus.len(),
                self.cols
            )));
        }
        if self.cols == 0 {
            return Ok(vec![0.0; self.rows]);
        }
        Ok(self
            .weights
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(stimulus).map(|(w, x)| w * x).sum())
            .collect())
    }
}

/// Which parameter groups besides the receptive fields are optimized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainableGroups {
    pub feedback: bool,
    pub gains: bool,
    /// `tau`, `theta`, `slope` of every area.
    pub dynamics: bool,
    /// `l_ex`, `l_in`, `sigma_ex`, `sigma_in` of every area.
    pub lateral: bool,
}

impl TrainableGroups {
    pub fn all() -> Self {
        Self {
            feedback: true,
            gains: true,
            dynamics: true,
            lateral: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnimodalArea {
    pub name: String,
    pub params: AreaParams,
    pub receptive_field: ReceptiveField,
    /// Strength of the multimodal-to-unimodal feedback synapse.
    pub feedback: f64,
    /// Strength of this area's projection onto the multimodal area.
    pub gain: f64,
}

/// Every parameter of a fusion layer. Also used as the gradient container,
/// with each field holding the derivative of the loss with respect to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfParams {
    pub shape: GridShape,
    pub steps: usize,
    pub unimodal: Vec<UnimodalArea>,
    pub multimodal: AreaParams,
    pub trainable: TrainableGroups,
}

/// Model-construction settings; stimulus dimensions come from the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldConfig {
    pub rows: usize,
    pub cols: usize,
    pub steps: usize,
    pub unimodal: AreaParams,
    pub multimodal: AreaParams,
    pub gain: f64,
    pub feedback: f64,
    /// Receptive-field weights start uniform in `[-rf_init, rf_init]`.
    pub rf_init: f64,
    pub trainable: TrainableGroups,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            rows: 17,
            cols: 17,
            steps: 15,
            unimodal: AreaParams::default(),
            multimodal: AreaParams::default(),
            gain: 10.0,
            feedback: 1.0,
            rf_init: 0.05,
            trainable: TrainableGroups::default(),
        }
    }
}

impl FieldConfig {
    pub fn validate(&self) -> Result<()> {
        GridShape::new(self.rows, self.cols)?;
        self.unimodal.validate("unimodal")?;
        self.multimodal.validate("multimodal")?;
        for (name, v) in [("gain", self.gain), ("feedback", self.feedback), ("rf_init", self.rf_init)] {
            if !v.is_finite() {
                return Err(ScfError::config(format!("field.{name} must be finite, got {v}")));
            }
        }
        if self.rf_init < 0.0 {
            return Err(ScfError::config(format!("field.rf_init must be >= 0, got {}", self.rf_init)));
        }
        Ok(())
    }
}

impl ScfParams {
    /// Builds parameters for the given `(modality name, stimulus dimension)` list.
    pub fn from_config<R: Rng>(
        config: &FieldConfig,
        modalities: &[(&str, usize)],
        rng: &mut R,
    ) -> Result<Self> {
        let shape = GridShape::new(config.rows, config.cols)?;
        let unimodal = modalities
            .iter()
            .map(|&(name, dim)| UnimodalArea {
                name: name.to_string(),
                params: config.unimodal,
                receptive_field: ReceptiveField::uniform(shape.len(), dim, config.rf_init, rng),
                feedback: config.feedback,
                gain: config.gain,
            })
            .collect();
        let params = Self {
            shape,
            steps: config.steps,
            unimodal,
            multimodal: config.multimodal,
            trainable: config.trainable,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        GridShape::new(self.shape.rows, self.shape.cols)?;
        if self.unimodal.is_empty() {
            return Err(ScfError::config("a fusion layer needs at least one unimodal area"));
        }
        for area in &self.unimodal {
            area.params.validate(&area.name)?;
            if area.receptive_field.neurons() != self.shape.len() {
                return Err(ScfError::config(format!(
                    "{}: receptive field has {} rows, grid has {} neurons",
                    area.name,
                    area.receptive_field.neurons(),
                    self.shape.len()
                )));
            }
            if !area.feedback.is_finite() || !area.gain.is_finite() {
                return Err(ScfError::config(format!("{}: non-finite coupling", area.name)));
            }
            if area.receptive_field.weights().iter().any(|w| !w.is_finite()) {
                return Err(ScfError::config(format!("{}: non-finite receptive field", area.name)));
            }
        }
        self.multimodal.validate("multimodal")
    }

    /// Same structure with every numeric field set to zero.
    pub fn zeros_like(&self) -> Self {
        let zero_area = AreaParams {
            tau: 0.0,
            theta: 0.0,
            slope: 0.0,
            l_ex: 0.0,
            l_in: 0.0,
            sigma_ex: 0.0,
            sigma_in: 0.0,
        };
        Self {
            shape: self.shape,
            steps: self.steps,
            unimodal: self
                .unimodal
                .iter()
                .map(|a| UnimodalArea {
                    name: a.name.clone(),
                    params: zero_area,
                    receptive_field: ReceptiveField {
                        trainable: a.receptive_field.trainable,
                        ..ReceptiveField::zeros(
                            a.receptive_field.neurons(),
                            a.receptive_field.stimulus_dim(),
                        )
                    },
                    feedback: 0.0,
                    gain: 0.0,
                })
                .collect(),
            multimodal: zero_area,
            trainable: self.trainable,
        }
    }

    /// Visits every trainable scalar in a fixed order. The order is shared by
    /// parameters and gradients, so flattened vectors line up.
    pub fn visit_trainable(&mut self, mut f: impl FnMut(&mut f64)) {
        let groups = self.trainable;
        let visit_area = |p: &mut AreaParams, f: &mut dyn FnMut(&mut f64)| {
            if groups.dynamics {
                f(&mut p.tau);
                f(&mut p.theta);
                f(&mut p.slope);
            }
            if groups.lateral {
                f(&mut p.l_ex);
                f(&mut p.l_in);
                f(&mut p.sigma_ex);
                f(&mut p.sigma_in);
            }
        };
        for area in &mut self.unimodal {
            if area.receptive_field.trainable {
                area.receptive_field.weights_mut().iter_mut().for_each(&mut f);
            }
            if groups.feedback {
                f(&mut area.feedback);
            }
            if groups.gains {
                f(&mut area.gain);
            }
            visit_area(&mut area.params, &mut f);
        }
        visit_area(&mut self.multimodal, &mut f);
    }

    pub fn trainable_len(&self) -> usize {
        let mut n = 0;
        self.clone().visit_trainable(|_| n += 1);
        n
    }

    pub fn flatten_trainable(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.clone().visit_trainable(|v| out.push(*v));
        out
    }

    /// Overwrites trainable scalars from `values` (same order as [`Self::flatten_trainable`]).
    pub fn assign_trainable(&mut self, values: &[f64]) -> Result<()> {
        let expected = self.trainable_len();
        if values.len() != expected {
            return Err(ScfError::config(format!(
                "expected {expected} trainable values, got {}",
                values.len()
            )));
        }
        let mut it = values.iter();
        self.visit_trainable(|v| *v = *it.next().expect("length checked"));
        Ok(())
    }

    /// Pulls trained scalars back into their valid ranges.
    pub(crate) fn project_to_valid(&mut self) {
        let fix = |p: &mut AreaParams| {
            p.tau = p.tau.max(1.0);
            p.sigma_ex = p.sigma_ex.max(1e-3);
            p.sigma_in = p.sigma_in.max(1e-3);
        };
        for a in &mut self.unimodal {
            fix(&mut a.params);
        }
        fix(&mut self.multimodal);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(groups: TrainableGroups) -> ScfParams {
        let cfg = FieldConfig {
            rows: 3,
            cols: 4,
            trainable: groups,
            ..FieldConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        ScfParams::from_config(&cfg, &[("audio", 2), ("visual", 5)], &mut rng).unwrap()
    }

    #[test]
    fn rf_init_is_bounded() {
        let p = params(TrainableGroups::default());
        for a in &p.unimodal {
            assert_eq!(a.receptive_field.neurons(), 12);
            assert!(a.receptive_field.weights().iter().all(|w| w.abs() <= 0.05));
        }
    }

    #[test]
    fn trainable_len_counts_groups() {
        assert_eq!(params(TrainableGroups::default()).trainable_len(), 12 * 7);
        // + 2 feedback + 2 gains + 3 areas * 7 scalars
        assert_eq!(params(TrainableGroups::all()).trainable_len(), 12 * 7 + 4 + 21);
    }

    #[test]
    fn flatten_assign_round_trip() {
        let p = params(TrainableGroups::all());
        let mut flat = p.flatten_trainable();
        flat.iter_mut().for_each(|v| *v += 1.0);
        let mut q = p.clone();
        q.assign_trainable(&flat).unwrap();
        assert_eq!(q.flatten_trainable(), flat);
        assert_eq!(q.multimodal.tau, p.multimodal.tau + 1.0);
        assert!(q.assign_trainable(&flat[1..]).is_err());
    }

    #[test]
    fn projection_checks_dimension() {
        let rf = ReceptiveField::from_rows(vec![vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        assert_eq!(rf.project(&[1.0, 3.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(rf.project(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(rf.project(&[1.0]), Err(ScfError::Input(_))));
    }

    #[test]
    fn validation_rejects_bad_ranges() {
        let mut p = params(TrainableGroups::default());
        p.multimodal.tau = 0.5;
        assert!(p.validate().is_err());
        let mut p = params(TrainableGroups::default());
        p.unimodal[0].params.sigma_in = 0.0;
        assert!(p.validate().is_err());
        let mut p = params(TrainableGroups::default());
        p.unimodal.clear();
        assert!(p.validate().is_err());
    }
}
