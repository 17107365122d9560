use serde::{Deserialize, Serialize};

use super::kernel::{ConvMode, LateralKernel, LateralOperator};
use super::params::{AreaParams, GridShape, ScfParams};
use crate::error::{Result, ScfError};

/// Numerically stable logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Sigmoidal neuron response `logistic(slope * (u - theta))`.
pub fn activation(u: f64, params: &AreaParams) -> f64 {
    logistic(params.slope * (u - params.theta))
}

/// Activity grid of one area, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AreaState {
    pub shape: GridShape,
    pub activity: Vec<f64>,
}

impl AreaState {
    pub fn zeros(shape: GridShape) -> Self {
        Self {
            shape,
            activity: vec![0.0; shape.len()],
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.activity[self.shape.index(row, col)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfState {
    pub unimodal: Vec<AreaState>,
    pub multimodal: AreaState,
}

/// One embedding presented to the unimodal area named `modality`.
#[derive(Clone, Debug, PartialEq)]
pub struct Stimulus {
    pub modality: String,
    pub values: Vec<f64>,
}

impl Stimulus {
    pub fn new(modality: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            modality: modality.into(),
            values,
        }
    }

    /// An absent modality: a zero vector of the right length.
    pub fn absent(modality: impl Into<String>, dim: usize) -> Self {
        Self::new(modality, vec![0.0; dim])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AreaId {
    Unimodal(usize),
    Multimodal,
}

/// Feedback drive onto a unimodal area: position-wise scaling of the multimodal activity.
pub fn feedback_input(strength: f64, multimodal: &AreaState) -> Vec<f64> {
    multimodal.activity.iter().map(|z| strength * z).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionOutput {
    /// Final multimodal activity, row-major.
    pub embedding: Vec<f64>,
    pub state: ScfState,
}

/// Recorded forward pass; area index `s < S` is unimodal, `S` is multimodal.
#[derive(Clone, Debug)]
pub(crate) struct Trace {
    pub drives: Vec<Vec<f64>>,
    /// `states[n][area]` for `n = 0..=T`.
    pub states: Vec<Vec<Vec<f64>>>,
    /// Composite inputs `u[n]` for `n = 0..T`.
    pub inputs: Vec<Vec<Vec<f64>>>,
    /// Activations `phi(p (u[n] - theta))`.
    pub acts: Vec<Vec<Vec<f64>>>,
}

/// A fusion layer ready for evaluation: parameters plus their lateral operators.
#[derive(Clone, Debug)]
pub struct ScfModel {
    params: ScfParams,
    lateral: Vec<LateralOperator>,
    mode: ConvMode,
}

impl ScfModel {
    pub fn new(params: ScfParams) -> Result<Self> {
        params.validate()?;
        let lateral = build_operators(&params);
        Ok(Self {
            params,
            lateral,
            mode: ConvMode::Fast,
        })
    }

    pub fn with_conv_mode(mut self, mode: ConvMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn params(&self) -> &ScfParams {
        &self.params
    }

    pub fn into_params(self) -> ScfParams {
        self.params
    }

    /// Replaces the parameters and rebuilds the lateral operators.
    pub fn set_params(&mut self, params: ScfParams) -> Result<()> {
        params.validate()?;
        self.lateral = build_operators(&params);
        self.params = params;
        Ok(())
    }

    pub fn shape(&self) -> GridShape {
        self.params.shape
    }

    pub fn steps(&self) -> usize {
        self.params.steps
    }

    pub fn embedding_len(&self) -> usize {
        self.params.shape.len()
    }

    pub fn modalities(&self) -> impl Iterator<Item = (&str, usize)> {
        self.params
            .unimodal
            .iter()
            .map(|a| (a.name.as_str(), a.receptive_field.stimulus_dim()))
    }

    fn area_params(&self, area: AreaId) -> &AreaParams {
        match area {
            AreaId::Unimodal(s) => &self.params.unimodal[s].params,
            AreaId::Multimodal => &self.params.multimodal,
        }
    }

    pub(crate) fn operator(&self, area: usize) -> &LateralOperator {
        &self.lateral[area]
    }

    pub fn lateral_kernel(&self, area: AreaId) -> &LateralKernel {
        match area {
            AreaId::Unimodal(s) => self.lateral[s].kernel(),
            AreaId::Multimodal => self.lateral[self.params.unimodal.len()].kernel(),
        }
    }

    pub fn initial_state(&self) -> ScfState {
        ScfState {
            unimodal: vec![AreaState::zeros(self.shape()); self.params.unimodal.len()],
            multimodal: AreaState::zeros(self.shape()),
        }
    }

    /// Receptive-field drive `r^s` of unimodal area `area` for one stimulus.
    pub fn external_stimulus(&self, area: usize, stimulus: &[f64]) -> Result<Vec<f64>> {
        self.params
            .unimodal
            .get(area)
            .ok_or_else(|| ScfError::config(format!("no unimodal area {area}")))?
            .receptive_field
            .project(stimulus)
    }

    /// Resolves named stimuli into per-area drives, in area order.
    pub fn drives(&self, stimuli: &[Stimulus]) -> Result<Vec<Vec<f64>>> {
        if stimuli.len() != self.params.unimodal.len() {
            return Err(ScfError::input(format!(
                "expected {} stimuli, got {}",
                self.params.unimodal.len(),
                stimuli.len()
            )));
        }
        self.params
            .unimodal
            .iter()
            .enumerate()
            .map(|(s, area)| {
                let stim = stimuli
                    .iter()
                    .find(|st| st.modality == area.name)
                    .ok_or_else(|| ScfError::input(format!("missing stimulus for '{}'", area.name)))?;
                self.external_stimulus(s, &stim.values)
            })
            .collect()
    }

    fn drives_from_slices(&self, inputs: &[&[f64]]) -> Result<Vec<Vec<f64>>> {
        if inputs.len() != self.params.unimodal.len() {
            return Err(ScfError::input(format!(
                "expected {} stimuli, got {}",
                self.params.unimodal.len(),
                inputs.len()
            )));
        }
        inputs
            .iter()
            .enumerate()
            .map(|(s, x)| self.external_stimulus(s, x))
            .collect()
    }

    /// Composite input `u` of one area given the current state and the receptive-field drives.
    pub fn composite_input(&self, area: AreaId, state: &ScfState, drives: &[Vec<f64>]) -> Vec<f64> {
        match area {
            AreaId::Unimodal(s) => {
                let unit = &self.params.unimodal[s];
                let mut u = self.lateral[s].apply(&state.unimodal[s].activity, self.mode).expect("shape");
                for ((u, r), zm) in u.iter_mut().zip(&drives[s]).zip(&state.multimodal.activity) {
                    *u += r + unit.feedback * zm;
                }
                u
            }
            AreaId::Multimodal => {
                let m = self.params.unimodal.len();
                let mut u = self.lateral[m].apply(&state.multimodal.activity, self.mode).expect("shape");
                for (unit, z) in self.params.unimodal.iter().zip(&state.unimodal) {
                    for (u, z) in u.iter_mut().zip(&z.activity) {
                        *u += unit.gain * z;
                    }
                }
                u
            }
        }
    }

    /// Inputs and activations of every area from the same pre-step state.
    fn evaluate(&self, state: &ScfState, drives: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let areas = (0..self.params.unimodal.len())
            .map(AreaId::Unimodal)
            .chain(std::iter::once(AreaId::Multimodal));
        areas
            .map(|area| {
                let u = self.composite_input(area, state, drives);
                let p = self.area_params(area);
                let a = u.iter().map(|&u| activation(u, p)).collect();
                (u, a)
            })
            .unzip()
    }

    fn relax(&self, state: &ScfState, acts: &[Vec<f64>]) -> ScfState {
        let update = |z: &AreaState, a: &[f64], p: &AreaParams| AreaState {
            shape: z.shape,
            activity: z
                .activity
                .iter()
                .zip(a)
                .map(|(z, a)| ((p.tau - 1.0) * z + a) / p.tau)
                .collect(),
        };
        let s = self.params.unimodal.len();
        ScfState {
            unimodal: (0..s)
                .map(|i| update(&state.unimodal[i], &acts[i], &self.params.unimodal[i].params))
                .collect(),
            multimodal: update(&state.multimodal, &acts[s], &self.params.multimodal),
        }
    }

    /// One synchronous update of every area.
    pub fn step(&self, state: &ScfState, drives: &[Vec<f64>]) -> ScfState {
        let (_, acts) = self.evaluate(state, drives);
        self.relax(state, &acts)
    }

    /// Runs the configured number of steps from rest with the stimuli clamped.
    pub fn run_forward(&self, stimuli: &[Stimulus]) -> Result<FusionOutput> {
        let drives = self.drives(stimuli)?;
        let state = self.settle(&drives, |_| {});
        Ok(FusionOutput {
            embedding: state.multimodal.activity.clone(),
            state,
        })
    }

    /// Like [`Self::run_forward`] but returns every intermediate state, starting with the initial one.
    pub fn run_with_snapshots(&self, stimuli: &[Stimulus]) -> Result<Vec<ScfState>> {
        let drives = self.drives(stimuli)?;
        let mut snapshots = Vec::with_capacity(self.steps() + 1);
        let last = self.settle(&drives, |s| snapshots.push(s.clone()));
        snapshots.push(last);
        Ok(snapshots)
    }

    /// Fused embedding for stimuli given in area order.
    pub fn embed(&self, inputs: &[&[f64]]) -> Result<Vec<f64>> {
        let drives = self.drives_from_slices(inputs)?;
        Ok(self.settle(&drives, |_| {}).multimodal.activity)
    }

    fn settle(&self, drives: &[Vec<f64>], mut observe: impl FnMut(&ScfState)) -> ScfState {
        let mut state = self.initial_state();
        for _ in 0..self.steps() {
            observe(&state);
            state = self.step(&state, drives);
        }
        state
    }

    pub(crate) fn trace(&self, inputs: &[&[f64]]) -> Result<Trace> {
        let drives = self.drives_from_slices(inputs)?;
        let flatten = |s: &ScfState| {
            let mut v: Vec<Vec<f64>> = s.unimodal.iter().map(|a| a.activity.clone()).collect();
            v.push(s.multimodal.activity.clone());
            v
        };
        let mut state = self.initial_state();
        let mut trace = Trace {
            drives: Vec::new(),
            states: vec![flatten(&state)],
            inputs: Vec::with_capacity(self.steps()),
            acts: Vec::with_capacity(self.steps()),
        };
        for _ in 0..self.steps() {
            let (u, a) = self.evaluate(&state, &drives);
            state = self.relax(&state, &a);
            trace.inputs.push(u);
            trace.acts.push(a);
            trace.states.push(flatten(&state));
        }
        trace.drives = drives;
        Ok(trace)
    }
}

fn build_operators(params: &ScfParams) -> Vec<LateralOperator> {
    params
        .unimodal
        .iter()
        .map(|a| &a.params)
        .chain(std::iter::once(&params.multimodal))
        .map(|p| LateralOperator::new(LateralKernel::from_params(params.shape, p)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::params::{FieldConfig, ReceptiveField};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(cfg: FieldConfig, dims: &[(&str, usize)]) -> ScfModel {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        ScfModel::new(ScfParams::from_config(&cfg, dims, &mut rng).unwrap()).unwrap()
    }

    fn quiet_config() -> FieldConfig {
        let p = AreaParams::default().without_lateral();
        FieldConfig {
            rows: 5,
            cols: 5,
            unimodal: p,
            multimodal: p,
            ..FieldConfig::default()
        }
    }

    #[test]
    fn activation_cases() {
        let p = AreaParams::default();
        assert_eq!(activation(p.theta, &p), 0.5);
        let unit = AreaParams {
            slope: 1.0,
            theta: 0.0,
            ..p
        };
        assert!((activation(0.5, &unit) - 0.622_459_331_201_854_6).abs() < 1e-15);
        assert!(activation(20.0, &unit) < 1.0 && activation(-20.0, &unit) > 0.0);
        assert!(logistic(1e6) == 1.0 && logistic(-1e6) == 0.0);
    }

    #[test]
    fn feedback_scales_multimodal_activity() {
        let shape = GridShape::new(2, 2).unwrap();
        let zm = AreaState {
            shape,
            activity: vec![0.6, 0.2, 0.0, 1.0],
        };
        assert_eq!(feedback_input(0.0, &zm), vec![0.0; 4]);
        assert_eq!(feedback_input(1.0, &zm), zm.activity);
        assert!((feedback_input(0.5, &zm)[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn multimodal_input_without_gains_is_lateral_only() {
        let mut cfg = quiet_config();
        cfg.gain = 0.0;
        cfg.multimodal = AreaParams::default();
        let m = model(cfg, &[("audio", 3), ("visual", 3)]);
        let mut state = m.initial_state();
        state.unimodal[0].activity.iter_mut().for_each(|z| *z = 0.9);
        state.multimodal.activity[3] = 0.7;
        let drives = vec![vec![0.0; 25]; 2];
        let u = m.composite_input(AreaId::Multimodal, &state, &drives);
        let l = m
            .operator(2)
            .apply(&state.multimodal.activity, ConvMode::Naive)
            .unwrap();
        for (a, b) in u.iter().zip(&l) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn unimodal_input_is_component_sum() {
        let mut cfg = quiet_config();
        cfg.feedback = 0.0;
        let m = model(cfg.clone(), &[("audio", 3)]);
        let state = m.initial_state();
        let u = m.composite_input(AreaId::Unimodal(0), &state, &[vec![0.0; 25]]);
        assert!(u.iter().all(|&v| v == 0.0));

        // r = 0.2, l = 0.1 (point kernel of weight 1 on z = 0.1), f = 0.25 * 0.2
        let mut cfg = cfg;
        cfg.feedback = 0.25;
        cfg.unimodal.l_ex = 1.0;
        cfg.unimodal.sigma_ex = 1e-3;
        let m = model(cfg, &[("audio", 3)]);
        let mut state = m.initial_state();
        state.multimodal.activity.iter_mut().for_each(|z| *z = 0.2);
        state.unimodal[0].activity.iter_mut().for_each(|z| *z = 0.1);
        let u = m.composite_input(AreaId::Unimodal(0), &state, &[vec![0.2; 25]]);
        for u in u {
            assert!((u - 0.35).abs() < 1e-12);
        }
    }

    #[test]
    fn step_with_unit_tau_is_memoryless() {
        let mut cfg = quiet_config();
        cfg.unimodal.tau = 1.0;
        cfg.multimodal.tau = 1.0;
        let m = model(cfg, &[("audio", 2)]);
        let mut state = m.initial_state();
        state.unimodal[0].activity.iter_mut().for_each(|z| *z = 0.77);
        let drives = vec![vec![0.3; 25]];
        let next = m.step(&state, &drives);
        let (_, acts) = m.evaluate(&state, &drives);
        assert_eq!(next.unimodal[0].activity, acts[0]);
    }

    #[test]
    fn step_with_tau_two_halves_activation() {
        let mut cfg = quiet_config();
        cfg.unimodal.tau = 2.0;
        cfg.feedback = 0.0;
        let m = model(cfg, &[("audio", 2)]);
        let p = m.params().unimodal[0].params;
        // drive chosen so that phi = 0.8
        let u = p.theta + (0.8f64 / 0.2).ln() / p.slope;
        let next = m.step(&m.initial_state(), &[vec![u; 25]]);
        for z in &next.unimodal[0].activity {
            assert!((z - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn silent_model_is_spatially_uniform() {
        let mut cfg = quiet_config();
        cfg.feedback = 0.0;
        let mut m = model(cfg, &[("audio", 3), ("visual", 2)]);
        let mut params = m.params().clone();
        for a in &mut params.unimodal {
            a.receptive_field = ReceptiveField::zeros(25, a.receptive_field.stimulus_dim());
        }
        m.set_params(params).unwrap();
        let out = m
            .run_forward(&[
                Stimulus::new("audio", vec![1.0, -2.0, 0.5]),
                Stimulus::new("visual", vec![3.0, 0.1]),
            ])
            .unwrap();

        // every unimodal neuron follows the same scalar recursion
        let p = m.params().unimodal[0].params;
        let q = m.params().multimodal;
        let (mut zu, mut zm) = (0.0f64, 0.0f64);
        for _ in 0..m.steps() {
            let um = 2.0 * m.params().unimodal[0].gain * zu;
            let next_u = ((p.tau - 1.0) * zu + activation(0.0, &p)) / p.tau;
            zm = ((q.tau - 1.0) * zm + activation(um, &q)) / q.tau;
            zu = next_u;
        }
        for z in &out.embedding {
            assert!((z - zm).abs() < 1e-12);
        }
        for z in &out.state.unimodal[0].activity {
            assert!((z - zu).abs() < 1e-12);
        }
    }

    #[test]
    fn stimulus_validation() {
        let m = model(quiet_config(), &[("audio", 3), ("visual", 2)]);
        assert!(m.run_forward(&[Stimulus::new("audio", vec![0.0; 3])]).is_err());
        assert!(m
            .run_forward(&[Stimulus::absent("audio", 3), Stimulus::absent("video", 2)])
            .is_err());
        assert!(m
            .run_forward(&[Stimulus::absent("audio", 4), Stimulus::absent("visual", 2)])
            .is_err());
        assert!(m
            .run_forward(&[Stimulus::absent("visual", 2), Stimulus::absent("audio", 3)])
            .is_ok());
    }

    #[test]
    fn snapshots_end_at_forward_state() {
        let m = model(FieldConfig {
            rows: 6,
            cols: 6,
            ..FieldConfig::default()
        }, &[("audio", 4)]);
        let stim = [Stimulus::new("audio", vec![0.5, -1.0, 2.0, 0.0])];
        let snaps = m.run_with_snapshots(&stim).unwrap();
        assert_eq!(snaps.len(), m.steps() + 1);
        assert_eq!(snaps[0], m.initial_state());
        assert_eq!(snaps.last().unwrap(), &m.run_forward(&stim).unwrap().state);
    }
}
