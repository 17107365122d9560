//! Reverse-mode differentiation through the unrolled field updates.
//!
//! Per area `x` and step `n`:
//!
//! ```text
//! a[n]   = logistic(p (u[n] - theta))
//! z[n+1] = z[n] + (a[n] - z[n]) / tau
//! ```
//!
//! so with `g = dL/dz[n+1]` the input sensitivity is
//! `delta = g / tau * p * a (1 - a)` and `dL/dz[n]` collects `g (1 - 1/tau)`
//! plus every path by which `z[n]` enters some `u[n]`.

use crate::field::kernel::offset_d2;
use crate::field::model::Trace;
use crate::field::{AreaParams, ScfModel, ScfParams};

/// Adds `dL/dparams` for one sample into `grads`, given `dL/d(embedding)`.
pub(crate) fn backprop(
    model: &ScfModel,
    trace: &Trace,
    inputs: &[&[f64]],
    d_embedding: &[f64],
    grads: &mut ScfParams,
) {
    let params = model.params();
    let s_count = params.unimodal.len();
    let m = s_count;
    let cells = params.shape.len();
    let lateral_trainable = params.trainable.lateral;

    let area_params: Vec<&AreaParams> = params
        .unimodal
        .iter()
        .map(|a| &a.params)
        .chain(std::iter::once(&params.multimodal))
        .collect();

    let mut g: Vec<Vec<f64>> = vec![vec![0.0; cells]; s_count + 1];
    g[m].copy_from_slice(d_embedding);

    // sum over steps of delta, per unimodal area (receptive fields see constant stimuli)
    let mut drive_sens = vec![vec![0.0; cells]; s_count];
    let mut kernel_sens: Vec<Vec<f64>> = if lateral_trainable {
        vec![vec![0.0; cells]; s_count + 1]
    } else {
        Vec::new()
    };
    let mut area_grads = vec![AreaGrad::default(); s_count + 1];
    let mut feedback_grads = vec![0.0; s_count];
    let mut gain_grads = vec![0.0; s_count];

    for n in (0..trace.inputs.len()).rev() {
        let z = &trace.states[n];
        let mut deltas = Vec::with_capacity(s_count + 1);
        let mut next_g = Vec::with_capacity(s_count + 1);
        for x in 0..=s_count {
            let p = area_params[x];
            let a = &trace.acts[n][x];
            let u = &trace.inputs[n][x];
            let gx = &g[x];
            let inv_tau = 1.0 / p.tau;
            let mut delta = vec![0.0; cells];
            let ag = &mut area_grads[x];
            for i in 0..cells {
                let da = gx[i] * inv_tau;
                let dphi = a[i] * (1.0 - a[i]);
                delta[i] = da * p.slope * dphi;
                ag.tau -= gx[i] * (a[i] - z[x][i]) * inv_tau * inv_tau;
                ag.theta -= delta[i];
                ag.slope += da * dphi * (u[i] - p.theta);
            }
            next_g.push(gx.iter().map(|g| g * (1.0 - inv_tau)).collect::<Vec<f64>>());
            deltas.push(delta);
        }

        for x in 0..=s_count {
            // kernels are point-symmetric, so the transposed convolution is the convolution itself
            let back = model.operator(x).apply_fast(&deltas[x]);
            for (ng, b) in next_g[x].iter_mut().zip(&back) {
                *ng += b;
            }
            if lateral_trainable {
                let c = model.operator(x).correlate(&deltas[x], &z[x]);
                for (k, c) in kernel_sens[x].iter_mut().zip(&c) {
                    *k += c;
                }
            }
        }

        for s in 0..s_count {
            let unit = &params.unimodal[s];
            let (head, tail) = next_g.split_at_mut(m);
            for i in 0..cells {
                drive_sens[s][i] += deltas[s][i];
                // feedback: u_s += F_s z_m
                tail[0][i] += unit.feedback * deltas[s][i];
                feedback_grads[s] += deltas[s][i] * z[m][i];
                // gain: u_m += k_s z_s
                head[s][i] += unit.gain * deltas[m][i];
                gain_grads[s] += deltas[m][i] * z[s][i];
            }
        }
        g = next_g;
    }

    for (s, area) in grads.unimodal.iter_mut().enumerate() {
        if area.receptive_field.trainable {
            let stim = inputs[s];
            for (i, sens) in drive_sens[s].iter().enumerate() {
                if *sens != 0.0 {
                    for (w, x) in area.receptive_field.row_mut(i).iter_mut().zip(stim) {
                        *w += sens * x;
                    }
                }
            }
        }
        area.feedback += feedback_grads[s];
        area.gain += gain_grads[s];
        area_grads[s].add_to(&mut area.params);
    }
    area_grads[m].add_to(&mut grads.multimodal);

    if lateral_trainable {
        let shape = params.shape;
        for x in 0..=s_count {
            let p = area_params[x];
            let target = if x < m {
                &mut grads.unimodal[x].params
            } else {
                &mut grads.multimodal
            };
            for a in 0..shape.rows {
                for b in 0..shape.cols {
                    let sens = kernel_sens[x][shape.index(a, b)];
                    let d2 = offset_d2(shape, a, b);
                    let e_ex = (-d2 / (2.0 * p.sigma_ex * p.sigma_ex)).exp();
                    let e_in = (-d2 / (2.0 * p.sigma_in * p.sigma_in)).exp();
                    target.l_ex += sens * e_ex;
                    target.l_in -= sens * e_in;
                    target.sigma_ex += sens * p.l_ex * e_ex * d2 / p.sigma_ex.powi(3);
                    target.sigma_in -= sens * p.l_in * e_in * d2 / p.sigma_in.powi(3);
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct AreaGrad {
    tau: f64,
    theta: f64,
    slope: f64,
}

impl AreaGrad {
    fn add_to(&self, p: &mut AreaParams) {
        p.tau += self.tau;
        p.theta += self.theta;
        p.slope += self.slope;
    }
}
