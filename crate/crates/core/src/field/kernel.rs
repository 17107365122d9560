//! Mexican-hat lateral connectivity and the circular convolution that applies it.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::params::{AreaParams, GridShape};
use crate::error::{Result, ScfError};

/// Distance between two indices on a ring of length `n`.
pub fn circular_distance(i: usize, h: usize, n: usize) -> usize {
    debug_assert!(i < n && h < n);
    let d = i.abs_diff(h);
    d.min(n - d)
}

/// Difference-of-Gaussians weight for a neuron pair separated by `(dx, dy)`.
pub fn lateral_weight(dx: i64, dy: i64, params: &AreaParams) -> f64 {
    let d2 = (dx * dx + dy * dy) as f64;
    params.l_ex * (-d2 / (2.0 * params.sigma_ex * params.sigma_ex)).exp()
        - params.l_in * (-d2 / (2.0 * params.sigma_in * params.sigma_in)).exp()
}

/// Squared circular distance of the kernel entry at offset `(a, b)`.
pub(crate) fn offset_d2(shape: GridShape, a: usize, b: usize) -> f64 {
    let dx = circular_distance(a, 0, shape.rows) as f64;
    let dy = circular_distance(b, 0, shape.cols) as f64;
    dx * dx + dy * dy
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvMode {
    /// Direct double sum over all neuron pairs.
    Naive,
    /// Frequency-domain product.
    Fast,
}

/// Lateral weights indexed by circular offset: entry `(a, b)` is the weight
/// from neuron `(h, k)` to neuron `(h + a, k + b)` (mod grid size).
#[derive(Clone, Debug, PartialEq)]
pub struct LateralKernel {
    shape: GridShape,
    weights: Vec<f64>,
}

impl LateralKernel {
    pub fn from_params(shape: GridShape, params: &AreaParams) -> Self {
        let mut weights = Vec::with_capacity(shape.len());
        for a in 0..shape.rows {
            for b in 0..shape.cols {
                let dx = circular_distance(a, 0, shape.rows) as i64;
                let dy = circular_distance(b, 0, shape.cols) as i64;
                weights.push(lateral_weight(dx, dy, params));
            }
        }
        Self { shape, weights }
    }

    /// Arbitrary (not necessarily symmetric) kernel, mainly for testing the convolution.
    pub fn from_weights(shape: GridShape, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != shape.len() {
            return Err(ScfError::config(format!(
                "kernel has {} weights, grid {}x{} needs {}",
                weights.len(),
                shape.rows,
                shape.cols,
                shape.len()
            )));
        }
        Ok(Self { shape, weights })
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at circular offset `(a, b)`; negative offsets wrap.
    pub fn at(&self, a: i64, b: i64) -> f64 {
        let r = a.rem_euclid(self.shape.rows as i64) as usize;
        let c = b.rem_euclid(self.shape.cols as i64) as usize;
        self.weights[r * self.shape.cols + c]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// 2-D DFT over a fixed grid shape. The spectrum is stored column-major
/// (transposed), which is irrelevant for pointwise products.
#[derive(Clone)]
pub struct Dft2 {
    shape: GridShape,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Dft2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dft2").field("shape", &self.shape).finish()
    }
}

impl Dft2 {
    pub fn new(shape: GridShape) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            shape,
            row_fwd: planner.plan_fft_forward(shape.cols),
            row_inv: planner.plan_fft_inverse(shape.cols),
            col_fwd: planner.plan_fft_forward(shape.rows),
            col_inv: planner.plan_fft_inverse(shape.rows),
        }
    }

    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.row_fwd.process(&mut buf);
        let mut t = transpose(&buf, self.shape.rows, self.shape.cols);
        self.col_fwd.process(&mut t);
        t
    }

    pub fn inverse_real(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.col_inv.process(&mut spectrum);
        let mut buf = transpose(&spectrum, self.shape.cols, self.shape.rows);
        self.row_inv.process(&mut buf);
        let scale = 1.0 / self.shape.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

fn transpose(src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for r in 0..rows {
        for c in 0..cols {
            out[c * rows + r] = src[r * cols + c];
        }
    }
    out
}

/// A lateral kernel together with its precomputed spectrum.
#[derive(Clone, Debug)]
pub struct LateralOperator {
    kernel: LateralKernel,
    dft: Dft2,
    spectrum: Vec<Complex64>,
}

impl LateralOperator {
    pub fn new(kernel: LateralKernel) -> Self {
        let dft = Dft2::new(kernel.shape);
        let spectrum = dft.forward(&kernel.weights);
        Self {
            kernel,
            dft,
            spectrum,
        }
    }

    pub fn kernel(&self) -> &LateralKernel {
        &self.kernel
    }

    /// `out[i,j] = sum_{h,k} K[i-h, j-k] * z[h,k]` with circular indexing.
    pub fn apply(&self, activity: &[f64], mode: ConvMode) -> Result<Vec<f64>> {
        if activity.len() != self.kernel.shape.len() {
            return Err(ScfError::config(format!(
                "activity has {} entries, kernel expects {}",
                activity.len(),
                self.kernel.shape.len()
            )));
        }
        Ok(match mode {
            ConvMode::Naive => convolve_naive(&self.kernel, activity),
            ConvMode::Fast => self.apply_fast(activity),
        })
    }

    pub(crate) fn apply_fast(&self, activity: &[f64]) -> Vec<f64> {
        let mut spec = self.dft.forward(activity);
        for (s, k) in spec.iter_mut().zip(&self.spectrum) {
            *s *= k;
        }
        self.dft.inverse_real(spec)
    }

    /// Circular cross-correlation `c[a,b] = sum_{i,j} g[i,j] * z[i-a, j-b]`,
    /// i.e. the derivative of `sum(g * apply(z))` with respect to kernel entry `(a,b)`.
    pub(crate) fn correlate(&self, grad_out: &[f64], activity: &[f64]) -> Vec<f64> {
        let g = self.dft.forward(grad_out);
        let z = self.dft.forward(activity);
        let prod = g.iter().zip(&z).map(|(g, z)| g * z.conj()).collect();
        self.dft.inverse_real(prod)
    }
}

/// Reference circular convolution by direct summation.
pub fn convolve_naive(kernel: &LateralKernel, activity: &[f64]) -> Vec<f64> {
    let GridShape { rows, cols } = kernel.shape;
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let mut acc = 0.0;
            for h in 0..rows {
                let a = (i + rows - h) % rows;
                for k in 0..cols {
                    let b = (j + cols - k) % cols;
                    acc += kernel.weights[a * cols + b] * activity[h * cols + k];
                }
            }
            out[i * cols + j] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(n: usize) -> GridShape {
        GridShape::new(n, n).unwrap()
    }

    #[test]
    fn circular_distance_cases() {
        assert_eq!(circular_distance(3, 3, 17), 0);
        assert_eq!(circular_distance(0, 16, 17), 1);
        assert_eq!(circular_distance(0, 8, 17), 8);
        assert_eq!(circular_distance(16, 0, 17), 1);
        for i in 0..17 {
            for h in 0..17 {
                assert!(circular_distance(i, h, 17) <= 8);
            }
        }
    }

    #[test]
    fn lateral_weight_values() {
        let p = AreaParams::default();
        assert_eq!(lateral_weight(0, 0, &p), p.l_ex - p.l_in);

        let p = AreaParams {
            l_ex: 2.0,
            sigma_ex: 1.0,
            l_in: 1.0,
            sigma_in: 4.0,
            ..AreaParams::default()
        };
        // 2 e^{-4.5} - e^{-9/32}
        let expected = -0.732_621_608_912_522_7;
        assert!((lateral_weight(3, 0, &p) - expected).abs() < 1e-12);
    }

    #[test]
    fn surround_is_inhibitory() {
        let p = AreaParams::default();
        assert!(p.sigma_ex < p.sigma_in && p.l_ex >= p.l_in);
        for d in 3..9 {
            assert!(lateral_weight(d, d, &p) < 0.0, "d = {d}");
        }
    }

    #[test]
    fn kernel_is_point_symmetric() {
        let s = GridShape::new(17, 12).unwrap();
        let k = LateralKernel::from_params(s, &AreaParams::default());
        for a in 0..17 {
            for b in 0..12 {
                assert_eq!(k.at(a, b), k.at(-a, -b));
            }
        }
        assert_eq!(k.at(0, 0), 2.0 - 1.8);
    }

    #[test]
    fn uniform_activity_scales_kernel_sum() {
        let s = shape(17);
        let op = LateralOperator::new(LateralKernel::from_params(s, &AreaParams::default()));
        let z = vec![0.3; s.len()];
        let expected = 0.3 * op.kernel().sum();
        for mode in [ConvMode::Naive, ConvMode::Fast] {
            for v in op.apply(&z, mode).unwrap() {
                assert!((v - expected).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn impulse_response_is_shifted_kernel() {
        let s = GridShape::new(7, 5).unwrap();
        let weights: Vec<f64> = (0..35).map(|i| (i as f64 * 0.37).sin()).collect();
        let k = LateralKernel::from_weights(s, weights).unwrap();
        let op = LateralOperator::new(k.clone());
        let (i0, j0) = (2usize, 4usize);
        let mut z = vec![0.0; 35];
        z[i0 * 5 + j0] = 1.0;
        for mode in [ConvMode::Naive, ConvMode::Fast] {
            let out = op.apply(&z, mode).unwrap();
            for i in 0..7 {
                for j in 0..5 {
                    let want = k.at(i as i64 - i0 as i64, j as i64 - j0 as i64);
                    assert!((out[i * 5 + j] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn shape_mismatch_is_config_error() {
        let op = LateralOperator::new(LateralKernel::from_params(shape(5), &AreaParams::default()));
        assert!(matches!(
            op.apply(&[0.0; 24], ConvMode::Fast),
            Err(ScfError::Config(_))
        ));
    }

    #[test]
    fn correlate_matches_direct_sum() {
        let s = GridShape::new(4, 6).unwrap();
        let op = LateralOperator::new(LateralKernel::from_params(s, &AreaParams::default()));
        let g: Vec<f64> = (0..24).map(|i| (i as f64).cos()).collect();
        let z: Vec<f64> = (0..24).map(|i| (i as f64 * 1.7).sin()).collect();
        let c = op.correlate(&g, &z);
        for a in 0..4 {
            for b in 0..6 {
                let mut want = 0.0;
                for i in 0..4 {
                    for j in 0..6 {
                        want += g[i * 6 + j] * z[((i + 4 - a) % 4) * 6 + (j + 6 - b) % 6];
                    }
                }
                assert!((c[a * 6 + b] - want).abs() < 1e-10);
            }
        }
    }
}
