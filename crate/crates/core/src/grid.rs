//! Uniform periodic grids and the discrete Fourier convention used
//! throughout the crate.
//!
//! A grid covers `[-X, X)^n` (`n` = 1 or 2) with `M` points per axis at
//! spacing `h = 2X/M`, nodes `x_i = -X + i h`. The discrete transform is
//! scaled to approximate the continuum transform
//!
//! ```text
//! F(xi_m) = h^n * sum_i f(x_i) exp(-i x_i . xi_m),   xi_m = pi m / X,
//! ```
//!
//! with `m` a signed index in `[-M/2, M/2)`. With this scaling the value at
//! frequency zero is the trapezoid-rule integral of `f`, and pointwise
//! products of transforms correspond to trapezoid-rule periodic convolutions.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Geometry of a periodic grid: dimension, half-width and points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMeta {
    pub dim: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl GridMeta {
    pub fn new(dim: usize, half_width: f64, points_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::Argument(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Argument(format!("half_width must be positive, got {half_width}")));
        }
        if points_per_axis < 8 || !points_per_axis.is_power_of_two() {
            return Err(Error::Argument(format!(
                "points_per_axis must be a power of two >= 8, got {points_per_axis}"
            )));
        }
        Ok(Self { dim, half_width, points_per_axis })
    }

    /// Grid spacing `h = 2X/M`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points_per_axis as f64
    }

    /// Volume of one grid cell, `h^n`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Total number of grid points, `M^n`.
    pub fn len(&self) -> usize {
        match self.dim {
            1 => self.points_per_axis,
            _ => self.points_per_axis * self.points_per_axis,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node coordinate along one axis for array index `i`.
    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Signed frequency index for array index `m` along one axis.
    fn signed_index(&self, m: usize) -> i64 {
        let half = self.points_per_axis / 2;
        if m < half {
            m as i64
        } else {
            m as i64 - self.points_per_axis as i64
        }
    }

    /// Frequency along one axis for array index `m`: `xi = pi m' / X`.
    pub fn freq(&self, m: usize) -> f64 {
        std::f64::consts::PI * self.signed_index(m) as f64 / self.half_width
    }

    /// Smallest positive resolved frequency, `pi / X`.
    pub fn freq_min(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    /// Largest resolved frequency magnitude, `pi / h` (Nyquist).
    pub fn freq_max(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Euclidean distance of a flattened grid index from the origin.
    pub fn radius(&self, flat: usize) -> f64 {
        match self.dim {
            1 => self.node(flat).abs(),
            _ => {
                let m = self.points_per_axis;
                let x = self.node(flat / m);
                let y = self.node(flat % m);
                x.hypot(y)
            }
        }
    }

    /// Euclidean frequency magnitude of a flattened spectral index.
    pub fn freq_radius(&self, flat: usize) -> f64 {
        match self.dim {
            1 => self.freq(flat).abs(),
            _ => {
                let m = self.points_per_axis;
                self.freq(flat / m).hypot(self.freq(flat % m))
            }
        }
    }

    /// Flattened index of the point reflected through the origin.
    pub fn mirror(&self, flat: usize) -> usize {
        let m = self.points_per_axis;
        match self.dim {
            1 => (m - flat) % m,
            _ => {
                let i = (m - flat / m) % m;
                let j = (m - flat % m) % m;
                i * m + j
            }
        }
    }
}

/// FFT plans bound to one grid geometry.
///
/// Plans are created once and can be shared read-only between threads;
/// scratch buffers are allocated per call.
pub struct SpectralGrid {
    meta: GridMeta,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralGrid {
    pub fn new(meta: GridMeta) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(meta.points_per_axis);
        let inverse = planner.plan_fft_inverse(meta.points_per_axis);
        Self { meta, forward, inverse }
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.meta.points_per_axis;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        match self.meta.dim {
            1 => plan.process_with_scratch(buf, &mut scratch),
            _ => {
                // Rows, transpose, rows again, transpose back.
                for row in buf.chunks_exact_mut(m) {
                    plan.process_with_scratch(row, &mut scratch);
                }
                transpose_square(buf, m);
                for row in buf.chunks_exact_mut(m) {
                    plan.process_with_scratch(row, &mut scratch);
                }
                transpose_square(buf, m);
            }
        }
    }

    /// Alternating-sign factor `(-1)^(m1+..+mn)` that recenters the
    /// transform on the `[-X, X)` node layout.
    fn checkerboard(&self, buf: &mut [Complex64]) {
        let m = self.meta.points_per_axis;
        match self.meta.dim {
            1 => {
                for (i, v) in buf.iter_mut().enumerate() {
                    if i % 2 == 1 {
                        *v = -*v;
                    }
                }
            }
            _ => {
                for (flat, v) in buf.iter_mut().enumerate() {
                    if (flat / m + flat % m) % 2 == 1 {
                        *v = -*v;
                    }
                }
            }
        }
    }

    /// Continuum-scaled forward transform of a real grid function.
    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        assert_eq!(data.len(), self.meta.len(), "grid size mismatch");
        let mut buf: Vec<Complex64> =
            data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        self.checkerboard(&mut buf);
        let scale = self.meta.cell_volume();
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }

    /// Inverse of [`SpectralGrid::forward`]; returns a complex grid function.
    pub fn inverse(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(spectrum.len(), self.meta.len(), "grid size mismatch");
        let mut buf = spectrum.to_vec();
        self.checkerboard(&mut buf);
        self.transform(&mut buf, &self.inverse);
        let scale = 1.0 / (2.0 * self.meta.half_width).powi(self.meta.dim as i32);
        for v in &mut buf {
            *v *= scale;
        }
        buf
    }

    /// Inverse transform of a real even spectrum, discarding the rounding
    /// residue on the imaginary part.
    pub fn inverse_real(&self, spectrum_re: &[f64]) -> Vec<f64> {
        let spectrum: Vec<Complex64> =
            spectrum_re.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.inverse(&spectrum).iter().map(|v| v.re).collect()
    }
}

fn transpose_square(buf: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

/// Trapezoid-rule L1 norm on the periodic grid.
pub fn l1_norm(samples: &[f64], meta: &GridMeta) -> f64 {
    meta.cell_volume() * samples.iter().map(|v| v.abs()).sum::<f64>()
}

/// Trapezoid-rule L2 norm on the periodic grid.
pub fn l2_norm(samples: &[f64], meta: &GridMeta) -> f64 {
    (meta.cell_volume() * samples.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Sup norm over grid nodes.
pub fn sup_norm(samples: &[f64]) -> f64 {
    samples.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
