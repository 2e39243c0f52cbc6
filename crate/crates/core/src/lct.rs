//! Discrete linear canonical transform: kernel evaluation and the dense
//! quadrature apply used as the reference semantics throughout the crate.
//!
//! The transform is parameterized by a real unimodular matrix (A, B, C, D)
//! with B != 0. The kernel is
//!
//! ```text
//! K(t, xi) = (2 pi i B)^(-1/2) exp( i (A t^2 - 2 t xi + D xi^2) / (2 B) )
//! ```
//!
//! with the principal branch of the square root. The inverse transform is the
//! forward transform with the inverse parameter matrix (D, -B, -C, A); with
//! principal branches the round trip carries no residual constant.

use num_complex::Complex64;

use crate::error::LctError;
use crate::grid::Grid;

const UNIMODULAR_TOL: f64 = 1e-12;

/// Validated transform parameters (A, B, C, D), AD - BC = 1, B != 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LctParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl LctParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self, LctError> {
        let det = a * d - b * c;
        if (det - 1.0).abs() > UNIMODULAR_TOL {
            return Err(LctError::NotUnimodular { det });
        }
        if b == 0.0 {
            return Err(LctError::DegenerateB);
        }
        Ok(LctParams { a, b, c, d })
    }

    /// The Fourier-type parameter matrix (0, 1, -1, 0).
    pub fn fourier() -> Self {
        LctParams { a: 0.0, b: 1.0, c: -1.0, d: 0.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Parameter matrix of the inverse transform.
    pub fn inverse(&self) -> LctParams {
        LctParams { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Matrix product, composing two transforms.
    pub fn compose(&self, other: &LctParams) -> Result<LctParams, LctError> {
        LctParams::new(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )
    }

    /// Fourier-type companion matrix (0, B/(2 pi), -2 pi / B, 0): the
    /// transform whose kernel is (iB)^(-1/2) e^(-2 pi i t xi / B), i.e. the
    /// plain cycles-per-unit Fourier transform in the B-scaled frequency
    /// variable all mask symbols use. The multiresolution pipeline runs its
    /// frequency-to-time synthesis through it; the parameters' chirp enters
    /// the pipeline only through the per-translate modulation.
    pub fn fourier_companion(&self) -> LctParams {
        use std::f64::consts::TAU;
        LctParams { a: 0.0, b: self.b / TAU, c: -TAU / self.b, d: 0.0 }
    }
}

/// Principal branch of z^(-1/2).
fn inv_sqrt(z: Complex64) -> Complex64 {
    (-0.5 * z.ln()).exp()
}

/// Kernel value K(t, xi).
pub fn lct_kernel(t: f64, xi: f64, params: &LctParams) -> Complex64 {
    let b = params.b();
    let norm = inv_sqrt(Complex64::new(0.0, 2.0 * std::f64::consts::PI * b));
    let phase = (params.a() * t * t - 2.0 * t * xi + params.d() * xi * xi) / (2.0 * b);
    norm * Complex64::new(0.0, phase).exp()
}

/// Multi-channel complex samples on a uniform grid. The channel count is
/// the number of complex values stored per grid point; matrix-valued
/// functions store their entries row-major in the channel axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledVectorFunction {
    pub grid: Grid,
    pub channels: usize,
    /// Row-major: sample k, channel m at `values[k * channels + m]`.
    pub values: Vec<Complex64>,
}

impl SampledVectorFunction {
    pub fn new(grid: Grid, channels: usize, values: Vec<Complex64>) -> Result<Self, LctError> {
        let expected = grid.count * channels;
        if values.len() != expected {
            return Err(LctError::ShapeMismatch { expected, got: values.len() });
        }
        Ok(SampledVectorFunction { grid, channels, values })
    }

    pub fn zeros(grid: Grid, channels: usize) -> Self {
        SampledVectorFunction {
            grid,
            channels,
            values: vec![Complex64::new(0.0, 0.0); grid.count * channels],
        }
    }

    /// Fill from a per-point closure returning one value per channel.
    pub fn from_fn(grid: Grid, channels: usize, mut f: impl FnMut(f64) -> Vec<Complex64>) -> Self {
        let mut values = Vec::with_capacity(grid.count * channels);
        for t in grid.points() {
            let row = f(t);
            assert_eq!(row.len(), channels);
            values.extend(row);
        }
        SampledVectorFunction { grid, channels, values }
    }

    #[inline]
    pub fn value(&self, k: usize, m: usize) -> Complex64 {
        self.values[k * self.channels + m]
    }

    #[inline]
    pub fn value_mut(&mut self, k: usize, m: usize) -> &mut Complex64 {
        &mut self.values[k * self.channels + m]
    }

    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sum * self.grid.step).sqrt()
    }
}

/// Dense forward transform: per channel, F(xi_j) = sum_k f(t_k) K(t_k, xi_j) dt,
/// summed in ascending k order.
pub fn lct_forward(
    f: &SampledVectorFunction,
    out_grid: Grid,
    params: &LctParams,
) -> Result<SampledVectorFunction, LctError> {
    if f.grid.count == 0 || out_grid.count == 0 {
        return Err(LctError::EmptyGrid);
    }
    let dt = f.grid.step;
    let channels = f.channels;
    let mut out = SampledVectorFunction::zeros(out_grid, channels);
    for j in 0..out_grid.count {
        let xi = out_grid.point(j);
        for k in 0..f.grid.count {
            let kernel = lct_kernel(f.grid.point(k), xi, params);
            let w = kernel * dt;
            for m in 0..channels {
                *out.value_mut(j, m) += f.value(k, m) * w;
            }
        }
    }
    Ok(out)
}

/// Inverse transform via the inverse parameter matrix.
pub fn lct_inverse(
    f: &SampledVectorFunction,
    out_grid: Grid,
    params: &LctParams,
) -> Result<SampledVectorFunction, LctError> {
    lct_forward(f, out_grid, &params.inverse())
}
