//! Cascade construction of the matrix scaling function and wavelets: the
//! truncated infinite product of mask symbols in frequency, and the bridge
//! that carries sampled spectra to the time domain through the transform
//! engine.
//!
//! All spectra live in the B-normalized frequency w. The bridge maps w to
//! xi = B w and runs the engine with the Fourier-type companion matrix
//! (0, B/(2 pi), -2 pi/B, 0), so time samples are the plain
//! cycles-per-unit Fourier synthesis of the spectrum in the B-scaled
//! variable. The parameters' chirp is deliberately kept out of the cached
//! generators: it attaches to each translate through the lattice
//! modulation, where it cancels pairwise in every Gram computation, which
//! is what keeps chirped translate families orthonormal for every
//! admissible parameter matrix.

use num_complex::Complex64;

use crate::cmat::CMat;
use crate::error::CascadeError;
use crate::grid::Grid;
use crate::lct::{lct_forward, LctParams, SampledVectorFunction};
use crate::mask::{MaskBank, VectorMask};

pub const NORMALIZATION_TOL: f64 = 1e-10;
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Truncated infinite-product result: matrix spectrum samples plus
/// convergence bookkeeping.
#[derive(Debug, Clone)]
pub struct CascadeResult {
    /// M x M matrix samples, channels = M * M row-major, on the w grid.
    pub phi_hat: SampledVectorFunction,
    pub channels: usize,
    pub iterations: usize,
    /// Sup-norm change contributed by the final factor.
    pub convergence_metric: f64,
    /// Whether the last three per-iteration changes were non-increasing.
    pub monotone_tail: bool,
}

pub(crate) fn matrix_at(f: &SampledVectorFunction, k: usize, m: usize) -> CMat {
    debug_assert_eq!(f.channels, m * m);
    let mut out = CMat::zeros(m);
    for i in 0..m {
        for j in 0..m {
            out[(i, j)] = f.value(k, i * m + j);
        }
    }
    out
}

pub(crate) fn set_matrix_at(f: &mut SampledVectorFunction, k: usize, mat: &CMat) {
    let m = mat.dim;
    debug_assert_eq!(f.channels, m * m);
    for i in 0..m {
        for j in 0..m {
            *f.value_mut(k, i * m + j) = mat[(i, j)];
        }
    }
}

/// Evaluate the truncated product  prod_{m=1..iterations} S(w / (2N)^m),
/// the m = 1 factor leftmost, at every grid point.
pub fn phi_hat_product(
    mask: &VectorMask,
    omega_grid: &Grid,
    iterations: usize,
) -> Result<CascadeResult, CascadeError> {
    assert!(iterations >= 1, "at least one product factor is required");
    if omega_grid.count == 0 {
        return Err(CascadeError::EmptyGrid);
    }
    let deviation = mask.symbol_normalization_deviation();
    if deviation > NORMALIZATION_TOL {
        return Err(CascadeError::NotNormalized { deviation });
    }
    let m = mask.channels();
    let two_n = mask.lattice().dilation() as f64;
    let mut products: Vec<CMat> = vec![CMat::identity(m); omega_grid.count];
    let mut changes: Vec<f64> = Vec::with_capacity(iterations);
    for step in 1..=iterations {
        let scale = two_n.powi(step as i32);
        let mut sup_change = 0.0f64;
        for (k, omega) in omega_grid.points().enumerate() {
            let factor = mask.eval_symbol(omega / scale);
            let updated = products[k].mul(&factor);
            let change = updated.sub(&products[k]).frobenius_norm();
            if change > sup_change {
                sup_change = change;
            }
            products[k] = updated;
        }
        changes.push(sup_change);
    }
    let convergence_metric = *changes.last().unwrap();
    if convergence_metric > CONVERGENCE_TOL {
        return Err(CascadeError::NonConverged { metric: convergence_metric });
    }
    let tail = changes.iter().rev().take(3).collect::<Vec<_>>();
    let monotone_tail = tail.windows(2).all(|w| w[0] <= w[1]);
    let mut phi_hat = SampledVectorFunction::zeros(*omega_grid, m * m);
    for (k, p) in products.iter().enumerate() {
        set_matrix_at(&mut phi_hat, k, p);
    }
    Ok(CascadeResult { phi_hat, channels: m, iterations, convergence_metric, monotone_tail })
}

/// Principal-branch square root.
fn sqrt_c(z: Complex64) -> Complex64 {
    (0.5 * z.ln()).exp()
}

fn omega_to_xi_grid(omega_grid: &Grid, b: f64) -> Grid {
    if b > 0.0 {
        Grid { start: omega_grid.start * b, step: omega_grid.step * b, count: omega_grid.count }
    } else {
        Grid {
            start: omega_grid.end() * b,
            step: omega_grid.step * (-b),
            count: omega_grid.count,
        }
    }
}

/// Map spectrum samples X(w_j) to engine input samples on the xi = B w grid,
/// scaled by `constant`; reverses sample order when B < 0.
fn engine_samples(
    spectrum: &SampledVectorFunction,
    b: f64,
    constant: Complex64,
) -> SampledVectorFunction {
    let xi_grid = omega_to_xi_grid(&spectrum.grid, b);
    let count = spectrum.grid.count;
    let channels = spectrum.channels;
    let mut values = vec![Complex64::new(0.0, 0.0); count * channels];
    for k in 0..count {
        let src = if b > 0.0 { k } else { count - 1 - k };
        for c in 0..channels {
            values[k * channels + c] = spectrum.value(src, c) * constant;
        }
    }
    SampledVectorFunction { grid: xi_grid, channels, values }
}

/// Synthesize time samples from a spectrum on a w grid:
/// applies the engine's inverse transform with the companion matrix, after
/// relabeling w to xi = B w with the normalization that keeps translate
/// Gram matrices orthonormal.
pub fn time_from_spectrum(
    spectrum: &SampledVectorFunction,
    params: &LctParams,
    time_grid: &Grid,
) -> Result<SampledVectorFunction, CascadeError> {
    if spectrum.grid.count == 0 || time_grid.count == 0 {
        return Err(CascadeError::EmptyGrid);
    }
    let b = params.b();
    // (-iB)^(1/2) / |B|
    let nu = sqrt_c(Complex64::new(0.0, -b)) / b.abs();
    let input = engine_samples(spectrum, b, nu);
    let companion = params.fourier_companion();
    let out = lct_forward(&input, *time_grid, &companion.inverse())?;
    Ok(out)
}

/// Forward bridge: recover spectrum samples on a w grid from time samples.
/// Inverse of `time_from_spectrum` up to quadrature error.
pub fn spectrum_from_time(
    time_samples: &SampledVectorFunction,
    params: &LctParams,
    omega_grid: &Grid,
) -> Result<SampledVectorFunction, CascadeError> {
    if time_samples.grid.count == 0 || omega_grid.count == 0 {
        return Err(CascadeError::EmptyGrid);
    }
    let b = params.b();
    let xi_grid = omega_to_xi_grid(omega_grid, b);
    let companion = params.fourier_companion();
    let raw = lct_forward(time_samples, xi_grid, &companion)?;
    // X(w_j) = (iB)^(1/2) * L[f](B w_j), undoing the sample reversal for B < 0.
    let factor = sqrt_c(Complex64::new(0.0, b));
    let count = omega_grid.count;
    let channels = raw.channels;
    let mut values = vec![Complex64::new(0.0, 0.0); count * channels];
    for k in 0..count {
        let src = if b > 0.0 { k } else { count - 1 - k };
        for c in 0..channels {
            values[k * channels + c] = raw.value(src, c) * factor;
        }
    }
    SampledVectorFunction::new(*omega_grid, channels, values).map_err(CascadeError::from)
}

/// Build the time-domain scaling function: cascade product followed by the
/// synthesis bridge. Columns of the matrix samples are the component
/// scaling vectors.
pub fn phi_time(
    mask: &VectorMask,
    params: &LctParams,
    time_grid: &Grid,
    omega_grid: &Grid,
    iterations: usize,
) -> Result<SampledVectorFunction, CascadeError> {
    let cascade = phi_hat_product(mask, omega_grid, iterations)?;
    time_from_spectrum(&cascade.phi_hat, params, time_grid)
}

/// Wavelet spectrum on the dilated grid: Psi_ell(2N w) = H_ell(w) Phi_hat(w).
pub fn psi_hat(
    bank: &MaskBank,
    phi: &CascadeResult,
    ell: usize,
) -> Result<SampledVectorFunction, CascadeError> {
    let two_n = bank.lattice().dilation() as usize;
    if ell < 1 || ell > two_n - 1 {
        return Err(CascadeError::EllOutOfRange { ell, max: two_n - 1 });
    }
    let mask = &bank.wavelets[ell - 1];
    let m = phi.channels;
    let omega_grid = phi.phi_hat.grid;
    let out_grid = omega_grid.scaled(two_n as f64);
    let mut out = SampledVectorFunction::zeros(out_grid, m * m);
    for (k, omega) in omega_grid.points().enumerate() {
        let h = mask.eval_symbol(omega);
        let value = h.mul(&matrix_at(&phi.phi_hat, k, m));
        set_matrix_at(&mut out, k, &value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::error::CascadeError;
    use crate::lattice::{CosetBase, Lattice};
    use crate::mask::MaskRole;
    use std::f64::consts::PI;

    fn haar_phi_hat_reference(omega: f64) -> Complex64 {
        // e^{-i pi w} sin(pi w) / (pi w), the box-function spectrum.
        let sinc = if omega.abs() < 1e-12 { 1.0 } else { (PI * omega).sin() / (PI * omega) };
        Complex64::new(0.0, -PI * omega).exp() * sinc
    }

    #[test]
    fn haar_cascade_matches_analytic_profile() {
        let grid = Grid::symmetric(8.0, 1024).unwrap();
        let result = phi_hat_product(&corpus::haar(1), &grid, 24).unwrap();
        let mut worst = 0.0f64;
        for (k, omega) in grid.points().enumerate() {
            let err = (result.phi_hat.value(k, 0) - haar_phi_hat_reference(omega)).norm();
            worst = worst.max(err);
        }
        assert!(worst < 1e-6, "sup error {worst}");
        assert!(result.monotone_tail);
    }

    #[test]
    fn value_at_zero_is_identity() {
        let grid = Grid::new(0.0, 0.5, 3).unwrap();
        for iters in [24, 30] {
            let result = phi_hat_product(&corpus::haar(2), &grid, iters).unwrap();
            let m0 = matrix_at(&result.phi_hat, 0, 2);
            assert!(m0.sub(&CMat::identity(2)).frobenius_norm() < 1e-8);
        }
    }

    #[test]
    fn unnormalized_mask_is_rejected() {
        // Single identity coefficient: symbol is I/sqrt(2N) at zero.
        let lat = Lattice::new(1, 1).unwrap();
        let g = crate::mask::VectorMask::new(
            lat,
            1,
            MaskRole::Scaling,
            vec![(lat.point(CosetBase::Zero, 0), CMat::identity(1))],
        )
        .unwrap();
        let grid = Grid::symmetric(1.0, 16).unwrap();
        assert!(matches!(
            phi_hat_product(&g, &grid, 8),
            Err(CascadeError::NotNormalized { .. })
        ));
    }

    #[test]
    fn too_few_iterations_is_flagged() {
        let grid = Grid::symmetric(8.0, 256).unwrap();
        assert!(matches!(
            phi_hat_product(&corpus::haar(1), &grid, 3),
            Err(CascadeError::NonConverged { .. })
        ));
    }

    #[test]
    fn haar_time_profile_is_the_unit_box() {
        // Window span 8 matches the frequency step 1/8; the frequency
        // window is wide enough that outside a 2-step neighborhood of the
        // jumps the synthesis ripple sits below the tolerance.
        let omega_grid = Grid::symmetric(48.0, 768).unwrap();
        let time_grid = Grid::new(-2.0, 1.0 / 64.0, 512).unwrap();
        let phi =
            phi_time(&corpus::haar(1), &LctParams::fourier(), &time_grid, &omega_grid, 24).unwrap();
        let step = time_grid.step;
        let mut worst = 0.0f64;
        for (k, t) in time_grid.points().enumerate() {
            let near_jump = (t - 0.0).abs() <= 2.0 * step || (t - 1.0).abs() <= 2.0 * step;
            if near_jump {
                continue;
            }
            let expect = if t > 0.0 && t < 1.0 { 1.0 } else { 0.0 };
            worst = worst.max((phi.value(k, 0).norm() - expect).abs());
        }
        assert!(worst < 5e-2, "box deviation {worst}");
    }

    #[test]
    fn bridge_round_trip_recovers_spectrum() {
        for params in [LctParams::fourier(), LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap()] {
            // Time window span 16 = 1 / frequency step.
            let omega_grid = Grid::symmetric(16.0, 512).unwrap();
            let time_grid = Grid::new(-7.0, 1.0 / 128.0, 2048).unwrap();
            let cascade = phi_hat_product(&corpus::haar(1), &omega_grid, 24).unwrap();
            let phi = time_from_spectrum(&cascade.phi_hat, &params, &time_grid).unwrap();
            let back = spectrum_from_time(&phi, &params, &omega_grid).unwrap();
            let mut worst = 0.0f64;
            for k in 0..omega_grid.count {
                let omega = omega_grid.point(k);
                if omega.abs() > 8.0 {
                    continue;
                }
                let err = (back.value(k, 0) - cascade.phi_hat.value(k, 0)).norm();
                worst = worst.max(err);
            }
            assert!(worst < 1e-4, "round trip error {worst} for params {params:?}");
        }
    }

    #[test]
    fn psi_hat_vanishes_at_zero_for_haar() {
        let grid = Grid::symmetric(4.0, 512).unwrap();
        let bank = corpus::haar_bank(1);
        let cascade = phi_hat_product(&bank.scaling, &grid, 24).unwrap();
        let psi = psi_hat(&bank, &cascade, 1).unwrap();
        // Output grid is dilated by 2N; find w = 0.
        let zero_idx = psi.grid.index_of(0.0, 1e-6).unwrap();
        assert!(psi.value(zero_idx, 0).norm() < 1e-12);
        assert!((psi.grid.step - grid.step * 2.0).abs() < 1e-15);
    }

    #[test]
    fn psi_hat_block_structure_is_preserved() {
        let grid = Grid::symmetric(4.0, 256).unwrap();
        let bank = corpus::haar_bank(2);
        let cascade = phi_hat_product(&bank.scaling, &grid, 24).unwrap();
        let psi = psi_hat(&bank, &cascade, 1).unwrap();
        for k in 0..psi.grid.count {
            let m = matrix_at(&psi, k, 2);
            assert!(m[(0, 1)].norm() < 1e-12 && m[(1, 0)].norm() < 1e-12);
        }
    }

    #[test]
    fn psi_ell_out_of_range() {
        let grid = Grid::symmetric(2.0, 64).unwrap();
        let bank = corpus::haar_bank(1);
        let cascade = phi_hat_product(&bank.scaling, &grid, 24).unwrap();
        assert!(matches!(
            psi_hat(&bank, &cascade, 2),
            Err(CascadeError::EllOutOfRange { .. })
        ));
    }
}
