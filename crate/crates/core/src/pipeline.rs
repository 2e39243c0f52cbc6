//! Certified systems and the multi-level analysis/synthesis transform.
//!
//! A system bundles validated transform parameters, a certified mask bank,
//! the cascade-built scaling function, and cached time-domain samples of
//! every generator. Analysis projects a signal onto the chirp-modulated
//! translates by quadrature, then descends through coarser levels with the
//! coefficient recursion; synthesis runs the exact adjoint recursion and
//! resamples. Coefficient indices stay on the two-coset lattice as exact
//! integer pairs throughout.

use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::cascade::{
    matrix_at, phi_hat_product, time_from_spectrum, CascadeResult,
};
use crate::cmat::CMat;
use crate::error::PipelineError;
use crate::grid::Grid;
use crate::lattice::{chirp_factor, CosetBase, Lattice, LatticePoint};
use crate::lct::{LctParams, SampledVectorFunction};
use crate::mask::{
    check_filterbank, CertCondition, CertificationReport, MaskBank, ReportDetail,
};

/// Grid and tolerance settings for building a system.
#[derive(Debug, Clone)]
pub struct SystemResolution {
    pub time_grid: Grid,
    pub omega_grid: Grid,
    pub iterations: usize,
    /// Number of translates certified in the construction Gram check.
    pub gram_translates: usize,
    pub filterbank_tol: f64,
    pub gram_tol: f64,
}

impl SystemResolution {
    pub fn new(time_grid: Grid, omega_grid: Grid) -> Self {
        SystemResolution {
            time_grid,
            omega_grid,
            iterations: 24,
            gram_translates: 8,
            filterbank_tol: 1e-8,
            gram_tol: 1e-3,
        }
    }

    /// Resolution whose frequency grid is matched to the time grid: the
    /// frequency step is the reciprocal of the window span and the band
    /// edge is the sampling Nyquist. Matched grids make the discrete
    /// quadratures alias-free, which the construction-time generator
    /// orthonormalization relies on.
    pub fn matched(time_grid: Grid) -> Self {
        let span = time_grid.count as f64 * time_grid.step;
        let omega_grid = Grid {
            start: -0.5 / time_grid.step,
            step: 1.0 / span,
            count: time_grid.count,
        };
        SystemResolution::new(time_grid, omega_grid)
    }
}

/// Which generator a Gram computation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramTarget {
    Phi,
    Psi(usize),
}

/// A certified multiresolution system with cached generator samples.
#[derive(Debug, Clone)]
pub struct VnumraSystem {
    params: LctParams,
    bank: MaskBank,
    cascade: CascadeResult,
    phi: SampledVectorFunction,
    psis: Vec<SampledVectorFunction>,
    resolution: SystemResolution,
    filterbank_report: CertificationReport,
    gram_deviation: f64,
}

/// Multi-level coefficient container. Level j holds the detail bands of the
/// j-th split; `approx` holds the coarsest approximation (level `levels`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPyramid {
    pub levels: usize,
    pub channels: usize,
    pub lattice: Lattice,
    pub approx: CoefficientSet,
    /// details[j - 1][ell - 1] is the detail band ell at level j.
    pub details: Vec<Vec<CoefficientSet>>,
}

/// Map from exact lattice indices (coset, translate) to M-vectors.
pub type CoefficientSet = BTreeMap<(CosetBase, i64), Vec<Complex64>>;

impl CoefficientPyramid {
    pub fn l2_norm(&self) -> f64 {
        let mut sum = 0.0;
        for v in self.approx.values() {
            sum += v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        for level in &self.details {
            for band in level {
                for v in band.values() {
                    sum += v.iter().map(|z| z.norm_sqr()).sum::<f64>();
                }
            }
        }
        sum.sqrt()
    }
}

impl VnumraSystem {
    pub fn params(&self) -> &LctParams {
        &self.params
    }
    pub fn bank(&self) -> &MaskBank {
        &self.bank
    }
    pub fn lattice(&self) -> Lattice {
        self.bank.lattice()
    }
    pub fn channels(&self) -> usize {
        self.bank.channels()
    }
    pub fn time_grid(&self) -> Grid {
        self.resolution.time_grid
    }
    pub fn cascade(&self) -> &CascadeResult {
        &self.cascade
    }
    pub fn phi_samples(&self) -> &SampledVectorFunction {
        &self.phi
    }
    pub fn psi_samples(&self, ell: usize) -> Option<&SampledVectorFunction> {
        self.psis.get(ell - 1)
    }
    pub fn wavelet_count(&self) -> usize {
        self.psis.len()
    }
    pub fn filterbank_report(&self) -> &CertificationReport {
        &self.filterbank_report
    }
    pub fn gram_deviation(&self) -> f64 {
        self.gram_deviation
    }
    pub fn convergence_metric(&self) -> f64 {
        self.cascade.convergence_metric
    }
}

/// Integer index arithmetic: 2N sigma + lambda on the coset lattice.
fn upshift(lat: &Lattice, sigma: (CosetBase, i64), lambda: (CosetBase, i64)) -> (CosetBase, i64) {
    let carry = match sigma.0 {
        CosetBase::Zero => 0,
        CosetBase::ROverN => lat.r(),
    };
    (lambda.0, lambda.1 + carry + lat.dilation() * sigma.1)
}

/// Minimal perturbation of measured class masses: find w close to v with
/// sum w = total, sum w_c phase_c = 0, w supported on the alive classes.
/// Solved through the 3x3 normal system of the correction basis
/// {1, Re(phase), Im(phase)}; rank-deficient directions are skipped.
/// Returns None when the constraints are infeasible or force a negative
/// mass.
#[allow(clippy::needless_range_loop)]
fn solve_class_masses(
    alive: &[(usize, Complex64, f64)],
    total: f64,
) -> Option<Vec<f64>> {
    let basis = |i: usize, phase: Complex64| -> f64 {
        match i {
            0 => 1.0,
            1 => phase.re,
            _ => phase.im,
        }
    };
    let v_sum: f64 = alive.iter().map(|(_, _, v)| v).sum();
    let v_phase: Complex64 = alive.iter().map(|(_, p, v)| p * v).sum();
    let targets = [total - v_sum, -v_phase.re, -v_phase.im];
    let mut g = [[0.0f64; 3]; 3];
    for (_, phase, _) in alive {
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] += basis(i, *phase) * basis(j, *phase);
            }
        }
    }
    let mut a = g;
    let mut rhs = targets;
    let mut piv = [usize::MAX; 3];
    let mut used = [false; 3];
    for col in 0..3 {
        let mut best = 1e-9 * (1.0 + alive.len() as f64);
        let mut row = usize::MAX;
        for r in 0..3 {
            if !used[r] && a[r][col].abs() > best {
                best = a[r][col].abs();
                row = r;
            }
        }
        if row == usize::MAX {
            continue;
        }
        used[row] = true;
        piv[col] = row;
        for r in 0..3 {
            if r != row && a[r][col].abs() > 0.0 {
                let f = a[r][col] / a[row][col];
                for c2 in 0..3 {
                    a[r][c2] -= f * a[row][c2];
                }
                rhs[r] -= f * rhs[row];
            }
        }
    }
    let mut mu = [0.0f64; 3];
    for col in 0..3 {
        if piv[col] != usize::MAX {
            mu[col] = rhs[piv[col]] / a[piv[col]][col];
        }
    }
    for r in 0..3 {
        if !used[r] {
            let residual: f64 = (0..3).map(|c| g[r][c] * mu[c]).sum::<f64>() - targets[r];
            if residual.abs() > 1e-6 * (1.0 + total.abs()) {
                return None;
            }
        }
    }
    let w: Vec<f64> = alive
        .iter()
        .map(|(_, phase, v)| v + mu[0] + mu[1] * phase.re + mu[2] * phase.im)
        .collect();
    let w_sum: f64 = w.iter().sum();
    let w_phase: Complex64 = alive.iter().zip(&w).map(|((_, p, _), m)| p * m).sum();
    if (w_sum - total).abs() > 1e-6 * (1.0 + total.abs()) || w_phase.norm() > 1e-6 {
        return None;
    }
    if w.iter().any(|m| *m < 0.0) {
        return None;
    }
    Some(w)
}

/// Orthonormalize the discrete translate family of a sampled spectrum over
/// the two-coset lattice.
///
/// Lattice translates of a generator are orthonormal exactly when two
/// folded-spectrum identities hold: the fold of the power spectrum over
/// half-unit frequency shifts is flat in the fold variable, and its
/// counterpart weighted by powers of exp(-i pi r / N) vanishes. Working on
/// the residue classes of half-unit shifts modulo lcm(4, 2N), the class
/// masses are perturbed minimally to meet both identities and the spectrum
/// is rescaled class-wise to carry the corrected masses; a final global
/// rescale pins the Gram diagonal. For a certified mask the perturbation
/// is at the band-truncation scale, so the cached generator keeps its
/// shape while its discrete translates become orthonormal to the window
/// truncation level. The construction-time Gram check remains the arbiter.
#[allow(clippy::needless_range_loop)]
fn orthonormalize_spectrum(
    spectrum: &mut SampledVectorFunction,
    m: usize,
    lat: &Lattice,
) -> Result<(), PipelineError> {
    let grid = spectrum.grid;
    let raw_half = 0.5 / grid.step;
    let half = raw_half.round();
    if (raw_half - half).abs() > 1e-9 || half < 1.0 {
        return Err(PipelineError::GridMisaligned);
    }
    let half = half as usize;
    let two_n = lat.dilation() as usize;
    let classes = if two_n.is_multiple_of(4) { two_n } else { two_n * 2 }; // lcm(4, 2N)
    let period = classes * half;
    if spectrum.values.iter().all(|v| v.norm_sqr() == 0.0) {
        return Ok(());
    }

    // Pass 1: folded Gram mass per residue class of half-unit shifts.
    let residues = period.min(grid.count);
    let mut folds: Vec<CMat> = Vec::with_capacity(residues);
    for residue in 0..residues {
        let mut fold = CMat::zeros(m);
        let mut j = residue;
        while j < grid.count {
            let v = matrix_at(spectrum, j, m);
            fold = fold.add(&v.mul(&v.adjoint()));
            j += period;
        }
        folds.push(fold);
    }
    let masses: Vec<f64> =
        folds.iter().map(|f| (0..m).map(|i| f[(i, i)].re).sum::<f64>() / m as f64).collect();
    let max_mass = masses.iter().fold(0.0f64, |a, &b| a.max(b));
    let dead_floor = 1e-10 * max_mass;

    // Common flat target for the half-shift fold.
    let x_count = half.min(residues);
    let total: f64 = masses.iter().sum::<f64>() / x_count as f64;

    let eta_arg = -std::f64::consts::PI * lat.r() as f64 / lat.n() as f64;
    let mut scale_sq = vec![0.0f64; residues];
    for x in 0..x_count {
        let alive: Vec<(usize, Complex64, f64)> = (0..classes)
            .filter_map(|c| {
                let residue = x + c * half;
                if residue < residues && masses[residue] > dead_floor {
                    Some((
                        residue,
                        Complex64::from_polar(1.0, eta_arg * c as f64),
                        masses[residue],
                    ))
                } else {
                    None
                }
            })
            .collect();
        if alive.is_empty() {
            continue;
        }
        let w = solve_class_masses(&alive, total).ok_or({
            PipelineError::CertificationFailed {
                report: CertificationReport {
                    condition: CertCondition::TranslateGram,
                    residual: 1.0,
                    tolerance: 0.0,
                    pass: false,
                    detail: ReportDetail::None,
                },
            }
        })?;
        for ((residue, _, v), mass) in alive.iter().zip(&w) {
            scale_sq[*residue] = mass / v;
        }
    }

    // Pass 2: rescale each class to its corrected mass.
    for residue in 0..residues {
        let factor = Complex64::new(scale_sq[residue].max(0.0).sqrt(), 0.0);
        let mut j = residue;
        while j < grid.count {
            let v = matrix_at(spectrum, j, m).scale(factor);
            crate::cascade::set_matrix_at(spectrum, j, &v);
            j += period;
        }
    }

    // Global rescale: diagonal Gram block to the identity.
    let dt = grid.step;
    let mut q = CMat::zeros(m);
    for k in 0..grid.count {
        let v = matrix_at(spectrum, k, m);
        q = q.add(&v.mul(&v.adjoint()).scale(Complex64::new(dt, 0.0)));
    }
    let floor = q.hermitian_eigenvalues()[0];
    if floor < 1e-6 {
        let report = CertificationReport {
            condition: CertCondition::TranslateGram,
            residual: 1.0 - floor.max(0.0),
            tolerance: 1e-6,
            pass: false,
            detail: ReportDetail::None,
        };
        return Err(PipelineError::CertificationFailed { report });
    }
    let correction = q.hermitian_inverse_sqrt();
    for k in 0..grid.count {
        let v = correction.mul(&matrix_at(spectrum, k, m));
        crate::cascade::set_matrix_at(spectrum, k, &v);
    }
    Ok(())
}

/// Build a certified system: filter-bank certification, cascade, cached
/// time-domain generators, and the translate Gram check.
pub fn build_system(
    params: LctParams,
    bank: MaskBank,
    resolution: SystemResolution,
) -> Result<VnumraSystem, PipelineError> {
    let lat = bank.lattice();
    // The time grid must represent every lattice translate exactly.
    let dt = resolution.time_grid.step;
    for probe in [lat.offset_f64(), 2.0] {
        let steps = probe / dt;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(PipelineError::GridMisaligned);
        }
    }
    let cert_grid = Grid::new(0.0, 1.0 / 1024.0, 1024).expect("static grid");
    let filterbank_report = check_filterbank(&bank, &cert_grid, resolution.filterbank_tol)
        .map_err(|e| PipelineError::IncompatiblePyramid { detail: e.to_string() })?;
    if !filterbank_report.pass {
        return Err(PipelineError::CertificationFailed { report: filterbank_report });
    }
    let cascade = phi_hat_product(&bank.scaling, &resolution.omega_grid, resolution.iterations)?;
    let mut phi_spectrum = cascade.phi_hat.clone();
    orthonormalize_spectrum(&mut phi_spectrum, bank.channels(), &lat)?;
    let phi = time_from_spectrum(&phi_spectrum, &params, &resolution.time_grid)?;

    // Wavelet spectra evaluated densely on the cascade grid: Psi(w) =
    // H(w / 2N) Phi_hat(w / 2N), using a second cascade run on the
    // contracted grid so no interpolation is needed.
    let m = bank.channels();
    let half_grid = resolution.omega_grid.scaled(1.0 / lat.dilation() as f64);
    let cascade_half =
        phi_hat_product(&bank.scaling, &half_grid, resolution.iterations)?;
    let mut psis = Vec::with_capacity(bank.wavelets.len());
    for wavelet in &bank.wavelets {
        let mut spectrum = SampledVectorFunction::zeros(resolution.omega_grid, m * m);
        for (k, omega_half) in half_grid.points().enumerate() {
            let h = wavelet.eval_symbol(omega_half);
            let value = h.mul(&matrix_at(&cascade_half.phi_hat, k, m));
            crate::cascade::set_matrix_at(&mut spectrum, k, &value);
        }
        orthonormalize_spectrum(&mut spectrum, m, &lat)?;
        psis.push(time_from_spectrum(&spectrum, &params, &resolution.time_grid)?);
    }

    assemble(params, bank, resolution, cascade, phi, psis, filterbank_report)
}

/// Final assembly shared by `build_system` and `load_system`: the translate
/// Gram check is always re-run.
fn assemble(
    params: LctParams,
    bank: MaskBank,
    resolution: SystemResolution,
    cascade: CascadeResult,
    phi: SampledVectorFunction,
    psis: Vec<SampledVectorFunction>,
    filterbank_report: CertificationReport,
) -> Result<VnumraSystem, PipelineError> {
    let mut system = VnumraSystem {
        params,
        bank,
        cascade,
        phi,
        psis,
        resolution,
        filterbank_report,
        gram_deviation: f64::NAN,
    };
    let lambdas = gram_lambdas(&system, system.resolution.gram_translates);
    let gram = gram_matrix(&system, &lambdas, GramTarget::Phi)?;
    let deviation = gram.sub(&CMat::identity(gram.dim)).frobenius_norm();
    if deviation > system.resolution.gram_tol {
        let report = CertificationReport {
            condition: CertCondition::TranslateGram,
            residual: deviation,
            tolerance: system.resolution.gram_tol,
            pass: false,
            detail: ReportDetail::None,
        };
        return Err(PipelineError::CertificationFailed { report });
    }
    system.gram_deviation = deviation;
    Ok(system)
}

/// Rebuild a system from cached time-domain generator samples. The
/// filter-bank certification, cascade spectrum, and translate Gram check
/// are re-run (they are cheap); only the synthesis bridge is skipped.
pub fn load_system(
    params: LctParams,
    bank: MaskBank,
    resolution: SystemResolution,
    phi: SampledVectorFunction,
    psis: Vec<SampledVectorFunction>,
) -> Result<VnumraSystem, PipelineError> {
    let m = bank.channels();
    if phi.channels != m * m || phi.grid != resolution.time_grid {
        return Err(PipelineError::IncompatiblePyramid {
            detail: "cached scaling samples disagree with the resolution".to_string(),
        });
    }
    if psis.len() + 1 != bank.lattice().dilation() as usize {
        return Err(PipelineError::IncompatiblePyramid {
            detail: "cached wavelet count disagrees with the bank".to_string(),
        });
    }
    for psi in &psis {
        if psi.channels != m * m || psi.grid != resolution.time_grid {
            return Err(PipelineError::IncompatiblePyramid {
                detail: "cached wavelet samples disagree with the resolution".to_string(),
            });
        }
    }
    let cert_grid = Grid::new(0.0, 1.0 / 1024.0, 1024).expect("static grid");
    let filterbank_report = check_filterbank(&bank, &cert_grid, resolution.filterbank_tol)
        .map_err(|e| PipelineError::IncompatiblePyramid { detail: e.to_string() })?;
    if !filterbank_report.pass {
        return Err(PipelineError::CertificationFailed { report: filterbank_report });
    }
    let cascade = phi_hat_product(&bank.scaling, &resolution.omega_grid, resolution.iterations)?;
    assemble(params, bank, resolution, cascade, phi, psis, filterbank_report)
}

/// The first `count` lattice translates that keep the shifted generator
/// support inside the cached window.
pub fn gram_lambdas(system: &VnumraSystem, count: usize) -> Vec<LatticePoint> {
    let lat = system.lattice();
    let mut points = lat.enumerate(0, count as i64);
    points.retain(|p| p.value_f64() >= 0.0);
    points.truncate(count);
    points
}

fn lattice_shift_index(grid: &Grid, lambda: f64) -> Result<i64, PipelineError> {
    let raw = lambda / grid.step;
    let idx = raw.round();
    if (raw - idx).abs() > 1e-6 {
        return Err(PipelineError::LatticeMismatch);
    }
    Ok(idx as i64)
}

fn generator(
    system: &VnumraSystem,
    which: GramTarget,
) -> Result<&SampledVectorFunction, PipelineError> {
    match which {
        GramTarget::Phi => Ok(&system.phi),
        GramTarget::Psi(ell) => system
            .psi_samples(ell)
            .ok_or(PipelineError::IncompatiblePyramid { detail: format!("no wavelet {ell}") }),
    }
}

/// Gram matrix of chirp-modulated generator translates, by quadrature on
/// the cached samples. Orthonormal systems yield the identity.
pub fn gram_matrix(
    system: &VnumraSystem,
    lambdas: &[LatticePoint],
    which: GramTarget,
) -> Result<CMat, PipelineError> {
    let lat = system.lattice();
    for p in lambdas {
        if !lat.contains(p) {
            return Err(PipelineError::LatticeMismatch);
        }
    }
    let f = generator(system, which)?;
    let m = system.channels();
    let grid = f.grid;
    let dt = grid.step;
    let shifts: Vec<i64> = lambdas
        .iter()
        .map(|p| lattice_shift_index(&grid, p.value_f64()))
        .collect::<Result<_, _>>()?;
    let count = grid.count as i64;
    let mut out = CMat::zeros(lambdas.len() * m);
    for (i, (li, si)) in lambdas.iter().zip(&shifts).enumerate() {
        for (j, (lj, sj)) in lambdas.iter().zip(&shifts).enumerate() {
            let mut block = CMat::zeros(m);
            let lam_i = li.value_f64();
            let lam_j = lj.value_f64();
            for k in 0..grid.count as i64 {
                let (ki, kj) = (k - si, k - sj);
                if ki < 0 || ki >= count || kj < 0 || kj >= count {
                    continue;
                }
                let t = grid.point(k as usize);
                let phase = chirp_factor(t, lam_i, &system.params)
                    * chirp_factor(t, lam_j, &system.params).conj();
                let fi = matrix_at(f, ki as usize, m);
                let fj = matrix_at(f, kj as usize, m);
                block = block.add(&fi.mul(&fj.adjoint()).scale(phase * dt));
            }
            for a in 0..m {
                for b in 0..m {
                    out[(i * m + a, j * m + b)] = block[(a, b)];
                }
            }
        }
    }
    Ok(out)
}

/// Lattice points whose shifted generator support can intersect the cached
/// window, as exact coset indices.
fn level0_index_set(system: &VnumraSystem) -> Vec<(CosetBase, i64)> {
    let lat = system.lattice();
    let grid = system.resolution.time_grid;
    let lo = grid.start - grid.end();
    let hi = grid.end() - grid.start;
    // lambda = base + 2k in [lo, hi].
    let mut out = Vec::new();
    for base in [CosetBase::Zero, CosetBase::ROverN] {
        let offset = match base {
            CosetBase::Zero => 0.0,
            CosetBase::ROverN => lat.offset_f64(),
        };
        let k_lo = ((lo - offset) / 2.0).ceil() as i64;
        let k_hi = ((hi - offset) / 2.0).floor() as i64;
        for k in k_lo..=k_hi {
            out.push((base, k));
        }
    }
    out.sort();
    out
}

/// Project a signal onto the level-0 chirped translates and split `levels`
/// times with the coefficient recursion.
pub fn analyze(
    system: &VnumraSystem,
    signal: &SampledVectorFunction,
    levels: usize,
) -> Result<CoefficientPyramid, PipelineError> {
    let m = system.channels();
    if signal.channels != m {
        return Err(PipelineError::ChannelMismatch { expected: m, got: signal.channels });
    }
    assert!(levels >= 1, "at least one decomposition level is required");
    let grid = system.resolution.time_grid;
    if signal.grid != grid {
        return Err(PipelineError::GridMisaligned);
    }
    let lat = system.lattice();
    // Coarse atoms dilate by 2N per level; once they outgrow the cached
    // window the decomposition is no longer resolvable.
    let span = grid.count as f64 * grid.step;
    let mut scale = 1.0;
    for _ in 0..levels {
        scale *= lat.dilation() as f64;
        if scale > span * (1.0 + 1e-12) {
            return Err(PipelineError::SupportOverflow);
        }
    }
    let dt = grid.step;
    let phi = &system.phi;
    let count = grid.count as i64;

    // Level 0: quadrature against the conjugated chirped atoms.
    let mut current: CoefficientSet = BTreeMap::new();
    for (base, k) in level0_index_set(system) {
        let p = lat.point(base, k);
        let lam = p.value_f64();
        let shift = lattice_shift_index(&grid, lam)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); m];
        for kk in 0..count {
            let ks = kk - shift;
            if ks < 0 || ks >= count {
                continue;
            }
            let t = grid.point(kk as usize);
            let w = chirp_factor(t, lam, &system.params).conj() * dt;
            let atom = matrix_at(phi, ks as usize, m);
            for i in 0..m {
                let mut v = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    v += atom[(i, j)].conj() * signal.value(kk as usize, j);
                }
                acc[i] += v * w;
            }
        }
        current.insert((base, k), acc);
    }

    // Deeper levels by the downsampling recursion.
    let mut details: Vec<Vec<CoefficientSet>> = Vec::with_capacity(levels);
    for _level in 1..=levels {
        let sigma_set = downsampled_index_set(&lat, &system.bank.scaling, &current);
        if sigma_set.is_empty() {
            return Err(PipelineError::SupportOverflow);
        }
        let mut approx: CoefficientSet = BTreeMap::new();
        let mut level_details: Vec<CoefficientSet> =
            vec![BTreeMap::new(); system.bank.wavelets.len()];
        for &sigma in &sigma_set {
            let approx_val = filter_down(&lat, &system.bank.scaling, &current, sigma, m);
            approx.insert(sigma, approx_val);
            for (ell, wavelet) in system.bank.wavelets.iter().enumerate() {
                let d = filter_down(&lat, wavelet, &current, sigma, m);
                level_details[ell].insert(sigma, d);
            }
        }
        details.push(level_details);
        current = approx;
    }

    Ok(CoefficientPyramid { levels, channels: m, lattice: lat, approx: current, details })
}

/// Exact set of coarse indices sigma whose filter taps reach the fine set:
/// sigma solves k_fine = k_mask + carry(sigma) + 2N k_sigma within cosets.
fn downsampled_index_set(
    lat: &Lattice,
    mask: &crate::mask::VectorMask,
    fine: &CoefficientSet,
) -> Vec<(CosetBase, i64)> {
    let two_n = lat.dilation();
    let mut out = std::collections::BTreeSet::new();
    for &(fine_base, k_fine) in fine.keys() {
        for (p, _) in mask.support() {
            if p.base != fine_base {
                continue;
            }
            for sigma_base in [CosetBase::Zero, CosetBase::ROverN] {
                let carry = match sigma_base {
                    CosetBase::Zero => 0,
                    CosetBase::ROverN => lat.r(),
                };
                let numer = k_fine - p.translate - carry;
                if numer.rem_euclid(two_n) == 0 {
                    out.insert((sigma_base, numer.div_euclid(two_n)));
                }
            }
        }
    }
    out.into_iter().collect()
}

fn filter_down(
    lat: &Lattice,
    mask: &crate::mask::VectorMask,
    fine: &CoefficientSet,
    sigma: (CosetBase, i64),
    m: usize,
) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); m];
    for (p, g) in mask.support() {
        let key = upshift(lat, sigma, (p.base, p.translate));
        if let Some(c) = fine.get(&key) {
            // conj(G_lambda) acting on the fine coefficient vector.
            for i in 0..m {
                let mut v = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    v += g[(i, j)].conj() * c[j];
                }
                acc[i] += v;
            }
        }
    }
    acc
}

fn filter_up(
    lat: &Lattice,
    mask: &crate::mask::VectorMask,
    coarse: &CoefficientSet,
    target: &mut CoefficientSet,
    m: usize,
) {
    for (&sigma, a) in coarse {
        for (p, g) in mask.support() {
            let key = upshift(lat, sigma, (p.base, p.translate));
            let entry = target.entry(key).or_insert_with(|| vec![Complex64::new(0.0, 0.0); m]);
            // G_lambda^T acting on the coarse coefficient vector.
            for i in 0..m {
                let mut v = Complex64::new(0.0, 0.0);
                for j in 0..m {
                    v += g[(j, i)] * a[j];
                }
                entry[i] += v;
            }
        }
    }
}

/// Invert `analyze`: run the adjoint recursion up to level 0 and resample
/// the chirped translates on the system grid.
pub fn synthesize(
    system: &VnumraSystem,
    pyramid: &CoefficientPyramid,
) -> Result<SampledVectorFunction, PipelineError> {
    let m = system.channels();
    if pyramid.channels != m {
        return Err(PipelineError::ChannelMismatch { expected: m, got: pyramid.channels });
    }
    if pyramid.lattice != system.lattice() {
        return Err(PipelineError::IncompatiblePyramid {
            detail: "pyramid lattice disagrees with the system".to_string(),
        });
    }
    if pyramid.levels != pyramid.details.len() || pyramid.levels == 0 {
        return Err(PipelineError::IncompatiblePyramid {
            detail: "level count disagrees with detail storage".to_string(),
        });
    }
    let lat = system.lattice();
    let expected_bands = system.bank.wavelets.len();
    for level in &pyramid.details {
        if level.len() != expected_bands {
            return Err(PipelineError::IncompatiblePyramid {
                detail: "detail band count disagrees with the bank".to_string(),
            });
        }
    }

    let mut current = pyramid.approx.clone();
    for level in (1..=pyramid.levels).rev() {
        let mut fine: CoefficientSet = BTreeMap::new();
        filter_up(&lat, &system.bank.scaling, &current, &mut fine, m);
        for (ell, wavelet) in system.bank.wavelets.iter().enumerate() {
            filter_up(&lat, wavelet, &pyramid.details[level - 1][ell], &mut fine, m);
        }
        current = fine;
    }

    // Level-0 coefficients to samples.
    let grid = system.resolution.time_grid;
    let count = grid.count as i64;
    let mut out = SampledVectorFunction::zeros(grid, m);
    for (&(base, k), c) in &current {
        let p = lat.point(base, k);
        let lam = p.value_f64();
        let shift = lattice_shift_index(&grid, lam)?;
        for kk in 0..count {
            let ks = kk - shift;
            if ks < 0 || ks >= count {
                continue;
            }
            let t = grid.point(kk as usize);
            let phase = chirp_factor(t, lam, &system.params);
            let atom = matrix_at(&system.phi, ks as usize, m);
            for j in 0..m {
                let mut v = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    v += atom[(i, j)] * c[i];
                }
                *out.value_mut(kk as usize, j) += v * phase;
            }
        }
    }
    Ok(out)
}
