//! Matrix-valued refinement masks on the two-coset lattice, their symbols,
//! and the orthonormality certifications.
//!
//! A mask is a finitely supported family of M x M matrices indexed by
//! lattice points. Its symbol is
//!
//! ```text
//! S(w) = (2N)^(-1/2) sum_lambda  G_lambda exp(-2 pi i lambda w)
//! ```
//!
//! in the B-normalized frequency w. Because the translation set is a union
//! of two cosets rather than a group, the orthonormality identity couples
//! coefficient correlations only at shifts in 2N(Lambda - Lambda) =
//! 4NZ u (+-2r + 4NZ). The frequency-domain check extracts exactly those
//! correlations from the coset-split symbol with a weighted sum over the
//! offsets j/(4N); the time-domain check reads the same correlations off
//! the coefficients directly. The two checks therefore agree on pass/fail
//! by construction.

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::cmat::CMat;
use crate::error::MaskError;
use crate::grid::Grid;
use crate::lattice::{CosetBase, Lattice, LatticePoint};

/// Default tolerance for coefficient-level identities.
pub const COEFF_TOL: f64 = 1e-10;
/// Default tolerance for grid-fit operations such as wavelet completion.
pub const GRID_TOL: f64 = 1e-8;

/// Role a mask plays in a bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaskRole {
    Scaling,
    Wavelet,
}

/// Finitely supported map from lattice points to M x M complex matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorMask {
    m: usize,
    lattice: Lattice,
    role: MaskRole,
    /// Support sorted ascending by lattice value.
    coeffs: Vec<(LatticePoint, CMat)>,
}

impl VectorMask {
    pub fn new(
        lattice: Lattice,
        m: usize,
        role: MaskRole,
        coeffs: Vec<(LatticePoint, CMat)>,
    ) -> Result<Self, MaskError> {
        let mut sorted = coeffs;
        for (p, c) in &sorted {
            if !lattice.contains(p) {
                return Err(MaskError::LatticeMismatch);
            }
            if c.dim != m {
                return Err(MaskError::ChannelMismatch { expected: m, got: c.dim });
            }
        }
        sorted.sort_by_key(|a| a.0);
        sorted.dedup_by(|a, b| a.0 == b.0);
        Ok(VectorMask { m, lattice, role, coeffs: sorted })
    }

    pub fn channels(&self) -> usize {
        self.m
    }

    pub fn lattice(&self) -> Lattice {
        self.lattice
    }

    pub fn role(&self) -> MaskRole {
        self.role
    }

    pub fn support(&self) -> &[(LatticePoint, CMat)] {
        &self.coeffs
    }

    pub fn coefficient(&self, base: CosetBase, translate: i64) -> Option<&CMat> {
        self.coeffs
            .iter()
            .find(|(p, _)| p.base == base && p.translate == translate)
            .map(|(_, c)| c)
    }

    /// Deviation of the symbol at 0 from the identity; the scaling-mask
    /// normalization contract is `symbol_normalization_deviation() <= tol`.
    pub fn symbol_normalization_deviation(&self) -> f64 {
        self.eval_symbol(0.0).sub(&CMat::identity(self.m)).frobenius_norm()
    }

    /// Informational: how far the coefficients are from being symmetric
    /// matrices. Nothing in the certification math requires symmetry.
    pub fn symmetry_deviation(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(_, c)| c.sub(&c.transpose()).frobenius_norm())
            .fold(0.0, f64::max)
    }

    /// Symbol S(w) = (2N)^(-1/2) sum G_lambda e^(-2 pi i lambda w).
    pub fn eval_symbol(&self, omega: f64) -> CMat {
        let scale = 1.0 / (self.lattice.dilation() as f64).sqrt();
        let mut acc = CMat::zeros(self.m);
        for (p, c) in &self.coeffs {
            let lam = p.value_f64();
            let phase = Complex64::new(0.0, -2.0 * PI * lam * omega).exp();
            acc = acc.add(&c.scale(phase * scale));
        }
        acc
    }

    /// Coset split (S1(w), S2(w)) with the common factor e^(-2 pi i (r/N) w)
    /// pulled out of the second coset, so that
    /// `eval_symbol(w) = S1(w) + e^(-2 pi i (r/N) w) S2(w)`.
    pub fn split_symbol(&self, omega: f64) -> (CMat, CMat) {
        let scale = 1.0 / (self.lattice.dilation() as f64).sqrt();
        let mut even = CMat::zeros(self.m);
        let mut odd = CMat::zeros(self.m);
        for (p, c) in &self.coeffs {
            let k = p.translate as f64;
            let phase = Complex64::new(0.0, -2.0 * PI * (2.0 * k) * omega).exp() * scale;
            match p.base {
                CosetBase::Zero => even = even.add(&c.scale(phase)),
                CosetBase::ROverN => odd = odd.add(&c.scale(phase)),
            }
        }
        (even, odd)
    }
}

/// A scaling mask together with its 2N - 1 wavelet masks.
#[derive(Debug, Clone)]
pub struct MaskBank {
    pub scaling: VectorMask,
    pub wavelets: Vec<VectorMask>,
}

impl MaskBank {
    pub fn new(scaling: VectorMask, wavelets: Vec<VectorMask>) -> Result<Self, MaskError> {
        let expected = scaling.lattice().dilation() as usize;
        if wavelets.len() + 1 != expected {
            return Err(MaskError::BankSizeMismatch { expected, got: wavelets.len() + 1 });
        }
        for w in &wavelets {
            if w.channels() != scaling.channels() {
                return Err(MaskError::ChannelMismatch {
                    expected: scaling.channels(),
                    got: w.channels(),
                });
            }
            if w.lattice() != scaling.lattice() {
                return Err(MaskError::LatticeMismatch);
            }
        }
        Ok(MaskBank { scaling, wavelets })
    }

    pub fn channels(&self) -> usize {
        self.scaling.channels()
    }

    pub fn lattice(&self) -> Lattice {
        self.scaling.lattice()
    }

    /// Masks in band order: scaling first, then wavelets 1..2N-1.
    pub fn masks(&self) -> impl Iterator<Item = &VectorMask> {
        std::iter::once(&self.scaling).chain(self.wavelets.iter())
    }
}

/// Which identity a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertCondition {
    TimeOrthogonality,
    FrequencyIdentity,
    FilterBank,
    LowerBound,
    /// System-level check: Gram matrix of cached generator translates.
    TranslateGram,
}

/// Worst offender located by a certification sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ReportDetail {
    Pair { lambda: f64, lambda_prime: f64 },
    Omega { omega: f64 },
    FilterPair { k: usize, ell: usize, omega: f64 },
    Sigma { omega: f64, level: usize, sigma_min: f64 },
    None,
}

/// Residual, tolerance, and verdict for one certified identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub condition: CertCondition,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: ReportDetail,
}

impl CertificationReport {
    fn new(condition: CertCondition, residual: f64, tolerance: f64, detail: ReportDetail) -> Self {
        CertificationReport { condition, residual, tolerance, pass: residual <= tolerance, detail }
    }
}

/// Coefficient-level orthogonality: for each pair (lambda, lambda'), the
/// correlation of the coefficients at the shift 2N(lambda - lambda') must
/// be 2N delta I. The shift is computed in exact rational arithmetic.
pub fn check_time_orthogonality(
    mask: &VectorMask,
    pairs: &[(LatticePoint, LatticePoint)],
    tolerance: f64,
) -> Result<CertificationReport, MaskError> {
    let lat = mask.lattice();
    let two_n = lat.dilation();
    let mut worst = 0.0f64;
    let mut worst_pair = ReportDetail::None;
    for (lam, sig) in pairs {
        if !lat.contains(lam) || !lat.contains(sig) {
            return Err(MaskError::LatticeMismatch);
        }
        let shift = (lam.value - sig.value) * Ratio::from_integer(two_n);
        if !shift.is_integer() {
            return Err(MaskError::ShiftNotOnLattice);
        }
        let shift = shift.to_integer();
        if shift.rem_euclid(2) != 0 {
            return Err(MaskError::ShiftNotOnLattice);
        }
        let half = shift / 2;
        let mut acc = CMat::zeros(mask.channels());
        for (p, c) in mask.support() {
            if let Some(partner) = mask.coefficient(p.base, p.translate + half) {
                acc = acc.add(&c.mul(&partner.adjoint()));
            }
        }
        if lam == sig {
            acc = acc.sub(&CMat::identity(mask.channels()));
        }
        let residual = two_n as f64 * acc.frobenius_norm();
        if residual > worst {
            worst = residual;
            worst_pair = ReportDetail::Pair { lambda: lam.value_f64(), lambda_prime: sig.value_f64() };
        }
    }
    Ok(CertificationReport::new(CertCondition::TimeOrthogonality, worst, tolerance, worst_pair))
}

/// All pairs needed to certify a mask whose support has the given extent:
/// pairs sweeping every tested shift the support can reach.
pub fn default_pairs(mask: &VectorMask) -> Vec<(LatticePoint, LatticePoint)> {
    let lat = mask.lattice();
    let span = match (mask.support().first(), mask.support().last()) {
        (Some((lo, _)), Some((hi, _))) => (hi.value - lo.value).ceil().to_integer() / 2 + 1,
        _ => 1,
    };
    let points = lat.enumerate(0, span.max(1));
    let origin = lat.point(CosetBase::Zero, 0);
    let mut pairs = vec![(origin, origin)];
    for p in points {
        if p != origin {
            pairs.push((origin, p));
            pairs.push((p, origin));
        }
    }
    pairs
}

/// Extraction weights 1 + 2 cos(pi j r / N) for the offset family j/(4N).
fn coset_weights(lat: &Lattice) -> Vec<f64> {
    let two_n = lat.dilation();
    (0..two_n)
        .map(|j| 1.0 + 2.0 * (PI * (j * lat.r()) as f64 / lat.n() as f64).cos())
        .collect()
}

fn coset_gram(a: &VectorMask, b: &VectorMask, omega: f64) -> CMat {
    let (a1, a2) = a.split_symbol(omega);
    let (b1, b2) = b.split_symbol(omega);
    a1.mul(&b1.adjoint()).add(&a2.mul(&b2.adjoint()))
}

/// Frequency-domain orthonormality identity for a single mask: the weighted
/// offset sum of the coset-split products must be the identity at every
/// sampled frequency.
pub fn check_frequency_identity(
    mask: &VectorMask,
    omega_grid: &Grid,
    tolerance: f64,
) -> Result<CertificationReport, MaskError> {
    if omega_grid.count == 0 {
        return Err(MaskError::EmptyGrid);
    }
    let lat = mask.lattice();
    let weights = coset_weights(&lat);
    let quarter = 1.0 / (4.0 * lat.n() as f64);
    let identity = CMat::identity(mask.channels());
    let mut worst = 0.0f64;
    let mut worst_omega = omega_grid.start;
    for omega in omega_grid.points() {
        let mut acc = CMat::zeros(mask.channels());
        for (j, w) in weights.iter().enumerate() {
            let x = omega + j as f64 * quarter;
            acc = acc.add(&coset_gram(mask, mask, x).scale(Complex64::new(*w, 0.0)));
        }
        let residual = acc.sub(&identity).frobenius_norm();
        if residual > worst {
            worst = residual;
            worst_omega = omega;
        }
    }
    Ok(CertificationReport::new(
        CertCondition::FrequencyIdentity,
        worst,
        tolerance,
        ReportDetail::Omega { omega: worst_omega },
    ))
}

/// Frequency-domain orthonormality of the whole bank: diagonal identities as
/// in `check_frequency_identity`, plus vanishing cross terms between bands.
pub fn check_filterbank(
    bank: &MaskBank,
    omega_grid: &Grid,
    tolerance: f64,
) -> Result<CertificationReport, MaskError> {
    if omega_grid.count == 0 {
        return Err(MaskError::EmptyGrid);
    }
    let lat = bank.lattice();
    let expected = lat.dilation() as usize;
    let masks: Vec<&VectorMask> = bank.masks().collect();
    if masks.len() != expected {
        return Err(MaskError::BankSizeMismatch { expected, got: masks.len() });
    }
    let m = bank.channels();
    for w in &masks {
        if w.channels() != m {
            return Err(MaskError::ChannelMismatch { expected: m, got: w.channels() });
        }
    }
    let weights = coset_weights(&lat);
    let quarter = 1.0 / (4.0 * lat.n() as f64);
    let identity = CMat::identity(m);
    let mut worst = 0.0f64;
    let mut worst_detail = ReportDetail::None;
    for omega in omega_grid.points() {
        for (k, mk) in masks.iter().enumerate() {
            for (ell, ml) in masks.iter().enumerate() {
                let mut acc = CMat::zeros(m);
                for (j, w) in weights.iter().enumerate() {
                    let x = omega + j as f64 * quarter;
                    acc = acc.add(&coset_gram(mk, ml, x).scale(Complex64::new(*w, 0.0)));
                }
                if k == ell {
                    acc = acc.sub(&identity);
                }
                let residual = acc.frobenius_norm();
                if residual > worst {
                    worst = residual;
                    worst_detail = ReportDetail::FilterPair { k, ell, omega };
                }
            }
        }
    }
    Ok(CertificationReport::new(CertCondition::FilterBank, worst, tolerance, worst_detail))
}

/// Lower bound on the symbol's smallest singular value over geometrically
/// shrunk copies of the interval [e_lo, e_hi], the numerical stand-in for
/// the constant-C condition guaranteeing the infinite product stays away
/// from zero near the origin.
pub fn check_lower_bound(
    mask: &VectorMask,
    e_lo: f64,
    e_hi: f64,
    k_max: usize,
    c: f64,
    samples: usize,
) -> Result<CertificationReport, MaskError> {
    if !(e_lo < 0.0 && e_hi > 0.0) {
        return Err(MaskError::BadInterval);
    }
    assert!(c > 0.0, "lower-bound constant must be positive");
    assert!(k_max >= 1 && samples >= 2);
    let two_n = mask.lattice().dilation() as f64;
    let mut min_sigma = f64::INFINITY;
    let mut worst = ReportDetail::None;
    for k in 1..=k_max {
        let scale = two_n.powi(k as i32);
        for i in 0..samples {
            let omega = e_lo + (e_hi - e_lo) * i as f64 / (samples - 1) as f64;
            let sigma = mask.eval_symbol(omega / scale).smallest_singular_value();
            if sigma < min_sigma {
                min_sigma = sigma;
                worst = ReportDetail::Sigma { omega, level: k, sigma_min: sigma };
            }
        }
    }
    let residual = (c - min_sigma).max(0.0);
    Ok(CertificationReport::new(CertCondition::LowerBound, residual, 0.0, worst))
}

/// Construct the 2N - 1 wavelet masks completing a certified scaling mask
/// to an orthonormal filter bank.
///
/// Two constructions are attempted:
///
/// 1. Coset-phase completion, for masks whose two coset coefficient arrays
///    are proportional, block-aligned, and built from scaled-unitary blocks
///    (the Haar family on any channel count, and the bundled nonuniform
///    masks). The wavelets modulate the blocks by roots of unity and flip
///    the second coset's sign; the result satisfies the filter-bank
///    identity exactly.
/// 2. Conjugate-reversal, for scalar masks on the integer lattice (N = 1):
///    the classical alternating-sign time reversal.
///
/// The returned bank is re-certified on `omega_grid`; if the residual
/// exceeds the grid tolerance, completion fails.
pub fn complete_wavelet_masks(g: &VectorMask, omega_grid: &Grid) -> Result<MaskBank, MaskError> {
    let pre = check_frequency_identity(g, omega_grid, GRID_TOL)?;
    if !pre.pass {
        return Err(MaskError::NotCertified { residual: pre.residual });
    }
    let candidates = coset_phase_completion(g)
        .or_else(|| conjugate_reversal_completion(g))
        .ok_or_else(|| MaskError::CompletionFailed {
            detail: "mask structure outside the supported completion families; \
                     enlarge or restructure the support"
                .to_string(),
        })?;
    let bank = MaskBank::new(g.clone(), candidates)?;
    let report = check_filterbank(&bank, omega_grid, GRID_TOL)?;
    if !report.pass {
        return Err(MaskError::CompletionFailed {
            detail: format!("constructed bank misses the filter-bank identity, residual {:.3e}", report.residual),
        });
    }
    Ok(bank)
}

/// Strategy 1: coset-phase completion.
fn coset_phase_completion(g: &VectorMask) -> Option<Vec<VectorMask>> {
    let lat = g.lattice();
    let n = lat.n() as usize;
    let two_n = lat.dilation() as usize;
    let m = g.channels();
    let mut even: Vec<(i64, CMat)> = Vec::new();
    let mut odd: Vec<(i64, CMat)> = Vec::new();
    for (p, c) in g.support() {
        match p.base {
            CosetBase::Zero => even.push((p.translate, c.clone())),
            CosetBase::ROverN => odd.push((p.translate, c.clone())),
        }
    }
    if even.len() != n || odd.len() != n {
        return None;
    }
    // Coset arrays must sit on the same translates.
    if even.iter().map(|e| e.0).ne(odd.iter().map(|o| o.0)) {
        return None;
    }
    // Each block must be a scaled unitary: E E^H = I / (2N).
    let target = CMat::scalar(m, Complex64::new(1.0 / two_n as f64, 0.0));
    for (_, c) in even.iter().chain(odd.iter()) {
        if c.mul(&c.adjoint()).sub(&target).frobenius_norm() > 1e-9 {
            return None;
        }
    }
    // Odd blocks must be a fixed unitary multiple of the even blocks.
    let c0 = odd[0].1.mul(&even[0].1.adjoint()).scale(Complex64::new(two_n as f64, 0.0));
    if c0.mul(&c0.adjoint()).sub(&CMat::identity(m)).frobenius_norm() > 1e-9 {
        return None;
    }
    for i in 0..n {
        if odd[i].1.sub(&c0.mul(&even[i].1)).frobenius_norm() > 1e-9 {
            return None;
        }
    }
    // Distinct blocks may not sit at a correlation-tested shift.
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let dk = even[i].0 - even[j].0;
            let tested =
                dk.rem_euclid(2 * lat.n()) == 0 || (2 * dk - 2 * lat.r()).rem_euclid(4 * lat.n()) == 0
                    || (2 * dk + 2 * lat.r()).rem_euclid(4 * lat.n()) == 0;
            if tested {
                return None;
            }
        }
    }
    let mut wavelets = Vec::with_capacity(two_n - 1);
    for a in 0..2usize {
        for s in 0..n {
            if a == 0 && s == 0 {
                continue; // the scaling mask itself
            }
            let odd_sign = if a == 0 { 1.0 } else { -1.0 };
            let mut coeffs = Vec::with_capacity(2 * n);
            for (i, (k, e)) in even.iter().enumerate() {
                let phase = Complex64::from_polar(1.0, 2.0 * PI * (s * i) as f64 / n as f64);
                coeffs.push((lat.point(CosetBase::Zero, *k), e.scale(phase)));
                coeffs.push((
                    lat.point(CosetBase::ROverN, *k),
                    odd[i].1.scale(phase * odd_sign),
                ));
            }
            wavelets.push(VectorMask::new(lat, m, MaskRole::Wavelet, coeffs).ok()?);
        }
    }
    Some(wavelets)
}

/// Strategy 2: classical alternating-sign conjugate reversal on the integer
/// lattice, scalar masks only.
fn conjugate_reversal_completion(g: &VectorMask) -> Option<Vec<VectorMask>> {
    let lat = g.lattice();
    if lat.n() != 1 || g.channels() != 1 {
        return None;
    }
    // Integer index of a point on the N = 1 lattice.
    let index = |p: &LatticePoint| -> i64 {
        match p.base {
            CosetBase::Zero => 2 * p.translate,
            CosetBase::ROverN => 1 + 2 * p.translate,
        }
    };
    let idx: Vec<i64> = g.support().iter().map(|(p, _)| index(p)).collect();
    let lo = *idx.iter().min()?;
    let hi = *idx.iter().max()?;
    let mut sum = lo + hi;
    if sum.rem_euclid(2) == 0 {
        sum += 1;
    }
    let point_at = |i: i64| -> LatticePoint {
        if i.rem_euclid(2) == 0 {
            lat.point(CosetBase::Zero, i.div_euclid(2))
        } else {
            lat.point(CosetBase::ROverN, i.div_euclid(2))
        }
    };
    let mut coeffs = Vec::with_capacity(g.support().len());
    for (p, c) in g.support() {
        let i = index(p);
        let target = sum - i;
        let sign = if target.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        coeffs.push((point_at(target), c.conj().scale(Complex64::new(sign, 0.0))));
    }
    let wavelet = VectorMask::new(lat, 1, MaskRole::Wavelet, coeffs).ok()?;
    Some(vec![wavelet])
}
