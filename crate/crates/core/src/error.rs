//! Error types for the library, one enum per subsystem.

use std::fmt;

use crate::mask::CertificationReport;

/// Errors raised while validating transform parameters or applying the
/// discrete transform.
#[derive(Debug, Clone, PartialEq)]
pub enum LctError {
    /// |AD - BC - 1| exceeded the unimodularity tolerance.
    NotUnimodular { det: f64 },
    /// B = 0 selects the degenerate scaling branch, which is not implemented.
    DegenerateB,
    /// An input or output grid had zero points.
    EmptyGrid,
    /// Sample matrix shape does not match grid count times channel count.
    ShapeMismatch { expected: usize, got: usize },
}

impl fmt::Display for LctError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LctError::NotUnimodular { det } => {
                write!(f, "parameter matrix is not unimodular: det = {det:.17e}")
            }
            LctError::DegenerateB => write!(f, "B = 0 is outside the implemented branch"),
            LctError::EmptyGrid => write!(f, "grid must contain at least one point"),
            LctError::ShapeMismatch { expected, got } => {
                write!(f, "sample storage has {got} values, expected {expected}")
            }
        }
    }
}

impl std::error::Error for LctError {}

/// Errors raised while validating the translation lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeError {
    NonPositiveN { n: i64 },
    EvenR { r: i64 },
    ROutOfRange { r: i64, max: i64 },
    NotCoprime { r: i64, n: i64 },
}

impl fmt::Display for LatticeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeError::NonPositiveN { n } => write!(f, "N must be >= 1, got {n}"),
            LatticeError::EvenR { r } => write!(f, "r must be odd, got {r}"),
            LatticeError::ROutOfRange { r, max } => {
                write!(f, "r must satisfy 1 <= r <= {max}, got {r}")
            }
            LatticeError::NotCoprime { r, n } => write!(f, "r = {r} and N = {n} share a factor"),
        }
    }
}

impl std::error::Error for LatticeError {}

/// Errors raised by mask construction and certification.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskError {
    /// A coefficient matrix is not square or disagrees with the mask's M.
    ChannelMismatch { expected: usize, got: usize },
    /// A lattice point belongs to a different (N, r) lattice than the mask.
    LatticeMismatch,
    /// A requested coefficient shift does not land on the coset structure.
    ShiftNotOnLattice,
    /// The certification grid was empty.
    EmptyGrid,
    /// A bank does not hold exactly 2N masks counting the scaling mask.
    BankSizeMismatch { expected: usize, got: usize },
    /// The lower-bound sampling interval does not contain 0 in its interior.
    BadInterval,
    /// The scaling mask symbol at zero is not the identity.
    NotNormalized { deviation: f64 },
    /// The input mask does not satisfy the orthonormality identity that
    /// wavelet completion requires.
    NotCertified { residual: f64 },
    /// No wavelet family representable on the mask's support satisfies the
    /// filter-bank identity.
    CompletionFailed { detail: String },
}

impl fmt::Display for MaskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaskError::ChannelMismatch { expected, got } => {
                write!(f, "coefficient matrix is {got}x{got}, mask has M = {expected}")
            }
            MaskError::LatticeMismatch => write!(f, "lattice point from a different (N, r) lattice"),
            MaskError::ShiftNotOnLattice => {
                write!(f, "shifted coefficient index falls off the lattice cosets")
            }
            MaskError::EmptyGrid => write!(f, "certification grid must contain at least one point"),
            MaskError::BankSizeMismatch { expected, got } => {
                write!(f, "bank holds {got} masks, expected {expected}")
            }
            MaskError::BadInterval => write!(f, "interval must contain 0 in its interior"),
            MaskError::NotNormalized { deviation } => {
                write!(f, "symbol at 0 deviates from identity by {deviation:.3e}")
            }
            MaskError::NotCertified { residual } => {
                write!(f, "mask fails the orthonormality identity, residual {residual:.3e}")
            }
            MaskError::CompletionFailed { detail } => write!(f, "wavelet completion failed: {detail}"),
        }
    }
}

impl std::error::Error for MaskError {}

/// Errors raised by the cascade construction.
#[derive(Debug, Clone, PartialEq)]
pub enum CascadeError {
    /// The mask symbol at zero is not the identity.
    NotNormalized { deviation: f64 },
    /// The truncated product did not settle below the convergence threshold.
    NonConverged { metric: f64 },
    /// Grid with zero points.
    EmptyGrid,
    /// Wavelet index outside 1..=2N-1.
    EllOutOfRange { ell: usize, max: usize },
    /// Failure inside the transform engine.
    Lct(LctError),
}

impl fmt::Display for CascadeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CascadeError::NotNormalized { deviation } => {
                write!(f, "symbol at 0 deviates from identity by {deviation:.3e}")
            }
            CascadeError::NonConverged { metric } => {
                write!(f, "cascade did not converge, last update deviation {metric:.3e}")
            }
            CascadeError::EmptyGrid => write!(f, "grid must contain at least one point"),
            CascadeError::EllOutOfRange { ell, max } => {
                write!(f, "wavelet index {ell} outside 1..={max}")
            }
            CascadeError::Lct(e) => write!(f, "transform failure: {e}"),
        }
    }
}

impl std::error::Error for CascadeError {}

impl From<LctError> for CascadeError {
    fn from(e: LctError) -> Self {
        CascadeError::Lct(e)
    }
}

/// Errors raised by system construction and the multi-level transform.
#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    /// A certification check failed while building the system.
    CertificationFailed { report: CertificationReport },
    /// The cascade did not converge.
    NonConverged { metric: f64 },
    /// Signal channel count disagrees with the system's M.
    ChannelMismatch { expected: usize, got: usize },
    /// The requested translate range exceeds the cached resolution window.
    SupportOverflow,
    /// Requested lattice points are not representable on the cached grid.
    LatticeMismatch,
    /// A pyramid was produced by an incompatible system.
    IncompatiblePyramid { detail: String },
    /// The time grid step cannot represent the lattice exactly.
    GridMisaligned,
    /// Failure inside the cascade stage.
    Cascade(CascadeError),
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::CertificationFailed { report } => write!(
                f,
                "certification failed: {:?} residual {:.3e} > tolerance {:.3e}",
                report.condition, report.residual, report.tolerance
            ),
            PipelineError::NonConverged { metric } => {
                write!(f, "cascade did not converge, metric {metric:.3e}")
            }
            PipelineError::ChannelMismatch { expected, got } => {
                write!(f, "signal has {got} channels, system has M = {expected}")
            }
            PipelineError::SupportOverflow => {
                write!(f, "requested decomposition exceeds the cached support window")
            }
            PipelineError::LatticeMismatch => {
                write!(f, "lattice points are not aligned with the cached grid")
            }
            PipelineError::IncompatiblePyramid { detail } => {
                write!(f, "pyramid incompatible with this system: {detail}")
            }
            PipelineError::GridMisaligned => {
                write!(f, "time grid step cannot represent the lattice translates exactly")
            }
            PipelineError::Cascade(e) => write!(f, "cascade failure: {e}"),
        }
    }
}

impl std::error::Error for PipelineError {}

impl From<CascadeError> for PipelineError {
    fn from(e: CascadeError) -> Self {
        match e {
            CascadeError::NonConverged { metric } => PipelineError::NonConverged { metric },
            other => PipelineError::Cascade(other),
        }
    }
}
