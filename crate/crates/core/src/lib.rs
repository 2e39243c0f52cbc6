//! Vector-valued nonuniform multiresolution analysis in the linear
//! canonical transform geometry.
//!
//! The crate provides:
//!
//! - a dense reference implementation of the linear canonical transform
//!   with validated unimodular parameters ([`lct`]);
//! - the two-coset translation lattice {0, r/N} + 2Z with exact rational
//!   coordinates and the chirp modulation attached to each translate
//!   ([`lattice`]);
//! - matrix-valued refinement masks, their symbols, and certification of
//!   the orthonormality identities a mask or filter bank must satisfy
//!   ([`mask`]);
//! - cascade construction of the scaling function and wavelets from a
//!   certified mask ([`cascade`]);
//! - multi-level analysis and synthesis of M-channel signals against a
//!   certified system, with perfect reconstruction ([`pipeline`]);
//! - file formats for masks, banks, coefficient pyramids, sampled dumps,
//!   and CSV signals ([`io`]).

pub mod cascade;
pub mod cmat;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod io;
pub mod lattice;
pub mod lct;
pub mod mask;
pub mod pipeline;

pub use cascade::{phi_hat_product, phi_time, psi_hat, CascadeResult};
pub use cmat::CMat;
pub use num_complex::Complex64;
pub use error::{CascadeError, LatticeError, LctError, MaskError, PipelineError};
pub use grid::Grid;
pub use lattice::{chirp_factor, CosetBase, Lattice, LatticePoint};
pub use lct::{lct_forward, lct_inverse, lct_kernel, LctParams, SampledVectorFunction};
pub use mask::{
    check_filterbank, check_frequency_identity, check_lower_bound, check_time_orthogonality,
    complete_wavelet_masks, CertCondition, CertificationReport, MaskBank, MaskRole, VectorMask,
};
pub use io::{DumpDomain, FormatError};
pub use pipeline::{
    analyze, build_system, gram_matrix, load_system, synthesize, CoefficientPyramid, GramTarget,
    SystemResolution, VnumraSystem,
};
