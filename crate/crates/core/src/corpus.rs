//! Reference masks and banks used by the test suites, the acceptance run,
//! and the CLI demos.

use num_complex::Complex64;

use crate::cmat::CMat;
use crate::lattice::{CosetBase, Lattice};
use crate::mask::{MaskBank, MaskRole, VectorMask};

fn real(v: f64, m: usize) -> CMat {
    CMat::scalar(m, Complex64::new(v, 0.0))
}

/// M-channel Haar scaling mask on the integer lattice: coefficients
/// I/sqrt(2) at 0 and 1. Each channel carries an independent Haar pair.
pub fn haar(m: usize) -> VectorMask {
    let lat = Lattice::new(1, 1).unwrap();
    let v = 1.0 / 2.0_f64.sqrt();
    VectorMask::new(
        lat,
        m,
        MaskRole::Scaling,
        vec![
            (lat.point(CosetBase::Zero, 0), real(v, m)),
            (lat.point(CosetBase::ROverN, 0), real(v, m)),
        ],
    )
    .unwrap()
}

/// Alias emphasizing the block-diagonal multi-channel structure.
pub fn block_haar(m: usize) -> VectorMask {
    haar(m)
}

/// The Haar high-pass mask: I/sqrt(2) at 0, -I/sqrt(2) at 1.
pub fn haar_wavelet(m: usize) -> VectorMask {
    let lat = Lattice::new(1, 1).unwrap();
    let v = 1.0 / 2.0_f64.sqrt();
    VectorMask::new(
        lat,
        m,
        MaskRole::Wavelet,
        vec![
            (lat.point(CosetBase::Zero, 0), real(v, m)),
            (lat.point(CosetBase::ROverN, 0), real(-v, m)),
        ],
    )
    .unwrap()
}

/// The two-mask Haar bank on any channel count.
pub fn haar_bank(m: usize) -> MaskBank {
    MaskBank::new(haar(m), vec![haar_wavelet(m)]).unwrap()
}

/// A genuinely nonuniform scaling mask: N = 2, r = 1, dilation 4,
/// coefficients 1/2 at lattice points 0, 1/2, 4, 9/2. Its symbol factors as
/// (1/4)(1 + e^(-i pi w))(1 + e^(-8 i pi w)), which satisfies the
/// orthonormality identity and the lower bound on [-1/4, 1/4].
pub fn nonuniform_n2() -> VectorMask {
    let lat = Lattice::new(2, 1).unwrap();
    VectorMask::new(
        lat,
        1,
        MaskRole::Scaling,
        vec![
            (lat.point(CosetBase::Zero, 0), real(0.5, 1)),
            (lat.point(CosetBase::ROverN, 0), real(0.5, 1)),
            (lat.point(CosetBase::Zero, 2), real(0.5, 1)),
            (lat.point(CosetBase::ROverN, 2), real(0.5, 1)),
        ],
    )
    .unwrap()
}

/// The closed-form orthonormal bank completing `nonuniform_n2`: the three
/// wavelets modulate the two coefficient blocks by +-1 and flip the sign of
/// the fractional coset.
pub fn nonuniform_n2_bank() -> MaskBank {
    let lat = Lattice::new(2, 1).unwrap();
    let build = |even: [f64; 2], odd: [f64; 2]| {
        VectorMask::new(
            lat,
            1,
            MaskRole::Wavelet,
            vec![
                (lat.point(CosetBase::Zero, 0), real(even[0], 1)),
                (lat.point(CosetBase::ROverN, 0), real(odd[0], 1)),
                (lat.point(CosetBase::Zero, 2), real(even[1], 1)),
                (lat.point(CosetBase::ROverN, 2), real(odd[1], 1)),
            ],
        )
        .unwrap()
    };
    let wavelets = vec![
        build([0.5, -0.5], [0.5, -0.5]),
        build([0.5, 0.5], [-0.5, -0.5]),
        build([0.5, -0.5], [-0.5, 0.5]),
    ];
    MaskBank::new(nonuniform_n2(), wavelets).unwrap()
}

/// Masks with known certification outcomes: `(mask, passes)`. Used to pin
/// the agreement between the time-domain and frequency-domain checks.
pub fn certification_corpus() -> Vec<(VectorMask, bool)> {
    let lat1 = Lattice::new(1, 1).unwrap();
    let lat2 = Lattice::new(2, 1).unwrap();
    let s = 1.0 / 2.0_f64.sqrt();

    let mut corpus: Vec<(VectorMask, bool)> = vec![
        (haar(1), true),
        (block_haar(2), true),
        (block_haar(3), true),
        (haar_wavelet(1), true),
        (nonuniform_n2(), true),
        // Constant-symbol mask: passes the identity although it is not a
        // normalized scaling mask.
        (
            VectorMask::new(
                lat1,
                1,
                MaskRole::Wavelet,
                vec![(lat1.point(CosetBase::Zero, 0), real(1.0, 1))],
            )
            .unwrap(),
            true,
        ),
        // Minimal two-tap nonuniform mask: satisfies the correlation
        // identity on its tiny support (only the zero shift is reachable).
        (
            VectorMask::new(
                lat2,
                1,
                MaskRole::Wavelet,
                vec![
                    (lat2.point(CosetBase::Zero, 0), real(s, 1)),
                    (lat2.point(CosetBase::ROverN, 0), real(s, 1)),
                ],
            )
            .unwrap(),
            true,
        ),
        // Zero mask: misses the delta term outright.
        (VectorMask::new(lat1, 1, MaskRole::Wavelet, vec![]).unwrap(), false),
        // Doubled Haar: correlation at shift zero is 4x too large.
        (
            VectorMask::new(
                lat1,
                1,
                MaskRole::Wavelet,
                vec![
                    (lat1.point(CosetBase::Zero, 0), real(2.0 * s, 1)),
                    (lat1.point(CosetBase::ROverN, 0), real(2.0 * s, 1)),
                ],
            )
            .unwrap(),
            false,
        ),
        // Perturbed Haar.
        (
            VectorMask::new(
                lat1,
                1,
                MaskRole::Wavelet,
                vec![
                    (lat1.point(CosetBase::Zero, 0), real(s + 0.05, 1)),
                    (lat1.point(CosetBase::ROverN, 0), real(s, 1)),
                ],
            )
            .unwrap(),
            false,
        ),
        // Haar with a spurious tail coefficient: breaks the shift-2
        // correlation.
        (
            VectorMask::new(
                lat1,
                1,
                MaskRole::Wavelet,
                vec![
                    (lat1.point(CosetBase::Zero, 0), real(s, 1)),
                    (lat1.point(CosetBase::ROverN, 0), real(s, 1)),
                    (lat1.point(CosetBase::Zero, 1), real(0.1, 1)),
                ],
            )
            .unwrap(),
            false,
        ),
        // Perturbed nonuniform mask.
        (
            VectorMask::new(
                lat2,
                1,
                MaskRole::Wavelet,
                vec![
                    (lat2.point(CosetBase::Zero, 0), real(0.55, 1)),
                    (lat2.point(CosetBase::ROverN, 0), real(0.5, 1)),
                    (lat2.point(CosetBase::Zero, 2), real(0.5, 1)),
                    (lat2.point(CosetBase::ROverN, 2), real(0.5, 1)),
                ],
            )
            .unwrap(),
            false,
        ),
    ];

    // Block-diagonal completion feed for the M = 2 case, kept last so the
    // corpus also exercises a wavelet mask with complex phases.
    corpus.push((
        {
            let m = 2;
            let lat = lat1;
            let phase = Complex64::from_polar(1.0 / 2.0_f64.sqrt(), std::f64::consts::FRAC_PI_4);
            let mut c0 = CMat::zeros(m);
            c0[(0, 0)] = phase;
            c0[(1, 1)] = phase;
            let mut c1 = CMat::zeros(m);
            c1[(0, 0)] = phase;
            c1[(1, 1)] = phase;
            VectorMask::new(
                lat,
                m,
                MaskRole::Wavelet,
                vec![
                    (lat.point(CosetBase::Zero, 0), c0),
                    (lat.point(CosetBase::ROverN, 0), c1),
                ],
            )
            .unwrap()
        },
        true,
    ));
    corpus
}
