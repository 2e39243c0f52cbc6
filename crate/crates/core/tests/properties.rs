//! Property tests for the structural invariants: parameter algebra, kernel
//! modulus, chirp identities, symbol periodicity and coset recombination,
//! lattice enumeration, transform linearity, and file round trips.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

use vnumra::io::{read_dump, read_signal_csv, write_dump, write_signal_csv, DumpDomain};
use vnumra::*;

fn valid_params() -> impl Strategy<Value = LctParams> {
    (
        -3.0f64..3.0,
        prop_oneof![0.25f64..3.0, -3.0f64..-0.25],
        -3.0f64..3.0,
    )
        .prop_map(|(a, b, d)| {
            let c = (a * d - 1.0) / b;
            LctParams::new(a, b, c, d).expect("constructed unimodular")
        })
}

fn valid_lattice() -> impl Strategy<Value = Lattice> {
    (1i64..=8, any::<u16>()).prop_filter_map("odd coprime r exists", |(n, pick)| {
        let candidates: Vec<i64> = (1..=2 * n - 1)
            .step_by(2)
            .filter(|r| {
                let mut a = *r;
                let mut b = n;
                while b != 0 {
                    let t = a % b;
                    a = b;
                    b = t;
                }
                a == 1
            })
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let r = candidates[pick as usize % candidates.len()];
        Some(Lattice::new(n, r).unwrap())
    })
}

proptest! {
    #[test]
    fn composition_preserves_unimodularity(p in valid_params(), q in valid_params()) {
        if let Ok(r) = p.compose(&q) {
            prop_assert!((r.a() * r.d() - r.b() * r.c() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_modulus_is_constant(
        p in valid_params(),
        t in -20.0f64..20.0,
        xi in -20.0f64..20.0,
    ) {
        let expect = 1.0 / (2.0 * PI * p.b().abs()).sqrt();
        prop_assert!((lct_kernel(t, xi, &p).norm() - expect).abs() < 1e-12);
    }

    #[test]
    fn chirp_is_unimodular_and_pairwise_constant(
        p in valid_params(),
        t in -10.0f64..10.0,
        s in -10.0f64..10.0,
        lam in -6.0f64..6.0,
        sig in -6.0f64..6.0,
    ) {
        prop_assert!((chirp_factor(t, lam, &p).norm() - 1.0).abs() < 1e-12);
        // The pair product does not depend on the time variable.
        let at_t = chirp_factor(t, lam, &p) * chirp_factor(t, sig, &p).conj();
        let at_s = chirp_factor(s, lam, &p) * chirp_factor(s, sig, &p).conj();
        prop_assert!((at_t - at_s).norm() < 1e-10);
    }

    #[test]
    fn enumeration_counts_and_sorts(lat in valid_lattice(), lo in -6i64..6, span in 0i64..6) {
        let hi = lo + span;
        let points = lat.enumerate(lo, hi);
        prop_assert_eq!(points.len(), 2 * (span as usize + 1));
        for w in points.windows(2) {
            prop_assert!(w[0].value < w[1].value, "enumeration must strictly increase");
        }
        for p in &points {
            prop_assert!(lat.contains(p));
        }
    }

    #[test]
    fn symbol_is_n_periodic(omega in -4.0f64..4.0) {
        for mask in [corpus::haar(1), corpus::block_haar(2), corpus::nonuniform_n2()] {
            let n = mask.lattice().n() as f64;
            let d = mask
                .eval_symbol(omega + n)
                .sub(&mask.eval_symbol(omega))
                .frobenius_norm();
            prop_assert!(d < 1e-12, "period deviation {}", d);
        }
    }

    #[test]
    fn split_symbol_recombines_everywhere(omega in -4.0f64..4.0) {
        for mask in [corpus::haar(1), corpus::nonuniform_n2(), corpus::haar_wavelet(2)] {
            let lat = mask.lattice();
            let offset = lat.r() as f64 / lat.n() as f64;
            let (even, odd) = mask.split_symbol(omega);
            let phase = Complex64::new(0.0, -2.0 * PI * offset * omega).exp();
            let err = even
                .add(&odd.scale(phase))
                .sub(&mask.eval_symbol(omega))
                .frobenius_norm();
            prop_assert!(err < 1e-14, "recombination error {}", err);
        }
    }

    #[test]
    fn forward_transform_is_linear(
        p in valid_params(),
        alpha_re in -2.0f64..2.0,
        alpha_im in -2.0f64..2.0,
        beta_re in -2.0f64..2.0,
    ) {
        let alpha = Complex64::new(alpha_re, alpha_im);
        let beta = Complex64::new(beta_re, 0.5);
        let grid = Grid::symmetric(3.0, 64).unwrap();
        let f = SampledVectorFunction::from_fn(grid, 1, |t| {
            vec![Complex64::new((-t * t).exp(), t * (-t * t).exp())]
        });
        let g = SampledVectorFunction::from_fn(grid, 1, |t| {
            vec![Complex64::new((2.0 * t).sin(), (-t * t / 2.0).exp())]
        });
        let combo = SampledVectorFunction::from_fn(grid, 1, |t| {
            let k = grid.index_of(t, 1e-9).unwrap();
            vec![alpha * f.value(k, 0) + beta * g.value(k, 0)]
        });
        let out = Grid::symmetric(5.0, 33).unwrap();
        let ff = lct_forward(&f, out, &p).unwrap();
        let gg = lct_forward(&g, out, &p).unwrap();
        let cc = lct_forward(&combo, out, &p).unwrap();
        for k in 0..out.count {
            let expect = alpha * ff.value(k, 0) + beta * gg.value(k, 0);
            prop_assert!((cc.value(k, 0) - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn dump_round_trip(
        start in -4.0f64..4.0,
        step in 0.01f64..0.5,
        count in 1usize..40,
        channels in 1usize..4,
        seed in any::<u64>(),
    ) {
        let grid = Grid::new(start, step, count).unwrap();
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64 / (1u64 << 30) as f64) - 2.0
        };
        let f = SampledVectorFunction::from_fn(grid, channels, |_| {
            (0..channels).map(|_| Complex64::new(next(), next())).collect()
        });
        let mut buf = Vec::new();
        write_dump(&mut buf, &f, DumpDomain::Time).unwrap();
        let (back, domain) = read_dump(buf.as_slice()).unwrap();
        prop_assert_eq!(domain, DumpDomain::Time);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn signal_csv_round_trip(
        start in -4.0f64..4.0,
        count in 2usize..24,
        channels in 1usize..3,
        seed in any::<u64>(),
    ) {
        let grid = Grid::new(start, 0.125, count).unwrap();
        let mut state = seed | 1;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            ((state >> 33) as f64 / (1u64 << 30) as f64) - 2.0
        };
        let f = SampledVectorFunction::from_fn(grid, channels, |_| {
            (0..channels).map(|_| Complex64::new(next(), next())).collect()
        });
        let mut buf = Vec::new();
        write_signal_csv(&mut buf, &f).unwrap();
        let back = read_signal_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.channels, f.channels);
        prop_assert_eq!(back.grid.count, f.grid.count);
        for (a, b) in f.values.iter().zip(&back.values) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

#[test]
fn parseval_at_desk_scale() {
    // Well-resolved compactly supported input: the transform preserves the
    // L2 norm within a relative thousandth.
    for params in [
        LctParams::fourier(),
        LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap(),
        LctParams::new(0.5, -1.5, 1.0, -1.0).unwrap(),
    ] {
        let grid = Grid::symmetric(10.0, 2048).unwrap();
        let f = SampledVectorFunction::from_fn(grid, 1, |t| {
            vec![Complex64::new((-t * t / 2.0).exp(), 0.3 * t * (-t * t / 2.0).exp())]
        });
        let out = Grid::symmetric(40.0 * params.b().abs().max(1.0), 8192).unwrap();
        let fwd = lct_forward(&f, out, &params).unwrap();
        let ratio = fwd.l2_norm() / f.l2_norm();
        assert!((ratio - 1.0).abs() < 1e-3, "Parseval ratio {ratio} for {params:?}");
    }
}
