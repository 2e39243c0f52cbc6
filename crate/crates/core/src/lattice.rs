//! The nonuniform translation set {0, r/N} + 2Z and the chirp modulation
//! attached to each translate.
//!
//! Lattice coordinates are exact rationals; they become floats only at
//! sampling time. The dilation factor of the multiresolution ladder is 2N.

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::LatticeError;
use crate::lct::LctParams;

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Validated translation-set data (N, r): r odd, 1 <= r <= 2N - 1,
/// gcd(r, N) = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lattice {
    n: i64,
    r: i64,
}

impl Lattice {
    pub fn new(n: i64, r: i64) -> Result<Self, LatticeError> {
        if n < 1 {
            return Err(LatticeError::NonPositiveN { n });
        }
        if r.rem_euclid(2) == 0 {
            return Err(LatticeError::EvenR { r });
        }
        if r < 1 || r > 2 * n - 1 {
            return Err(LatticeError::ROutOfRange { r, max: 2 * n - 1 });
        }
        if gcd(r, n) != 1 {
            return Err(LatticeError::NotCoprime { r, n });
        }
        Ok(Lattice { n, r })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    /// Dilation factor 2N.
    pub fn dilation(&self) -> i64 {
        2 * self.n
    }

    /// The fractional coset offset r/N.
    pub fn offset(&self) -> Ratio<i64> {
        Ratio::new(self.r, self.n)
    }

    /// The coset offset as a float, for sampling-time use only.
    pub fn offset_f64(&self) -> f64 {
        self.r as f64 / self.n as f64
    }

    pub fn point(&self, base: CosetBase, translate: i64) -> LatticePoint {
        let value = match base {
            CosetBase::Zero => Ratio::from_integer(2 * translate),
            CosetBase::ROverN => self.offset() + Ratio::from_integer(2 * translate),
        };
        LatticePoint { base, translate, value }
    }

    /// All points {2k, r/N + 2k : lo <= k <= hi}, ascending by value.
    pub fn enumerate(&self, lo: i64, hi: i64) -> Vec<LatticePoint> {
        assert!(lo <= hi, "enumeration range must satisfy lo <= hi");
        let mut pts = Vec::with_capacity(2 * (hi - lo + 1) as usize);
        for k in lo..=hi {
            pts.push(self.point(CosetBase::Zero, k));
            pts.push(self.point(CosetBase::ROverN, k));
        }
        pts.sort_by_key(|a| a.value);
        pts
    }

    /// Whether `p` was built on this lattice (exact rational check).
    pub fn contains(&self, p: &LatticePoint) -> bool {
        *p == self.point(p.base, p.translate)
    }
}

/// Which of the two cosets a lattice point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CosetBase {
    Zero,
    ROverN,
}

/// A single translate: base + 2 * translate, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    pub base: CosetBase,
    pub translate: i64,
    pub value: Ratio<i64>,
}

impl LatticePoint {
    pub fn value_f64(&self) -> f64 {
        *self.value.numer() as f64 / *self.value.denom() as f64
    }
}

impl PartialOrd for LatticePoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LatticePoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.value.cmp(&other.value)
    }
}

/// Unit-modulus chirp attached to the translate at `lambda`:
/// exp(-i pi (A/B) (t^2 - lambda^2)).
pub fn chirp_factor(t: f64, lambda: f64, params: &LctParams) -> Complex64 {
    let rate = std::f64::consts::PI * params.a() / params.b();
    Complex64::new(0.0, -rate * (t * t - lambda * lambda)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classical_case_is_valid() {
        let lat = Lattice::new(1, 1).unwrap();
        assert_eq!(lat.dilation(), 2);
        // {0,1} + 2Z enumerates to consecutive integers.
        let pts = lat.enumerate(-1, 0);
        let vals: Vec<f64> = pts.iter().map(|p| p.value_f64()).collect();
        assert_eq!(vals, vec![-2.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn validation_matrix() {
        assert!(Lattice::new(3, 5).is_ok());
        assert_eq!(Lattice::new(2, 2), Err(LatticeError::EvenR { r: 2 }));
        assert_eq!(Lattice::new(0, 1), Err(LatticeError::NonPositiveN { n: 0 }));
        assert_eq!(Lattice::new(2, 5), Err(LatticeError::ROutOfRange { r: 5, max: 3 }));
        assert_eq!(Lattice::new(3, 3), Err(LatticeError::NotCoprime { r: 3, n: 3 }));
    }

    #[test]
    fn enumeration_is_sorted_exact() {
        let lat = Lattice::new(2, 1).unwrap();
        let pts = lat.enumerate(0, 1);
        let vals: Vec<Ratio<i64>> = pts.iter().map(|p| p.value).collect();
        assert_eq!(
            vals,
            vec![
                Ratio::from_integer(0),
                Ratio::new(1, 2),
                Ratio::from_integer(2),
                Ratio::new(5, 2),
            ]
        );
        assert_eq!(pts.len(), 4);
    }

    #[test]
    fn cosets_are_disjoint() {
        for (n, r) in [(2i64, 1i64), (3, 1), (3, 5), (5, 3)] {
            let lat = Lattice::new(n, r).unwrap();
            for p in lat.enumerate(-3, 3) {
                for q in lat.enumerate(-3, 3) {
                    if p.base != q.base {
                        assert_ne!(p.value, q.value, "coset collision at N={n}, r={r}");
                    }
                }
            }
        }
    }

    #[test]
    fn dilated_points_are_even_integers() {
        // 2N * lambda lands in {0, 2r} + 4NZ.
        for (n, r) in [(1i64, 1i64), (2, 1), (2, 3), (3, 5)] {
            let lat = Lattice::new(n, r).unwrap();
            for p in lat.enumerate(-4, 4) {
                let scaled = p.value * Ratio::from_integer(2 * n);
                assert!(scaled.is_integer());
                let v = scaled.to_integer();
                assert_eq!(v.rem_euclid(2), 0);
                let residue = v.rem_euclid(4 * n);
                assert!(residue == 0 || residue == (2 * r).rem_euclid(4 * n));
            }
        }
    }

    #[test]
    fn chirp_is_unimodular_and_trivial_cases() {
        let p = LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        assert!((chirp_factor(0.7, 0.7, &p) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let fourier = LctParams::fourier();
        assert_eq!(chirp_factor(2.3, 0.5, &fourier), Complex64::new(1.0, 0.0));
        let mut t: f64 = 0.3;
        for _ in 0..1000 {
            t = (t * 7.7 + 0.1).sin() * 9.0;
            let lam = (t * 3.1).cos() * 4.0;
            assert!((chirp_factor(t, lam, &p).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chirp_pair_product_is_t_independent() {
        let p = LctParams::new(2.0, 0.5, 2.0, 1.0).unwrap();
        let lam = 1.5;
        let sig = -2.0;
        let reference = chirp_factor(0.0, lam, &p) * chirp_factor(0.0, sig, &p).conj();
        for k in 0..50 {
            let t = -5.0 + 0.2 * k as f64;
            let prod = chirp_factor(t, lam, &p) * chirp_factor(t, sig, &p).conj();
            assert!((prod - reference).norm() < 1e-12);
        }
        let rate = std::f64::consts::PI * p.a() / p.b();
        let expect = Complex64::new(0.0, -rate * (sig * sig - lam * lam)).exp();
        assert!((reference - expect).norm() < 1e-12);
    }
}
