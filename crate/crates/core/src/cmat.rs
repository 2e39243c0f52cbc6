//! Small dense complex matrices and the handful of factorizations the
//! certification checks need. Channel counts stay in the single digits, so
//! everything here is written for clarity over asymptotics.

use num_complex::Complex64;

/// Row-major M x M complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub dim: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        CMat {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let dim = rows.len();
        let mut m = CMat::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "matrix rows must be square");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn scalar(dim: usize, value: Complex64) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = value;
        }
        m
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn add(&self, other: &CMat) -> CMat {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &CMat, f: impl Fn(Complex64, Complex64) -> Complex64) -> CMat {
        assert_eq!(self.dim, other.dim);
        let mut out = CMat::zeros(self.dim);
        for i in 0..self.data.len() {
            out.data[i] = f(self.data[i], other.data[i]);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> CMat {
        let n = self.dim;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn conj(&self) -> CMat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = v.conj();
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for i in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.dim {
                acc += self[(i, j)] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = self.clone();
        // Sweep until off-diagonal mass is negligible.
        for _ in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        off += a[(i, j)].norm_sqr();
                    }
                }
            }
            if off.sqrt() < 1e-14 * (1.0 + a.frobenius_norm()) {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, p, q);
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }

    /// Smallest singular value, via the Hermitian eigenvalues of A^H A.
    pub fn smallest_singular_value(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        let eig = gram.hermitian_eigenvalues();
        eig[0].max(0.0).sqrt()
    }

    /// Inverse square root of a Hermitian positive definite matrix by the
    /// Newton-Schulz iteration. Requires the spectrum inside (0, 2) after
    /// trace scaling, which holds for the near-identity Gram corrections
    /// this crate applies it to.
    pub fn hermitian_inverse_sqrt(&self) -> CMat {
        let n = self.dim;
        let trace: f64 = (0..n).map(|i| self[(i, i)].re).sum();
        let scale = (trace / n as f64).max(1e-300);
        let a = self.scale(Complex64::new(1.0 / scale, 0.0));
        let mut x = CMat::identity(n);
        for _ in 0..40 {
            let xx = x.mul(&x);
            let axx = a.mul(&xx);
            let residual = axx.sub(&CMat::identity(n)).frobenius_norm();
            let three_i = CMat::scalar(n, Complex64::new(3.0, 0.0));
            x = x.mul(&three_i.sub(&axx)).scale(Complex64::new(0.5, 0.0));
            if residual < 1e-15 {
                break;
            }
        }
        x.scale(Complex64::new(1.0 / scale.sqrt(), 0.0))
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// One complex Jacobi rotation zeroing the (p, q) entry of a Hermitian matrix.
fn jacobi_rotate(a: &mut CMat, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq.norm() < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Unitarize the phase first, then a real rotation.
    let phase = apq / apq.norm();
    let tau = (aqq - app) / (2.0 * apq.norm());
    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let n = a.dim;
    // G acts on rows/cols p and q: [c, s*conj(phase); -s*phase, c].
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s * phase.conj();
        a[(k, q)] = akp * s * phase + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s * phase;
        a[(q, k)] = apk * s * phase.conj() + aqk * c;
    }
}

/// Inner product conjugating the second argument, matching the convention
/// used for all Gram computations in this crate.
pub fn vec_dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Extend `rows` (assumed orthonormal) to an orthonormal basis of C^n by
/// modified Gram-Schmidt over the standard basis, pivoting on the largest
/// remaining column norm with ties broken by lowest index.
pub fn complete_orthonormal_rows(rows: &[Vec<Complex64>], n: usize) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = rows.to_vec();
    while basis.len() < n {
        // Project each standard basis vector and pick the largest residual.
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            for b in &basis {
                let c = vec_dot(&e, b);
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei -= c * bi;
                }
            }
            let norm = vec_norm(&e);
            match best {
                Some((_, bn)) if norm <= bn + 1e-12 => {}
                _ => best = Some((j, norm)),
            }
        }
        let (j, norm) = best.expect("dimension exhausted");
        assert!(norm > 1e-9, "cannot complete basis, residual collapsed");
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        for b in &basis {
            let c = vec_dot(&e, b);
            for (ei, bi) in e.iter_mut().zip(b) {
                *ei -= c * bi;
            }
        }
        // Second pass for numerical orthogonality.
        for b in &basis {
            let c = vec_dot(&e, b);
            for (ei, bi) in e.iter_mut().zip(b) {
                *ei -= c * bi;
            }
        }
        let norm = vec_norm(&e);
        for v in &mut e {
            *v /= norm;
        }
        basis.push(e);
    }
    basis
}
