//! Small dense complex matrices, complex LU determinants and Hermitean
//! eigenvalues.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Row-major entries; panics unless `data.len()` is a perfect square.
    pub fn from_row_major(data: Vec<Complex64>) -> Self {
        let n = (data.len() as f64).sqrt().round() as usize;
        assert_eq!(n * n, data.len(), "row-major data is not square");
        Self { n, data }
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// The matrix unit e_j (single 1 at position (j, j)).
    pub fn unit(n: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(j, j)] = ONE;
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    pub fn scale_re(&self, x: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&a| a * x).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn cube(&self) -> Self {
        &(self * self) * self
    }

    /// Block matrix whose (a, b) block is `sigma[a][b] * self`, i.e. the
    /// tensor product `self ⊗ sigma` with the 2×2 factor indexing blocks.
    pub fn kron2(&self, sigma: &[[Complex64; 2]; 2]) -> Self {
        let n = self.n;
        Self::from_fn(2 * n, |i, j| sigma[i / n][j / n] * self[(i % n, j % n)])
    }

    /// Assembles a 2×2 block matrix from four n×n blocks.
    pub fn blocks2(b11: &Self, b12: &Self, b21: &Self, b22: &Self) -> Self {
        let n = b11.n;
        Self::from_fn(2 * n, |i, j| {
            let b = match (i / n, j / n) {
                (0, 0) => b11,
                (0, 1) => b12,
                (1, 0) => b21,
                _ => b22,
            };
            b[(i % n, j % n)]
        })
    }

    pub fn is_hermitean(&self, tol: f64) -> bool {
        let scale = self.norm_max().max(1.0);
        (self - &self.adjoint()).norm_max() <= tol * scale
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat({}x{})", self.n, self.n)?;
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.6e}{:+.6e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add<&CMat> for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        debug_assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&CMat> for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        debug_assert_eq!(self.n, rhs.n);
        CMat {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&CMat> for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        let n = self.n;
        debug_assert_eq!(n, rhs.n);
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Neg for &CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<CMat> for CMat {
            type Output = CMat;
            fn $m(self, rhs: CMat) -> CMat {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&CMat> for CMat {
            type Output = CMat;
            fn $m(self, rhs: &CMat) -> CMat {
                (&self).$m(rhs)
            }
        }
        impl $tr<CMat> for &CMat {
            type Output = CMat;
            fn $m(self, rhs: CMat) -> CMat {
                self.$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CMat {
    type Output = CMat;
    fn neg(self) -> CMat {
        self.scale_re(-1.0)
    }
}

impl Mul<f64> for CMat {
    type Output = CMat;
    fn mul(self, rhs: f64) -> CMat {
        self.scale_re(rhs)
    }
}

impl Mul<f64> for &CMat {
    type Output = CMat;
    fn mul(self, rhs: f64) -> CMat {
        self.scale_re(rhs)
    }
}

impl Mul<Complex64> for CMat {
    type Output = CMat;
    fn mul(self, rhs: Complex64) -> CMat {
        self.scale(rhs)
    }
}

impl Mul<Complex64> for &CMat {
    type Output = CMat;
    fn mul(self, rhs: Complex64) -> CMat {
        self.scale(rhs)
    }
}

impl AddAssign<&CMat> for CMat {
    fn add_assign(&mut self, rhs: &CMat) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMat> for CMat {
    fn sub_assign(&mut self, rhs: &CMat) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

/// Pauli-type constants used by the Lax matrices. `SIGMA2` carries the sign
/// convention `[[0, i], [-i, 0]]`.
pub mod pauli {
    use super::{Complex64, I, ONE, ZERO};

    pub type M2 = [[Complex64; 2]; 2];

    pub const ID: M2 = [[ONE, ZERO], [ZERO, ONE]];
    pub const SIGMA1: M2 = [[ZERO, ONE], [ONE, ZERO]];
    pub const SIGMA2: M2 = [[ZERO, I], [Complex64::new(0.0, -1.0), ZERO]];
    pub const SIGMA3: M2 = [[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]];
    pub const SIGMA_PLUS: M2 = [[ZERO, ONE], [ZERO, ZERO]];
    pub const SIGMA_MINUS: M2 = [[ZERO, ZERO], [ONE, ZERO]];
}

/// Determinant in factored form: `value = phase * exp(log_abs)`.
#[derive(Clone, Copy, Debug)]
pub struct LogDet {
    pub log_abs: f64,
    pub phase: Complex64,
    pub singular: bool,
}

impl LogDet {
    pub fn value(&self) -> Complex64 {
        if self.singular {
            ZERO
        } else {
            self.phase * self.log_abs.exp()
        }
    }

    /// Complex logarithm of the ratio `self / other`.
    pub fn log_ratio(&self, other: &LogDet) -> Complex64 {
        let dphase = self.phase / other.phase;
        Complex64::new(self.log_abs - other.log_abs, dphase.arg())
    }
}

/// LU factorisation with partial pivoting of the row-major n×n matrix `a`,
/// destroyed in place.
pub fn lu_log_det(a: &mut [Complex64], n: usize) -> LogDet {
    assert_eq!(a.len(), n * n);
    let mut log_abs = 0.0;
    let mut phase = ONE;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm();
        for row in col + 1..n {
            let v = a[row * n + col].norm();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return LogDet {
                log_abs: f64::NEG_INFINITY,
                phase: ZERO,
                singular: true,
            };
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            phase = -phase;
        }
        let p = a[col * n + col];
        log_abs += best.ln();
        phase *= p / best;
        let inv = p.inv();
        for row in col + 1..n {
            let f = a[row * n + col] * inv;
            if f == ZERO {
                continue;
            }
            let (upper, lower) = a.split_at_mut(row * n);
            let prow = &upper[col * n..col * n + n];
            let trow = &mut lower[..n];
            for j in col + 1..n {
                trow[j] -= f * prow[j];
            }
        }
    }
    let norm = phase.norm();
    LogDet {
        log_abs,
        phase: phase / norm,
        singular: false,
    }
}

/// Eigenvalues of a Hermitean matrix by cyclic complex Jacobi rotations,
/// sorted ascending.
pub fn hermitean_eigenvalues(m: &CMat) -> Vec<f64> {
    let n = m.dim();
    let mut a = m.clone();
    let scale = a.norm_max().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                // rotate the phase of index q so that a_pq becomes real
                let ph = apq / mag;
                for k in 0..n {
                    a[(k, q)] *= ph.conj();
                }
                for k in 0..n {
                    a[(q, k)] *= ph;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * s;
                    a[(k, q)] = akp * s + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * s;
                    a[(q, k)] = apk * s + aqk * c;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lu_matches_cofactor_expansion() {
        let m = [
            c(1.0, 2.0),
            c(0.5, -1.0),
            c(3.0, 0.0),
            c(-2.0, 0.3),
            c(0.0, 1.0),
            c(1.5, 1.5),
            c(0.7, 0.0),
            c(-1.0, -1.0),
            c(2.0, 0.1),
        ];
        let cof = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
            + m[2] * (m[3] * m[7] - m[4] * m[6]);
        let mut a = m.to_vec();
        let d = lu_log_det(&mut a, 3).value();
        assert!((d - cof).norm() < 1e-13 * cof.norm());
    }

    #[test]
    fn lu_reports_singular() {
        let mut a = vec![ONE, ONE, ONE, ONE];
        let d = lu_log_det(&mut a, 2);
        assert!(d.singular);
        assert_eq!(d.value(), ZERO);
    }

    #[test]
    fn lu_log_abs_survives_underflow() {
        let n = 400;
        let mut a = vec![ZERO; n * n];
        for i in 0..n {
            a[i * n + i] = c(1e-3, 0.0);
        }
        let d = lu_log_det(&mut a, n);
        assert!((d.log_abs - n as f64 * 1e-3f64.ln()).abs() < 1e-9);
        assert_eq!(d.value(), ZERO);
    }

    #[test]
    fn jacobi_two_by_two_closed_form() {
        let m = CMat::from_row_major(vec![c(2.0, 0.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 0.0)]);
        let ev = hermitean_eigenvalues(&m);
        // trace 1, det -4
        let disc = (1.0f64 + 16.0).sqrt();
        assert!((ev[0] - (1.0 - disc) / 2.0).abs() < 1e-14);
        assert!((ev[1] - (1.0 + disc) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn kron2_layout() {
        let x = CMat::from_row_major(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let k = x.kron2(&pauli::SIGMA1);
        assert_eq!(k[(0, 2)], c(1.0, 0.0));
        assert_eq!(k[(3, 1)], c(4.0, 0.0));
        assert_eq!(k[(0, 0)], ZERO);
    }
}
