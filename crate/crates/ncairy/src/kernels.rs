//! Matrix Airy convolution kernel, its square, the scalar Airy kernel and the
//! contour-side symbols.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::airy::{ai, ai_pair};
use crate::error::{Error, Result};
use crate::linalg::{hermitean_eigenvalues, CMat, I, ZERO};

const EXP_GUARD: f64 = 700.0;
const CONFLUENT_GAP: f64 = 1e-6;

/// Shifts `s_1..s_r` with barycenter `S` and offsets `δ_j = s_j - S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftVector {
    s: Vec<f64>,
}

impl ShiftVector {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidInput("a shift vector needs r >= 1 entries".into()));
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("shifts must be finite".into()));
        }
        Ok(Self { s })
    }

    pub fn from_barycentric(center: f64, delta: &[f64]) -> Result<Self> {
        Self::new(delta.iter().map(|d| center + d).collect())
    }

    /// All shifts equal to `s`.
    pub fn uniform(r: usize, s: f64) -> Result<Self> {
        Self::new(vec![s; r])
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.s
    }

    pub fn barycenter(&self) -> f64 {
        self.s.iter().sum::<f64>() / self.s.len() as f64
    }

    pub fn offsets(&self) -> Vec<f64> {
        let c = self.barycenter();
        self.s.iter().map(|v| v - c).collect()
    }

    pub fn max_offset(&self) -> f64 {
        self.offsets().iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn min(&self) -> f64 {
        self.s.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn shifted(&self, j: usize, h: f64) -> Self {
        let mut s = self.s.clone();
        s[j] += h;
        Self { s }
    }

    pub fn translated(&self, h: f64) -> Self {
        Self {
            s: self.s.iter().map(|v| v + h).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CouplingMatrix {
    entries: CMat,
    is_real: bool,
    is_hermitean: bool,
    sigma_max: f64,
}

impl CouplingMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        if !entries.is_finite() {
            return Err(Error::InvalidInput("coupling entries must be finite".into()));
        }
        let is_real = entries.as_slice().iter().all(|z| z.im == 0.0);
        let is_hermitean = (&entries - &entries.adjoint()).norm_max() <= 1e-14;
        let gram = &entries.adjoint() * &entries;
        let top = hermitean_eigenvalues(&gram).last().copied().unwrap_or(0.0);
        Ok(Self {
            entries,
            is_real,
            is_hermitean,
            sigma_max: top.max(0.0).sqrt(),
        })
    }

    /// Row-major real and imaginary parts.
    pub fn from_parts(r: usize, re: &[f64], im: Option<&[f64]>) -> Result<Self> {
        if re.len() != r * r || im.is_some_and(|v| v.len() != r * r) {
            return Err(Error::InvalidInput(format!("coupling needs {} row-major entries", r * r)));
        }
        let data = (0..r * r)
            .map(|k| Complex64::new(re[k], im.map_or(0.0, |v| v[k])))
            .collect();
        Self::new(CMat::from_row_major(data))
    }

    pub fn scalar(c: f64) -> Self {
        Self::from_parts(1, &[c], None).expect("finite scalar coupling")
    }

    pub fn zero(r: usize) -> Self {
        Self::new(CMat::zeros(r)).expect("zero coupling")
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.dim()
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn is_hermitean(&self) -> bool {
        self.is_hermitean
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn negated(&self) -> Self {
        Self::new(-&self.entries).expect("negation keeps entries finite")
    }

    pub fn is_zero(&self) -> bool {
        self.entries.norm_max() == 0.0
    }
}

fn check_dims(s: &ShiftVector, c: &CouplingMatrix) -> Result<()> {
    if s.len() != c.dim() {
        return Err(Error::InvalidInput(format!(
            "{} shifts for a {}x{} coupling",
            s.len(),
            c.dim(),
            c.dim()
        )));
    }
    Ok(())
}

/// Entry `(j, k)` is `c_jk Ai(x + y + s_j + s_k)`.
pub fn matrix_airy_kernel(x: f64, y: f64, s: &ShiftVector, c: &CouplingMatrix) -> Result<CMat> {
    check_dims(s, c)?;
    let sv = s.values();
    let r = sv.len();
    let mut out = CMat::zeros(r);
    for j in 0..r {
        for k in 0..r {
            let cjk = c.entries[(j, k)];
            if cjk != ZERO {
                out[(j, k)] = cjk * ai(x + y + sv[j] + sv[k])?;
            }
        }
    }
    Ok(out)
}

fn scalar_from_pairs(a: f64, (aa, aap): (f64, f64), b: f64, (ba, bap): (f64, f64)) -> f64 {
    if (a - b).abs() < CONFLUENT_GAP {
        let (lo, lo_ai, lo_aip) = if a <= b { (a, aa, aap) } else { (b, ba, bap) };
        let gap = (a - b).abs();
        lo_aip * lo_aip - lo * lo_ai * lo_ai - 0.5 * gap * lo_ai * lo_ai
    } else {
        (aa * bap - aap * ba) / (a - b)
    }
}

/// `(Ai(a)Ai'(b) - Ai'(a)Ai(b)) / (a - b)` with the diagonal limit.
pub fn scalar_airy_kernel(a: f64, b: f64) -> Result<f64> {
    Ok(scalar_from_pairs(a, ai_pair(a)?, b, ai_pair(b)?))
}

/// Entry `(j1, j2)` is `Σ_k c_{j1 k} c_{k j2} K_Ai(x + s_j1 + s_k, y + s_j2 + s_k)`.
pub fn matrix_airy_sq_kernel(x: f64, y: f64, s: &ShiftVector, c: &CouplingMatrix) -> Result<CMat> {
    check_dims(s, c)?;
    let sv = s.values();
    let r = sv.len();
    let cm = &c.entries;
    let mut out = CMat::zeros(r);
    for j1 in 0..r {
        for j2 in 0..r {
            let mut acc = ZERO;
            for k in 0..r {
                let w = cm[(j1, k)] * cm[(k, j2)];
                if w != ZERO {
                    acc += w * scalar_airy_kernel(x + sv[j1] + sv[k], y + sv[j2] + sv[k])?;
                }
            }
            out[(j1, j2)] = acc;
        }
    }
    Ok(out)
}

fn theta(lambda: Complex64, sj: f64) -> Complex64 {
    I * lambda * lambda * lambda / 6.0 + I * sj * lambda
}

fn guarded_exp(z: Complex64) -> Result<Complex64> {
    if z.re > EXP_GUARD {
        return Err(Error::OverflowRisk(format!("exponent with real part {:.3e}", z.re)));
    }
    Ok(z.exp())
}

/// `E1(λ) = -(1/2iπ) e^{θ(λ)} C` and `E2(λ) = e^{θ(λ)}` with
/// `θ(λ) = diag(iλ³/6 + i s_j λ)`.
pub fn contour_symbol(lambda: Complex64, s: &ShiftVector, c: &CouplingMatrix) -> Result<(CMat, CMat)> {
    check_dims(s, c)?;
    let r = s.len();
    let mut e2 = CMat::zeros(r);
    for (j, &sj) in s.values().iter().enumerate() {
        e2[(j, j)] = guarded_exp(theta(lambda, sj))?;
    }
    let pref = -(2.0 * PI * I).inv();
    let e1 = (&e2 * &c.entries).scale(pref);
    Ok((e1, e2))
}

/// `r(λ) = E1(λ) E2(λ)^T`.
pub fn contour_r(lambda: Complex64, s: &ShiftVector, c: &CouplingMatrix) -> Result<CMat> {
    let (e1, e2) = contour_symbol(lambda, s, c)?;
    Ok(&e1 * &e2.transpose())
}

/// `E1(λ)^T E2(μ) / (λ + μ)`: entry `(j, k)` is
/// `-(1/2iπ) c_kj exp(θ_k(λ) + θ_k(μ)) / (λ + μ)`.
pub fn contour_kernel(lambda: Complex64, mu: Complex64, s: &ShiftVector, c: &CouplingMatrix) -> Result<CMat> {
    check_dims(s, c)?;
    let denom = lambda + mu;
    if denom.norm() < 1e-14 {
        return Err(Error::DivisionByZero(format!("λ + μ = {denom}")));
    }
    let sv = s.values();
    let r = sv.len();
    let el: Vec<Complex64> = sv.iter().map(|&v| guarded_exp(theta(lambda, v))).collect::<Result<_>>()?;
    let em: Vec<Complex64> = sv.iter().map(|&v| guarded_exp(theta(mu, v))).collect::<Result<_>>()?;
    let pref = -(2.0 * PI * I).inv() / denom;
    Ok(CMat::from_fn(r, |j, k| pref * c.entries[(k, j)] * el[k] * em[k]))
}

/// A matrix-valued kernel on a real parameter domain.
pub trait BlockKernel: Sync {
    fn dim(&self) -> usize;

    fn block(&self, x: f64, y: f64) -> Result<CMat>;

    /// All blocks `K(x_i, x_k)` in row-major order over the node pairs.
    fn blocks(&self, nodes: &[f64]) -> Result<Vec<CMat>> {
        let mut out = Vec::with_capacity(nodes.len() * nodes.len());
        for &x in nodes {
            for &y in nodes {
                out.push(self.block(x, y)?);
            }
        }
        Ok(out)
    }
}

/// `Ai_s`: the matrix Airy convolution kernel.
#[derive(Clone, Debug)]
pub struct AiryKernel {
    pub s: ShiftVector,
    pub c: CouplingMatrix,
}

impl AiryKernel {
    pub fn new(s: ShiftVector, c: CouplingMatrix) -> Result<Self> {
        check_dims(&s, &c)?;
        Ok(Self { s, c })
    }
}

impl BlockKernel for AiryKernel {
    fn dim(&self) -> usize {
        self.s.len()
    }

    fn block(&self, x: f64, y: f64) -> Result<CMat> {
        matrix_airy_kernel(x, y, &self.s, &self.c)
    }

    fn blocks(&self, nodes: &[f64]) -> Result<Vec<CMat>> {
        let sv = self.s.values();
        let r = sv.len();
        let m = nodes.len();
        let cm = self.c.entries();
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for k in 0..m {
                let mut b = CMat::zeros(r);
                for j in 0..r {
                    for l in 0..r {
                        if cm[(j, l)] != ZERO {
                            b[(j, l)] = cm[(j, l)] * ai(nodes[i] + nodes[k] + sv[j] + sv[l])?;
                        }
                    }
                }
                out.push(b);
            }
        }
        Ok(out)
    }
}

/// `Ai_s²` in closed form through the scalar Airy kernel.
#[derive(Clone, Debug)]
pub struct AirySqKernel {
    pub s: ShiftVector,
    pub c: CouplingMatrix,
}

impl AirySqKernel {
    pub fn new(s: ShiftVector, c: CouplingMatrix) -> Result<Self> {
        check_dims(&s, &c)?;
        Ok(Self { s, c })
    }
}

impl BlockKernel for AirySqKernel {
    fn dim(&self) -> usize {
        self.s.len()
    }

    fn block(&self, x: f64, y: f64) -> Result<CMat> {
        matrix_airy_sq_kernel(x, y, &self.s, &self.c)
    }

    fn blocks(&self, nodes: &[f64]) -> Result<Vec<CMat>> {
        let sv = self.s.values();
        let r = sv.len();
        let m = nodes.len();
        let cm = self.c.entries();
        // table[(i * r + j) * r + k] = (Ai, Ai') at x_i + s_j + s_k
        let mut table = Vec::with_capacity(m * r * r);
        for &x in nodes {
            for &sj in sv {
                for &sk in sv {
                    table.push((x + sj + sk, ai_pair(x + sj + sk)?));
                }
            }
        }
        let at = |i: usize, j: usize, k: usize| table[(i * r + j) * r + k];
        let mut out = Vec::with_capacity(m * m);
        for i in 0..m {
            for l in 0..m {
                let mut b = CMat::zeros(r);
                for j1 in 0..r {
                    for j2 in 0..r {
                        let mut acc = ZERO;
                        for k in 0..r {
                            let w = cm[(j1, k)] * cm[(k, j2)];
                            if w != ZERO {
                                let (a, pa) = at(i, j1, k);
                                let (bb, pb) = at(l, j2, k);
                                acc += w * scalar_from_pairs(a, pa, bb, pb);
                            }
                        }
                        b[(j1, j2)] = acc;
                    }
                }
                out.push(b);
            }
        }
        Ok(out)
    }
}

/// The scalar Airy kernel `K_Ai(x + t, y + t)`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedAiryKernel {
    pub t: f64,
}

impl BlockKernel for ShiftedAiryKernel {
    fn dim(&self) -> usize {
        1
    }

    fn block(&self, x: f64, y: f64) -> Result<CMat> {
        let v = scalar_airy_kernel(x + self.t, y + self.t)?;
        Ok(CMat::from_row_major(vec![Complex64::new(v, 0.0)]))
    }

    fn blocks(&self, nodes: &[f64]) -> Result<Vec<CMat>> {
        let pairs: Vec<(f64, f64)> = nodes.iter().map(|&x| ai_pair(x + self.t)).collect::<Result<_>>()?;
        let mut out = Vec::with_capacity(nodes.len() * nodes.len());
        for (i, &x) in nodes.iter().enumerate() {
            for (k, &y) in nodes.iter().enumerate() {
                let v = scalar_from_pairs(x + self.t, pairs[i], y + self.t, pairs[k]);
                out.push(CMat::from_row_major(vec![Complex64::new(v, 0.0)]));
            }
        }
        Ok(out)
    }
}

/// Adapts a closure into a [`BlockKernel`].
pub struct FnKernel<F> {
    dim: usize,
    f: F,
}

impl<F> FnKernel<F>
where
    F: Fn(f64, f64) -> Result<CMat> + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> BlockKernel for FnKernel<F>
where
    F: Fn(f64, f64) -> Result<CMat> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn block(&self, x: f64, y: f64) -> Result<CMat> {
        (self.f)(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::{AI0, AIP0};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hermitean2() -> CouplingMatrix {
        CouplingMatrix::new(CMat::from_row_major(vec![c(0.6, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(-0.4, 0.0)]))
            .unwrap()
    }

    #[test]
    fn shift_vector_decomposition() {
        let s = ShiftVector::new(vec![0.3, -0.1, 1.0]).unwrap();
        let d = s.offsets();
        assert!(d.iter().sum::<f64>().abs() < 1e-15);
        assert!((s.barycenter() - 0.4).abs() < 1e-15);
        assert!((s.max_offset() - 0.6).abs() < 1e-15);
        assert!(ShiftVector::new(vec![]).is_err());
        assert!(ShiftVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn coupling_flags() {
        let h = hermitean2();
        assert!(h.is_hermitean());
        assert!(!h.is_real());
        let r = CouplingMatrix::from_parts(2, &[0.0, 1.0, -1.0, 0.0], None).unwrap();
        assert!(r.is_real() && !r.is_hermitean());
        assert!((r.sigma_max() - 1.0).abs() < 1e-14);
        let d = CouplingMatrix::from_parts(2, &[0.8, 0.0, 0.0, -1.3], None).unwrap();
        assert!((d.sigma_max() - 1.3).abs() < 1e-14);
    }

    #[test]
    fn zero_coupling_gives_zero_kernels() {
        let s = ShiftVector::new(vec![0.1, -0.4]).unwrap();
        let z = CouplingMatrix::zero(2);
        assert_eq!(matrix_airy_kernel(0.2, 0.3, &s, &z).unwrap().norm_max(), 0.0);
        assert_eq!(matrix_airy_sq_kernel(0.2, 0.3, &s, &z).unwrap().norm_max(), 0.0);
        assert_eq!(contour_kernel(I, I, &s, &z).unwrap().norm_max(), 0.0);
    }

    #[test]
    fn scalar_kernel_values() {
        assert!((scalar_airy_kernel(0.0, 0.0).unwrap() - AIP0 * AIP0).abs() < 1e-15);
        let (a1, ap1) = ai_pair(1.0).unwrap();
        let direct = (AI0 * ap1 - AIP0 * a1) / (-1.0);
        assert!((scalar_airy_kernel(0.0, 1.0).unwrap() - direct).abs() < 1e-15);
        assert_eq!(scalar_airy_kernel(0.3, -1.2).unwrap(), scalar_airy_kernel(-1.2, 0.3).unwrap());
        assert_eq!(scalar_airy_kernel(0.3, 0.3 + 1e-8).unwrap(), scalar_airy_kernel(0.3 + 1e-8, 0.3).unwrap());
    }

    #[test]
    fn scalar_kernel_is_continuous_across_confluent_switch() {
        for &a in &[-3.0, -0.5, 0.0, 1.7, 4.0] {
            let inside = scalar_airy_kernel(a, a + CONFLUENT_GAP * (1.0 - 1e-9)).unwrap();
            let outside = scalar_airy_kernel(a, a + CONFLUENT_GAP * (1.0 + 1e-9)).unwrap();
            assert!((inside - outside).abs() < 1e-9, "a = {a}");
        }
    }

    #[test]
    fn hermitean_symmetry() {
        let s = ShiftVector::new(vec![0.2, -0.3]).unwrap();
        let h = hermitean2();
        let k1 = matrix_airy_kernel(0.4, 1.1, &s, &h).unwrap();
        let k2 = matrix_airy_kernel(1.1, 0.4, &s, &h).unwrap();
        assert!((&k1 - &k2.adjoint()).norm_max() < 1e-15);
        let q1 = matrix_airy_sq_kernel(0.4, 1.1, &s, &h).unwrap();
        let q2 = matrix_airy_sq_kernel(1.1, 0.4, &s, &h).unwrap();
        assert!((&q1 - &q2.adjoint()).norm_max() < 1e-15);
    }

    #[test]
    fn contour_symbol_examples() {
        let s = ShiftVector::new(vec![0.0]).unwrap();
        let one = CouplingMatrix::scalar(1.0);
        let (_, e2) = contour_symbol(I, &s, &one).unwrap();
        assert!((e2[(0, 0)] - c((1.0f64 / 6.0).exp(), 0.0)).norm() < 1e-15);
        let k = contour_kernel(I, I, &s, &one).unwrap();
        let expect = -(2.0 * PI * I).inv() * (2.0f64 / 6.0).exp() / (2.0 * I);
        assert!((k[(0, 0)] - expect).norm() < 1e-15);
        let far = Complex64::from_polar(12.0, PI / 6.0);
        let (_, e2) = contour_symbol(far, &s, &one).unwrap();
        assert!(e2[(0, 0)].norm() < 1e-100);
        assert!(matches!(contour_kernel(I, -I, &s, &one), Err(Error::DivisionByZero(_))));
        let up = Complex64::from_polar(20.0, PI / 2.0);
        assert!(matches!(contour_symbol(up, &s, &one), Err(Error::OverflowRisk(_))));
    }

    #[test]
    fn contour_r_matches_closed_form() {
        let s = ShiftVector::new(vec![0.3, -0.2]).unwrap();
        let h = hermitean2();
        let lam = c(0.7, 0.9);
        let r = contour_r(lam, &s, &h).unwrap();
        let sv = s.values();
        for j in 0..2 {
            for k in 0..2 {
                let e = -(2.0 * PI * I).inv()
                    * h.entries()[(j, k)]
                    * (I * lam * lam * lam / 3.0 + I * (sv[j] + sv[k]) * lam).exp();
                assert!((r[(j, k)] - e).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn cached_blocks_match_pointwise() {
        let s = ShiftVector::new(vec![0.2, -0.7]).unwrap();
        let h = hermitean2();
        let nodes = [0.0, 0.5, 2.0, 7.5];
        let sq = AirySqKernel::new(s.clone(), h.clone()).unwrap();
        let lin = AiryKernel::new(s, h).unwrap();
        for (kern, name) in [(&sq as &dyn BlockKernel, "sq"), (&lin as &dyn BlockKernel, "lin")] {
            let blocks = kern.blocks(&nodes).unwrap();
            for (i, &x) in nodes.iter().enumerate() {
                for (k, &y) in nodes.iter().enumerate() {
                    let d = (&blocks[i * 4 + k] - &kern.block(x, y).unwrap()).norm_max();
                    assert!(d < 1e-15, "{name} block ({i},{k})");
                }
            }
        }
    }

    #[test]
    fn contour_kernel_is_transposed_symbol_product() {
        let s = ShiftVector::new(vec![0.3, -0.2]).unwrap();
        let cc = CouplingMatrix::from_parts(2, &[0.2, 0.6, -0.3, 0.1], Some(&[0.0, 0.1, 0.0, -0.2])).unwrap();
        let (l, m) = (c(0.7, 1.1), c(-0.4, 0.9));
        let (e1, _) = contour_symbol(l, &s, &cc).unwrap();
        let (_, e2) = contour_symbol(m, &s, &cc).unwrap();
        let expect = (&e1.transpose() * &e2).scale((l + m).inv());
        assert!((&contour_kernel(l, m, &s, &cc).unwrap() - &expect).norm_max() < 1e-15);
    }
}
