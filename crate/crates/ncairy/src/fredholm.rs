//! Block Nyström determinants `det(Id + z K)` on the half-line and on the
//! contour γ₊, and largest-eigenvalue estimates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{contour_kernel, BlockKernel, CouplingMatrix, ShiftVector};
use crate::linalg::{lu_log_det, LogDet, I, ONE, ZERO};

pub const DEFAULT_NODES: usize = 40;
pub const NODE_CAP: usize = 320;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const CONTOUR_HEIGHT: f64 = 0.5;
pub const CONTOUR_RADIUS: f64 = 9.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    HalfLine { cutoff: f64 },
    /// Parameter `t ∈ [0, radius]` along a ray of the given angle.
    ContourRay { angle: f64, radius: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: Domain,
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule> {
    if !(2..=512).contains(&m) {
        return Err(Error::InvalidInput(format!("Gauss-Legendre order {m} outside 2..=512")));
    }
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        let mut done = false;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::ConvergenceFailure(format!("Legendre root {i} of order {m}")));
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: Domain::Interval { a: -1.0, b: 1.0 },
    })
}

impl QuadratureRule {
    pub fn interval(m: usize, a: f64, b: f64) -> Result<Self> {
        Self::for_domain(m, Domain::Interval { a, b })
    }

    pub fn half_line(m: usize, cutoff: f64) -> Result<Self> {
        Self::for_domain(m, Domain::HalfLine { cutoff })
    }

    pub fn contour_ray(m: usize, angle: f64, radius: f64) -> Result<Self> {
        Self::for_domain(m, Domain::ContourRay { angle, radius })
    }

    /// Half-line rule with the truncation suited to Airy kernels with these
    /// shifts.
    pub fn airy(m: usize, s: &ShiftVector) -> Result<Self> {
        Self::half_line(m, airy_cutoff(s))
    }

    pub fn for_domain(m: usize, domain: Domain) -> Result<Self> {
        let (a, b) = match domain {
            Domain::Interval { a, b } => (a, b),
            Domain::HalfLine { cutoff } => (0.0, cutoff),
            Domain::ContourRay { radius, .. } => (0.0, radius),
        };
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidInput(format!("degenerate quadrature domain [{a}, {b}]")));
        }
        let gl = gauss_legendre(m)?;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Ok(Self {
            nodes: gl.nodes.iter().map(|t| mid + half * t).collect(),
            weights: gl.weights.iter().map(|w| half * w).collect(),
            domain,
        })
    }

    /// The same domain with `m` nodes.
    pub fn resized(&self, m: usize) -> Result<Self> {
        Self::for_domain(m, self.domain)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// `40 + 2·max(0, -2·min s_j)`.
pub fn airy_cutoff(s: &ShiftVector) -> f64 {
    40.0 + 2.0 * (-2.0 * s.min()).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetResult {
    #[serde(with = "complex_json")]
    pub value: Complex64,
    /// `null` in JSON when the determinant vanishes.
    #[serde(with = "log_abs_json")]
    pub log_abs: f64,
    pub nodes_used: usize,
    /// `|Δ log det|` between the last two refinement levels (zero without
    /// refinement).
    pub est_error: f64,
    pub converged: bool,
}

/// `{"re": .., "im": ..}` representation of a complex number.
pub mod complex_json {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: z.re, im: z.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let v = ReIm::deserialize(d)?;
        Ok(Complex64::new(v.re, v.im))
    }
}

mod log_abs_json {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        x.is_finite().then_some(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Criterion {
    /// `|Δ log det| ≤ tol`.
    LogRelative,
    /// `|Δ det| ≤ tol`; usable near zeros of the determinant.
    Absolute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// `√w_i K(x_i, x_k) √w_k`.
    Symmetric,
    /// `K(x_i, x_k) w_k`.
    OneSided,
}

#[derive(Clone, Copy, Debug)]
pub struct NystromOptions {
    pub refine: bool,
    pub tol: f64,
    pub cap: usize,
    pub criterion: Criterion,
    pub weighting: Weighting,
}

impl Default for NystromOptions {
    fn default() -> Self {
        Self {
            refine: true,
            tol: DEFAULT_TOL,
            cap: NODE_CAP,
            criterion: Criterion::LogRelative,
            weighting: Weighting::Symmetric,
        }
    }
}

/// Assembles `Id + z B` for the weighted block matrix `B`.
fn assemble(kernel: &dyn BlockKernel, z: Complex64, rule: &QuadratureRule, weighting: Weighting) -> Result<Vec<Complex64>> {
    let r = kernel.dim();
    let m = rule.len();
    let n = m * r;
    let blocks = kernel.blocks(&rule.nodes)?;
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut a = vec![ZERO; n * n];
    for i in 0..m {
        for k in 0..m {
            let f = match weighting {
                Weighting::Symmetric => sw[i] * sw[k],
                Weighting::OneSided => rule.weights[k],
            };
            let b = &blocks[i * m + k];
            for p in 0..r {
                for q in 0..r {
                    a[(i * r + p) * n + k * r + q] = z * f * b[(p, q)];
                }
            }
        }
    }
    for d in 0..n {
        a[d * n + d] += ONE;
    }
    Ok(a)
}

fn refine_loop(
    mut level: impl FnMut(usize) -> Result<LogDet>,
    m0: usize,
    opts: &NystromOptions,
    r: usize,
) -> Result<DetResult> {
    let finish = |d: LogDet, m: usize, est: f64, converged: bool| DetResult {
        value: d.value(),
        log_abs: d.log_abs,
        nodes_used: m * r,
        est_error: est,
        converged,
    };
    let mut prev = level(m0)?;
    if !opts.refine {
        return Ok(finish(prev, m0, 0.0, false));
    }
    let mut m = 2 * m0;
    let mut est = f64::INFINITY;
    while m <= opts.cap {
        let cur = level(m)?;
        est = match (prev.singular, cur.singular) {
            (true, true) => 0.0,
            (false, false) => match opts.criterion {
                Criterion::LogRelative => cur.log_ratio(&prev).norm(),
                Criterion::Absolute => (cur.value() - prev.value()).norm(),
            },
            _ => match opts.criterion {
                Criterion::LogRelative => f64::INFINITY,
                Criterion::Absolute => (cur.value() - prev.value()).norm(),
            },
        };
        if est <= opts.tol {
            return Ok(finish(cur, m, est, true));
        }
        prev = cur;
        m *= 2;
    }
    Err(Error::ConvergenceFailure(format!(
        "Nyström determinant not converged at the node cap {} (last change {est:.3e})",
        opts.cap
    )))
}

/// `det(Id + z K)` with the default options.
pub fn nystrom_det(kernel: &dyn BlockKernel, z: Complex64, rule: &QuadratureRule, refine: bool) -> Result<DetResult> {
    nystrom_det_with(
        kernel,
        z,
        rule,
        &NystromOptions {
            refine,
            ..Default::default()
        },
    )
}

pub fn nystrom_det_with(
    kernel: &dyn BlockKernel,
    z: Complex64,
    rule: &QuadratureRule,
    opts: &NystromOptions,
) -> Result<DetResult> {
    let r = kernel.dim();
    let level = |m: usize| -> Result<LogDet> {
        let rule_m = if m == rule.len() { rule.clone() } else { rule.resized(m)? };
        let mut a = assemble(kernel, z, &rule_m, opts.weighting)?;
        Ok(lu_log_det(&mut a, m * r))
    };
    refine_loop(level, rule.len(), opts, r)
}

/// Nodes and complex weights `w·dλ/dt` on γ₊: the ray from `ih + R e^{5iπ/6}`
/// to `ih`, then from `ih` to `ih + R e^{iπ/6}`.
pub fn contour_nodes(m_per_ray: usize, radius: f64) -> Result<Vec<(Complex64, Complex64)>> {
    let base = I * CONTOUR_HEIGHT;
    let mut out = Vec::with_capacity(2 * m_per_ray);
    for (angle, orient) in [(5.0 * PI / 6.0, -1.0), (PI / 6.0, 1.0)] {
        let rule = QuadratureRule::contour_ray(m_per_ray, angle, radius)?;
        let dir = Complex64::from_polar(1.0, angle);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            out.push((base + dir * t, dir * (orient * w)));
        }
    }
    Ok(out)
}

fn check_contour_radius(s: &ShiftVector, radius: f64) -> Result<()> {
    let base = I * CONTOUR_HEIGHT;
    for angle in [PI / 6.0, 5.0 * PI / 6.0] {
        let end = base + Complex64::from_polar(radius, angle);
        for &sj in s.values() {
            let re = (I * end * end * end / 6.0 + I * sj * end).re;
            if re > -50.0 {
                return Err(Error::Domain(format!(
                    "contour radius {radius} too small: exponent real part {re:.2} at the ray end"
                )));
            }
        }
    }
    Ok(())
}

/// `det(Id + z K)` with `K` the contour kernel on γ₊.
pub fn nystrom_det_contour(
    s: &ShiftVector,
    c: &CouplingMatrix,
    z: Complex64,
    m_per_ray: usize,
    radius: f64,
) -> Result<DetResult> {
    check_contour_radius(s, radius)?;
    let r = s.len();
    let level = |m: usize| -> Result<LogDet> {
        let pts = contour_nodes(m, radius)?;
        let np = pts.len();
        let n = np * r;
        let mut a = vec![ZERO; n * n];
        for (p, &(lp, _)) in pts.iter().enumerate() {
            for (q, &(lq, wq)) in pts.iter().enumerate() {
                let k = contour_kernel(lp, lq, s, c)?;
                for a1 in 0..r {
                    for b1 in 0..r {
                        a[(p * r + a1) * n + q * r + b1] = z * k[(a1, b1)] * wq;
                    }
                }
            }
        }
        for d in 0..n {
            a[d * n + d] += ONE;
        }
        Ok(lu_log_det(&mut a, n))
    };
    let opts = NystromOptions::default();
    refine_loop(level, m_per_ray, &opts, 2 * r)
}

/// Largest-modulus eigenvalue of the symmetric-weighted discretisation.
pub fn spectral_radius(kernel: &dyn BlockKernel, rule: &QuadratureRule) -> Result<f64> {
    let r = kernel.dim();
    let n = rule.len() * r;
    // assemble with z = 1 and strip the identity
    let mut a = assemble(kernel, ONE, rule, Weighting::Symmetric)?;
    for d in 0..n {
        a[d * n + d] -= ONE;
    }
    if a.iter().all(|v| *v == ZERO) {
        return Ok(0.0);
    }
    let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + 0.25 * (i as f64).sin(), 0.0)).collect();
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut est = 0.0;
    for _ in 0..10_000 {
        let w: Vec<Complex64> = (0..n)
            .map(|i| a[i * n..(i + 1) * n].iter().zip(&v).map(|(x, y)| x * y).sum())
            .collect();
        let nw = norm(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        let done = (nw - est).abs() <= 1e-8 * nw;
        est = nw;
        v = w.into_iter().map(|z| z / nw).collect();
        if done {
            return Ok(est);
        }
    }
    Err(Error::ConvergenceFailure("power iteration exceeded 10^4 iterations".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{AiryKernel, FnKernel, ShiftedAiryKernel};
    use crate::linalg::CMat;

    fn cz(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_point_rule() {
        let g = gauss_legendre(2).unwrap();
        assert!((g.nodes[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((g.nodes[0] + g.nodes[1]).abs() < 1e-15);
        assert!((g.weights[0] - 1.0).abs() < 1e-15 && (g.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_exactness() {
        let g = gauss_legendre(16).unwrap();
        assert!((g.integrate(|x| x.powi(10)) - 2.0 / 11.0).abs() < 1e-14);
        for m in 2..=64 {
            let g = gauss_legendre(m).unwrap();
            for deg in 0..(2 * m) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((g.integrate(|x| x.powi(deg as i32)) - exact).abs() < 1e-13, "m={m} deg={deg}");
            }
            for i in 0..m {
                assert!((g.nodes[i] + g.nodes[m - 1 - i]).abs() <= 1e-15);
            }
        }
        let g = gauss_legendre(64).unwrap();
        assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        assert!(gauss_legendre(1).is_err() && gauss_legendre(513).is_err());
    }

    #[test]
    fn zero_and_rank_one_kernels() {
        let rule = QuadratureRule::half_line(40, 40.0).unwrap();
        let zero = FnKernel::new(2, |_, _| Ok(CMat::zeros(2)));
        let d = nystrom_det(&zero, cz(1.0), &rule, true).unwrap();
        assert_eq!(d.value, ONE);
        let r1 = FnKernel::new(1, |x, y| Ok(CMat::from_row_major(vec![cz((-x - y).exp())])));
        let d = nystrom_det(&r1, cz(1.0), &rule, false).unwrap();
        assert!((d.value - cz(1.5)).norm() < 1e-10);
    }

    #[test]
    fn weight_splitting_invariance() {
        let s = ShiftVector::new(vec![0.2, -0.5]).unwrap();
        let c = CouplingMatrix::from_parts(2, &[0.7, 0.2, -0.4, 0.5], None).unwrap();
        let k = AiryKernel::new(s.clone(), c).unwrap();
        let rule = QuadratureRule::airy(60, &s).unwrap();
        let mut opts = NystromOptions {
            refine: false,
            ..Default::default()
        };
        let a = nystrom_det_with(&k, cz(-1.0), &rule, &opts).unwrap();
        opts.weighting = Weighting::OneSided;
        let b = nystrom_det_with(&k, cz(-1.0), &rule, &opts).unwrap();
        assert!((a.value - b.value).norm() < 1e-12);
    }

    #[test]
    fn refinement_reports_estimate() {
        let s = ShiftVector::new(vec![0.0]).unwrap();
        let k = ShiftedAiryKernel { t: 0.0 };
        let d = nystrom_det(&k, cz(-1.0), &QuadratureRule::airy(20, &s).unwrap(), true).unwrap();
        assert!(d.converged && d.est_error <= DEFAULT_TOL && d.est_error >= 0.0);
    }

    #[test]
    fn spectral_radius_examples() {
        let rule = QuadratureRule::half_line(40, 40.0).unwrap();
        let zero = FnKernel::new(1, |_, _| Ok(CMat::zeros(1)));
        assert_eq!(spectral_radius(&zero, &rule).unwrap(), 0.0);
        let high = spectral_radius(&ShiftedAiryKernel { t: 5.0 }, &rule).unwrap();
        assert!(high <= 1e-6 && high > 0.0);
        let low = spectral_radius(&ShiftedAiryKernel { t: -6.0 }, &QuadratureRule::half_line(80, 52.0).unwrap()).unwrap();
        assert!(low > 0.9 && low < 1.0, "Λ(-6) = {low}");
    }

    #[test]
    fn contour_radius_guard() {
        let s = ShiftVector::new(vec![0.0]).unwrap();
        let c = CouplingMatrix::scalar(1.0);
        assert!(matches!(nystrom_det_contour(&s, &c, cz(1.0), 20, 3.0), Err(Error::Domain(_))));
        let d = nystrom_det_contour(&s, &CouplingMatrix::zero(1), cz(1.0), 20, CONTOUR_RADIUS).unwrap();
        assert_eq!(d.value, ONE);
    }

    #[test]
    fn contour_matches_half_line() {
        let s = ShiftVector::new(vec![1.0]).unwrap();
        let c = CouplingMatrix::scalar(1.0);
        let half = nystrom_det(&AiryKernel::new(s.clone(), c.clone()).unwrap(), cz(-1.0), &QuadratureRule::airy(40, &s).unwrap(), true).unwrap();
        let cont = nystrom_det_contour(&s, &c, cz(-1.0), 40, CONTOUR_RADIUS).unwrap();
        assert!((half.value - cont.value).norm() < 1e-6, "{} vs {}", half.value, cont.value);
    }

    #[test]
    fn contour_matches_half_line_nonsymmetric() {
        let s = ShiftVector::new(vec![-0.1, 0.15]).unwrap();
        let c = CouplingMatrix::from_parts(2, &[0.2, 0.6, -0.3, 0.1], None).unwrap();
        let half = nystrom_det(&AiryKernel::new(s.clone(), c.clone()).unwrap(), cz(1.0), &QuadratureRule::airy(40, &s).unwrap(), true).unwrap();
        let cont = nystrom_det_contour(&s, &c, cz(1.0), 40, CONTOUR_RADIUS).unwrap();
        assert!((half.value - cont.value).norm() < 1e-6, "{} vs {}", half.value, cont.value);
    }

    #[test]
    fn det_result_json_round_trip() {
        let d = DetResult {
            value: Complex64::new(0.25, -1.5e-3),
            log_abs: -1.386,
            nodes_used: 80,
            est_error: 3e-12,
            converged: true,
        };
        let js = serde_json::to_string(&d).unwrap();
        assert!(js.contains("\"re\":0.25"));
        let back: DetResult = serde_json::from_str(&js).unwrap();
        assert_eq!(back, d);
    }
}
