//! Gap probabilities of the matrix Airy process computed two ways (Nyström
//! determinants and the Hastings–McLeod integrals), scalar F₁/F₂, Miura
//! identities, total positivity and existence scans.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fredholm::{
    airy_cutoff, nystrom_det_with, Criterion, DetResult, NystromOptions, QuadratureRule, DEFAULT_NODES,
};
use crate::kernels::{matrix_airy_sq_kernel, AiryKernel, BlockKernel, AirySqKernel, CouplingMatrix, ShiftVector};
use crate::linalg::{lu_log_det, I, ONE};
use crate::ncp2::{hm_solve, HmGrid, HmOptions};
use crate::ncp34::p34_state;

/// Nodes for determinants that are differenced in the shifts.
pub const STENCIL_NODES: usize = 80;
pub const SCAN_POINTS: usize = 25;
pub const BISECT_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Nystrom,
    Painleve,
    Both,
}

impl Route {
    fn nystrom(self) -> bool {
        self != Route::Painleve
    }

    fn painleve(self) -> bool {
        self != Route::Nystrom
    }
}

#[derive(Clone, Debug)]
pub struct GapQuery {
    pub s: ShiftVector,
    pub c: CouplingMatrix,
    pub route: Route,
    pub tol: f64,
    /// Initial Nyström node count per level.
    pub nodes: usize,
    /// Half-line cutoff; `None` uses [`airy_cutoff`].
    pub cutoff: Option<f64>,
    pub hm: HmOptions,
}

impl GapQuery {
    pub fn new(s: ShiftVector, c: CouplingMatrix, route: Route, tol: f64) -> Result<Self> {
        if s.len() != c.dim() {
            return Err(Error::InvalidInput(format!(
                "{} shifts for a {}x{} coupling matrix",
                s.len(),
                c.dim(),
                c.dim()
            )));
        }
        if !(tol >= 1e-10) {
            return Err(Error::InvalidInput(format!("tolerance {tol} below 1e-10")));
        }
        Ok(Self {
            s,
            c,
            route,
            tol,
            nodes: DEFAULT_NODES,
            cutoff: None,
            hm: HmOptions::default(),
        })
    }

    pub fn with_quadrature(mut self, nodes: usize, cutoff: Option<f64>) -> Self {
        self.nodes = nodes;
        self.cutoff = cutoff;
        self
    }

    pub fn with_hm(mut self, hm: HmOptions) -> Self {
        self.hm = hm;
        self
    }

    fn rule(&self) -> Result<QuadratureRule> {
        match self.cutoff {
            Some(c) => QuadratureRule::half_line(self.nodes, c),
            None => QuadratureRule::airy(self.nodes, &self.s),
        }
    }

    fn grid(&self) -> Result<HmGrid> {
        hm_solve(&self.c, &self.s.offsets(), self.s.barycenter() - 0.25, &self.hm)
    }

    fn nystrom_opts(&self) -> NystromOptions {
        NystromOptions {
            tol: self.tol,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GapResult {
    pub nystrom: Option<DetResult>,
    #[serde(serialize_with = "opt_complex")]
    pub painleve: Option<Complex64>,
}

fn opt_complex<S: serde::Serializer>(z: &Option<Complex64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match z {
        Some(z) => crate::fredholm::complex_json::serialize(z, s),
        None => s.serialize_none(),
    }
}

impl GapResult {
    pub fn difference(&self) -> Option<f64> {
        Some((self.nystrom?.value - self.painleve?).norm())
    }

    /// `|nyström - painlevé| / |nyström|`.
    pub fn relative_difference(&self) -> Option<f64> {
        let n = self.nystrom?.value;
        Some((n - self.painleve?).norm() / n.norm())
    }

    pub fn value(&self) -> Complex64 {
        self.nystrom.map(|d| d.value).or(self.painleve).unwrap_or(ONE)
    }
}

/// Hastings–McLeod grid for the shifts `s`, reaching slightly below their
/// barycenter.
pub fn painleve_grid(s: &ShiftVector, c: &CouplingMatrix) -> Result<HmGrid> {
    hm_solve(c, &s.offsets(), s.barycenter() - 0.25, &HmOptions::default())
}

/// `det(Id - Ai_s²)`.
pub fn det_airy_sq(q: &GapQuery) -> Result<GapResult> {
    let nystrom = if q.route.nystrom() {
        let k = AirySqKernel::new(q.s.clone(), q.c.clone())?;
        Some(nystrom_det_with(&k, -ONE, &q.rule()?, &q.nystrom_opts())?)
    } else {
        None
    };
    let painleve = if q.route.painleve() {
        Some(det_airy_sq_from_grid(&q.grid()?, q.s.barycenter())?)
    } else {
        None
    };
    Ok(GapResult { nystrom, painleve })
}

/// `det(Id + sign·Ai_s)`.
pub fn det_airy(q: &GapQuery, sign: f64) -> Result<GapResult> {
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidInput(format!("sign must be +1 or -1, got {sign}")));
    }
    let nystrom = if q.route.nystrom() {
        let k = AiryKernel::new(q.s.clone(), q.c.clone())?;
        Some(nystrom_det_with(&k, Complex64::new(sign, 0.0), &q.rule()?, &q.nystrom_opts())?)
    } else {
        None
    };
    let painleve = if q.route.painleve() {
        Some(det_airy_from_grid(&q.grid()?, q.s.barycenter(), sign)?)
    } else {
        None
    };
    Ok(GapResult { nystrom, painleve })
}

/// `exp(-4 ∫_S^∞ (t - S) Tr β₁² dt)`.
pub fn det_airy_sq_from_grid(grid: &HmGrid, s: f64) -> Result<Complex64> {
    Ok((grid.int_weighted_tr_beta_sq(s)? * -4.0).exp())
}

/// `exp(-sign ∫_S^∞ Tr β₁ dt - 2 ∫_S^∞ (t - S) Tr β₁² dt)`; the `sign = -1`
/// case is the `C → -C` image of `sign = +1`.
pub fn det_airy_from_grid(grid: &HmGrid, s: f64, sign: f64) -> Result<Complex64> {
    Ok((grid.int_tr_beta(s)? * -sign - grid.int_weighted_tr_beta_sq(s)? * 2.0).exp())
}

/// Contour-side `det(Id + z K)` with `nodes` per ray.
pub fn det_contour(s: &ShiftVector, c: &CouplingMatrix, z: Complex64, nodes: usize) -> Result<DetResult> {
    crate::fredholm::nystrom_det_contour(s, c, z, nodes, crate::fredholm::CONTOUR_RADIUS)
}

/// Scalar distributions from the `r = 1`, `c = 1` Hastings–McLeod grid with
/// `u(x) = -β₁(x/2)`.
pub struct ScalarTw {
    grid: HmGrid,
    w: crate::ncp2::GridIntegral<f64>,
    tw: crate::ncp2::GridIntegral<f64>,
}

impl ScalarTw {
    pub const X_MIN: f64 = -8.0;

    pub fn new() -> Result<Self> {
        Self::with_lower(Self::X_MIN)
    }

    /// Grid valid for `x ≥ x_min`.
    pub fn with_lower(x_min: f64) -> Result<Self> {
        Self::with_options(x_min, &HmOptions::default())
    }

    pub fn with_options(x_min: f64, opts: &HmOptions) -> Result<Self> {
        let grid = hm_solve(&CouplingMatrix::scalar(1.0), &[0.0], 0.5 * x_min - 0.05, opts)?;
        let wv: Vec<f64> = grid
            .beta1_samples()
            .iter()
            .zip(grid.dbeta1_samples())
            .map(|(b, d)| 0.5 * b[(0, 0)].re.powi(2) + 0.25 * d[(0, 0)].re)
            .collect();
        let twv: Vec<f64> = wv.iter().zip(grid.s_values()).map(|(w, t)| w * t).collect();
        let w = grid.table(wv, 0.0);
        let tw = grid.table(twv, 0.0);
        Ok(Self { grid, w, tw })
    }

    pub fn grid(&self) -> &HmGrid {
        &self.grid
    }

    fn check(&self, x: f64) -> Result<f64> {
        if !x.is_finite() || 0.5 * x < self.grid.s_min() || 0.5 * x > self.grid.s_max() {
            return Err(Error::OutOfRange {
                what: "x",
                value: x,
                lo: 2.0 * self.grid.s_min(),
                hi: 2.0 * self.grid.s_max(),
            });
        }
        Ok(0.5 * x)
    }

    pub fn u(&self, x: f64) -> Result<f64> {
        let t = self.check(x)?;
        Ok(-self.grid.beta1(t)?[(0, 0)].re)
    }

    pub fn du(&self, x: f64) -> Result<f64> {
        let t = self.check(x)?;
        Ok(-0.5 * self.grid.dbeta1(t)?[(0, 0)].re)
    }

    /// `∫_x^∞ u`.
    pub fn int_u(&self, x: f64) -> Result<f64> {
        let t = self.check(x)?;
        Ok(-2.0 * self.grid.int_tr_beta(t)?.re)
    }

    /// `F₂(x) = exp(-∫_x^∞ (y - x) u(y)² dy)`.
    pub fn f2(&self, x: f64) -> Result<f64> {
        let t = self.check(x)?;
        Ok((-4.0 * self.grid.int_weighted_tr_beta_sq(t)?.re).exp())
    }

    /// `F₁(x) = exp(-½ ∫_x^∞ u) F₂(x)^{1/2}`.
    pub fn f1(&self, x: f64) -> Result<f64> {
        Ok((-0.5 * self.int_u(x)?).exp() * self.f2(x)?.sqrt())
    }

    /// `w = ½u² - ½u'`.
    pub fn w(&self, x: f64) -> Result<f64> {
        Ok(0.5 * self.u(x)?.powi(2) - 0.5 * self.du(x)?)
    }

    /// `w'` from `u'' = 2u³ + xu`.
    pub fn dw(&self, x: f64) -> Result<f64> {
        let u = self.u(x)?;
        let du = self.du(x)?;
        Ok(u * du - 0.5 * (2.0 * u.powi(3) + x * u))
    }

    /// `exp(-∫_x^∞ (y - x) w(y) dy)`.
    pub fn f1_alt(&self, x: f64) -> Result<f64> {
        let t = self.check(x)?;
        let iw = self.grid.integral(&self.w, t)?;
        let itw = self.grid.integral(&self.tw, t)?;
        Ok((-4.0 * (itw - t * iw)).exp())
    }

    /// `|w''' - 12ww' - 2w - xw'|` with `w'''` by a central second difference
    /// of `w'`.
    pub fn p34_residual(&self, x: f64) -> Result<f64> {
        let eta = 2.0 * self.grid.step();
        let d3 = (self.dw(x + eta)? - 2.0 * self.dw(x)? + self.dw(x - eta)?) / (eta * eta);
        let w = self.w(x)?;
        let dw = self.dw(x)?;
        Ok((d3 - 12.0 * w * dw - 2.0 * w - x * dw).abs())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalarChecks {
    pub x: f64,
    pub w: f64,
    pub f1: f64,
    pub f1_alt: f64,
    pub f2: f64,
    /// `F₁² exp(∫_x^∞ u) / F₂ - 1`.
    pub f1_sq_defect: f64,
    pub p34_residual: f64,
}

pub fn scalar_w_checks(tw: &ScalarTw, x: f64) -> Result<ScalarChecks> {
    let f1 = tw.f1(x)?;
    let f2 = tw.f2(x)?;
    Ok(ScalarChecks {
        x,
        w: tw.w(x)?,
        f1,
        f1_alt: tw.f1_alt(x)?,
        f2,
        f1_sq_defect: f1 * f1 * tw.int_u(x)?.exp() / f2 - 1.0,
        p34_residual: tw.p34_residual(x)?,
    })
}

pub fn scalar_f2(x: f64) -> Result<f64> {
    ScalarTw::with_lower(x.min(0.0) - 1.0)?.f2(x)
}

pub fn scalar_f1(x: f64) -> Result<f64> {
    ScalarTw::with_lower(x.min(0.0) - 1.0)?.f1(x)
}

/// `ln det(Id + z K)` at a fixed node count, for differencing in the shifts.
fn fixed_log_det(kernel: &dyn BlockKernel, z: Complex64, cutoff: f64) -> Result<Complex64> {
    let rule = QuadratureRule::half_line(STENCIL_NODES, cutoff)?;
    let opts = NystromOptions {
        refine: false,
        ..Default::default()
    };
    let d = nystrom_det_with(kernel, z, &rule, &opts)?;
    Ok(Complex64::new(d.log_abs, d.value.arg()))
}

fn log_taus(s: &ShiftVector, c: &CouplingMatrix, cutoff: f64) -> Result<(Complex64, Complex64)> {
    let xi = fixed_log_det(&AirySqKernel::new(s.clone(), c.clone())?, -ONE, cutoff)?;
    let gamma = fixed_log_det(&AiryKernel::new(s.clone(), c.clone())?, ONE, cutoff)?;
    Ok((xi, gamma))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MiuraReport {
    /// `|(∂ ln τ_Ξ - 2∂ ln τ_Γ)² + ∂² ln τ_Ξ|`.
    pub residual: f64,
    /// `|u + v² + ∂v|` with `u = 2∂² ln τ_Γ`, `v = ∂ ln τ_Ξ - 2∂ ln τ_Γ`.
    pub branch_residual: f64,
}

/// Miura relation between `τ_Ξ = det(Id - Ai²)` and `τ_Γ = det(Id + Ai)` for
/// `r = 1`, by central differences of step `h`.
pub fn miura_residual(c: f64, s_center: f64, h: f64) -> Result<MiuraReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step {h} must be positive")));
    }
    let cm = CouplingMatrix::scalar(c);
    let cutoff = airy_cutoff(&ShiftVector::uniform(1, s_center - 2.0 * h)?);
    let mut xi = [Complex64::new(0.0, 0.0); 3];
    let mut ga = [Complex64::new(0.0, 0.0); 3];
    for k in 0..3 {
        let s = ShiftVector::uniform(1, s_center + (k as f64 - 1.0) * h)?;
        (xi[k], ga[k]) = log_taus(&s, &cm, cutoff)?;
    }
    let d1 = |f: &[Complex64; 3]| (f[2] - f[0]) / (2.0 * h);
    let d2 = |f: &[Complex64; 3]| (f[2] - 2.0 * f[1] + f[0]) / (h * h);
    let v = d1(&xi) - 2.0 * d1(&ga);
    let dv = d2(&xi) - 2.0 * d2(&ga);
    let u = 2.0 * d2(&ga);
    Ok(MiuraReport {
        residual: (v * v + d2(&xi)).norm(),
        branch_residual: (u + v * v + dv).norm(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TauDerivative {
    pub k: usize,
    #[serde(with = "crate::fredholm::complex_json")]
    pub fd_xi: Complex64,
    /// `-2i (α₁)_{kk}`.
    #[serde(with = "crate::fredholm::complex_json")]
    pub painleve_xi: Complex64,
    #[serde(with = "crate::fredholm::complex_json")]
    pub fd_gamma: Complex64,
    /// `-i (a₁)_{kk}`.
    #[serde(with = "crate::fredholm::complex_json")]
    pub painleve_gamma: Complex64,
}

impl TauDerivative {
    pub fn rel_errors(&self) -> (f64, f64) {
        (
            (self.fd_xi - self.painleve_xi).norm() / self.fd_xi.norm().max(1e-300),
            (self.fd_gamma - self.painleve_gamma).norm() / self.fd_gamma.norm().max(1e-300),
        )
    }
}

/// Five-point differences of `ln det(Id - Ai²)` and `ln det(Id + Ai)` in
/// each shift, against `-2i(α₁)_{kk}` and `-i(a₁)_{kk}`.
pub fn tau_derivatives(s: &ShiftVector, c: &CouplingMatrix, h: f64) -> Result<Vec<TauDerivative>> {
    let grid = painleve_grid(s, c)?;
    let sb = s.barycenter();
    let alpha = grid.alpha1(sb)?;
    let a1 = p34_state(&grid, sb)?.a1;
    let cutoff = airy_cutoff(&s.translated(-2.0 * h));
    let mut out = Vec::with_capacity(s.len());
    for k in 0..s.len() {
        let mut xi = [Complex64::new(0.0, 0.0); 4];
        let mut ga = [Complex64::new(0.0, 0.0); 4];
        for (idx, m) in [-2.0, -1.0, 1.0, 2.0].iter().enumerate() {
            (xi[idx], ga[idx]) = log_taus(&s.shifted(k, m * h), c, cutoff)?;
        }
        let d = |f: &[Complex64; 4]| (8.0 * (f[2] - f[1]) - (f[3] - f[0])) / (12.0 * h);
        out.push(TauDerivative {
            k,
            fd_xi: d(&xi),
            painleve_xi: -2.0 * I * alpha[(k, k)],
            fd_gamma: d(&ga),
            painleve_gamma: -I * a1[(k, k)],
        });
    }
    Ok(out)
}

/// `det[Ai_s²(ξ_a, ξ_b)]` for points `ξ = (level, position)`.
pub fn tp_determinant(s: &ShiftVector, c: &CouplingMatrix, points: &[(usize, f64)]) -> Result<f64> {
    let k = points.len();
    let r = s.len();
    if let Some(&(j, x)) = points.iter().find(|(j, x)| *j >= r || !x.is_finite()) {
        return Err(Error::InvalidInput(format!("point ({j}, {x}) outside {{0..{r}}} x R")));
    }
    let mut m = Vec::with_capacity(k * k);
    for &(ja, xa) in points {
        for &(jb, xb) in points {
            m.push(matrix_airy_sq_kernel(xa, xb, s, c)?[(ja, jb)]);
        }
    }
    Ok(lu_log_det(&mut m, k).value().re)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TpReport {
    pub trials: usize,
    pub min_det: f64,
    pub passed: bool,
}

/// Minimum of [`tp_determinant`] over random point sets of size at most
/// `k_max` with positions in `[-5, 5]`.
pub fn total_positivity_check(
    s: &ShiftVector,
    c: &CouplingMatrix,
    k_max: usize,
    trials: usize,
    seed: u64,
) -> Result<TpReport> {
    if !c.is_hermitean() {
        return Err(Error::Domain(
            "total positivity needs a Hermitean coupling matrix (real: symmetric)".into(),
        ));
    }
    if !(1..=6).contains(&k_max) {
        return Err(Error::InvalidInput(format!("point count {k_max} outside 1..=6")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_det = f64::INFINITY;
    for _ in 0..trials {
        let k = rng.gen_range(1..=k_max);
        let pts: Vec<(usize, f64)> = (0..k).map(|_| (rng.gen_range(0..s.len()), rng.gen_range(-5.0..5.0))).collect();
        min_det = min_det.min(tp_determinant(s, c, &pts)?);
    }
    Ok(TpReport {
        trials,
        min_det,
        passed: min_det > -1e-12,
    })
}

/// Two-point determinant and `½ ∫∫ |det[F(ξ_a, ζ_b)]|²` over
/// `ζ ∈ {levels} × [0, ∞)` with `F((j, x), (k, z)) = c_{jk} Ai(x + z + s_j + s_k)`.
pub fn de_bruijn_check(s: &ShiftVector, c: &CouplingMatrix, p: [(usize, f64); 2], nodes: usize) -> Result<(f64, f64)> {
    if !c.is_hermitean() {
        return Err(Error::Domain("de Bruijn identity needs a Hermitean coupling matrix".into()));
    }
    let lhs = tp_determinant(s, c, &p)?;
    let lo = p[0].1.min(p[1].1) + 2.0 * s.min();
    let rule = QuadratureRule::half_line(nodes, 40.0 + 2.0 * (-lo).max(0.0))?;
    let r = s.len();
    let sv = s.values();
    let f = |a: usize, k: usize, z: f64| -> Result<Complex64> {
        let (j, x) = p[a];
        Ok(c.entries()[(j, k)] * crate::airy::ai(x + z + sv[j] + sv[k])?)
    };
    // table[a][k][i] = F(ξ_a, (k, z_i))
    let mut table = vec![vec![vec![Complex64::new(0.0, 0.0); rule.len()]; r]; 2];
    for (a, ta) in table.iter_mut().enumerate() {
        for (k, tk) in ta.iter_mut().enumerate() {
            for (i, v) in tk.iter_mut().enumerate() {
                *v = f(a, k, rule.nodes[i])?;
            }
        }
    }
    let mut acc = 0.0;
    for k1 in 0..r {
        for k2 in 0..r {
            for (i1, w1) in rule.weights.iter().enumerate() {
                for (i2, w2) in rule.weights.iter().enumerate() {
                    let d = table[0][k1][i1] * table[1][k2][i2] - table[0][k2][i2] * table[1][k1][i1];
                    acc += w1 * w2 * d.norm_sqr();
                }
            }
        }
    }
    Ok((lhs, 0.5 * acc))
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    /// `(s, det(Id - Ai²))` in increasing `s`.
    pub samples: Vec<(f64, f64)>,
    /// Largest `s` at which the determinant changes sign.
    pub crossing: Option<f64>,
}

fn scan_det(c: &CouplingMatrix, s: f64) -> Result<f64> {
    let sv = ShiftVector::uniform(c.dim(), s)?;
    let k = AirySqKernel::new(sv.clone(), c.clone())?;
    let rule = QuadratureRule::airy(DEFAULT_NODES, &sv)?;
    let d = nystrom_det_with(
        &k,
        -ONE,
        &rule,
        &NystromOptions {
            criterion: Criterion::Absolute,
            ..Default::default()
        },
    )?;
    Ok(d.value.re)
}

/// `det(Id - Ai²)` at `s = (s, …, s)` on `n` points of `[s_lo, s_hi]`, with the
/// topmost sign change bisected to [`BISECT_TOL`].
pub fn existence_scan(c: &CouplingMatrix, s_lo: f64, s_hi: f64, n: usize) -> Result<ScanReport> {
    if !(s_lo < s_hi) || n < 2 {
        return Err(Error::InvalidInput(format!("bad scan range [{s_lo}, {s_hi}] with {n} points")));
    }
    let samples: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let s = s_lo + (s_hi - s_lo) * i as f64 / (n - 1) as f64;
            scan_det(c, s).map(|d| (s, d))
        })
        .collect::<Result<_>>()?;
    let mut crossing = None;
    for w in samples.windows(2).rev() {
        let ((mut a, fa), (mut b, _)) = (w[0], w[1]);
        if (fa > 0.0) != (w[1].1 > 0.0) {
            let pos_a = fa > 0.0;
            while b - a > BISECT_TOL {
                let m = 0.5 * (a + b);
                if (scan_det(c, m)? > 0.0) == pos_a {
                    a = m;
                } else {
                    b = m;
                }
            }
            crossing = Some(0.5 * (a + b));
            break;
        }
    }
    Ok(ScanReport { samples, crossing })
}
