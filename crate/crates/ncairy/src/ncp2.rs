//! The noncommutative Hastings–McLeod solution `β₁(S)` of
//! `D²β₁ = 4{s, β₁} + 8β₁³`, `s = diag(S + δ_j)`.
//!
//! The solution is obtained by Picard iteration of the Airy integral equation
//! on `[S0, S0 + 8]`, then continued to smaller `S` with fixed-step RK4 on the
//! same uniform grid.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::airy::{ai_pair, airy_scaled};
use crate::error::{Error, Result};
use crate::kernels::CouplingMatrix;
use crate::linalg::{pauli, CMat, I, ZERO};

pub const DEFAULT_S0: f64 = 2.0;
pub const DEFAULT_SPAN: f64 = 8.0;
pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_TOL: f64 = 1e-12;
const BLOWUP: f64 = 1e8;
const MAX_SUBSTEPS: usize = 16;
const MAX_SWEEPS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HmOptions {
    pub s0: f64,
    /// `S_max - S0`.
    pub span: f64,
    pub step: f64,
    pub tol: f64,
    pub max_raises: usize,
}

impl Default for HmOptions {
    fn default() -> Self {
        Self {
            s0: DEFAULT_S0,
            span: DEFAULT_SPAN,
            step: DEFAULT_STEP,
            tol: DEFAULT_TOL,
            max_raises: 4,
        }
    }
}

/// Values the grid integrates: anything closed under addition and real
/// scaling.
pub trait Linear: Clone + Add<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Clone + Add<Output = T> + Mul<f64, Output = T>> Linear for T {}

/// Fourth-order right-cumulative integrals on a uniform grid:
/// `out[i] = ∫_{x_i}^{x_{n-1}} f`.
pub fn right_cumulative<T: Linear>(f: &[T], h: f64, zero: T) -> Vec<T> {
    let n = f.len();
    let mut out = vec![zero.clone(); n];
    if n < 2 {
        return out;
    }
    if n < 4 {
        for i in (0..n - 1).rev() {
            out[i] = out[i + 1].clone() + (f[i].clone() + f[i + 1].clone()) * (0.5 * h);
        }
        return out;
    }
    let c = h / 24.0;
    for i in (0..n - 1).rev() {
        let piece = if i == 0 {
            f[0].clone() * (9.0 * c) + f[1].clone() * (19.0 * c) + f[2].clone() * (-5.0 * c) + f[3].clone() * c
        } else if i == n - 2 {
            f[n - 1].clone() * (9.0 * c) + f[n - 2].clone() * (19.0 * c) + f[n - 3].clone() * (-5.0 * c)
                + f[n - 4].clone() * c
        } else {
            f[i - 1].clone() * (-c) + f[i].clone() * (13.0 * c) + f[i + 1].clone() * (13.0 * c) + f[i + 2].clone() * (-c)
        };
        out[i] = out[i + 1].clone() + piece;
    }
    out
}

/// An integrand sampled on the grid with its right-cumulative integral.
#[derive(Clone, Debug)]
pub struct GridIntegral<T> {
    pub integrand: Vec<T>,
    pub cumulative: Vec<T>,
}

fn anticommutator_s(s: &CMat, b: &CMat) -> CMat {
    s.anticommutator(b)
}

/// `D²β = 4{s, β} + 8β³`.
pub fn ncp2_rhs(s: &CMat, beta: &CMat) -> CMat {
    &anticommutator_s(s, beta).scale_re(4.0) + &beta.cube().scale_re(8.0)
}

/// `D³β = 8β + 4{s, Dβ} + 8(Dβ β² + β Dβ β + β² Dβ)`.
pub fn ncp2_third(s: &CMat, beta: &CMat, dbeta: &CMat) -> CMat {
    let b2 = beta * beta;
    let cubic = &(&(dbeta * &b2) + &(&(beta * dbeta) * beta)) + &(&b2 * dbeta);
    &(&beta.scale_re(8.0) + &s.anticommutator(dbeta).scale_re(4.0)) + &cubic.scale_re(8.0)
}

/// Tail samples of `(β₁, Dβ₁)` on the uniform grid `S0 = t_0 < … < t_{n-1} = S_max`.
#[derive(Clone, Debug)]
pub struct PicardTail {
    pub s_values: Vec<f64>,
    pub beta1: Vec<CMat>,
    pub dbeta1: Vec<CMat>,
    pub sweeps: usize,
    pub coupling: CouplingMatrix,
    pub delta: Vec<f64>,
}

impl PicardTail {
    pub fn step(&self) -> f64 {
        (self.s_values[self.s_values.len() - 1] - self.s_values[0]) / (self.s_values.len() - 1) as f64
    }
}

struct PairTable {
    ai: Vec<f64>,
    aip: Vec<f64>,
    bi: Vec<f64>,
    bip: Vec<f64>,
}

fn pair_table(ts: &[f64], d: f64) -> Result<PairTable> {
    let n = ts.len();
    let mut t = PairTable {
        ai: Vec::with_capacity(n),
        aip: Vec::with_capacity(n),
        bi: Vec::with_capacity(n),
        bip: Vec::with_capacity(n),
    };
    for &s in ts {
        let e = airy_scaled(2.0 * s + d)?;
        if e.zeta > 700.0 {
            return Err(Error::OverflowRisk(format!("Bi({}) in the Picard tail", 2.0 * s + d)));
        }
        let (up, down) = (e.zeta.exp(), (-e.zeta).exp());
        t.ai.push(e.ai * down);
        t.aip.push(e.aip * down);
        t.bi.push(e.bi * up);
        t.bip.push(e.bip * up);
    }
    Ok(t)
}

/// Fixed-point iteration of
/// `β₁ = U + 4π ∫_S^∞ [Ai(2S+d)Bi(2t+d) - Ai(2t+d)Bi(2S+d)] [β₁³]_{kℓ} dt`,
/// `U_{kℓ} = -c_{kℓ} Ai(2S + d)`, `d = δ_k + δ_ℓ`.
pub fn hm_tail_picard(
    c: &CouplingMatrix,
    delta: &[f64],
    s0: f64,
    s_max: f64,
    n_tail: usize,
    tol: f64,
) -> Result<PicardTail> {
    let r = c.dim();
    if delta.len() != r {
        return Err(Error::InvalidInput(format!("{} offsets for a {r}x{r} coupling", delta.len())));
    }
    let m = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    if s0 < 1.0 + m {
        return Err(Error::Domain(format!("Picard start S0 = {s0} below 1 + max|δ| = {}", 1.0 + m)));
    }
    if n_tail < 64 || s_max <= s0 {
        return Err(Error::InvalidInput("Picard tail needs n_tail >= 64 and S_max > S0".into()));
    }
    let h = (s_max - s0) / (n_tail - 1) as f64;
    let ts: Vec<f64> = (0..n_tail).map(|j| s0 + j as f64 * h).collect();
    let mut tables = Vec::with_capacity(r * r);
    for k in 0..r {
        for l in 0..r {
            tables.push(pair_table(&ts, delta[k] + delta[l])?);
        }
    }
    let cm = c.entries();
    let u: Vec<CMat> = (0..n_tail)
        .map(|j| CMat::from_fn(r, |k, l| -cm[(k, l)] * tables[k * r + l].ai[j]))
        .collect();
    let du: Vec<CMat> = (0..n_tail)
        .map(|j| CMat::from_fn(r, |k, l| -2.0 * cm[(k, l)] * tables[k * r + l].aip[j]))
        .collect();

    let sweep = |beta: &[CMat]| -> (Vec<CMat>, Vec<CMat>) {
        let cubes: Vec<CMat> = beta.iter().map(|b| b.cube()).collect();
        let mut nb = u.clone();
        let mut ndb = du.clone();
        for k in 0..r {
            for l in 0..r {
                let tb = &tables[k * r + l];
                let gb: Vec<Complex64> = (0..n_tail).map(|j| tb.bi[j] * cubes[j][(k, l)]).collect();
                let ga: Vec<Complex64> = (0..n_tail).map(|j| tb.ai[j] * cubes[j][(k, l)]).collect();
                let ib = right_cumulative(&gb, h, ZERO);
                let ia = right_cumulative(&ga, h, ZERO);
                for j in 0..n_tail {
                    nb[j][(k, l)] += 4.0 * PI * (tb.ai[j] * ib[j] - tb.bi[j] * ia[j]);
                    ndb[j][(k, l)] += 8.0 * PI * (tb.aip[j] * ib[j] - tb.bip[j] * ia[j]);
                }
            }
        }
        (nb, ndb)
    };

    let mut beta = u.clone();
    let mut last = f64::INFINITY;
    let mut grows = 0;
    for sweeps in 1..=MAX_SWEEPS {
        let (nb, ndb) = sweep(&beta);
        let change = nb
            .iter()
            .zip(&beta)
            .map(|(a, b)| (a - b).norm_max())
            .fold(0.0, f64::max);
        if !change.is_finite() {
            return Err(Error::NoContraction { s0 });
        }
        if change <= tol {
            return Ok(PicardTail {
                s_values: ts,
                beta1: nb,
                dbeta1: ndb,
                sweeps,
                coupling: c.clone(),
                delta: delta.to_vec(),
            });
        }
        beta = nb;
        grows = if change > last { grows + 1 } else { 0 };
        if grows >= 3 {
            return Err(Error::NoContraction { s0 });
        }
        last = change;
    }
    Err(Error::ConvergenceFailure(format!("Picard iteration after {MAX_SWEEPS} sweeps")))
}

fn rk4_step(s: f64, h: f64, delta: &[f64], b: &CMat, db: &CMat) -> (CMat, CMat) {
    let smat = |x: f64| CMat::diag_real(&delta.iter().map(|d| x + d).collect::<Vec<_>>());
    let f = |x: f64, b: &CMat| ncp2_rhs(&smat(x), b);
    let k1b = db.clone();
    let k1d = f(s, b);
    let b2 = b + &k1b.scale_re(h / 2.0);
    let d2 = db + &k1d.scale_re(h / 2.0);
    let k2b = d2.clone();
    let k2d = f(s + h / 2.0, &b2);
    let b3 = b + &k2b.scale_re(h / 2.0);
    let d3 = db + &k2d.scale_re(h / 2.0);
    let k3b = d3.clone();
    let k3d = f(s + h / 2.0, &b3);
    let b4 = b + &k3b.scale_re(h);
    let d4 = db + &k3d.scale_re(h);
    let k4b = d4;
    let k4d = f(s + h, &b4);
    let nb = b + &(&(&k1b + &k2b.scale_re(2.0)) + &(&k3b.scale_re(2.0) + &k4b)).scale_re(h / 6.0);
    let nd = db + &(&(&k1d + &k2d.scale_re(2.0)) + &(&k3d.scale_re(2.0) + &k4d)).scale_re(h / 6.0);
    (nb, nd)
}

/// RK4 continuation of the Picard tail down to `s_min` with step `h` (which
/// must match the tail spacing).
pub fn hm_continue(tail: &PicardTail, s_min: f64, h: f64) -> Result<HmGrid> {
    let th = tail.step();
    if !(h > 0.0 && h <= 1e-2) || (h - th).abs() > 1e-9 * th {
        return Err(Error::InvalidInput(format!(
            "continuation step {h} must be <= 1e-2 and equal the tail spacing {th}"
        )));
    }
    let s0 = tail.s_values[0];
    let delta = &tail.delta;
    let n_steps = if s_min < s0 {
        ((s0 - s_min) / h - 1e-9).ceil() as usize
    } else {
        0
    };
    let mut down_b = Vec::with_capacity(n_steps);
    let mut down_d = Vec::with_capacity(n_steps);
    let mut b = tail.beta1[0].clone();
    let mut db = tail.dbeta1[0].clone();
    let mut pole_at = None;
    'outer: for i in 0..n_steps {
        let s = s0 - i as f64 * h;
        let rate = h * (2.0 * b.norm_max() + 1.0);
        let k = ((rate / 0.02).ceil() as usize).clamp(1, MAX_SUBSTEPS);
        let hs = h / k as f64;
        for j in 0..k {
            let sj = s - j as f64 * hs;
            let (nb, nd) = rk4_step(sj, -hs, delta, &b, &db);
            if !nb.is_finite() || !nd.is_finite() || nb.norm_max() > BLOWUP {
                pole_at = Some(sj - 0.5 * hs);
                break 'outer;
            }
            b = nb;
            db = nd;
        }
        down_b.push(b.clone());
        down_d.push(db.clone());
    }
    let n_down = down_b.len();
    let s_lo = s0 - n_down as f64 * h;
    let n_all = n_down + tail.s_values.len();
    let s_values: Vec<f64> = (0..n_all)
        .map(|k| if k < n_down { s_lo + k as f64 * h } else { tail.s_values[k - n_down] })
        .collect();
    let mut beta1: Vec<CMat> = down_b.into_iter().rev().collect();
    beta1.extend(tail.beta1.iter().cloned());
    let mut dbeta1: Vec<CMat> = down_d.into_iter().rev().collect();
    dbeta1.extend(tail.dbeta1.iter().cloned());
    let grid = HmGrid::new(tail.coupling.clone(), delta.clone(), s_values, beta1, dbeta1, s0, h, pole_at);
    match pole_at {
        Some(p) => Err(Error::PoleEncountered {
            pole_at: p,
            grid: Box::new(grid),
        }),
        None => Ok(grid),
    }
}

/// Picard tail plus continuation; `S0` is raised by 0.5 on `NoContraction`.
pub fn hm_solve(c: &CouplingMatrix, delta: &[f64], s_min: f64, opts: &HmOptions) -> Result<HmGrid> {
    let m = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let mut s0 = opts.s0.max(1.0 + m);
    let mut attempt = 0;
    loop {
        let n_tail = (opts.span / opts.step).round() as usize + 1;
        let s_max = s0 + (n_tail - 1) as f64 * opts.step;
        match hm_tail_picard(c, delta, s0, s_max, n_tail, opts.tol) {
            Ok(tail) => return hm_continue(&tail, s_min, opts.step),
            Err(Error::NoContraction { .. }) if attempt < opts.max_raises => {
                s0 += 0.5;
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Sampled solution with the integral tables derived from it.
#[derive(Clone, Debug)]
pub struct HmGrid {
    coupling: CouplingMatrix,
    delta: Vec<f64>,
    s_values: Vec<f64>,
    beta1: Vec<CMat>,
    dbeta1: Vec<CMat>,
    s_tail: f64,
    step: f64,
    pole_at: Option<f64>,
    beta_sq: GridIntegral<CMat>,
    tr_beta: GridIntegral<Complex64>,
    tr_beta_sq: GridIntegral<Complex64>,
    t_tr_beta_sq: GridIntegral<Complex64>,
    a1p_a1: GridIntegral<CMat>,
}

impl HmGrid {
    #[allow(clippy::too_many_arguments)]
    fn new(
        coupling: CouplingMatrix,
        delta: Vec<f64>,
        s_values: Vec<f64>,
        beta1: Vec<CMat>,
        dbeta1: Vec<CMat>,
        s_tail: f64,
        step: f64,
        pole_at: Option<f64>,
    ) -> Self {
        let r = coupling.dim();
        let zero_m = CMat::zeros(r);
        let sq: Vec<CMat> = beta1.iter().map(|b| b * b).collect();
        let beta_sq = GridIntegral {
            cumulative: right_cumulative(&sq, step, zero_m.clone()),
            integrand: sq,
        };
        let trb: Vec<Complex64> = beta1.iter().map(|b| b.trace()).collect();
        let trsq: Vec<Complex64> = beta_sq.integrand.iter().map(|b| b.trace()).collect();
        let ttrsq: Vec<Complex64> = trsq.iter().zip(&s_values).map(|(v, t)| v * t).collect();
        let mk = |v: Vec<Complex64>| GridIntegral {
            cumulative: right_cumulative(&v, step, ZERO),
            integrand: v,
        };
        let prod: Vec<CMat> = (0..beta1.len())
            .map(|k| {
                let alpha = beta_sq.cumulative[k].scale(2.0 * I);
                let a1 = &alpha + &beta1[k].scale(I);
                let a1p = &beta_sq.integrand[k].scale(-2.0 * I) + &dbeta1[k].scale(I);
                &a1p * &a1
            })
            .collect();
        let a1p_a1 = GridIntegral {
            cumulative: right_cumulative(&prod, step, zero_m),
            integrand: prod,
        };
        Self {
            coupling,
            delta,
            s_values,
            beta1,
            dbeta1,
            s_tail,
            step,
            pole_at,
            beta_sq,
            tr_beta: mk(trb),
            tr_beta_sq: mk(trsq),
            t_tr_beta_sq: mk(ttrsq),
            a1p_a1,
        }
    }

    pub fn coupling(&self) -> &CouplingMatrix {
        &self.coupling
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn dim(&self) -> usize {
        self.coupling.dim()
    }

    pub fn s_values(&self) -> &[f64] {
        &self.s_values
    }

    pub fn beta1_samples(&self) -> &[CMat] {
        &self.beta1
    }

    pub fn dbeta1_samples(&self) -> &[CMat] {
        &self.dbeta1
    }

    /// Start of the Picard segment.
    pub fn s_tail(&self) -> f64 {
        self.s_tail
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn pole_at(&self) -> Option<f64> {
        self.pole_at
    }

    pub fn s_min(&self) -> f64 {
        self.s_values[0]
    }

    pub fn s_max(&self) -> f64 {
        self.s_values[self.s_values.len() - 1]
    }

    pub fn s_matrix(&self, s: f64) -> CMat {
        CMat::diag_real(&self.delta.iter().map(|d| s + d).collect::<Vec<_>>())
    }

    fn out_of_range(&self, what: &'static str, s: f64) -> Error {
        Error::OutOfRange {
            what,
            value: s,
            lo: self.s_min(),
            hi: self.s_max(),
        }
    }

    /// Interval index `i` with `s_i <= s <= s_{i+1}` and the local coordinate.
    fn locate(&self, s: f64) -> Result<(usize, f64)> {
        let n = self.s_values.len();
        let lo = self.s_min();
        let tol = 1e-9 * self.step;
        if !(s >= lo - tol && s <= self.s_max() + tol) {
            return Err(self.out_of_range("S", s));
        }
        let pos = (s - lo) / self.step;
        let i = (pos.floor() as usize).min(n - 2);
        let t = (pos - i as f64).clamp(0.0, 1.0);
        Ok((i, t))
    }

    /// Index of the grid point within `step/2` of `s`.
    pub fn nearest_index(&self, s: f64) -> Result<usize> {
        let (i, t) = self.locate(s)?;
        Ok(if t > 0.5 { i + 1 } else { i })
    }

    fn exact_index(&self, i: usize, t: f64) -> Option<usize> {
        if t <= 1e-9 {
            Some(i)
        } else if t >= 1.0 - 1e-9 {
            Some(i + 1)
        } else {
            None
        }
    }

    fn hermite(&self, s: f64, f: &[CMat], df: impl Fn(usize) -> CMat) -> Result<CMat> {
        let (i, t) = self.locate(s)?;
        if let Some(k) = self.exact_index(i, t) {
            return Ok(f[k].clone());
        }
        let h = self.step;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(&(&f[i].scale_re(h00) + &df(i).scale_re(h10 * h)) + &(&f[i + 1].scale_re(h01) + &df(i + 1).scale_re(h11 * h)))
    }

    pub fn beta1(&self, s: f64) -> Result<CMat> {
        self.hermite(s, &self.beta1, |k| self.dbeta1[k].clone())
    }

    pub fn dbeta1(&self, s: f64) -> Result<CMat> {
        self.hermite(s, &self.dbeta1, |k| ncp2_rhs(&self.s_matrix(self.s_values[k]), &self.beta1[k]))
    }

    /// `D²β₁` from the equation itself.
    pub fn d2beta1(&self, s: f64) -> Result<CMat> {
        Ok(ncp2_rhs(&self.s_matrix(s), &self.beta1(s)?))
    }

    pub fn d3beta1(&self, s: f64) -> Result<CMat> {
        Ok(ncp2_third(&self.s_matrix(s), &self.beta1(s)?, &self.dbeta1(s)?))
    }

    /// `∫_s^{S_max} f` for a table built on this grid.
    pub fn integral<T: Linear>(&self, table: &GridIntegral<T>, s: f64) -> Result<T> {
        let (i, t) = self.locate(s)?;
        if let Some(k) = self.exact_index(i, t) {
            return Ok(table.cumulative[k].clone());
        }
        let n = self.s_values.len();
        let j0 = i.saturating_sub(1).min(n.saturating_sub(4));
        let xs: Vec<f64> = (j0..j0 + 4).map(|j| j as f64).collect();
        let x = i as f64 + t;
        let b = (i + 1) as f64;
        // three-point Gauss–Legendre on [x, i + 1] of the cubic interpolant
        let g = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
        let w = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        let half = 0.5 * (b - x);
        let mid = 0.5 * (b + x);
        let mut acc = table.cumulative[i + 1].clone();
        for q in 0..3 {
            let xq = mid + half * g[q];
            for (a, &xa) in xs.iter().enumerate() {
                let mut lag = 1.0;
                for (c, &xc) in xs.iter().enumerate() {
                    if c != a {
                        lag *= (xq - xc) / (xa - xc);
                    }
                }
                acc = acc + table.integrand[j0 + a].clone() * (w[q] * half * self.step * lag);
            }
        }
        Ok(acc)
    }

    pub fn table<T: Linear>(&self, integrand: Vec<T>, zero: T) -> GridIntegral<T> {
        GridIntegral {
            cumulative: right_cumulative(&integrand, self.step, zero),
            integrand,
        }
    }

    /// `α₁(S) = 2i ∫_S^∞ β₁² dt`, the solution of `Dα₁ = -2iβ₁²` vanishing at
    /// infinity.
    pub fn alpha1(&self, s: f64) -> Result<CMat> {
        Ok(self.integral(&self.beta_sq, s)?.scale(2.0 * I))
    }

    /// `β₂ = -(i/2) Dβ₁ - i β₁ α₁`.
    pub fn beta2(&self, s: f64) -> Result<CMat> {
        let b = self.beta1(s)?;
        let a = self.alpha1(s)?;
        Ok(&self.dbeta1(s)?.scale(-0.5 * I) + &(&b * &a).scale(-I))
    }

    /// `a₂(S) = -∫_S^∞ a₁' a₁ dt`.
    pub fn a2(&self, s: f64) -> Result<CMat> {
        Ok(-self.integral(&self.a1p_a1, s)?)
    }

    pub fn int_tr_beta(&self, s: f64) -> Result<Complex64> {
        self.integral(&self.tr_beta, s)
    }

    /// `∫_S^∞ (t - S) Tr β₁² dt`.
    pub fn int_weighted_tr_beta_sq(&self, s: f64) -> Result<Complex64> {
        Ok(self.integral(&self.t_tr_beta_sq, s)? - s * self.integral(&self.tr_beta_sq, s)?)
    }
}

/// Free-function form of [`HmGrid::alpha1`].
pub fn alpha1(grid: &HmGrid, s: f64) -> Result<CMat> {
    grid.alpha1(s)
}

/// `‖Δ₅²β₁ - 4{s, β₁} - 8β₁³‖` at the grid point nearest `s`.
pub fn ncp2_residual(grid: &HmGrid, s: f64) -> Result<f64> {
    let k = grid.nearest_index(s)?;
    let n = grid.s_values.len();
    if k < 2 || k + 2 >= n {
        return Err(grid.out_of_range("interior S", s));
    }
    let b = &grid.beta1;
    let h = grid.step;
    let d2 = (&(&(&b[k - 1] + &b[k + 1]).scale_re(16.0) - &(&b[k - 2] + &b[k + 2])) - &b[k].scale_re(30.0))
        .scale_re(1.0 / (12.0 * h * h));
    let sk = grid.s_values[k];
    Ok((&d2 - &ncp2_rhs(&grid.s_matrix(sk), &b[k])).norm_max())
}

/// Coefficients of `A(λ) = A₂λ² + A₁λ + A₀` and `U_D(λ) = U₁λ + U₀`, plus
/// the individual `U_j(λ)`.
#[derive(Clone, Debug)]
pub struct LaxPair {
    pub a2: CMat,
    pub a1: CMat,
    pub a0: CMat,
    pub ud1: CMat,
    pub ud0: CMat,
    /// `(λ-coefficient, constant)` of each `U_j`.
    pub u: Vec<(CMat, CMat)>,
}

impl LaxPair {
    pub fn a_at(&self, l: Complex64) -> CMat {
        &(&self.a2.scale(l * l) + &self.a1.scale(l)) + &self.a0
    }

    pub fn ud_at(&self, l: Complex64) -> CMat {
        &self.ud1.scale(l) + &self.ud0
    }

    pub fn u_at(&self, j: usize, l: Complex64) -> CMat {
        &self.u[j].0.scale(l) + &self.u[j].1
    }
}

pub fn lax_matrices(grid: &HmGrid, s: f64) -> Result<LaxPair> {
    let r = grid.dim();
    let b = grid.beta1(s)?;
    let db = grid.dbeta1(s)?;
    let alpha = grid.alpha1(s)?;
    let smat = grid.s_matrix(s);
    let id = CMat::identity(r);
    let a2 = id.kron2(&pauli::SIGMA3).scale(0.5 * I);
    let a1 = b.kron2(&pauli::SIGMA1);
    let a0 = &db.kron2(&pauli::SIGMA2).scale_re(-0.5) + &(&(&b * &b) + &smat).kron2(&pauli::SIGMA3).scale(I);
    let ud1 = id.kron2(&pauli::SIGMA3).scale(I);
    let ud0 = b.kron2(&pauli::SIGMA1).scale_re(2.0);
    let u = (0..r)
        .map(|j| {
            let e = CMat::unit(r, j);
            let lin = e.kron2(&pauli::SIGMA3).scale(I);
            let cst = &alpha.commutator(&e).kron2(&pauli::ID).scale(I) + &b.anticommutator(&e).kron2(&pauli::SIGMA1);
            (lin, cst)
        })
        .collect();
    Ok(LaxPair {
        a2,
        a1,
        a0,
        ud1,
        ud0,
        u,
    })
}

/// `max_λ ‖∂_λU_D - DA + [U_D, A]‖` with `DA` assembled analytically.
pub fn zero_curvature_residual_p2(grid: &HmGrid, s: f64, lambdas: &[Complex64]) -> Result<f64> {
    let lp = lax_matrices(grid, s)?;
    let r = grid.dim();
    let b = grid.beta1(s)?;
    let db = grid.dbeta1(s)?;
    let d2b = grid.d2beta1(s)?;
    let id = CMat::identity(r);
    let mut worst = 0.0f64;
    for &l in lambdas {
        let da = &(&db.kron2(&pauli::SIGMA1).scale(l) + &d2b.kron2(&pauli::SIGMA2).scale_re(-0.5))
            + &(&b.anticommutator(&db) + &id).kron2(&pauli::SIGMA3).scale(I);
        let ud = lp.ud_at(l);
        let a = lp.a_at(l);
        let res = &(&lp.ud1 - &da) + &ud.commutator(&a);
        worst = worst.max(res.norm_max());
    }
    Ok(worst)
}

pub const P2_LAMBDAS: [Complex64; 4] = [
    Complex64::new(0.0, 0.0),
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(2.0, -1.0),
];

/// Leading asymptotics `-c_{kℓ} Ai(s_k + s_ℓ)` of `β₁`.
pub fn leading_asymptotics(c: &CouplingMatrix, delta: &[f64], s: f64) -> Result<CMat> {
    let r = c.dim();
    let mut out = CMat::zeros(r);
    for k in 0..r {
        for l in 0..r {
            out[(k, l)] = -c.entries()[(k, l)] * ai_pair(2.0 * s + delta[k] + delta[l])?.0;
        }
    }
    Ok(out)
}
