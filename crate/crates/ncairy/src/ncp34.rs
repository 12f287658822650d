//! The noncommutative Painlevé XXXIV system built from the Hastings–McLeod
//! state: `a₁ = α₁ + iβ₁`, `a₂' = a₁'a₁`, and
//! `a₁''' = 8i[a₁, s]a₁ + 8a₁ + 8i[s, a₂] + 6i(a₁')² + 4{a₁', s}`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{pauli, CMat, I};
use crate::ncp2::HmGrid;

pub const P34_LAMBDAS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-2.0, 0.0),
    Complex64::new(0.5, 0.5),
];

#[derive(Clone, Debug)]
pub struct P34State {
    pub s: f64,
    pub delta: Vec<f64>,
    pub a1: CMat,
    pub a1p: CMat,
    pub a1pp: CMat,
    pub a1ppp: CMat,
    pub a2: CMat,
    pub b2: CMat,
    pub b3: CMat,
    pub b4: CMat,
}

impl P34State {
    pub fn s_matrix(&self) -> CMat {
        CMat::diag_real(&self.delta.iter().map(|d| self.s + d).collect::<Vec<_>>())
    }
}

pub fn p34_state(grid: &HmGrid, s: f64) -> Result<P34State> {
    let b = grid.beta1(s)?;
    let db = grid.dbeta1(s)?;
    let d2b = grid.d2beta1(s)?;
    let d3b = grid.d3beta1(s)?;
    let a1 = &grid.alpha1(s)? + &b.scale(I);
    let a1p = &(&b * &b).scale(-2.0 * I) + &db.scale(I);
    let a1pp = &b.anticommutator(&db).scale(-2.0 * I) + &d2b.scale(I);
    let a1ppp = &(&(&db * &db).scale_re(2.0) + &b.anticommutator(&d2b)).scale(-2.0 * I) + &d3b.scale(I);
    let a2 = grid.a2(s)?;
    let b2 = a1p.scale(0.5 * I);
    let b3 = &(&a1p * &a1).scale_re(-0.5) + &a1pp.scale(-0.25 * I);
    let b4 = &(&(&a1p * &a1p).scale_re(-0.5) + &(&a1p * &a2).scale(0.5 * I))
        + &(&(&a1pp * &a1).scale_re(-0.25) + &a1ppp.scale(-0.125 * I));
    Ok(P34State {
        s,
        delta: grid.delta().to_vec(),
        a1,
        a1p,
        a1pp,
        a1ppp,
        a2,
        b2,
        b3,
        b4,
    })
}

/// Right-hand side of the third-order equation, optionally without the
/// `8i[s, a₂]` term.
pub fn third_order_rhs(st: &P34State, include_a2: bool) -> CMat {
    let s = st.s_matrix();
    let mut rhs = &(&st.a1.commutator(&s) * &st.a1).scale(8.0 * I) + &st.a1.scale_re(8.0);
    rhs += &(&st.a1p * &st.a1p).scale(6.0 * I);
    rhs += &st.a1p.anticommutator(&s).scale_re(4.0);
    if include_a2 {
        rhs += &s.commutator(&st.a2).scale(8.0 * I);
    }
    rhs
}

/// Right-hand side of the fourth-order equation for `a₁` alone, obtained by
/// differentiating the third-order one and eliminating `a₂'`.
pub fn fourth_order_rhs(st: &P34State) -> CMat {
    let s = st.s_matrix();
    let (a, ap, app) = (&st.a1, &st.a1p, &st.a1pp);
    let cubic = &(&(&(ap * &s) * a) + &(&(a * &s) * ap)) - &(&(&(&s * a) * ap) + &(&(ap * a) * &s));
    let mut rhs = app.anticommutator(ap).scale(6.0 * I);
    rhs += &cubic.scale(8.0 * I);
    rhs += &s.anticommutator(app).scale_re(4.0);
    rhs += &ap.scale_re(16.0);
    rhs
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P34Residual {
    pub res3: f64,
    pub res2: f64,
    pub res4: f64,
}

fn five_point(fm2: &CMat, fm1: &CMat, fp1: &CMat, fp2: &CMat, h: f64) -> CMat {
    (&(fp1 - fm1).scale_re(8.0) - &(fp2 - fm2)).scale_re(1.0 / (12.0 * h))
}

/// Residuals of the third-order equation, of `a₂' = a₁'a₁` and of the
/// fourth-order equation, with derivatives of `a₂` and `a₁'''` taken by
/// five-point differences at the grid spacing.
pub fn p34_residual(grid: &HmGrid, s: f64) -> Result<P34Residual> {
    let h = grid.step();
    let st = p34_state(grid, s)?;
    let nb: Vec<P34State> = [-2.0, -1.0, 1.0, 2.0]
        .iter()
        .map(|k| p34_state(grid, s + k * h))
        .collect::<Result<_>>()?;
    let res3 = (&st.a1ppp - &third_order_rhs(&st, true)).norm_max();
    let da2 = five_point(&nb[0].a2, &nb[1].a2, &nb[2].a2, &nb[3].a2, h);
    let res2 = (&da2 - &(&st.a1p * &st.a1)).norm_max();
    let d4 = five_point(&nb[0].a1ppp, &nb[1].a1ppp, &nb[2].a1ppp, &nb[3].a1ppp, h);
    let res4 = (&d4 - &fourth_order_rhs(&st)).norm_max();
    Ok(P34Residual { res3, res2, res4 })
}

/// `B(λ) = B₃λ³ + B₁λ + B₋₁/λ` and `V_D(λ) = V₂λ² + V₀`.
#[derive(Clone, Debug)]
pub struct LaxB {
    pub b3: CMat,
    pub b1: CMat,
    pub bm1: CMat,
    pub vd2: CMat,
    pub vd0: CMat,
}

impl LaxB {
    pub fn b_at(&self, l: Complex64) -> CMat {
        &(&self.b3.scale(l * l * l) + &self.b1.scale(l)) + &self.bm1.scale(l.inv())
    }

    pub fn vd_at(&self, l: Complex64) -> CMat {
        &self.vd2.scale(l * l) + &self.vd0
    }
}

pub fn lax_b(st: &P34State) -> LaxB {
    let r = st.a1.dim();
    let id = CMat::identity(r);
    let z = CMat::zeros(r);
    let s = st.s_matrix();
    let (a1, a1p, a1pp, a2) = (&st.a1, &st.a1p, &st.a1pp, &st.a2);
    let comm = a1.commutator(&s).scale(I);
    let b3 = id.scale_re(0.5).kron2(&pauli::SIGMA_MINUS);
    let b1 = CMat::blocks2(&z, &id.scale_re(-0.5), &(&s + &a1p.scale(-0.5 * I)), &z);
    let m11 = &comm + &a1pp.scale(-0.25 * I);
    let m12 = &(-&s) + &a1p.scale(-0.5 * I);
    let m21 = &(&a1.scale(2.0 * I) + &a2.commutator(&s).scale_re(2.0))
        + &(&(&s.commutator(a1) * a1).scale_re(2.0) + &(a1p * a1p).scale_re(-0.5));
    let m22 = &(&id + &comm) + &a1pp.scale(0.25 * I);
    let bm1 = CMat::blocks2(&m11, &m12, &m21, &m22);
    let vd2 = id.kron2(&pauli::SIGMA_MINUS);
    let vd0 = CMat::blocks2(&z, &(-&id), &a1p.scale(-2.0 * I), &z);
    LaxB { b3, b1, bm1, vd2, vd0 }
}

/// `max_λ ‖∂_λV_D - DB + [V_D, B]‖` with `DB` by central differences of step
/// `fd_step`.
pub fn zero_curvature_residual_p34(grid: &HmGrid, s: f64, lambdas: &[Complex64], fd_step: f64) -> Result<f64> {
    if let Some(l) = lambdas.iter().find(|l| l.norm() < 0.1) {
        return Err(Error::Domain(format!("spectral sample {l} too close to the pole of B at 0")));
    }
    let here = lax_b(&p34_state(grid, s)?);
    let up = lax_b(&p34_state(grid, s + fd_step)?);
    let down = lax_b(&p34_state(grid, s - fd_step)?);
    let mut worst = 0.0f64;
    for &l in lambdas {
        let db = (&up.b_at(l) - &down.b_at(l)).scale_re(0.5 / fd_step);
        let dv = here.vd2.scale(2.0 * l);
        let res = &(&dv - &db) + &here.vd_at(l).commutator(&here.b_at(l));
        worst = worst.max(res.norm_max());
    }
    Ok(worst)
}
