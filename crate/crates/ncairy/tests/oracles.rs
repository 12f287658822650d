//! Reference values computed independently with mpmath at 30 significant
//! digits (Airy functions directly; determinants by a 96-node
//! Gauss-Legendre Nystrom discretization on [0, 14]).

#![allow(clippy::excessive_precision)]

use ncairy::airy::airy_eval;
use ncairy::kernels::{CouplingMatrix, ShiftVector};
use ncairy::tw::{det_airy, det_airy_sq, scalar_f1, scalar_f2, GapQuery, Route};
use ncairy::{CMat, Complex64};

/// `(x, Ai, Ai', Bi, Bi')`
const AIRY: [(f64, f64, f64, f64, f64); 10] = [
    (-15.0, 0.27821749087082892953, 0.27237420430864202083, -0.069126594531010061186, 1.0764297530843747867),
    (-7.3, 0.33577037051514730896, -0.18009580448329322444, 0.070874113769896312257, 0.90998427043632467362),
    (-3.0, -0.37881429367765807435, 0.31458376921659881365, -0.19828962637492654322, -0.67561122268525853767),
    (-1.0, 0.5355608832923521188, -0.010160567116645209395, 0.10399738949694461189, 0.59237562642279235082),
    (0.0, 0.35502805388781723926, -0.25881940379280679841, 0.61492662744600073515, 0.44828835735382635791),
    (0.7, 0.1891624003981500733, -0.19985119158228047517, 0.97332865587816593668, 0.65440591917214003029),
    (2.5, 0.015725923380470489995, -0.026250881035903230365, 6.4816607384605786081, 9.4214233173343017556),
    (5.0, 0.00010834442813607441735, -0.000247413890868462476, 657.79204417117118244, 1435.8190802179825187),
    (11.0, 4.2262758649603595913e-12, -1.4111441246628517335e-11, 11355782530.430476285, 37400168196.926977015),
    (20.0, 1.6916728686705403136e-27, -7.5863916257483549605e-27, 2.1037650496511038145e+25, 9.3818393361339643491e+25),
];

/// `(x, F2(x), F1(x))`
const TW: [(f64, f64, f64); 6] = [
    (-3.0, 0.080319552939334548081, 0.069600118867369888436),
    (-2.0, 0.41322414250512255469, 0.27432019790921785767),
    (-1.0, 0.80721424199928529248, 0.58378989551973228346),
    (0.0, 0.96937282835526266835, 0.83190806620295192746),
    (1.0, 0.99750543814938924938, 0.9514212369115507348),
    (2.0, 0.99988755369830917293, 0.98959757108482699207),
];

/// `C = [[0.5, 0.2], [-0.3, 0.4]]`, `s = (-0.2, 0.3)`: `det(Id - Ai)`, `det(Id + Ai)`, `det(Id - Ai^2)`.
const MATRIX: (f64, f64, f64) = (0.84758771840700167392, 1.1614266741682743785, 0.98441098485531982896);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn airy_values() {
    for (x, ai, aip, bi, bip) in AIRY {
        let a = airy_eval(x).unwrap();
        for (got, want) in [(a.ai, ai), (a.aip, aip), (a.bi, bi), (a.bip, bip)] {
            assert!(rel(got, want) < 1e-12, "x = {x}: {got} vs {want}");
        }
    }
}

#[test]
fn tracy_widom_values() {
    for (x, f2, f1) in TW {
        let (g2, g1) = (scalar_f2(x).unwrap(), scalar_f1(x).unwrap());
        assert!((g2 - f2).abs() < 1e-9, "F2({x}) = {g2}, want {f2}");
        assert!((g1 - f1).abs() < 1e-9, "F1({x}) = {g1}, want {f1}");
    }
}

#[test]
fn nonsymmetric_matrix_determinants() {
    let c = CouplingMatrix::new(CMat::from_fn(2, |j, k| {
        Complex64::new([[0.5, 0.2], [-0.3, 0.4]][j][k], 0.0)
    }))
    .unwrap();
    let q = GapQuery::new(ShiftVector::new(vec![-0.2, 0.3]).unwrap(), c, Route::Both, 1e-10).unwrap();
    let sq = det_airy_sq(&q).unwrap();
    let minus = det_airy(&q, -1.0).unwrap();
    let plus = det_airy(&q, 1.0).unwrap();
    for (g, want) in [(minus, MATRIX.0), (plus, MATRIX.1), (sq, MATRIX.2)] {
        let n = g.nystrom.unwrap().value;
        let p = g.painleve.unwrap();
        assert!((n - want).norm() < 1e-10, "{n} vs {want}");
        assert!((p - want).norm() < 1e-8, "{p} vs {want}");
    }
}
