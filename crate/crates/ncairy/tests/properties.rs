use ncairy::airy::{ai, airy_eval, airy_scaled};
use ncairy::fredholm::{nystrom_det, DetResult, QuadratureRule};
use ncairy::kernels::{matrix_airy_kernel, matrix_airy_sq_kernel, AiryKernel, AirySqKernel, CouplingMatrix, ShiftVector};
use ncairy::ncp2::{hm_solve, HmOptions};
use ncairy::Error;
use ncairy::verify::with_sigma_max;
use ncairy::{CMat, Complex64};
use proptest::prelude::*;

const NODES: usize = 40;

fn coupling(r: usize, re: &[f64], im: &[f64], sigma: f64, hermitean: bool) -> CouplingMatrix {
    let m = CMat::from_fn(r, |j, k| {
        if hermitean {
            let (a, b) = (j.min(k), j.max(k));
            let z = Complex64::new(re[a * r + b], if a == b { 0.0 } else { im[a * r + b] });
            if j <= k {
                z
            } else {
                z.conj()
            }
        } else {
            Complex64::new(re[j * r + k], im[j * r + k])
        }
    });
    with_sigma_max(m, sigma).unwrap()
}

fn det(kernel: &dyn ncairy::kernels::BlockKernel, z: f64, s: &ShiftVector) -> Complex64 {
    nystrom_det(kernel, Complex64::new(z, 0.0), &QuadratureRule::airy(NODES, s).unwrap(), false)
        .unwrap()
        .value
}

fn case() -> impl Strategy<Value = (ShiftVector, Vec<f64>, Vec<f64>, f64)> {
    (1usize..=2).prop_flat_map(|r| {
        (
            prop::collection::vec(-0.5f64..1.0, r),
            prop::collection::vec(-1.0f64..1.0, r * r),
            prop::collection::vec(-1.0f64..1.0, r * r),
            0.1f64..0.95,
        )
            .prop_map(|(s, re, im, sigma)| (ShiftVector::new(s).unwrap(), re, im, sigma))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn wronskian(x in -20.0f64..30.0) {
        let a = airy_eval(x).unwrap();
        let w = a.ai * a.bip - a.aip * a.bi;
        prop_assert!((w * std::f64::consts::PI - 1.0).abs() < 1e-10, "x = {x}: W = {w}");
    }

    #[test]
    fn airy_ode(x in -10.0f64..10.0) {
        let h = 1e-3;
        let f = |t: f64| ai(t).unwrap();
        let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
        prop_assert!((d2 - x * f(x)).abs() <= 1e-6);
    }

    #[test]
    fn scaled_matches_unscaled(x in 0.0f64..40.0) {
        let (a, s) = (airy_eval(x).unwrap(), airy_scaled(x).unwrap());
        let (em, ep) = ((-s.zeta).exp(), s.zeta.exp());
        for (u, v) in [(a.ai, s.ai * em), (a.aip, s.aip * em), (a.bi, s.bi * ep), (a.bip, s.bip * ep)] {
            prop_assert!((u - v).abs() <= 1e-12 * u.abs());
        }
    }

    #[test]
    fn non_finite_is_domain_error(x in prop::sample::select(vec![f64::NAN, f64::INFINITY, f64::NEG_INFINITY])) {
        prop_assert!(matches!(airy_eval(x), Err(Error::Domain(_))));
        prop_assert!(matches!(airy_scaled(x), Err(Error::Domain(_))));
    }

    #[test]
    fn hermitean_sq_kernel_is_self_adjoint(x in 0.0f64..8.0, y in 0.0f64..8.0, (s, re, im, sigma) in case()) {
        let c = coupling(s.len(), &re, &im, sigma, true);
        let a = matrix_airy_sq_kernel(x, y, &s, &c).unwrap();
        let b = matrix_airy_sq_kernel(y, x, &s, &c).unwrap().adjoint();
        prop_assert!((&a - &b).norm_max() <= 1e-14 * a.norm_max().max(1e-300));
    }

    #[test]
    fn kernel_swaps_arguments(x in 0.0f64..10.0, y in 0.0f64..10.0, (s, re, im, sigma) in case()) {
        let c = coupling(s.len(), &re, &im, sigma, false);
        let a = matrix_airy_kernel(x, y, &s, &c).unwrap();
        let b = matrix_airy_kernel(y, x, &s, &c).unwrap();
        prop_assert!((&a - &b).norm_max() == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn factorization((s, re, im, sigma) in case()) {
        let c = coupling(s.len(), &re, &im, sigma, false);
        let a = AiryKernel::new(s.clone(), c.clone()).unwrap();
        let lhs = det(&a, -1.0, &s) * det(&a, 1.0, &s);
        let rhs = det(&AirySqKernel::new(s.clone(), c).unwrap(), -1.0, &s);
        prop_assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm(), "{lhs} vs {rhs}");
    }

    #[test]
    fn coupling_sign_flip((s, re, im, sigma) in case()) {
        let c = coupling(s.len(), &re, &im, sigma, false);
        let plus = det(&AiryKernel::new(s.clone(), c.clone()).unwrap(), 1.0, &s);
        let minus = det(&AiryKernel::new(s.clone(), c.negated()).unwrap(), -1.0, &s);
        prop_assert!((plus - minus).norm() < 1e-13);
        let sq = det(&AirySqKernel::new(s.clone(), c.clone()).unwrap(), -1.0, &s);
        let sq_neg = det(&AirySqKernel::new(s.clone(), c.negated()).unwrap(), -1.0, &s);
        prop_assert!((sq - sq_neg).norm() < 1e-13);
    }

    #[test]
    fn hm_solution_is_odd_in_coupling((s, re, im, sigma) in case()) {
        let c = coupling(s.len(), &re, &im, sigma, true);
        let opts = HmOptions::default();
        let g = hm_solve(&c, &s.offsets(), 0.0, &opts).unwrap();
        let n = hm_solve(&c.negated(), &s.offsets(), 0.0, &opts).unwrap();
        for (a, b) in g.beta1_samples().iter().zip(n.beta1_samples()) {
            prop_assert!((a + b).norm_max() <= 1e-12);
        }
    }

    #[test]
    fn gap_probability_in_unit_interval((s, re, im, sigma) in case()) {
        let c = coupling(s.len(), &re, &im, sigma, true);
        let d = det(&AirySqKernel::new(s.clone(), c).unwrap(), -1.0, &s);
        prop_assert!(d.im.abs() < 1e-12);
        prop_assert!(d.re > 0.0 && d.re <= 1.0 + 1e-12, "{d}");
    }

    #[test]
    fn det_result_json_round_trip(re in -2.0f64..2.0, im in -2.0f64..2.0, n in 2usize..500, e in 0.0f64..1e-3) {
        let d = DetResult { value: Complex64::new(re, im), log_abs: Complex64::new(re, im).norm().ln(), nodes_used: n, est_error: e, converged: e < 1e-6 };
        let back: DetResult = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn barycentric_round_trip(s in prop::collection::vec(-5.0f64..5.0, 1..5)) {
        let v = ShiftVector::new(s.clone()).unwrap();
        let w = ShiftVector::from_barycentric(v.barycenter(), &v.offsets()).unwrap();
        for (a, b) in w.values().iter().zip(&s) {
            prop_assert!((a - b).abs() < 1e-14);
        }
        prop_assert!(v.offsets().iter().sum::<f64>().abs() < 1e-13);
    }
}
