mod common;

use common::{fig3, green, record};
use nanopull::conductivity::{ConductivityOptions, ResponseRecord};
use nanopull::current_solver::{incident_field, rhs_b, RhsMethod};
use nanopull::green_functions::*;
use nanopull::model::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn lossy_params(re: f64, im: f64) -> GreenParams {
    let (sys, exc) = fig3(200.0);
    let mut p = green(&sys, &exc, None);
    p.alpha_tilde = Complex64::new(re, im) / p.half_length;
    p
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn green_function_is_symmetric(u in -1.0..1.0f64, v in -1.0..1.0f64, re in 0.2..40.0f64, im in 0.0..5.0f64) {
        let p = lossy_params(re, im);
        prop_assume!(check_resonance(p.alpha_tilde, p.half_length).is_ok());
        let l = p.half_length;
        let a = g_sturm(u * l, v * l, &p, GreenForm::Closed).unwrap();
        let b = g_sturm(v * l, u * l, &p, GreenForm::Closed).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(b.norm()) + 1e-300);
    }

    #[test]
    fn green_function_vanishes_at_the_ends(v in -1.0..1.0f64, re in 0.2..40.0f64, im in 0.0..5.0f64) {
        let p = lossy_params(re, im);
        prop_assume!(check_resonance(p.alpha_tilde, p.half_length).is_ok());
        let l = p.half_length;
        let scale = g_sturm(v * l, v * l, &p, GreenForm::Closed).unwrap().norm().max(l / re);
        for end in [-l, l] {
            prop_assert!(g_sturm(end, v * l, &p, GreenForm::Closed).unwrap().norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn green_function_is_even_in_alpha(u in -1.0..1.0f64, v in -1.0..1.0f64, re in 0.2..40.0f64, im in 0.0..5.0f64) {
        let p = lossy_params(re, im);
        prop_assume!(check_resonance(p.alpha_tilde, p.half_length).is_ok());
        let q = GreenParams { alpha_tilde: -p.alpha_tilde, ..p };
        let l = p.half_length;
        let a = g_sturm(u * l, v * l, &p, GreenForm::Closed).unwrap();
        let b = g_sturm(u * l, v * l, &q, GreenForm::Closed).unwrap();
        prop_assert!((a - b).norm() <= 1e-10 * a.norm() + 1e-300);
    }

    #[test]
    fn profile_symmetry(u in -1.0..1.0f64, h in -50.0..50.0f64, re in 0.2..20.0f64, im in 0.0..3.0f64) {
        let p = lossy_params(re, im);
        let l = p.half_length;
        let hc = Complex64::new(h / l, 0.0);
        let a = f_profile(hc, u * l, &p);
        let b = f_profile(-hc, -u * l, &p);
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn conductivity_is_passive(f_thz in 20.0..400.0f64, t in prop_oneof![Just(0.0), 1.0..400.0f64], mu in 0.1..0.6f64) {
        let sys = CntSystem::new(12, 100e-9, ev_to_joule(mu), t, V_FERMI_DEFAULT, Sigma0Model::default().value()).unwrap().0;
        let omega = 2.0 * std::f64::consts::PI * f_thz * 1e12;
        let r = ResponseRecord::evaluate(omega, &sys, &ConductivityOptions::default()).unwrap();
        prop_assert!(r.sigma_total.re >= 0.0, "Re σ = {}", r.sigma_total.re);
        prop_assert!(r.alpha_tilde.im >= 0.0);
    }

    #[test]
    fn incident_field_has_constant_modulus(z in -1.0..1.0f64, theta in 0.01..1.5707f64, f_thz in 50.0..300.0f64) {
        let (exc, _) = Excitation::new(1e7, theta, f_thz * 1e12).unwrap();
        let v = incident_field(z * 100e-9, &exc);
        prop_assert!((v.norm() - 1e7 * theta.sin()).abs() <= 1e-8 * 1e7);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rhs_is_linear_in_amplitude(z in -0.99..0.99f64, scale in 0.1..100.0f64, f_thz in 150.0..250.0f64) {
        let (sys, exc) = fig3(f_thz);
        let r = record(&sys, &exc, None);
        let zz = z * sys.half_length;
        let a = rhs_b(zz, &r, &sys, &exc, RhsMethod::Closed).unwrap();
        let b = rhs_b(zz, &r, &sys, &exc.with_amplitude(scale * exc.e0_amplitude), RhsMethod::Closed).unwrap();
        prop_assert!((b - a * scale).norm() <= 1e-12 * b.norm() + 1e-300);
    }
}
