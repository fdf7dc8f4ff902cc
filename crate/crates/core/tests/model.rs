use nanopull::error::NanoError;
use nanopull::model::*;

#[test]
fn radius_matches_zigzag_geometry() {
    let r12 = radius_from_index(12).unwrap();
    assert!((r12 * 1e9 - 0.4697).abs() < 1e-4, "R(12) = {r12}");
    assert_eq!(radius_from_index(24).unwrap(), 2.0 * r12);
    assert!((radius_from_index(3).unwrap() * 1e9 - 0.1174).abs() < 1e-4);
    assert!(matches!(radius_from_index(0), Err(NanoError::InvalidParameter(_))));
    assert!(matches!(radius_from_index(-3), Err(NanoError::InvalidParameter(_))));
}

#[test]
fn constants_are_consistent() {
    let c = PhysicalConstants::codata();
    let prod = c.c_light * c.c_light * c.eps0 * c.mu0;
    assert!((prod - 1.0).abs() < 1e-12);
    for v in [c.hbar, c.e_charge, c.eps0, c.mu0, c.c_light, c.k_boltzmann, c.sigma0, c.v_fermi_default] {
        assert!(v > 0.0);
    }
}

#[test]
fn reference_system_is_valid() {
    let raw = RawParams::default();
    let b = raw.build().unwrap();
    assert!(b.warnings.is_empty());
    assert_eq!(b.system.m_index, 12);
    assert!((b.system.half_length - 100e-9).abs() < 1e-20);
    assert!((joule_to_ev(b.system.mu_chem) - 0.413).abs() < 1e-12);
    assert_eq!(b.system.temperature, 300.0);
}

#[test]
fn non_metallic_index_is_rejected() {
    let raw = RawParams { m_index: 13, ..RawParams::default() };
    assert!(matches!(raw.build(), Err(NanoError::ModelAssumption(_))));
    let raw = RawParams { half_length_nm: -1.0, ..RawParams::default() };
    assert!(matches!(raw.build(), Err(NanoError::InvalidParameter(_))));
    let raw = RawParams { temperature_k: -1.0, ..RawParams::default() };
    assert!(matches!(raw.build(), Err(NanoError::InvalidParameter(_))));
}

#[test]
fn validity_window_only_warns() {
    let hot = RawParams { frequency_thz: 400.0, ..RawParams::default() };
    let b = hot.build().unwrap();
    assert!(b
        .warnings
        .iter()
        .any(|w| matches!(w, ValidityWarning::FrequencyTooHigh { .. })));

    let big_mu = RawParams { mu_ev: 0.6, half_length_nm: 2.0, ..RawParams::default() };
    let b = big_mu.build().unwrap();
    assert_eq!(b.warnings.len(), 2);
}

#[test]
fn warnings_do_not_change_numbers() {
    let a = RawParams { frequency_thz: 400.0, ..RawParams::default() }.build().unwrap();
    let (exc, _) = Excitation::new(1e7, 30f64.to_radians(), 400e12).unwrap();
    assert_eq!(a.excitation, exc);
}

#[test]
fn excitation_invariants() {
    let (e, w) = Excitation::new(1e7, 0.5, 200e12).unwrap();
    assert!(w.is_empty());
    assert_eq!(e.omega, 2.0 * std::f64::consts::PI * 200e12);
    assert_eq!(e.k_free, e.omega / C_LIGHT);
    assert!(Excitation::new(1e7, 0.0, 200e12).is_err());
    assert!(Excitation::new(1e7, 1.6, 200e12).is_err());
    assert!(Excitation::new(1e7, std::f64::consts::FRAC_PI_2, 200e12).is_ok());
    assert!(Excitation::new(1e7, 0.5, 0.0).is_err());
}

#[test]
fn photon_energy_and_conversions() {
    let e = joule_to_ev(photon_energy(2.0 * std::f64::consts::PI * 200e12));
    assert!((e - 0.8271).abs() < 5e-5, "{e}");
    assert_eq!(photon_energy(0.0), 0.0);
    let x = 0.413;
    assert!((joule_to_ev(ev_to_joule(x)) - x).abs() < 1e-15);
}

#[test]
fn sigma0_conventions() {
    let q = E_CHARGE * E_CHARGE / HBAR;
    assert_eq!(Sigma0Model::E2Over4Hbar.value(), q / 4.0);
    assert!((Sigma0Model::TwoE2OverH.value() / Sigma0Model::E2OverH.value() - 2.0).abs() < 1e-15);
    assert_eq!(Sigma0Model::default(), Sigma0Model::E2Over4Hbar);
}

#[test]
fn config_document_round_trips() {
    let text = r#"{"m_index": 9, "mu_ev": 0.3, "sigma0_model": "e2_over_h"}"#;
    let raw: RawParams = serde_json::from_str(text).unwrap();
    assert_eq!(raw.m_index, 9);
    assert_eq!(raw.sigma0_model, Sigma0Model::E2OverH);
    assert_eq!(raw.half_length_nm, 100.0);
    let back: RawParams = serde_json::from_str(&serde_json::to_string(&raw).unwrap()).unwrap();
    assert_eq!(back, raw);
    assert!(serde_json::from_str::<RawParams>(r#"{"bogus": 1}"#).is_err());
}
