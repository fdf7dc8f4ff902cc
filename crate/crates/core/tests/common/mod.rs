#![allow(dead_code)]

use nanopull::conductivity::{ConductivityOptions, ResponseRecord};
use nanopull::green_functions::GreenParams;
use nanopull::model::{CntSystem, Excitation, RawParams};
use num_complex::Complex64;

/// CNT(12,0), μ = 0.413 eV, L = 100 nm, θ₀ = 30°, E₀ = 10⁷ V/m, at T = 0.
pub fn fig3(frequency_thz: f64) -> (CntSystem, Excitation) {
    let raw = RawParams {
        temperature_k: 0.0,
        frequency_thz,
        ..RawParams::default()
    };
    let b = raw.build().expect("reference parameters are valid");
    (b.system, b.excitation)
}

pub fn record(system: &CntSystem, excitation: &Excitation, local: Option<f64>) -> ResponseRecord {
    let opts = ConductivityOptions {
        local_factor: local,
        ..ConductivityOptions::default()
    };
    ResponseRecord::evaluate(excitation.omega, system, &opts).expect("response evaluates")
}

pub fn green(system: &CntSystem, excitation: &Excitation, local: Option<f64>) -> GreenParams {
    let r = record(system, excitation, local);
    GreenParams::new(r.alpha_tilde, system.half_length, excitation.k_free, system.radius)
}

pub fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn rel_f(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Deterministic uniform samples in [lo, hi) (splitmix64).
pub struct Samples(u64);

impl Samples {
    pub fn new(seed: u64) -> Self {
        Samples(seed)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        lo + (hi - lo) * ((z >> 11) as f64 / (1u64 << 53) as f64)
    }
}
