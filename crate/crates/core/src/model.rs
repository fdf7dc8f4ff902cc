//! Physical constants, unit conversion and validated parameter sets.
//!
//! Everything downstream of this module works in SI units. Electron-volts,
//! nanometres, terahertz and degrees only appear in [`RawParams`], the
//! configuration-facing record, and are converted in [`RawParams::build`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{NanoError, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, H/m, tied to `EPS0` and `C_LIGHT` so that c²ε₀μ₀ = 1.
pub const MU0: f64 = 1.0 / (EPS0 * C_LIGHT * C_LIGHT);
/// Boltzmann constant, J/K.
pub const K_BOLTZMANN: f64 = 1.380_649e-23;
/// Default Fermi velocity, m/s (tight-binding estimate 3γ₀b/2ħ).
pub const V_FERMI_DEFAULT: f64 = 9.71e5;
/// Carbon–carbon bond length, m.
pub const CC_BOND: f64 = 0.142e-9;

/// Bundle of the constants above, handy for serialising into metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub e_charge: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub c_light: f64,
    pub k_boltzmann: f64,
    pub sigma0: f64,
    pub v_fermi_default: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values with the default σ₀ = e²/4ħ.
    pub fn codata() -> Self {
        Self {
            hbar: HBAR,
            e_charge: E_CHARGE,
            eps0: EPS0,
            mu0: MU0,
            c_light: C_LIGHT,
            k_boltzmann: K_BOLTZMANN,
            sigma0: Sigma0Model::default().value(),
            v_fermi_default: V_FERMI_DEFAULT,
        }
    }
}

/// Convention used for the quantum of conductivity σ₀.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sigma0Model {
    /// e²/4ħ, the usual graphene normalisation.
    #[default]
    E2Over4Hbar,
    /// e²/h.
    E2OverH,
    /// 2e²/h, the spin-degenerate conductance quantum.
    TwoE2OverH,
}

impl Sigma0Model {
    /// σ₀ in siemens.
    pub fn value(self) -> f64 {
        let e2 = E_CHARGE * E_CHARGE;
        match self {
            Sigma0Model::E2Over4Hbar => e2 / (4.0 * HBAR),
            Sigma0Model::E2OverH => e2 / (2.0 * PI * HBAR),
            Sigma0Model::TwoE2OverH => e2 / (PI * HBAR),
        }
    }
}

/// Convert electron-volts to joules.
pub fn ev_to_joule(ev: f64) -> f64 {
    ev * E_CHARGE
}

/// Convert joules to electron-volts.
pub fn joule_to_ev(j: f64) -> f64 {
    j / E_CHARGE
}

/// Photon energy ħω in joules.
pub fn photon_energy(omega: f64) -> f64 {
    HBAR * omega
}

/// Radius of a zigzag (m,0) tube, √3·b·m/2π.
pub fn radius_from_index(m_index: i64) -> Result<f64> {
    if m_index <= 0 {
        return Err(NanoError::InvalidParameter(format!(
            "zigzag index must be positive, got {m_index}"
        )));
    }
    Ok(3f64.sqrt() * CC_BOND * m_index as f64 / (2.0 * PI))
}

/// Soft violations of the model's validity window. They never change numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ValidityWarning {
    /// Tube radius of 30 nm or more.
    RadiusTooLarge { radius_m: f64 },
    /// Physical length 2L outside (10 nm, 1 mm).
    LengthOutsideWindow { length_m: f64 },
    /// Chemical potential of 0.5 eV or more.
    ChemicalPotentialTooLarge { mu_ev: f64 },
    /// Frequency of 300 THz or more.
    FrequencyTooHigh { frequency_hz: f64 },
}

/// Geometry, electronic state and environment of one nanotube. SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CntSystem {
    pub m_index: u32,
    /// Tube radius R, m.
    pub radius: f64,
    /// Half of the tube length, L, m.
    pub half_length: f64,
    /// Electrochemical potential μ, J.
    pub mu_chem: f64,
    /// Temperature, K.
    pub temperature: f64,
    /// Fermi velocity, m/s.
    pub v_fermi: f64,
    /// Quantum of conductivity σ₀ used by the nonlocality factor, S.
    pub sigma0: f64,
}

impl CntSystem {
    /// Validate and build a system. Structural faults are errors, validity
    /// window violations come back as warnings.
    pub fn new(
        m_index: i64,
        half_length: f64,
        mu_chem: f64,
        temperature: f64,
        v_fermi: f64,
        sigma0: f64,
    ) -> Result<(Self, Vec<ValidityWarning>)> {
        for (name, v) in [
            ("half_length", half_length),
            ("mu_chem", mu_chem),
            ("temperature", temperature),
            ("v_fermi", v_fermi),
            ("sigma0", sigma0),
        ] {
            if !v.is_finite() {
                return Err(NanoError::InvalidParameter(format!("{name} is not finite")));
            }
        }
        let radius = radius_from_index(m_index)?;
        if m_index % 3 != 0 {
            return Err(NanoError::ModelAssumption(format!(
                "zigzag index {m_index} is not a multiple of 3, tube is not metallic"
            )));
        }
        if half_length <= 0.0 || mu_chem <= 0.0 || v_fermi <= 0.0 || sigma0 <= 0.0 {
            return Err(NanoError::InvalidParameter(
                "half_length, mu_chem, v_fermi and sigma0 must be positive".into(),
            ));
        }
        if temperature < 0.0 {
            return Err(NanoError::InvalidParameter("temperature must be >= 0".into()));
        }
        let mut warnings = Vec::new();
        if radius >= 30e-9 {
            warnings.push(ValidityWarning::RadiusTooLarge { radius_m: radius });
        }
        let length = 2.0 * half_length;
        if length <= 10e-9 || length >= 1e-3 {
            warnings.push(ValidityWarning::LengthOutsideWindow { length_m: length });
        }
        if mu_chem >= ev_to_joule(0.5) {
            warnings.push(ValidityWarning::ChemicalPotentialTooLarge {
                mu_ev: joule_to_ev(mu_chem),
            });
        }
        let sys = CntSystem {
            m_index: m_index as u32,
            radius,
            half_length,
            mu_chem,
            temperature,
            v_fermi,
            sigma0,
        };
        Ok((sys, warnings))
    }

    /// Copy with a different half-length.
    pub fn with_half_length(mut self, half_length: f64) -> Self {
        self.half_length = half_length;
        self
    }

    /// Copy with a different chemical potential.
    pub fn with_mu(mut self, mu_chem: f64) -> Self {
        self.mu_chem = mu_chem;
        self
    }

    /// Thermal energy k_B·T, J.
    pub fn thermal_energy(&self) -> f64 {
        K_BOLTZMANN * self.temperature
    }

    /// True when the zero-temperature closed forms are selected by default
    /// (k_B·T < μ/50).
    pub fn zero_temperature_regime(&self) -> bool {
        self.thermal_energy() < self.mu_chem / 50.0
    }
}

/// Incident plane wave.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    /// Field amplitude E₀, V/m.
    pub e0_amplitude: f64,
    /// Angle between the wave vector and the tube axis, rad.
    pub theta0: f64,
    /// Frequency, Hz.
    pub frequency: f64,
    /// Angular frequency, rad/s.
    pub omega: f64,
    /// Free-space wavenumber ω/c, 1/m.
    pub k_free: f64,
}

impl Excitation {
    /// Validate and build an excitation.
    pub fn new(e0_amplitude: f64, theta0: f64, frequency: f64) -> Result<(Self, Vec<ValidityWarning>)> {
        if !(e0_amplitude.is_finite() && theta0.is_finite() && frequency.is_finite()) {
            return Err(NanoError::InvalidParameter("excitation fields must be finite".into()));
        }
        if e0_amplitude < 0.0 {
            return Err(NanoError::InvalidParameter("E0 must be >= 0".into()));
        }
        if !(theta0 > 0.0 && theta0 <= PI / 2.0 + 1e-15) {
            return Err(NanoError::InvalidParameter(format!(
                "theta0 must lie in (0, pi/2], got {theta0}"
            )));
        }
        if frequency <= 0.0 {
            return Err(NanoError::InvalidParameter("frequency must be positive".into()));
        }
        let mut warnings = Vec::new();
        if frequency >= 300e12 {
            warnings.push(ValidityWarning::FrequencyTooHigh { frequency_hz: frequency });
        }
        let omega = 2.0 * PI * frequency;
        Ok((
            Excitation {
                e0_amplitude,
                theta0,
                frequency,
                omega,
                k_free: omega / C_LIGHT,
            },
            warnings,
        ))
    }

    /// Same wave at another frequency. Panics only on non-positive input.
    pub fn at_frequency(&self, frequency: f64) -> Self {
        assert!(frequency > 0.0, "frequency must be positive");
        let omega = 2.0 * PI * frequency;
        Excitation {
            frequency,
            omega,
            k_free: omega / C_LIGHT,
            ..*self
        }
    }

    /// Same wave with a different amplitude.
    pub fn with_amplitude(mut self, e0: f64) -> Self {
        self.e0_amplitude = e0;
        self
    }

    /// Same wave at another incidence angle. The angle is not range-checked
    /// here so that symmetry studies can use θ₀ > π/2.
    pub fn with_theta(mut self, theta0: f64) -> Self {
        self.theta0 = theta0;
        self
    }
}

fn default_m_index() -> i64 {
    12
}
fn default_half_length_nm() -> f64 {
    100.0
}
fn default_mu_ev() -> f64 {
    0.413
}
fn default_temperature_k() -> f64 {
    300.0
}
fn default_e0() -> f64 {
    1e7
}
fn default_theta0_deg() -> f64 {
    30.0
}
fn default_frequency_thz() -> f64 {
    200.0
}
fn default_v_fermi() -> f64 {
    V_FERMI_DEFAULT
}

/// Configuration-facing parameter record in engineering units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    #[serde(default = "default_m_index")]
    pub m_index: i64,
    #[serde(default = "default_half_length_nm")]
    pub half_length_nm: f64,
    #[serde(default = "default_mu_ev")]
    pub mu_ev: f64,
    #[serde(default = "default_temperature_k")]
    pub temperature_k: f64,
    #[serde(default = "default_e0")]
    pub e0_v_per_m: f64,
    #[serde(default = "default_theta0_deg")]
    pub theta0_deg: f64,
    #[serde(default = "default_frequency_thz")]
    pub frequency_thz: f64,
    #[serde(default = "default_v_fermi")]
    pub v_fermi_m_per_s: f64,
    #[serde(default)]
    pub sigma0_model: Sigma0Model,
}

impl Default for RawParams {
    fn default() -> Self {
        RawParams {
            m_index: default_m_index(),
            half_length_nm: default_half_length_nm(),
            mu_ev: default_mu_ev(),
            temperature_k: default_temperature_k(),
            e0_v_per_m: default_e0(),
            theta0_deg: default_theta0_deg(),
            frequency_thz: default_frequency_thz(),
            v_fermi_m_per_s: default_v_fermi(),
            sigma0_model: Sigma0Model::default(),
        }
    }
}

/// Validated SI parameter set plus any validity warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltParams {
    pub system: CntSystem,
    pub excitation: Excitation,
    pub warnings: Vec<ValidityWarning>,
}

impl RawParams {
    /// Convert to SI and validate.
    pub fn build(&self) -> Result<BuiltParams> {
        let (system, mut warnings) = CntSystem::new(
            self.m_index,
            self.half_length_nm * 1e-9,
            ev_to_joule(self.mu_ev),
            self.temperature_k,
            self.v_fermi_m_per_s,
            self.sigma0_model.value(),
        )?;
        let (excitation, w2) = Excitation::new(
            self.e0_v_per_m,
            self.theta0_deg.to_radians(),
            self.frequency_thz * 1e12,
        )?;
        warnings.extend(w2);
        Ok(BuiltParams {
            system,
            excitation,
            warnings,
        })
    }
}
