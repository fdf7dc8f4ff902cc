//! Nonlocal axial surface conductivity of a metallic zigzag tube.
//!
//! The response is split into interband and intraband parts. For each part
//! the module returns the local conductivity σ(ω) and the nonlocality factor
//! ξ(ω) multiplying −∂²E/∂z² in the constitutive law, and from their sums the
//! nonlocality wavenumber α̃ = √(σ/ξ).
//!
//! Time dependence is e^{−iωt} throughout, so a passive response has
//! Re σ ≥ 0 and a lossless Drude response has Im σ > 0.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NanoError, Result};
use crate::model::{CntSystem, E_CHARGE, HBAR, K_BOLTZMANN};
use crate::quad;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which side of the absorption threshold ħω = 2μ a frequency lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// ħω < 2μ: interband transitions are Pauli-blocked.
    Intraband,
    /// ħω > 2μ: collisionless interband absorption is open.
    Interband,
    /// Within the configured exclusion band around ħω = 2μ.
    Threshold,
}

/// Evaluation route for the interband conductivity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterMethod {
    /// Zero-temperature closed form.
    ClosedZeroT,
    /// Finite-temperature energy integral.
    Quadrature,
}

/// Evaluation route for the nonlocality factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiMethod {
    /// Closed zero-temperature interband form plus the analytic intraband term.
    ClosedS12,
    /// ½ v_F² ∂²σ/∂ω² by Richardson-extrapolated central differences.
    DerivativeEq6,
}

/// Knobs shared by every conductivity evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConductivityOptions {
    /// Relative damping δ in the ω → ω(1 + iδ) prescription.
    pub delta_rel: f64,
    /// Half-width of the threshold band relative to 2μ.
    pub threshold_band: f64,
    /// Forced interband route; `None` picks by temperature.
    pub inter_method: Option<InterMethod>,
    /// Route for ξ.
    pub xi_method: XiMethod,
    /// Local-limit multiplier Λ applied to α̃, if any.
    pub local_factor: Option<f64>,
}

impl Default for ConductivityOptions {
    fn default() -> Self {
        ConductivityOptions {
            delta_rel: 1e-6,
            threshold_band: 1e-3,
            inter_method: None,
            xi_method: XiMethod::ClosedS12,
            local_factor: None,
        }
    }
}

impl ConductivityOptions {
    /// Interband route actually used for `system`.
    pub fn resolved_inter_method(&self, system: &CntSystem) -> InterMethod {
        self.inter_method.unwrap_or(if system.zero_temperature_regime() {
            InterMethod::ClosedZeroT
        } else {
            InterMethod::Quadrature
        })
    }
}

/// Complete local and nonlocal response at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub omega: f64,
    pub sigma_inter: Complex64,
    pub sigma_intra: Complex64,
    pub sigma_total: Complex64,
    pub xi_inter: Complex64,
    pub xi_intra: Complex64,
    pub xi_total: Complex64,
    /// Effective α̃ after any local-limit multiplier.
    pub alpha_tilde: Complex64,
    /// Λ applied to α̃ (1 when no override is active).
    pub local_factor: f64,
    pub regime: Regime,
}

impl ResponseRecord {
    /// Evaluate the full record.
    pub fn evaluate(omega: f64, system: &CntSystem, opts: &ConductivityOptions) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(NanoError::InvalidParameter("omega must be positive".into()));
        }
        let method = opts.resolved_inter_method(system);
        let sigma_inter = sigma_inter(omega, system, method, opts)?;
        let sigma_intra = sigma_intra(omega, system)?;
        let sigma_total = sigma_inter + sigma_intra;
        let (xi_inter, xi_intra) = match opts.xi_method {
            XiMethod::ClosedS12 => (
                xi_inter_closed(omega, system, opts),
                xi_intra_closed(omega, system)?,
            ),
            XiMethod::DerivativeEq6 => {
                let total = xi_derivative(omega, system, opts, 0.02)?;
                let intra = xi_intra_closed(omega, system)?;
                (total - intra, intra)
            }
        };
        let xi_total = xi_inter + xi_intra;
        let lambda = opts.local_factor.unwrap_or(1.0);
        let alpha_tilde = alpha_tilde(sigma_total, xi_total)? * lambda;
        Ok(ResponseRecord {
            omega,
            sigma_inter,
            sigma_intra,
            sigma_total,
            xi_inter,
            xi_intra,
            xi_total,
            alpha_tilde,
            local_factor: lambda,
            regime: regime(omega, system.mu_chem, opts.threshold_band),
        })
    }

    /// α̃ before the local-limit multiplier.
    pub fn alpha_physical(&self) -> Complex64 {
        self.alpha_tilde / self.local_factor
    }
}

/// Classify ω relative to the absorption threshold.
pub fn regime(omega: f64, mu: f64, band: f64) -> Regime {
    let x = HBAR * omega;
    if (x - 2.0 * mu).abs() < band * 2.0 * mu {
        Regime::Threshold
    } else if x < 2.0 * mu {
        Regime::Intraband
    } else {
        Regime::Interband
    }
}

/// Fermi–Dirac occupation; a step with value ½ at ε = μ when T = 0.
pub fn fermi(eps: f64, mu: f64, temp: f64) -> f64 {
    if temp <= 0.0 {
        return if eps < mu {
            1.0
        } else if eps > mu {
            0.0
        } else {
            0.5
        };
    }
    let x = (eps - mu) / (K_BOLTZMANN * temp);
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// Interband conductivity in siemens.
pub fn sigma_inter(
    omega: f64,
    system: &CntSystem,
    method: InterMethod,
    opts: &ConductivityOptions,
) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(NanoError::InvalidParameter("omega must be positive".into()));
    }
    Ok(match method {
        InterMethod::ClosedZeroT => sigma_inter_closed(omega, system, opts),
        InterMethod::Quadrature => sigma_inter_quadrature(omega, system),
    })
}

/// Zero-temperature closed form
/// σ = e²v_F/(2πħωR)·[H(ħω − 2μ) − (i/π)·ln|4μ²/(4μ² − (ħω)²)|].
///
/// Outside the threshold band the real-frequency expression is used as is,
/// so the onset is an exact step. Inside the band ω is replaced by ω(1 + iδ)
/// and the principal complex logarithm supplies both parts.
fn sigma_inter_closed(omega: f64, system: &CntSystem, opts: &ConductivityOptions) -> Complex64 {
    let mu = system.mu_chem;
    let four_mu2 = 4.0 * mu * mu;
    let pref_num = E_CHARGE * E_CHARGE * system.v_fermi / (2.0 * PI * HBAR * system.radius);
    if regime(omega, mu, opts.threshold_band) == Regime::Threshold {
        let wc = Complex64::new(omega, omega * opts.delta_rel);
        let x = wc * HBAR;
        let ratio = Complex64::new(four_mu2, 0.0) / (four_mu2 - x * x);
        return pref_num / wc * (-I / PI) * ratio.ln();
    }
    let x = HBAR * omega;
    let step = if x > 2.0 * mu { 1.0 } else { 0.0 };
    let log = (four_mu2 / (four_mu2 - x * x)).abs().ln();
    Complex64::new(step, -log / PI) * (pref_num / omega)
}

/// F(−ε) − F(ε) in overflow-safe form sinh(a)/(cosh a + cosh b).
fn occupation_difference(eps: f64, mu: f64, temp: f64) -> f64 {
    if temp <= 0.0 {
        return fermi(-eps, mu, 0.0) - fermi(eps, mu, 0.0);
    }
    let kt = K_BOLTZMANN * temp;
    let a = eps / kt;
    let b = (mu / kt).abs();
    let e2a = (-2.0 * a).exp();
    (1.0 - e2a) / (1.0 + e2a + (b - a).exp() + (-b - a).exp())
}

/// Finite-temperature interband conductivity from the energy integral
/// σ = (i e² ħω v_F/(π²R))·∫₀^∞ [F(−ε) − F(ε)]/[ħ²(ω + i0)² − 4ε²] dε/ε.
///
/// The pole at ε₀ = ħω/2 is split into a principal value, done by
/// subtracting the residue on the symmetric interval [0, 2ε₀], and the
/// delta-function term −iπ G(ε₀)/(4ħω).
pub fn sigma_inter_quadrature(omega: f64, system: &CntSystem) -> Complex64 {
    let mu = system.mu_chem;
    let t = system.temperature;
    let x = HBAR * omega;
    let e0 = 0.5 * x;
    let kt = K_BOLTZMANN * t;
    let g = |eps: f64| -> f64 {
        if eps <= 0.0 {
            // Small-ε limit of [F(−ε) − F(ε)]/ε.
            if t <= 0.0 {
                return 0.0;
            }
            return 1.0 / (kt * (1.0 + (mu / kt).cosh()));
        }
        occupation_difference(eps, mu, t) / eps
    };
    let h = |eps: f64| g(eps) / (x + 2.0 * eps);
    let h0 = h(e0);

    // Breakpoints around the thermal step and the pole.
    let width = (8.0 * kt).max(1e-6 * mu);
    let mut inner = vec![0.0, 2.0 * e0, e0];
    for p in [mu - width, mu, mu + width] {
        if p > 0.0 && p < 2.0 * e0 {
            inner.push(p);
        }
    }
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    let tol = 1e-13 * h0.abs().max(g(mu.max(e0)) / x).max(1e-300);
    let mut f_in = |eps: f64| {
        let d = eps - e0;
        if d.abs() < 1e-14 * e0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new((h(eps) - h0) / d, 0.0)
        }
    };
    let pv_inner = quad::adaptive_breaks(&inner, tol, &mut f_in).re;

    // Outer part ε ∈ [2ε₀, ∞) with ε = 2ε₀/s; the thermal step may sit here.
    let mut outer_breaks = vec![0.0, 1.0];
    for p in [mu - width, mu, mu + width] {
        if p > 2.0 * e0 {
            outer_breaks.push(2.0 * e0 / p);
        }
    }
    outer_breaks.sort_by(f64::total_cmp);
    outer_breaks.dedup();
    let mut f_out = |s: f64| {
        if s <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let eps = 2.0 * e0 / s;
        Complex64::new(h(eps) / (eps - e0) * 2.0 * e0 / (s * s), 0.0)
    };
    let pv_outer = quad::adaptive_breaks(&outer_breaks, tol, &mut f_out).re;

    let pv = -0.5 * (pv_inner + pv_outer);
    let im_part = -PI * g(e0) / (4.0 * x);
    let integral = Complex64::new(pv, im_part);
    let pref = E_CHARGE * E_CHARGE * HBAR * omega * system.v_fermi / (PI * PI * system.radius);
    I * pref * integral
}

/// Intraband weight −∫ sign(ε)·∂F/∂ε dε = tanh(μ/2k_BT).
fn intraband_weight(system: &CntSystem) -> Result<f64> {
    if system.temperature <= 0.0 {
        if system.mu_chem == 0.0 {
            return Err(NanoError::DegenerateDistribution);
        }
        return Ok(system.mu_chem.signum());
    }
    Ok((system.mu_chem / (2.0 * system.thermal_energy())).tanh())
}

/// Intraband (Drude) conductivity i·e²v_F·tanh(μ/2k_BT)/(π²ħωR).
pub fn sigma_intra(omega: f64, system: &CntSystem) -> Result<Complex64> {
    if !(omega > 0.0) {
        return Err(NanoError::InvalidParameter("omega must be positive".into()));
    }
    let w = intraband_weight(system)?;
    Ok(I * (E_CHARGE * E_CHARGE * system.v_fermi * w / (PI * PI * HBAR * omega * system.radius)))
}

/// Intraband conductivity with the thermal weight integrated numerically.
/// Used to validate the closed form.
pub fn sigma_intra_quadrature(omega: f64, system: &CntSystem) -> Result<Complex64> {
    if system.temperature <= 0.0 {
        return sigma_intra(omega, system);
    }
    let kt = system.thermal_energy();
    let mu = system.mu_chem;
    // −∂F/∂ε = 1/(4kT cosh²((ε−μ)/2kT)); integrate in y = (ε − μ)/kT.
    let y0 = -mu / kt;
    let f = |y: f64| {
        let s = if y > y0 { 1.0 } else if y < y0 { -1.0 } else { 0.0 };
        let c = (0.5 * y).cosh();
        s / (4.0 * c * c)
    };
    let lo = (y0 - 80.0).clamp(-700.0, -80.0);
    let mut breaks = vec![lo, 80.0];
    // The peak of ∂F/∂ε sits at y = 0 and is a few units wide.
    breaks.extend([y0, -40.0, -10.0, 0.0, 10.0, 40.0].into_iter().filter(|&b| b > lo && b < 80.0));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let w = quad::adaptive_breaks(&breaks, 1e-14, &mut |y| Complex64::new(f(y), 0.0)).re;
    Ok(I * (E_CHARGE * E_CHARGE * system.v_fermi * w / (PI * PI * HBAR * omega * system.radius)))
}

/// Closed interband nonlocality factor
/// ξ = i·16σ₀μv_F²/(πħω³)·{1 − (ħω)⁴/[(ħω)² − 4μ²]²}.
pub fn xi_inter_closed(omega: f64, system: &CntSystem, opts: &ConductivityOptions) -> Complex64 {
    let mu = system.mu_chem;
    let wc = if regime(omega, mu, opts.threshold_band) == Regime::Threshold {
        Complex64::new(omega, omega * opts.delta_rel)
    } else {
        Complex64::new(omega, 0.0)
    };
    let x = wc * HBAR;
    let x2 = x * x;
    let brace = 1.0 - x2 * x2 / ((x2 - 4.0 * mu * mu) * (x2 - 4.0 * mu * mu));
    I * 16.0 * system.sigma0 * mu * system.v_fermi.powi(2) / (PI * HBAR * wc * wc * wc) * brace
}

/// Intraband nonlocality factor v_F²σ_intra/ω², the second frequency
/// derivative of the 1/ω Drude term taken analytically.
pub fn xi_intra_closed(omega: f64, system: &CntSystem) -> Result<Complex64> {
    Ok(sigma_intra(omega, system)? * (system.v_fermi.powi(2) / (omega * omega)))
}

/// Nonlocality factor by either route. For `ClosedS12` the interband and
/// intraband terms are summed; for `DerivativeEq6` the total conductivity
/// is differentiated numerically.
pub fn xi(omega: f64, system: &CntSystem, method: XiMethod, opts: &ConductivityOptions) -> Result<Complex64> {
    match method {
        XiMethod::ClosedS12 => Ok(xi_inter_closed(omega, system, opts) + xi_intra_closed(omega, system)?),
        XiMethod::DerivativeEq6 => xi_derivative(omega, system, opts, 0.02),
    }
}

/// One central second difference of σ_total with step `h_rel·ω`.
pub fn xi_second_difference(
    omega: f64,
    system: &CntSystem,
    opts: &ConductivityOptions,
    h_rel: f64,
) -> Result<Complex64> {
    let method = opts.resolved_inter_method(system);
    let s = |w: f64| -> Result<Complex64> { Ok(sigma_inter(w, system, method, opts)? + sigma_intra(w, system)?) };
    let h = h_rel * omega;
    let d2 = (s(omega + h)? - s(omega)? * 2.0 + s(omega - h)?) / (h * h);
    Ok(d2 * (0.5 * system.v_fermi.powi(2)))
}

/// ½v_F²∂²σ/∂ω² with a three-level Richardson table starting at step
/// `h_rel·ω`.
pub fn xi_derivative(omega: f64, system: &CntSystem, opts: &ConductivityOptions, h_rel: f64) -> Result<Complex64> {
    let d: Vec<Complex64> = (0..3)
        .map(|l| xi_second_difference(omega, system, opts, h_rel / f64::powi(2.0, l)))
        .collect::<Result<_>>()?;
    let r1 = [(d[1] * 4.0 - d[0]) / 3.0, (d[2] * 4.0 - d[1]) / 3.0];
    Ok((r1[1] * 16.0 - r1[0]) / 15.0)
}

/// Principal square root of σ/ξ, flipped so that Im α̃ ≥ 0.
pub fn alpha_tilde(sigma_total: Complex64, xi_total: Complex64) -> Result<Complex64> {
    if xi_total.norm() == 0.0 {
        return Err(NanoError::DivisionByZero(
            "nonlocality factor is zero; use the local-limit path".into(),
        ));
    }
    let a = (sigma_total / xi_total).sqrt();
    Ok(if a.im < 0.0 { -a } else { a })
}

/// Re σ(ω) reconstructed from Im σ on a finite frequency window through the
/// Kramers–Kronig relation Re σ(ω) = (2/π)·PV∫ ω′ Im σ(ω′)/(ω′² − ω²) dω′.
///
/// `im_sigma` is sampled by adaptive quadrature between `w_lo` and `w_hi`
/// on log-spaced panels; the pole is removed by subtracting its residue.
pub fn kramers_kronig_real<F: Fn(f64) -> f64>(omega: f64, w_lo: f64, w_hi: f64, im_sigma: F, breaks: &[f64]) -> f64 {
    let g = |w: f64| w * im_sigma(w) / (w + omega);
    let g0 = g(omega);
    let mut pts: Vec<f64> = vec![w_lo, w_hi];
    pts.extend(breaks.iter().copied().filter(|&b| b > w_lo && b < w_hi));
    // Log-spaced panels keep wide windows resolved.
    let mut w = w_lo * 1.25;
    while w < w_hi {
        pts.push(w);
        w *= 1.25;
    }
    if omega > w_lo && omega < w_hi {
        pts.push(omega);
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let scale = g0.abs().max(1e-300);
    let pv = quad::adaptive_breaks(&pts, 1e-11 * scale * (w_hi - w_lo), &mut |w| {
        let d = w - omega;
        if d.abs() < 1e-13 * omega {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new((g(w) - g0) / d, 0.0)
        }
    })
    .re;
    let log_term = if omega > w_lo && omega < w_hi {
        g0 * ((w_hi - omega) / (omega - w_lo)).ln()
    } else {
        g0 * ((w_hi - omega) / (w_lo - omega)).abs().ln()
    };
    2.0 / PI * (pv + log_term)
}
