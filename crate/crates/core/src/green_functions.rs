//! Green functions of the nanotube problem.
//!
//! * [`g_sturm`]: the one-dimensional Sturm–Liouville Green function of
//!   `∂²/∂z² + α̃²` on `[−L, L]` with Dirichlet ends, normalised so that the
//!   local limit is `g → −δ(z − z′)/α̃²`.
//! * [`g_fourier`]: its Fourier image in the second argument.
//! * [`big_g`]: the free-space Helmholtz kernel averaged over the tube
//!   circumference, in direct (azimuthal quadrature) and spectral
//!   (Hankel–Bessel) forms.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{NanoError, Result};
use crate::quad;
use crate::special::{ci, ellip_ke, h0j0};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Inputs shared by the Green-function evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenParams {
    /// Nonlocality wavenumber α̃, 1/m.
    pub alpha_tilde: Complex64,
    /// Half-length L, m.
    pub half_length: f64,
    /// Free-space wavenumber k, 1/m.
    pub k_free: f64,
    /// Tube radius R, m.
    pub radius: f64,
    /// Number of eigenmodes kept by the modal series.
    pub modal_cutoff: usize,
    /// Gauss–Legendre order for the smooth part of the azimuthal integral.
    pub azimuthal_quadrature_order: usize,
    /// Spectral truncation `h_max`; `None` means 40/R.
    pub spectral_h_max: Option<f64>,
}

impl GreenParams {
    /// Parameters with default resolution settings.
    pub fn new(alpha_tilde: Complex64, half_length: f64, k_free: f64, radius: f64) -> Self {
        GreenParams {
            alpha_tilde,
            half_length,
            k_free,
            radius,
            modal_cutoff: 64,
            azimuthal_quadrature_order: 64,
            spectral_h_max: None,
        }
    }

    /// Reject settings below the documented minimum resolution.
    pub fn validate(&self) -> Result<()> {
        if self.modal_cutoff < 64 {
            return Err(NanoError::InvalidParameter("modal_cutoff must be >= 64".into()));
        }
        if self.azimuthal_quadrature_order < 32 {
            return Err(NanoError::InvalidParameter(
                "azimuthal_quadrature_order must be >= 32".into(),
            ));
        }
        if !(self.half_length > 0.0 && self.radius > 0.0 && self.k_free >= 0.0) {
            return Err(NanoError::InvalidParameter("non-positive geometry".into()));
        }
        Ok(())
    }

    fn h_max(&self) -> f64 {
        self.spectral_h_max.unwrap_or(40.0 / self.radius)
    }
}

/// Closed form or truncated eigenmode series for `g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenForm {
    Closed,
    Modal,
}

/// Direct azimuthal quadrature or spectral integral for `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BigGForm {
    Direct,
    Spectral,
}

#[inline]
fn expi(a: Complex64, t: f64) -> Complex64 {
    (I * a * t).exp()
}

/// Fail when `sin(2α̃L)` is numerically zero.
pub fn check_resonance(alpha: Complex64, half_length: f64) -> Result<()> {
    let al = alpha * half_length;
    if (2.0 * al).im.abs() > 40.0 {
        return Ok(());
    }
    if (2.0 * al).sin().norm() < 1e-12 * al.norm() {
        return Err(NanoError::InternalResonance { omega: 0.0, alpha_l: al });
    }
    Ok(())
}

/// `sin(α̃x)/sin(2α̃L)` for `|x| ≤ 2L`, written with decaying exponentials
/// so that it stays finite for large Im α̃.
pub fn sin_ratio(alpha: Complex64, x: f64, half_length: f64) -> Complex64 {
    let l2 = 2.0 * half_length;
    (expi(alpha, x + l2) - expi(alpha, l2 - x)) / (expi(alpha, 2.0 * l2) - 1.0)
}

/// Closed Green function without the resonance check.
///
/// With d = |z − z′|, p = min(z, z′) + L, q = L − max(z, z′) and
/// E(x) = e^{iα̃x}:
/// g = (i/2α̃)·[E(d) − E(d + 2p) − E(d + 2q) + E(4L − d)]/(1 − E(4L)).
/// Every exponent has a non-negative real coefficient of Im α̃, so the
/// expression neither overflows nor cancels catastrophically.
pub fn g_closed_unchecked(z: f64, zp: f64, alpha: Complex64, half_length: f64) -> Complex64 {
    let l = half_length;
    let d = (z - zp).abs();
    let p = z.min(zp) + l;
    let q = l - z.max(zp);
    let num = expi(alpha, d) - expi(alpha, d + 2.0 * p) - expi(alpha, d + 2.0 * q) + expi(alpha, 4.0 * l - d);
    I / (2.0 * alpha) * num / (1.0 - expi(alpha, 4.0 * l))
}

/// Sturm–Liouville Green function g(z, z′).
pub fn g_sturm(z: f64, zp: f64, params: &GreenParams, form: GreenForm) -> Result<Complex64> {
    let l = params.half_length;
    if z.abs() > l * (1.0 + 1e-12) || zp.abs() > l * (1.0 + 1e-12) {
        return Err(NanoError::InvalidParameter("g_sturm arguments must lie in [-L, L]".into()));
    }
    let a = params.alpha_tilde;
    check_resonance(a, l)?;
    match form {
        GreenForm::Closed => Ok(g_closed_unchecked(z, zp, a, l)),
        GreenForm::Modal => Ok(g_modal(z, zp, a, l, params.modal_cutoff)),
    }
}

/// Eigenmode series Σ u_n(z)u_n(z′)/(k_n² − α̃²) with
/// u_n = √(1/L)·sin(nπ(z + L)/2L) and k_n = nπ/2L.
fn g_modal(z: f64, zp: f64, alpha: Complex64, l: f64, cutoff: usize) -> Complex64 {
    let a2 = alpha * alpha;
    let mut acc = Complex64::new(0.0, 0.0);
    // Compensated summation: the series converges like 1/n².
    let mut comp = Complex64::new(0.0, 0.0);
    for n in 1..=cutoff {
        let kn = n as f64 * PI / (2.0 * l);
        let un = (kn * (z + l)).sin() * (kn * (zp + l)).sin() / l;
        let term = un / (kn * kn - a2) - comp;
        let t = acc + term;
        comp = (t - acc) - term;
        acc = t;
    }
    acc
}

/// The profile F(h, z) = e^{−ihz}sin 2α̃L + e^{ihL}sin α̃(z − L) − e^{−ihL}sin α̃(z + L)
/// for complex h, evaluated literally.
pub fn f_profile(h: Complex64, z: f64, params: &GreenParams) -> Complex64 {
    let a = params.alpha_tilde;
    let l = params.half_length;
    (-I * h * z).exp() * (2.0 * a * l).sin() + (I * h * l).exp() * (a * (z - l)).sin()
        - (-I * h * l).exp() * (a * (z + l)).sin()
}

/// F(h, z)/sin(2α̃L) and its first three h-derivatives.
fn f_over_sin_derivs(h: Complex64, z: f64, alpha: Complex64, l: f64) -> [Complex64; 4] {
    let rm = sin_ratio(alpha, z - l, l);
    let rp = sin_ratio(alpha, z + l, l);
    let e_z = (-I * h * z).exp();
    let e_p = (I * h * l).exp();
    let e_m = (-I * h * l).exp();
    let mut out = [Complex64::new(0.0, 0.0); 4];
    let one = Complex64::new(1.0, 0.0);
    let (mut cz, mut cp, mut cm) = (one, one, one);
    for o in out.iter_mut() {
        *o = cz * e_z + cp * e_p * rm - cm * e_m * rp;
        cz *= -I * z;
        cp *= I * l;
        cm *= -I * l;
    }
    out
}

/// Fourier image ĝ(h, z) = ∫ g(z, z′) e^{−ihz′} dz′ = −F(h, z)/((α̃² − h²) sin 2α̃L).
///
/// Close to the removable poles h = ±α̃ (|h ∓ α̃|·L < 10⁻⁴) a three-term
/// Taylor expansion of F about the pole replaces the quotient.
pub fn g_fourier(h: f64, z: f64, params: &GreenParams) -> Result<Complex64> {
    let a = params.alpha_tilde;
    let l = params.half_length;
    if z.abs() > l * (1.0 + 1e-12) {
        return Err(NanoError::InvalidParameter("g_fourier needs |z| <= L".into()));
    }
    check_resonance(a, l)?;
    Ok(g_fourier_unchecked(h, z, a, l))
}

pub(crate) fn g_fourier_unchecked(h: f64, z: f64, a: Complex64, l: f64) -> Complex64 {
    let hc = Complex64::new(h, 0.0);
    for sgn in [1.0, -1.0] {
        let pole = a * sgn;
        let eps = hc - pole;
        if eps.norm() * l < 1e-4 {
            // F(pole) = 0, so F/(h − pole) is the Taylor series shifted by one.
            let d = f_over_sin_derivs(pole, z, a, l);
            let series = d[1] + d[2] * eps * 0.5 + d[3] * eps * eps / 6.0;
            // −F/((a − h)(a + h)) = F/((h − pole)(h + pole)) for pole = ±a.
            return series / (hc + pole);
        }
    }
    let d0 = f_over_sin_derivs(hc, z, a, l)[0];
    -d0 / (a * a - hc * hc)
}

/// φ₀(x) = (e^{ix} − 1)/x = Σ_{n≥1} iⁿxⁿ⁻¹/n! and its first two
/// derivatives, summed as power series for small x.
fn phi0_series(x: f64) -> [Complex64; 3] {
    let mut out = [Complex64::new(0.0, 0.0); 3];
    let mut ipow = I;
    let mut fact = 1.0;
    for n in 1..=14i32 {
        fact *= n as f64;
        let nf = n as f64;
        out[0] += ipow * x.powi(n - 1) / fact;
        if n >= 2 {
            out[1] += ipow * (nf - 1.0) * x.powi(n - 2) / fact;
        }
        if n >= 3 {
            out[2] += ipow * (nf - 1.0) * (nf - 2.0) * x.powi(n - 3) / fact;
        }
        ipow *= I;
    }
    out
}

/// f(ρ) = (e^{ikρ} − 1)/ρ together with f′(ρ) and f″(ρ).
fn regular_part(k: f64, rho: f64) -> [Complex64; 3] {
    let x = k * rho;
    if x < 0.05 {
        let s = phi0_series(x);
        return [s[0] * k, s[1] * (k * k), s[2] * (k * k * k)];
    }
    let e = (I * x).exp();
    let f = (e - 1.0) / rho;
    let f1 = e * (I * k / rho - 1.0 / (rho * rho)) + 1.0 / (rho * rho);
    let f2 = e * (-k * k / rho - 2.0 * I * k / (rho * rho) + 2.0 / rho.powi(3)) - 2.0 / rho.powi(3);
    [f, f1, f2]
}

/// Azimuthal kernel G(Δ) = R∫₀^{2π} e^{ikρ}/ρ dφ evaluated on `r`
/// (`r ≥ R`), with ρ² = (r − R)² + 4rR·sin²(φ/2) + Δ².
pub fn big_g(delta_z: f64, params: &GreenParams, r: f64, form: BigGForm) -> Result<Complex64> {
    let rr = params.radius;
    if r < rr * (1.0 - 1e-12) {
        return Err(NanoError::InvalidParameter("big_g needs r >= radius".into()));
    }
    let r = r.max(rr);
    match form {
        BigGForm::Direct => big_g_direct(delta_z, params, r),
        BigGForm::Spectral => big_g_spectral(delta_z, params, r),
    }
}

fn big_g_direct(delta: f64, p: &GreenParams, r: f64) -> Result<Complex64> {
    let rr = p.radius;
    let d2 = delta * delta;
    let sum2 = (r + rr) * (r + rr) + d2;
    let p1 = ((r - rr) * (r - rr) + d2) / sum2;
    if p1 <= 0.0 {
        return Err(NanoError::SingularPoint(
            "G diverges logarithmically at zero separation on the tube surface".into(),
        ));
    }
    let m = 4.0 * r * rr / sum2;
    let (kk, _) = ellip_ke(m, p1);
    let stat = 4.0 * rr * kk / sum2.sqrt();
    let rule = quad::gauss_legendre(p.azimuthal_quadrature_order);
    let dyn_part = quad::fixed(&rule, 0.0, PI, |phi| {
        let s = (0.5 * phi).sin();
        let rho = ((r - rr) * (r - rr) + 4.0 * r * rr * s * s + d2).sqrt();
        regular_part(p.k_free, rho)[0]
    });
    Ok(stat + dyn_part * (2.0 * rr))
}

/// G(Δ) on the tube surface for Δ ≠ 0.
pub fn big_g_direct_surface(delta: f64, params: &GreenParams) -> Complex64 {
    big_g_direct(delta, params, params.radius).expect("non-zero separation on the surface")
}

/// First or second Δ-derivative of G on the tube surface, from analytic
/// differentiation of the azimuthal integrand.
pub fn big_g_derivative(delta: f64, params: &GreenParams, order: u8) -> Result<Complex64> {
    let rr = params.radius;
    let d2 = delta * delta;
    if delta == 0.0 {
        return Err(NanoError::SingularPoint("G derivatives diverge at zero separation".into()));
    }
    let sum2 = 4.0 * rr * rr + d2;
    let p1 = d2 / sum2;
    let m = 4.0 * rr * rr / sum2;
    let (kk, ee) = ellip_ke(m, p1);
    // I3 = ∫dφ/ρ³, I5 = ∫dφ/ρ⁵ over a full period.
    let i3 = 4.0 / sum2.powf(1.5) * ee / p1;
    let stat = match order {
        1 => -rr * delta * i3,
        2 => {
            let i5 = 4.0 / sum2.powf(2.5) * (2.0 * (2.0 - m) * ee - p1 * kk) / (3.0 * p1 * p1);
            -rr * i3 + 3.0 * rr * d2 * i5
        }
        _ => return Err(NanoError::InvalidParameter("derivative order must be 1 or 2".into())),
    };
    let rule = quad::gauss_legendre(params.azimuthal_quadrature_order);
    let k = params.k_free;
    let dyn_part = quad::fixed(&rule, 0.0, PI, |phi| {
        let s = (0.5 * phi).sin();
        let rho = (4.0 * rr * rr * s * s + d2).sqrt();
        let f = regular_part(k, rho);
        if order == 1 {
            f[1] * (delta / rho)
        } else {
            let c = d2 / (rho * rho);
            f[1] / rho * (1.0 - c) + f[2] * c
        }
    });
    Ok(Complex64::new(stat, 0.0) + dyn_part * (2.0 * rr))
}

/// Antiderivative P(x) = ∫₀^x G(t) dt on the tube surface (odd in x).
pub fn big_g_antiderivative(x: f64, params: &GreenParams) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let ax = x.abs();
    let rr = params.radius;
    let near = ax.min(4.0 * rr);
    // t = near·u² absorbs the logarithm at t = 0.
    let rule = quad::gauss_legendre(40);
    let g = |t: f64| big_g_direct(t, params, rr).expect("t > 0 is regular");
    let mut acc = quad::fixed(&rule, 0.0, 1.0, |u| {
        if u <= 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            g(near * u * u) * (2.0 * near * u)
        }
    });
    let rule16 = quad::gauss_legendre(16);
    let mut a = near;
    while a < ax {
        let b = (2.0 * a).min(ax);
        acc += quad::fixed(&rule16, a, b, g);
        a = b;
    }
    acc * x.signum()
}

/// Nodes and weights of a real-line quadrature over h ∈ [0, h_max] adapted
/// to the spectral integrands: a log singularity at h = k, oscillation up to
/// frequency `u_max`, and optional extra breakpoints.
pub(crate) fn spectral_nodes(k: f64, h_max: f64, u_max: f64, extra: &[f64]) -> Vec<(f64, f64)> {
    let mut nodes = Vec::new();
    let r16 = quad::gauss_legendre(16);
    let r24 = quad::gauss_legendre(24);
    // [0, k/2] plain, [k/2, k] with h = k − (k/2)w³, [k, 2k] with h = k + k w³.
    for &(x, w) in r16.iter() {
        let h = 0.25 * k * (x + 1.0);
        nodes.push((h, 0.25 * k * w));
    }
    for &(x, w) in r24.iter() {
        let wv = 0.5 * (x + 1.0);
        nodes.push((k - 0.5 * k * wv.powi(3), 0.5 * w * 1.5 * k * wv * wv));
        nodes.push((k + k * wv.powi(3), 0.5 * w * 3.0 * k * wv * wv));
    }
    let mut breaks: Vec<f64> = extra.iter().copied().filter(|&b| b > 2.0 * k && b < h_max).collect();
    breaks.push(h_max);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let max_width = if u_max > 0.0 { PI / u_max } else { f64::INFINITY };
    let r8 = quad::gauss_legendre(8);
    let mut a = 2.0 * k;
    for b in breaks {
        while a < b {
            let width = max_width.min(0.5 * a).min(b - a);
            let bb = if b - (a + width) < 1e-9 * width { b } else { a + width };
            for &(x, w) in r8.iter() {
                nodes.push((0.5 * (a + bb) + 0.5 * (bb - a) * x, 0.5 * (bb - a) * w));
            }
            a = bb;
        }
    }
    nodes
}

/// ∫_H^∞ cos(hu)/h dh.
pub(crate) fn tail_cos1(h: f64, u: f64) -> f64 {
    -ci(h * u.abs())
}

/// ∫_H^∞ cos(hu)/h³ dh.
pub(crate) fn tail_cos3(h: f64, u: f64) -> f64 {
    let hu = h * u.abs();
    (h * u).cos() / (2.0 * h * h) - 0.5 * u * ((h * u).sin() / h - u * ci(hu))
}

/// ∫_H^∞ sin(hβ)/h² dh.
pub(crate) fn tail_sin2(h: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 0.0;
    }
    (h * beta).sin() / h - beta * ci(h * beta.abs())
}

fn big_g_spectral(delta: f64, p: &GreenParams, r: f64) -> Result<Complex64> {
    let rr = p.radius;
    let k = p.k_free;
    let on_surface = (r - rr).abs() <= 1e-12 * rr;
    if delta == 0.0 && on_surface {
        return Err(NanoError::SingularPoint(
            "spectral G diverges at zero separation on the tube surface".into(),
        ));
    }
    let mut h_max = p.h_max();
    if !on_surface {
        // K₀(γr)I₀(γR) decays like e^{−γ(r − R)}; stop once that is negligible.
        h_max = h_max.max(40.0 / (r - rr)).min(1e4 / rr);
    }
    let nodes = spectral_nodes(k, h_max, delta.abs(), &[]);
    let mut acc = Complex64::new(0.0, 0.0);
    for &(h, w) in &nodes {
        acc += h0j0(k, h, r, rr) * ((h * delta).cos() * w);
    }
    if on_surface {
        let c1 = -I / (PI * rr);
        let c3 = c1 * (0.5 * k * k + 1.0 / (8.0 * rr * rr));
        acc += c1 * tail_cos1(h_max, delta) + c3 * tail_cos3(h_max, delta);
        // Estimate the neglected O(h⁻⁵) term relative to the result.
        let est = (1.0 / (h_max * rr)).powi(4) * (1.0 / (PI * rr)) / (h_max * delta.abs()).max(1.0) / acc.norm().max(1e-300);
        if est > 1e-5 {
            return Err(NanoError::Truncation {
                estimate: est,
                suggested_h_max: 2.0 * h_max,
            });
        }
    }
    // Integrand is even in h.
    Ok(I * PI * rr * 2.0 * acc)
}
