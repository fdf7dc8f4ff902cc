//! Axial optical force on the tube.
//!
//! The time-averaged stress tensor integrated over a cylinder hugging the
//! tube surface reduces, for an axially symmetric current sheet, to
//!
//! ```text
//! F_z = (iπR/ω)∫(∂E_z*/∂z·j_z − ∂E_z/∂z·j_z*) dz = −(2πR/ω)∫Im(∂E_z*/∂z·j_z) dz.
//! ```
//!
//! The full tensor is never integrated directly: its diagonal terms are not
//! integrable for a local surface model. Three evaluations are offered:
//! the grid solution of the current equation, the closed form obtained from
//! the first-order current j ≈ −B, and the homogeneous local-limit density.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conductivity::{Regime, ResponseRecord};
use crate::current_solver::{
    first_derivative, incident_field, rhs_b, CurrentSolution, RhsMethod, SignConvention, SolverConfig,
};
use crate::error::{NanoError, Result};
use crate::green_functions::check_resonance;
use crate::model::{CntSystem, Excitation, C_LIGHT};
use crate::quad;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// How a force value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceMethod {
    Numeric,
    AnalyticEq15,
    LocalEq16,
}

impl ForceMethod {
    /// Column suffix used in tabular output.
    pub fn short_name(self) -> &'static str {
        match self {
            ForceMethod::Numeric => "numeric",
            ForceMethod::AnalyticEq15 => "analytic",
            ForceMethod::LocalEq16 => "local",
        }
    }
}

impl std::str::FromStr for ForceMethod {
    type Err = NanoError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(ForceMethod::Numeric),
            "analytic" | "analytic_eq15" => Ok(ForceMethod::AnalyticEq15),
            "local" | "local_eq16" => Ok(ForceMethod::LocalEq16),
            other => Err(NanoError::Config(format!("unknown force method '{other}'"))),
        }
    }
}

/// Input echo stored with every force value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametersEcho {
    pub system: CntSystem,
    pub excitation: Excitation,
    /// Local-limit multiplier in effect (1 when inactive).
    pub local_factor: f64,
}

/// One force evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceResult {
    /// Axial force, N.
    pub f_z: f64,
    pub method: ForceMethod,
    pub regime: Regime,
    pub is_pulling: bool,
    pub parameters_echo: ParametersEcho,
}

impl ForceResult {
    fn new(f_z: f64, method: ForceMethod, record: &ResponseRecord, system: &CntSystem, excitation: &Excitation) -> Self {
        ForceResult {
            f_z,
            method,
            regime: record.regime,
            is_pulling: f_z < 0.0,
            parameters_echo: ParametersEcho {
                system: *system,
                excitation: *excitation,
                local_factor: record.local_factor,
            },
        }
    }

    /// Force in femtonewtons.
    pub fn f_z_fn(&self) -> f64 {
        self.f_z * 1e15
    }
}

/// Prefactor A = 4πE₀²R sin²θ₀ cos θ₀ / c.
pub fn prefactor(system: &CntSystem, excitation: &Excitation) -> f64 {
    let (s, c) = excitation.theta0.sin_cos();
    4.0 * PI * excitation.e0_amplitude.powi(2) * system.radius * s * s * c / C_LIGHT
}

fn trapezoid(values: &[f64], delta: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    delta * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// Force from a solved current, trapezoidal rule on the collocation grid.
pub fn force_numeric(solution: &CurrentSolution, system: &CntSystem, excitation: &Excitation) -> ForceResult {
    let delta = solution.delta();
    let de = first_derivative(&solution.e_z_total, delta);
    let integrand: Vec<f64> = de
        .iter()
        .zip(&solution.j_z)
        .map(|(d, j)| (d.conj() * j).im)
        .collect();
    let f = -2.0 * PI * system.radius / solution.frequency * trapezoid(&integrand, delta);
    ForceResult::new(f, ForceMethod::Numeric, &solution.response, system, excitation)
}

/// The same integral kept in complex form; its imaginary part measures
/// how far the accumulator is from the manifestly real expression.
pub fn force_numeric_complex(solution: &CurrentSolution, radius: f64) -> Complex64 {
    let delta = solution.delta();
    let de = first_derivative(&solution.e_z_total, delta);
    let n = de.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let j = solution.j_z[i];
        acc += (de[i].conj() * j - de[i] * j.conj()) * w;
    }
    I * PI * radius / solution.frequency * acc * delta
}

/// cot x and 1/sin x for Im x ≥ 0 without overflow.
fn cot_csc(x: Complex64) -> (Complex64, Complex64) {
    if x.im >= 0.0 {
        let e2 = (2.0 * I * x).exp();
        let e1 = (I * x).exp();
        (I * (e2 + 1.0) / (e2 - 1.0), 2.0 * I * e1 / (e2 - 1.0))
    } else {
        let e2 = (-2.0 * I * x).exp();
        let e1 = (-I * x).exp();
        (-I * (1.0 + e2) / (1.0 - e2), 2.0 * I * e1 / (1.0 - e2))
    }
}

/// Closed-form force obtained by inserting j = −B into the force integral:
///
/// F = A·Re{ α̃²σ/(α̃² − k_c²)·[L + α̃(cos 2α̃L − cos 2k_cL)/(sin 2α̃L·(α̃² − k_c²))] },
/// k_c = k cos θ₀.
pub fn force_analytic(record: &ResponseRecord, system: &CntSystem, excitation: &Excitation) -> Result<ForceResult> {
    let a = record.alpha_tilde;
    let l = system.half_length;
    let kc = excitation.k_free * excitation.theta0.cos();
    let a2 = a * a;
    let d = a2 - kc * kc;
    if d.norm() < 1e-8 * a2.norm() {
        return Err(NanoError::AnalyticSingularity("α̃² = k²cos²θ₀".into()));
    }
    if check_resonance(a, l).is_err() {
        return Err(NanoError::AnalyticSingularity("sin(2α̃L) = 0".into()));
    }
    let (cot, csc) = cot_csc(2.0 * a * l);
    let bracket = l + a * (cot - csc * (2.0 * kc * l).cos()) / d;
    let f = prefactor(system, excitation) * (a2 * record.sigma_total / d * bracket).re;
    Ok(ForceResult::new(f, ForceMethod::AnalyticEq15, record, system, excitation))
}

/// Reference value for [`force_analytic`]: the force integral evaluated by
/// adaptive quadrature with j = −B and E = E_inc.
pub fn force_first_order_quadrature(
    record: &ResponseRecord,
    system: &CntSystem,
    excitation: &Excitation,
) -> Result<f64> {
    let l = system.half_length;
    let kc = excitation.k_free * excitation.theta0.cos();
    let mut err = None;
    let scale = (record.sigma_total.norm() * excitation.e0_amplitude.powi(2) * kc * l).max(f64::MIN_POSITIVE);
    // B varies on the scale 1/|α̃| near the ends; split there.
    let edge = (8.0 / record.alpha_tilde.norm()).min(0.25 * l);
    let breaks = [-l, -l + edge, 0.0, l - edge, l];
    let integral = quad::adaptive_breaks(&breaks, 1e-13 * scale, &mut |z| {
        let b = match rhs_b(z, record, system, excitation, RhsMethod::Closed) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        };
        let de = incident_field(z, excitation) * (I * kc);
        Complex64::new((de.conj() * (-b)).im, 0.0)
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(-2.0 * PI * system.radius / record.omega * integral.re)
}

/// Homogeneous local-limit force F = A·L·Re σ.
pub fn force_local(record: &ResponseRecord, system: &CntSystem, excitation: &Excitation) -> ForceResult {
    let f = prefactor(system, excitation) * system.half_length * record.sigma_total.re;
    ForceResult::new(f, ForceMethod::LocalEq16, record, system, excitation)
}

/// Outcome of the local-limit sign calibration for one convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignScore {
    pub sign: SignConvention,
    /// All probe forces positive.
    pub all_positive: bool,
    /// Largest relative deviation from the local-limit closed form.
    pub max_rel_deviation: f64,
    /// Coefficient of determination of F against L.
    pub length_r2: f64,
}

impl SignScore {
    fn passes(&self) -> bool {
        self.all_positive && self.length_r2 > 0.999
    }
}

/// Probe set for [`calibrate_sign`].
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProbe {
    pub frequencies_thz: Vec<f64>,
    pub lengths_nm: Vec<f64>,
    pub length_frequency_thz: f64,
    pub n_segments: usize,
    pub local_factor: f64,
}

impl Default for CalibrationProbe {
    fn default() -> Self {
        CalibrationProbe {
            frequencies_thz: vec![205.0, 215.0, 230.0, 250.0],
            lengths_nm: vec![50.0, 100.0, 200.0],
            length_frequency_thz: 215.0,
            n_segments: 161,
            local_factor: 1e3,
        }
    }
}

/// Choose the kernel sign for which the local-limit numeric force is
/// positive, linear in L and closest to F = A·L·Re σ.
pub fn calibrate_sign(
    system: &CntSystem,
    excitation: &Excitation,
    probe: &CalibrationProbe,
) -> Result<(SignConvention, Vec<SignScore>)> {
    let mut scores = Vec::new();
    for sign in [SignConvention::MainText, SignConvention::Supplement] {
        let mut cfg = SolverConfig {
            n_segments: probe.n_segments,
            sign,
            ..SolverConfig::default()
        };
        cfg.conductivity.local_factor = Some(probe.local_factor);
        let mut all_positive = true;
        let mut max_dev = 0.0_f64;
        for &f in &probe.frequencies_thz {
            let exc = excitation.at_frequency(f * 1e12);
            let sol = cfg.solve(system, &exc)?;
            let num = force_numeric(&sol, system, &exc).f_z;
            let loc = force_local(&sol.response, system, &exc).f_z;
            all_positive &= num > 0.0;
            max_dev = max_dev.max(((num - loc) / loc).abs());
        }
        let exc = excitation.at_frequency(probe.length_frequency_thz * 1e12);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &l in &probe.lengths_nm {
            let sys = system.with_half_length(l * 1e-9);
            let sol = cfg.solve(&sys, &exc)?;
            let f = force_numeric(&sol, &sys, &exc).f_z;
            all_positive &= f > 0.0;
            xs.push(l);
            ys.push(f);
        }
        scores.push(SignScore {
            sign,
            all_positive,
            max_rel_deviation: max_dev,
            length_r2: linear_fit(&xs, &ys).2,
        });
    }
    let best = scores
        .iter()
        .filter(|s| s.passes())
        .chain(scores.iter())
        .min_by(|a, b| {
            b.passes()
                .cmp(&a.passes())
                .then(a.max_rel_deviation.total_cmp(&b.max_rel_deviation))
        })
        .expect("two candidates");
    Ok((best.sign, scores))
}

/// Least-squares line y = slope·x + intercept; returns (slope, intercept, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    (slope, intercept, r2)
}
