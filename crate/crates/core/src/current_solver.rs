//! Right-hand side, dense solve and surface-field reconstruction for the
//! collocated current equation
//!
//! ```text
//! j(z_i) ± c·Σ_j M_ij j(s_j) = −B(z_i),   c = iσα̃²/(4πωε₀),
//! ```
//!
//! where M is the segment-integrated kernel from [`crate::kernel`] and
//! B(z) = σα̃²∫g(z, z′)E_inc(z′)dz′. In the local limit B → −σE_inc and the
//! equation reduces to Ohm's law j = σE_inc.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conductivity::{ConductivityOptions, Regime, ResponseRecord};
use crate::error::{NanoError, Result};
use crate::green_functions::{check_resonance, g_closed_unchecked, g_fourier_unchecked, GreenParams};
use crate::kernel::{assemble, Grid, KernelForm, KernelMatrix};
use crate::model::{CntSystem, Excitation, EPS0};
use crate::quad;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Condition numbers above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Sign in front of the kernel term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    /// `(I − cM)j = −B`.
    MainText,
    /// `(I + cM)j = −B`.
    Supplement,
}

impl SignConvention {
    /// Numeric sign multiplying the kernel term.
    pub fn sign(self) -> f64 {
        match self {
            SignConvention::MainText => -1.0,
            SignConvention::Supplement => 1.0,
        }
    }

    /// Short label used in metadata, `"-"` or `"+"`.
    pub fn label(self) -> &'static str {
        match self {
            SignConvention::MainText => "-",
            SignConvention::Supplement => "+",
        }
    }
}

/// The convention selected by the local-limit calibration
/// ([`crate::force::calibrate_sign`]); a test pins the two together.
pub const DEFAULT_SIGN: SignConvention = SignConvention::MainText;

impl Default for SignConvention {
    fn default() -> Self {
        DEFAULT_SIGN
    }
}

/// How B(z) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhsMethod {
    Quadrature,
    Closed,
}

/// Solved surface current and reconstructed field on the collocation grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentSolution {
    pub grid_midpoints: Vec<f64>,
    /// Axial surface current density, A/m.
    pub j_z: Vec<Complex64>,
    /// Total axial surface field, V/m.
    pub e_z_total: Vec<Complex64>,
    /// ‖A j + B‖/‖B‖ (0 when B vanishes).
    pub residual_norm: f64,
    /// 1-norm condition estimate of the system matrix.
    pub condition_estimate: f64,
    pub sign_convention: SignConvention,
    /// Angular frequency, rad/s.
    pub frequency: f64,
    /// Conductivity record the solve used.
    pub response: ResponseRecord,
}

impl CurrentSolution {
    /// Grid spacing Δ.
    pub fn delta(&self) -> f64 {
        let n = self.grid_midpoints.len();
        (self.grid_midpoints[n - 1] - self.grid_midpoints[0]) / (n - 1) as f64
    }

    pub fn regime(&self) -> Regime {
        self.response.regime
    }
}

/// E_inc(z) = E₀ sin θ₀ e^{ikz cos θ₀}.
pub fn incident_field(z: f64, excitation: &Excitation) -> Complex64 {
    let amp = excitation.e0_amplitude * excitation.theta0.sin();
    let phase = excitation.k_free * excitation.theta0.cos() * z;
    Complex64::from_polar(amp, phase)
}

/// B(z) = σα̃²∫g(z, z′)E_inc(z′)dz′.
pub fn rhs_b(
    z: f64,
    record: &ResponseRecord,
    system: &CntSystem,
    excitation: &Excitation,
    method: RhsMethod,
) -> Result<Complex64> {
    let l = system.half_length;
    if z.abs() > l * (1.0 + 1e-12) {
        return Err(NanoError::InvalidParameter("rhs_b needs |z| <= L".into()));
    }
    let a = record.alpha_tilde;
    check_resonance(a, l).map_err(|_| NanoError::InternalResonance {
        omega: record.omega,
        alpha_l: a * l,
    })?;
    let pref = record.sigma_total * a * a;
    if (z.abs() - l).abs() <= 1e-12 * l {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let integral = match method {
        RhsMethod::Closed => {
            let h = -excitation.k_free * excitation.theta0.cos();
            g_fourier_unchecked(h, z, a, l) * (excitation.e0_amplitude * excitation.theta0.sin())
        }
        RhsMethod::Quadrature => {
            let scale = (excitation.e0_amplitude / a.norm().powi(2)).max(f64::MIN_POSITIVE);
            quad::adaptive_breaks(&[-l, z, l], 1e-14 * scale, &mut |zp| {
                g_closed_unchecked(z, zp, a, l) * incident_field(zp, excitation)
            })
        }
    };
    Ok(pref * integral)
}

/// Coupling constant c = iσα̃²/(4πωε₀) multiplying the kernel matrix.
pub fn coupling(record: &ResponseRecord) -> Complex64 {
    I * record.sigma_total * record.alpha_tilde * record.alpha_tilde / (4.0 * PI * record.omega * EPS0)
}

/// A factorised system matrix, reusable for several right-hand sides at
/// the same frequency and geometry.
pub struct PreparedSystem {
    lu: LU<Complex64, Dyn, Dyn>,
    matrix: DMatrix<Complex64>,
    condition: f64,
    record: ResponseRecord,
    grid: Vec<f64>,
    sign: SignConvention,
}

impl std::fmt::Debug for PreparedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PreparedSystem")
            .field("n", &self.grid.len())
            .field("condition", &self.condition)
            .field("sign", &self.sign)
            .finish()
    }
}

impl PreparedSystem {
    /// Assemble I ± cM and factorise it.
    pub fn new(record: &ResponseRecord, kernel: &KernelMatrix, sign: SignConvention) -> Result<Self> {
        if (kernel.frequency - record.omega).abs() > 1e-9 * record.omega {
            return Err(NanoError::InvalidParameter(
                "kernel matrix was built for a different frequency".into(),
            ));
        }
        let n = kernel.n_segments;
        let c = coupling(record) * sign.sign();
        let matrix = DMatrix::<Complex64>::identity(n, n) + &kernel.values * c;
        let lu = matrix.clone().lu();
        let condition = condition_estimate(&matrix, &lu);
        if !condition.is_finite() || condition > MAX_CONDITION {
            return Err(NanoError::IllConditioned { condition });
        }
        Ok(PreparedSystem {
            lu,
            matrix,
            condition,
            record: *record,
            grid: kernel.grid_midpoints.clone(),
            sign,
        })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    /// Solve for the current driven by `excitation`.
    pub fn solve(&self, system: &CntSystem, excitation: &Excitation) -> Result<CurrentSolution> {
        let b: Vec<Complex64> = self
            .grid
            .iter()
            .map(|&z| rhs_b(z, &self.record, system, excitation, RhsMethod::Closed))
            .collect::<Result<_>>()?;
        let rhs = -DVector::from_vec(b.clone());
        let j = self
            .lu
            .solve(&rhs)
            .ok_or(NanoError::IllConditioned { condition: f64::INFINITY })?;
        let b_norm = rhs.norm();
        let residual_norm = if b_norm == 0.0 {
            0.0
        } else {
            (&self.matrix * &j - &rhs).norm() / b_norm
        };
        let j_z: Vec<Complex64> = j.iter().copied().collect();
        let delta = (self.grid[self.grid.len() - 1] - self.grid[0]) / (self.grid.len() - 1) as f64;
        let e_z_total = surface_field(&j_z, delta, &self.record);
        Ok(CurrentSolution {
            grid_midpoints: self.grid.clone(),
            j_z,
            e_z_total,
            residual_norm,
            condition_estimate: self.condition,
            sign_convention: self.sign,
            frequency: self.record.omega,
            response: self.record,
        })
    }
}

/// Factorise and solve in one step.
pub fn solve(
    record: &ResponseRecord,
    system: &CntSystem,
    excitation: &Excitation,
    kernel: &KernelMatrix,
    sign: SignConvention,
) -> Result<CurrentSolution> {
    PreparedSystem::new(record, kernel, sign)?.solve(system, excitation)
}

/// 1-norm condition estimate ‖A‖₁·est(‖A⁻¹‖₁) using Hager's iteration with
/// Higham's alternating-sign safeguard.
fn condition_estimate(a: &DMatrix<Complex64>, lu: &LU<Complex64, Dyn, Dyn>) -> f64 {
    let n = a.nrows();
    let norm1 = |v: &DVector<Complex64>| v.iter().map(|x| x.norm()).sum::<f64>();
    let a_norm = (0..n).map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    let l = lu.l();
    let u = lu.u();
    let solve_adjoint = |x: &DVector<Complex64>| -> Option<DVector<Complex64>> {
        let w = u.adjoint().solve_lower_triangular(x)?;
        let mut v = l.adjoint().solve_upper_triangular(&w)?;
        lu.p().inv_permute_rows(&mut v);
        Some(v)
    };
    let mut x = DVector::from_element(n, Complex64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0_f64;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else { return f64::INFINITY };
        est = est.max(norm1(&y));
        let xi = y.map(|v| if v.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { v / v.norm() });
        let Some(z) = solve_adjoint(&xi) else { return f64::INFINITY };
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
        let ztx = z.dotc(&x).re;
        if zmax <= ztx || jmax == last_j {
            break;
        }
        x = DVector::zeros(n);
        x[jmax] = Complex64::new(1.0, 0.0);
        last_j = jmax;
    }
    let alt = DVector::from_fn(n, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
    });
    if let Some(y) = lu.solve(&alt) {
        est = est.max(2.0 * norm1(&y) / (3.0 * n as f64));
    }
    a_norm * est
}

/// Second derivative on a uniform grid: 3-point interior, 4-point one-sided
/// stencils at the ends.
pub fn second_derivative(y: &[Complex64], delta: f64) -> Vec<Complex64> {
    let n = y.len();
    assert!(n >= 4, "need at least four samples");
    let h2 = delta * delta;
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        out[i] = (y[i - 1] - y[i] * 2.0 + y[i + 1]) / h2;
    }
    out[0] = (y[0] * 2.0 - y[1] * 5.0 + y[2] * 4.0 - y[3]) / h2;
    out[n - 1] = (y[n - 1] * 2.0 - y[n - 2] * 5.0 + y[n - 3] * 4.0 - y[n - 4]) / h2;
    out
}

/// First derivative on a uniform grid: central interior, 4-point one-sided
/// third-order stencils at the ends.
pub fn first_derivative(y: &[Complex64], delta: f64) -> Vec<Complex64> {
    let n = y.len();
    assert!(n >= 4, "need at least four samples");
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for i in 1..n - 1 {
        out[i] = (y[i + 1] - y[i - 1]) / (2.0 * delta);
    }
    out[0] = (y[0] * -11.0 + y[1] * 18.0 - y[2] * 9.0 + y[3] * 2.0) / (6.0 * delta);
    out[n - 1] = (y[n - 1] * 11.0 - y[n - 2] * 18.0 + y[n - 3] * 9.0 - y[n - 4] * 2.0) / (6.0 * delta);
    out
}

/// Surface field from the current: E = (j″ + α̃²j)/(σα̃²).
pub fn surface_field(j: &[Complex64], delta: f64, record: &ResponseRecord) -> Vec<Complex64> {
    let a2 = record.alpha_tilde * record.alpha_tilde;
    let denom = record.sigma_total * a2;
    second_derivative(j, delta)
        .into_iter()
        .zip(j)
        .map(|(d2, &jv)| (d2 + a2 * jv) / denom)
        .collect()
}

/// Everything needed to go from a parameter set to a solved current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_segments: usize,
    pub kernel_form: KernelForm,
    pub sign: SignConvention,
    pub conductivity: ConductivityOptions,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_segments: 411,
            kernel_form: KernelForm::Singular,
            sign: DEFAULT_SIGN,
            conductivity: ConductivityOptions::default(),
        }
    }
}

impl SolverConfig {
    /// Copy with the local-limit multiplier set.
    pub fn with_local_factor(mut self, lambda: Option<f64>) -> Self {
        self.conductivity.local_factor = lambda;
        self
    }

    /// Green-function parameters for a response record.
    pub fn green_params(record: &ResponseRecord, system: &CntSystem, excitation: &Excitation) -> GreenParams {
        GreenParams::new(record.alpha_tilde, system.half_length, excitation.k_free, system.radius)
    }

    /// Evaluate the response and build the factorised system at the
    /// excitation frequency.
    pub fn prepare(&self, system: &CntSystem, excitation: &Excitation) -> Result<PreparedSystem> {
        let record = ResponseRecord::evaluate(excitation.omega, system, &self.conductivity)?;
        let grid = Grid::uniform(self.n_segments, system.half_length)?;
        let params = Self::green_params(&record, system, excitation);
        let kernel = assemble(&grid, &params, self.kernel_form, excitation.omega)?;
        PreparedSystem::new(&record, &kernel, self.sign)
    }

    /// Full pipeline for one parameter point.
    pub fn solve(&self, system: &CntSystem, excitation: &Excitation) -> Result<CurrentSolution> {
        self.prepare(system, excitation)?.solve(system, excitation)
    }
}
