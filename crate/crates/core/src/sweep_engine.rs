//! Parameter sweeps over frequency, chemical potential, half-length or
//! incidence angle, with tabular output.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conductivity::{ConductivityOptions, Regime, ResponseRecord};
use crate::current_solver::{PreparedSystem, SignConvention, SolverConfig, DEFAULT_SIGN};
use crate::error::{NanoError, Result};
use crate::force::{force_analytic, force_local, force_numeric, ForceMethod, ForceResult};
use crate::kernel::KernelForm;
use crate::model::{RawParams, ValidityWarning};

/// Swept parameter, in engineering units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Frequency f, THz.
    Frequency,
    /// Chemical potential μ, eV.
    ChemicalPotential,
    /// Half-length L, nm.
    HalfLength,
    /// Incidence angle θ₀, degrees.
    IncidenceAngle,
}

impl Axis {
    /// CSV header of the axis column.
    pub fn column(self) -> &'static str {
        match self {
            Axis::Frequency => "f_THz",
            Axis::ChemicalPotential => "mu_eV",
            Axis::HalfLength => "L_nm",
            Axis::IncidenceAngle => "theta_deg",
        }
    }

    fn apply(self, base: &RawParams, value: f64) -> RawParams {
        let mut p = base.clone();
        match self {
            Axis::Frequency => p.frequency_thz = value,
            Axis::ChemicalPotential => p.mu_ev = value,
            Axis::HalfLength => p.half_length_nm = value,
            Axis::IncidenceAngle => p.theta0_deg = value,
        }
        p
    }

    fn check_range(self, lo: f64, hi: f64) -> Result<()> {
        let ok = match self {
            Axis::IncidenceAngle => lo > 0.0 && hi <= 90.0,
            _ => lo > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(NanoError::Config(format!("range [{lo}, {hi}] invalid for axis {self:?}")))
        }
    }
}

fn default_methods() -> Vec<ForceMethod> {
    vec![ForceMethod::Numeric, ForceMethod::AnalyticEq15, ForceMethod::LocalEq16]
}
fn default_segments() -> usize {
    411
}
fn default_true() -> bool {
    true
}

/// A sweep description; also the on-disk config format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub axis: Axis,
    pub start: f64,
    pub end: f64,
    pub points: usize,
    /// Fixed parameters; the axis entry is overwritten per point.
    #[serde(default)]
    pub params: RawParams,
    #[serde(default = "default_methods")]
    pub methods: Vec<ForceMethod>,
    #[serde(default = "default_segments")]
    pub n_segments: usize,
    /// Local-limit multiplier Λ for α̃.
    #[serde(default)]
    pub local_override: Option<f64>,
    #[serde(default)]
    pub kernel_form: KernelForm,
    /// Kernel sign; `None` uses the calibrated default.
    #[serde(default)]
    pub sign_convention: Option<SignConvention>,
    #[serde(default)]
    pub conductivity: ConductivityOptions,
    /// Evaluate points concurrently.
    #[serde(default = "default_true")]
    pub parallel: bool,
}

impl SweepSpec {
    /// Minimal spec with defaults for everything but the axis.
    pub fn new(axis: Axis, start: f64, end: f64, points: usize, params: RawParams) -> Self {
        SweepSpec {
            name: None,
            axis,
            start,
            end,
            points,
            params,
            methods: default_methods(),
            n_segments: default_segments(),
            local_override: None,
            kernel_form: KernelForm::Singular,
            sign_convention: None,
            conductivity: ConductivityOptions::default(),
            parallel: true,
        }
    }

    /// Structural validation.
    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(NanoError::Config("points must be >= 2".into()));
        }
        if !(self.start < self.end) {
            return Err(NanoError::Config("start must be < end".into()));
        }
        if self.methods.is_empty() {
            return Err(NanoError::Config("at least one force method is required".into()));
        }
        if self.n_segments < 11 {
            return Err(NanoError::Config("n_segments must be >= 11".into()));
        }
        if let Some(l) = self.local_override {
            if !(l > 0.0) {
                return Err(NanoError::Config("local_override must be positive".into()));
            }
        }
        self.axis.check_range(self.start, self.end)?;
        // Surface bad fixed parameters as a config fault, not per row.
        self.axis.apply(&self.params, self.start).build()?;
        Ok(())
    }

    /// Axis values, evenly spaced and inclusive.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.start + (self.end - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn sign(&self) -> SignConvention {
        self.sign_convention.unwrap_or(DEFAULT_SIGN)
    }

    fn solver_config(&self) -> SolverConfig {
        let mut conductivity = self.conductivity;
        if self.local_override.is_some() {
            conductivity.local_factor = self.local_override;
        }
        SolverConfig {
            n_segments: self.n_segments,
            kernel_form: self.kernel_form,
            sign: self.sign(),
            conductivity,
        }
    }

    /// Parse a config document. Besides a bare spec, the JSON written by
    /// [`emit`] is accepted, in which case its metadata echo is used.
    pub fn from_json_str(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Meta {
            config: SweepSpec,
        }
        #[derive(Deserialize)]
        struct Doc {
            metadata: Meta,
        }
        match serde_json::from_str::<SweepSpec>(text) {
            Ok(s) => Ok(s),
            Err(first) => serde_json::from_str::<Doc>(text)
                .map(|d| d.metadata.config)
                .map_err(|_| NanoError::Config(first.to_string())),
        }
    }

    /// Read a config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| NanoError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

/// Outcome of one force method at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: ForceMethod,
    pub result: Option<ForceResult>,
    pub error: Option<String>,
}

/// Conductivity summary stored per row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseSummary {
    pub sigma_total: Complex64,
    pub xi_total: Complex64,
    pub alpha_tilde: Complex64,
    pub regime: Regime,
}

impl From<&ResponseRecord> for ResponseSummary {
    fn from(r: &ResponseRecord) -> Self {
        ResponseSummary {
            sigma_total: r.sigma_total,
            xi_total: r.xi_total,
            alpha_tilde: r.alpha_tilde,
            regime: r.regime,
        }
    }
}

/// Solver diagnostics for rows that ran the numeric method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual_norm: f64,
    pub condition_estimate: f64,
    pub n_segments: usize,
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub forces: Vec<MethodOutcome>,
    pub response: Option<ResponseSummary>,
    pub diagnostics: Option<Diagnostics>,
    /// Point-level failure (parameter or conductivity error).
    pub error: Option<String>,
}

impl SweepRow {
    /// Force of `method` in newtons, if it succeeded.
    pub fn force(&self, method: ForceMethod) -> Option<f64> {
        self.forces
            .iter()
            .find(|m| m.method == method)
            .and_then(|m| m.result.map(|r| r.f_z))
    }

    /// True when the point and every requested method succeeded.
    pub fn is_ok(&self) -> bool {
        self.error.is_none() && self.forces.iter().all(|m| m.error.is_none())
    }
}

/// Metadata block of a sweep result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub config: SweepSpec,
    pub sign_convention: SignConvention,
    pub code_version: String,
    pub warnings: Vec<ValidityWarning>,
}

/// All rows of a sweep in axis order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(SweepRow::is_ok)
    }

    /// (axis value, force) pairs for rows where `method` succeeded.
    pub fn series(&self, method: ForceMethod) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.force(method).map(|f| (r.axis_value, f)))
            .collect()
    }
}

fn evaluate_point(spec: &SweepSpec, value: f64, prepared: Option<&Result<PreparedSystem>>) -> SweepRow {
    let mut row = SweepRow {
        axis_value: value,
        forces: Vec::new(),
        response: None,
        diagnostics: None,
        error: None,
    };
    let built = match spec.axis.apply(&spec.params, value).build() {
        Ok(b) => b,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let (system, excitation) = (built.system, built.excitation);
    let cfg = spec.solver_config();
    let record = match ResponseRecord::evaluate(excitation.omega, &system, &cfg.conductivity) {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.response = Some(ResponseSummary::from(&record));
    for &method in &spec.methods {
        let outcome: Result<ForceResult> = match method {
            ForceMethod::AnalyticEq15 => force_analytic(&record, &system, &excitation),
            ForceMethod::LocalEq16 => Ok(force_local(&record, &system, &excitation)),
            ForceMethod::Numeric => {
                let solution = match prepared {
                    Some(Ok(p)) => p.solve(&system, &excitation),
                    Some(Err(e)) => Err(NanoError::Config(format!("shared system unavailable: {e}"))),
                    None => cfg.solve(&system, &excitation),
                };
                solution.map(|s| {
                    row.diagnostics = Some(Diagnostics {
                        residual_norm: s.residual_norm,
                        condition_estimate: s.condition_estimate,
                        n_segments: spec.n_segments,
                    });
                    force_numeric(&s, &system, &excitation)
                })
            }
        };
        row.forces.push(match outcome {
            Ok(r) => MethodOutcome { method, result: Some(r), error: None },
            Err(e) => MethodOutcome { method, result: None, error: Some(e.to_string()) },
        });
    }
    row
}

/// Evaluate every point of the sweep. Per-point failures are recorded in
/// their rows; only configuration faults fail the whole sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let values = spec.values();
    let base = spec.axis.apply(&spec.params, spec.start).build()?;
    // The angle only enters the right-hand side, so one factorisation
    // serves the whole angle sweep.
    let shared = (spec.axis == Axis::IncidenceAngle && spec.methods.contains(&ForceMethod::Numeric))
        .then(|| spec.solver_config().prepare(&base.system, &base.excitation));
    let rows: Vec<SweepRow> = if spec.parallel {
        values
            .par_iter()
            .map(|&v| evaluate_point(spec, v, shared.as_ref()))
            .collect()
    } else {
        values
            .iter()
            .map(|&v| evaluate_point(spec, v, shared.as_ref()))
            .collect()
    };
    Ok(SweepResult {
        metadata: SweepMetadata {
            config: spec.clone(),
            sign_convention: spec.sign(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            warnings: base.warnings,
        },
        rows,
    })
}

/// Output format of [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guess from a file extension, defaulting to CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Intraband => "intraband",
        Regime::Interband => "interband",
        Regime::Threshold => "threshold",
    }
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// CSV rendering: one header row, columns in a fixed order.
pub fn to_csv(result: &SweepResult) -> Result<String> {
    let methods = &result.metadata.config.methods;
    let mut header = vec![result.metadata.config.axis.column().to_string()];
    for m in methods {
        let s = m.short_name();
        header.push(format!("Fz_N_{s}"));
        header.push(format!("Fz_fN_{s}"));
        header.push(format!("pulling_{s}"));
    }
    header.extend(
        [
            "regime",
            "Re_sigma_S",
            "Im_sigma_S",
            "Re_alpha_per_m",
            "Im_alpha_per_m",
            "residual",
            "condition",
            "error",
        ]
        .map(String::from),
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(csv_err)?;
    for row in &result.rows {
        let mut rec = vec![format!("{}", row.axis_value)];
        for m in methods {
            let f = row.force(*m);
            rec.push(num(f));
            rec.push(num(f.map(|x| x * 1e15)));
            rec.push(f.map(|x| (x < 0.0).to_string()).unwrap_or_default());
        }
        let resp = row.response.as_ref();
        rec.push(resp.map(|r| regime_name(r.regime).to_string()).unwrap_or_default());
        rec.push(num(resp.map(|r| r.sigma_total.re)));
        rec.push(num(resp.map(|r| r.sigma_total.im)));
        rec.push(num(resp.map(|r| r.alpha_tilde.re)));
        rec.push(num(resp.map(|r| r.alpha_tilde.im)));
        rec.push(num(row.diagnostics.map(|d| d.residual_norm)));
        rec.push(num(row.diagnostics.map(|d| d.condition_estimate)));
        let mut err = row.error.clone().unwrap_or_default();
        for m in &row.forces {
            if let Some(e) = &m.error {
                if !err.is_empty() {
                    err.push_str("; ");
                }
                let _ = write!(err, "{}: {e}", m.method.short_name());
            }
        }
        rec.push(err);
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| NanoError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| NanoError::Config(e.to_string()))
}

fn csv_err(e: csv::Error) -> NanoError {
    NanoError::Config(format!("csv: {e}"))
}

/// JSON rendering with the metadata block first.
pub fn to_json(result: &SweepResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| NanoError::Config(e.to_string()))
}

/// Write `result` to `path`. Nothing is written for an empty result.
pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<()> {
    if result.rows.is_empty() {
        return Err(NanoError::EmptyResult);
    }
    let text = match format {
        Format::Csv => to_csv(result)?,
        Format::Json => to_json(result)?,
    };
    std::fs::write(path, text).map_err(|source| NanoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A named preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: SweepSpec,
}

/// Fixed parameters shared by the presets: CNT(12,0), μ = 0.413 eV,
/// L = 100 nm, θ₀ = 30°, E₀ = 10⁷ V/m, evaluated in the zero-temperature
/// approximation.
pub fn preset_params() -> RawParams {
    RawParams {
        temperature_k: 0.0,
        ..RawParams::default()
    }
}

/// Named sweep templates shipped with the CLI.
pub fn presets() -> Vec<Preset> {
    let base = preset_params();
    let named = |name: &'static str, description: &'static str, mut spec: SweepSpec| {
        spec.name = Some(name.to_string());
        Preset { name, description, spec }
    };
    let mut fig3_local = SweepSpec::new(Axis::Frequency, 150.0, 250.0, 101, base.clone());
    fig3_local.local_override = Some(1e3);
    let mut fig4 = SweepSpec::new(Axis::ChemicalPotential, 0.3, 0.5, 101, RawParams {
        frequency_thz: 200.0,
        ..base.clone()
    });
    fig4.n_segments = 161;
    let length = |f: f64| {
        SweepSpec::new(Axis::HalfLength, 10.0, 400.0, 40, RawParams {
            frequency_thz: f,
            ..base.clone()
        })
    };
    let mut fig5a_local = length(200.0);
    fig5a_local.local_override = Some(1e3);
    let mut fig5b_local = length(215.0);
    fig5b_local.local_override = Some(1e3);
    vec![
        named(
            "fig3",
            "force vs frequency, 150-250 THz, N = 411",
            SweepSpec::new(Axis::Frequency, 150.0, 250.0, 101, base.clone()),
        ),
        named("fig3_local", "fig3 with the local-limit override (Lambda = 1e3)", fig3_local),
        named("fig4", "force vs chemical potential, 0.3-0.5 eV at 200 THz, N = 161", fig4),
        named("fig5a", "force vs half-length at 200 THz", length(200.0)),
        named("fig5a_local", "fig5a with the local-limit override", fig5a_local),
        named("fig5b", "force vs half-length at 215 THz", length(215.0)),
        named("fig5b_local", "fig5b with the local-limit override", fig5b_local),
        named(
            "fig6",
            "force vs incidence angle, 1-90 deg; frequency and mu taken from fig3 (200 THz, 0.413 eV)",
            SweepSpec::new(Axis::IncidenceAngle, 1.0, 90.0, 90, RawParams {
                frequency_thz: 200.0,
                ..base
            }),
        ),
    ]
}

/// Look up a preset by name.
pub fn preset(name: &str) -> Option<Preset> {
    presets().into_iter().find(|p| p.name == name)
}
