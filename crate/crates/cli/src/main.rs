use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nanopull::conductivity::{ConductivityOptions, ResponseRecord};
use nanopull::current_solver::{SignConvention, SolverConfig};
use nanopull::force::{force_analytic, force_local, force_numeric, ForceResult};
use nanopull::green_functions::{big_g, g_sturm, BigGForm, GreenForm};
use nanopull::kernel::{assemble, Grid, KernelForm};
use nanopull::model::{RawParams, ValidityWarning};
use nanopull::sweep_engine::{self, Format, SweepSpec};

#[derive(Parser)]
#[command(name = "nanopull", version, about = "Optical force on a finite zigzag carbon nanotube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the surface conductivity and nonlocality factor.
    Conductivity {
        /// f_start,f_end,n in THz.
        #[arg(long)]
        sweep: String,
        #[command(flatten)]
        common: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for the surface current at one frequency.
    Solve {
        #[command(flatten)]
        common: ParamArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write sampled g and G tables to this CSV file.
        #[arg(long)]
        dump_green: Option<PathBuf>,
        /// Write the kernel matrix to this CSV file.
        #[arg(long)]
        dump_kernel: Option<PathBuf>,
    },
    /// Evaluate the axial force at one parameter point.
    Force {
        #[command(flatten)]
        common: ParamArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, value_enum, default_value = "all")]
        method: MethodArg,
    },
    /// Run a sweep from a config file or a named preset.
    Sweep {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: PathBuf,
        /// Output format; inferred from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        /// Evaluate points one at a time.
        #[arg(long)]
        serial: bool,
    },
    /// Inspect the shipped sweep presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names.
    List,
    /// Print a preset as a config document.
    Show { name: String },
}

#[derive(Args)]
struct ParamArgs {
    /// JSON parameter document (keys as in the README).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the frequency, THz.
    #[arg(long)]
    frequency_thz: Option<f64>,
    /// Override the temperature, K.
    #[arg(long)]
    temperature_k: Option<f64>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 411)]
    n_segments: usize,
    /// Local-limit multiplier for the nonlocal wavenumber.
    #[arg(long)]
    local_override: Option<f64>,
    #[arg(long, value_enum, default_value = "singular")]
    kernel_form: KernelArg,
    /// Kernel sign; the calibrated default when omitted.
    #[arg(long, value_enum)]
    sign: Option<SignArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Numeric,
    Analytic,
    Local,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Singular,
    Spectral,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    MainText,
    Supplement,
}

impl ParamArgs {
    fn raw(&self) -> Result<RawParams> {
        let mut raw = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?
            }
            None => RawParams::default(),
        };
        if let Some(f) = self.frequency_thz {
            raw.frequency_thz = f;
        }
        if let Some(t) = self.temperature_k {
            raw.temperature_k = t;
        }
        Ok(raw)
    }
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let mut cfg = SolverConfig {
            n_segments: self.n_segments,
            kernel_form: match self.kernel_form {
                KernelArg::Singular => KernelForm::Singular,
                KernelArg::Spectral => KernelForm::Spectral,
            },
            ..SolverConfig::default()
        };
        if let Some(s) = self.sign {
            cfg.sign = match s {
                SignArg::MainText => SignConvention::MainText,
                SignArg::Supplement => SignConvention::Supplement,
            };
        }
        cfg.with_local_factor(self.local_override)
    }
}

fn warn(warnings: &[ValidityWarning]) {
    for w in warnings {
        eprintln!("warning: {}", serde_json::to_string(w).unwrap_or_default());
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_sweep(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        bail!("--sweep expects f_start,f_end,n");
    }
    let n: usize = parts[2].parse().context("sweep point count")?;
    if n < 2 {
        bail!("sweep needs at least two points");
    }
    Ok((parts[0].parse()?, parts[1].parse()?, n))
}

fn cmd_conductivity(sweep: &str, common: &ParamArgs, out: Option<&Path>) -> Result<()> {
    let (f0, f1, n) = parse_sweep(sweep)?;
    let raw = common.raw()?;
    let built = raw.build()?;
    warn(&built.warnings);
    let system = built.system;
    let opts = ConductivityOptions::default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "f_THz",
        "Re_sigma_inter_S",
        "Im_sigma_inter_S",
        "Re_sigma_intra_S",
        "Im_sigma_intra_S",
        "Re_xi_S_m2",
        "Im_xi_S_m2",
        "alpha_L",
        "regime",
    ])?;
    for i in 0..n {
        let f = f0 + (f1 - f0) * i as f64 / (n - 1) as f64;
        let omega = 2.0 * std::f64::consts::PI * f * 1e12;
        let r = ResponseRecord::evaluate(omega, &system, &opts)?;
        w.write_record([
            format!("{f}"),
            format!("{:e}", r.sigma_inter.re),
            format!("{:e}", r.sigma_inter.im),
            format!("{:e}", r.sigma_intra.re),
            format!("{:e}", r.sigma_intra.im),
            format!("{:e}", r.xi_total.re),
            format!("{:e}", r.xi_total.im),
            format!("{:e}", r.alpha_tilde.norm() * system.half_length),
            serde_json::to_value(r.regime)?.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    write_out(out, &String::from_utf8(w.into_inner()?)?)
}

fn dump_green(path: &Path, record: &ResponseRecord, cfg: &SolverConfig, raw: &RawParams) -> Result<()> {
    let built = raw.build()?;
    let p = SolverConfig::green_params(record, &built.system, &built.excitation);
    let l = p.half_length;
    let mut text = String::from("z_nm,Re_g_m,Im_g_m,delta_nm,Re_G,Im_G\n");
    let n = cfg.n_segments.max(11);
    for i in 0..n {
        let z = -l + 2.0 * l * i as f64 / (n - 1) as f64;
        let g = g_sturm(z, 0.0, &p, GreenForm::Closed)?;
        let d = 2.0 * l * (i + 1) as f64 / n as f64;
        let big = big_g(d, &p, p.radius, BigGForm::Direct)?;
        writeln!(text, "{:e},{:e},{:e},{:e},{:e},{:e}", z * 1e9, g.re, g.im, d * 1e9, big.re, big.im)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(
    common: &ParamArgs,
    solver: &SolverArgs,
    out: Option<&Path>,
    green: Option<&Path>,
    kernel_out: Option<&Path>,
) -> Result<()> {
    let raw = common.raw()?;
    let built = raw.build()?;
    warn(&built.warnings);
    let cfg = solver.config();
    let record = ResponseRecord::evaluate(built.excitation.omega, &built.system, &cfg.conductivity)?;
    if let Some(p) = green {
        dump_green(p, &record, &cfg, &raw)?;
    }
    if let Some(p) = kernel_out {
        let grid = Grid::uniform(cfg.n_segments, built.system.half_length)?;
        let gp = SolverConfig::green_params(&record, &built.system, &built.excitation);
        let k = assemble(&grid, &gp, cfg.kernel_form, built.excitation.omega)?;
        std::fs::write(p, k.to_csv()).with_context(|| format!("writing {}", p.display()))?;
    }
    let sol = cfg.solve(&built.system, &built.excitation)?;
    let meta = serde_json::json!({
        "parameters": raw,
        "n_segments": cfg.n_segments,
        "kernel_form": cfg.kernel_form,
        "local_override": cfg.conductivity.local_factor,
        "sign_convention": sol.sign_convention,
        "residual": sol.residual_norm,
        "condition_estimate": sol.condition_estimate,
    });
    let mut text = format!("# {}\n", serde_json::to_string(&meta)?);
    text.push_str("z_nm,Re_j_A_per_m,Im_j_A_per_m,Re_E_V_per_m,Im_E_V_per_m\n");
    for ((z, j), e) in sol.grid_midpoints.iter().zip(&sol.j_z).zip(&sol.e_z_total) {
        writeln!(text, "{:e},{:e},{:e},{:e},{:e}", z * 1e9, j.re, j.im, e.re, e.im)?;
    }
    write_out(out, &text)
}

fn cmd_force(common: &ParamArgs, solver: &SolverArgs, method: MethodArg) -> Result<()> {
    let raw = common.raw()?;
    let built = raw.build()?;
    warn(&built.warnings);
    let (sys, exc) = (built.system, built.excitation);
    let cfg = solver.config();
    let record = ResponseRecord::evaluate(exc.omega, &sys, &cfg.conductivity)?;
    let want = |m: MethodArg| matches!(method, MethodArg::All) || std::mem::discriminant(&method) == std::mem::discriminant(&m);
    let mut results: Vec<ForceResult> = Vec::new();
    if want(MethodArg::Numeric) {
        let sol = cfg.solve(&sys, &exc)?;
        results.push(force_numeric(&sol, &sys, &exc));
    }
    if want(MethodArg::Analytic) {
        results.push(force_analytic(&record, &sys, &exc)?);
    }
    if want(MethodArg::Local) {
        results.push(force_local(&record, &sys, &exc));
    }
    println!("method,Fz_N,Fz_fN,pulling,regime");
    for r in results {
        println!(
            "{},{:e},{:e},{},{}",
            r.method.short_name(),
            r.f_z,
            r.f_z_fn(),
            r.is_pulling,
            serde_json::to_value(r.regime)?.as_str().unwrap_or_default()
        );
    }
    Ok(())
}

fn cmd_sweep(config: Option<&Path>, preset: Option<&str>, out: &Path, format: Option<FormatArg>, serial: bool) -> Result<bool> {
    let mut spec = match (config, preset) {
        (Some(p), None) => SweepSpec::from_path(p)?,
        (None, Some(name)) => match sweep_engine::preset(name) {
            Some(p) => p.spec,
            None => bail!("unknown preset '{name}'; see `nanopull presets list`"),
        },
        _ => bail!("give exactly one of --config or --preset"),
    };
    if serial {
        spec.parallel = false;
    }
    let format = match format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => Format::from_path(out),
    };
    let result = sweep_engine::run_sweep(&spec)?;
    warn(&result.metadata.warnings);
    sweep_engine::emit(&result, format, out)?;
    let failed = result.rows.iter().filter(|r| !r.is_ok()).count();
    if failed > 0 {
        eprintln!("{failed} of {} points failed; see the error column", result.rows.len());
    }
    Ok(failed == 0)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("NANOPULL_THREADS") {
        let n: usize = v.parse().with_context(|| format!("NANOPULL_THREADS={v}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn run() -> Result<bool> {
    configure_threads()?;
    let cli = Cli::parse();
    match cli.command {
        Command::Conductivity { sweep, common, out } => cmd_conductivity(&sweep, &common, out.as_deref()).map(|_| true),
        Command::Solve {
            common,
            solver,
            out,
            dump_green,
            dump_kernel,
        } => cmd_solve(&common, &solver, out.as_deref(), dump_green.as_deref(), dump_kernel.as_deref()).map(|_| true),
        Command::Force { common, solver, method } => cmd_force(&common, &solver, method).map(|_| true),
        Command::Sweep {
            config,
            preset,
            out,
            format,
            serial,
        } => cmd_sweep(config.as_deref(), preset.as_deref(), &out, format, serial),
        Command::Presets { action } => {
            match action {
                PresetAction::List => {
                    for p in sweep_engine::presets() {
                        println!("{:<12} {}", p.name, p.description);
                    }
                }
                PresetAction::Show { name } => match sweep_engine::preset(&name) {
                    Some(p) => println!("{}", serde_json::to_string_pretty(&p.spec)?),
                    None => bail!("unknown preset '{name}'"),
                },
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_triplet_parses() {
        assert_eq!(parse_sweep("150, 250, 101").unwrap(), (150.0, 250.0, 101));
        assert!(parse_sweep("150,250").is_err());
        assert!(parse_sweep("150,250,1").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
