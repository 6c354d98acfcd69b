//! `recoil` — reflection/transmission spectra for a single photon scattering
//! off a two-level emitter held in a harmonic trap.
//!
//! Exit codes: 0 success, 1 failed self-check (`validate`), 2 configuration
//! problems, 3 numerical failures (truncation did not converge, quadrature
//! or linear-algebra breakdown), 4 output I/O. When only convergence fails
//! the spectrum is still written — flagged per point — before exiting 3.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use recoil_core::channels::{ChannelAmplitudes, SpectrumPoint};
use recoil_core::fock::{displacement_row, Sign};
use recoil_core::kernel::kernel_matrix;
use recoil_core::limits::{ld_reflectance, LorentzianSpectrum};
use recoil_core::model::ModelParams;
use recoil_core::quad::QuadratureConfig;
use recoil_core::spectrum::{compute_point, find_peaks, sweep, SweepRequest, Truncation};
use recoil_core::Error;

use config::{Format, Resolved, Settings};

#[derive(Parser)]
#[command(
    name = "recoil",
    version,
    about = "Single-photon spectra for an emitter in a harmonic trap, recoil included"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflection/transmission spectrum over a frequency grid
    Spectrum(CommonArgs),
    /// A single incident frequency, with the full channel breakdown
    Point(PointArgs),
    /// Locate and label the peaks of a spectrum
    Peaks(PeaksArgs),
    /// The analytic point-scatterer reference line (no recoil)
    LdLimit(CommonArgs),
    /// Fast self-check of the numerical stack
    Validate,
}

#[derive(Args)]
struct CommonArgs {
    /// `key = value` configuration file; these flags override it
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Lamb–Dicke parameter ε_LD
    #[arg(long, value_name = "X")]
    epsilon_ld: Option<f64>,
    /// Trap frequency over the emitter splitting, ω/Ω
    #[arg(long, value_name = "X")]
    omega_ratio: Option<f64>,
    /// Spontaneous linewidth over the emitter splitting, Γ/Ω
    #[arg(long, value_name = "X")]
    gamma_ratio: Option<f64>,
    /// Grid start, ω_k/Ω
    #[arg(long, value_name = "X")]
    omega_k_min: Option<f64>,
    /// Grid end, ω_k/Ω
    #[arg(long, value_name = "X")]
    omega_k_max: Option<f64>,
    /// Number of grid points
    #[arg(long, value_name = "N")]
    n_points: Option<usize>,
    /// Pin the trap-level truncation (the convergence check still runs)
    #[arg(long, value_name = "N", conflicts_with = "auto_truncation")]
    n_max: Option<usize>,
    /// Pick the truncation per point from the recoil heuristic (the default)
    #[arg(long)]
    auto_truncation: bool,
    /// Absolute quadrature tolerance
    #[arg(long, value_name = "X")]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance
    #[arg(long, value_name = "X")]
    rel_tol: Option<f64>,
    /// Output file (`-` or omitted: stdout)
    #[arg(long, value_name = "PATH")]
    output: Option<String>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Add per-channel columns k_n, r2_n, t2_n
    #[arg(long)]
    channel_detail: bool,
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Incident frequency ω_k/Ω
    #[arg(long, value_name = "X")]
    omega_k: f64,
}

#[derive(Args)]
struct PeaksArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Smallest prominence a maximum needs to count as a peak
    #[arg(long, value_name = "X", default_value_t = 0.02)]
    min_prominence: f64,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} of {1} points failed truncation convergence (rows are flagged)")]
    Convergence(usize, usize),
    #[error("self-check failed: {0}")]
    Validation(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Config(_) => 2,
            CliError::Engine(e) => match e {
                Error::InvalidParameter { .. } | Error::InvalidSweep(_) => 2,
                _ => 3,
            },
            CliError::Convergence(..) => 3,
            CliError::Io(_) => 4,
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(args) => run_spectrum(&args),
        Command::Point(args) => run_point(&args),
        Command::Peaks(args) => run_peaks(&args),
        Command::LdLimit(args) => run_ld_limit(&args),
        Command::Validate => run_validate(),
    }
}

impl CommonArgs {
    fn as_settings(&self) -> Settings {
        Settings {
            epsilon_ld: self.epsilon_ld,
            omega_ratio: self.omega_ratio,
            gamma_ratio: self.gamma_ratio,
            omega_k_min: self.omega_k_min,
            omega_k_max: self.omega_k_max,
            n_points: self.n_points,
            n_max: self.n_max,
            auto_truncation: self.auto_truncation.then_some(true),
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            output: self.output.clone(),
            format: self.format,
            channel_detail: self.channel_detail.then_some(true),
        }
    }

    fn merged(&self) -> Result<Settings, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    CliError::Config(format!("cannot read {}: {e}", path.display()))
                })?;
                config::parse_config(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => Settings::default(),
        };
        Ok(config::merge(file, self.as_settings()))
    }

    fn resolved(&self) -> Result<Resolved, CliError> {
        config::resolve(self.merged()?).map_err(CliError::Config)
    }
}

fn model(r: &Resolved) -> Result<ModelParams<f64>, CliError> {
    Ok(ModelParams::new(r.epsilon_ld, r.omega_ratio, r.gamma_ratio)?)
}

fn render_spectrum(points: &[SpectrumPoint<f64>], r: &Resolved) -> String {
    match r.format {
        Format::Csv => output::spectrum_csv(points, r.channel_detail),
        Format::Json => output::spectrum_json(points, r.channel_detail),
    }
}

/// Write first, then report convergence trouble: a flagged spectrum is
/// still worth inspecting.
fn finish(points: &[SpectrumPoint<f64>], r: &Resolved) -> Result<(), CliError> {
    output::write_to(r.output.as_deref(), &render_spectrum(points, r))?;
    let failed = points.iter().filter(|p| !p.converged).count();
    if failed > 0 {
        return Err(CliError::Convergence(failed, points.len()));
    }
    Ok(())
}

fn run_spectrum(args: &CommonArgs) -> Result<(), CliError> {
    let r = args.resolved()?;
    let req = SweepRequest {
        params: model(&r)?,
        omega_k_min: r.omega_k_min,
        omega_k_max: r.omega_k_max,
        n_points: r.n_points,
        truncation: r.truncation,
        quad: r.quad.clone(),
    };
    let points = sweep(&req)?;
    finish(&points, &r)
}

fn run_point(args: &PointArgs) -> Result<(), CliError> {
    let r = args.common.resolved()?;
    let units = model(&r)?.natural_units();
    let point = compute_point(args.omega_k, &units, r.truncation, &r.quad)?;
    finish(std::slice::from_ref(&point), &r)
}

fn run_peaks(args: &PeaksArgs) -> Result<(), CliError> {
    let r = args.common.resolved()?;
    let params = model(&r)?;
    let units = params.natural_units();
    let req = SweepRequest {
        params,
        omega_k_min: r.omega_k_min,
        omega_k_max: r.omega_k_max,
        n_points: r.n_points,
        truncation: r.truncation,
        quad: r.quad.clone(),
    };
    let points = sweep(&req)?;
    let peaks = find_peaks(&points, &units, args.min_prominence);
    let text = match r.format {
        Format::Csv => output::peaks_csv(&peaks),
        Format::Json => output::peaks_json(&peaks),
    };
    output::write_to(r.output.as_deref(), &text)?;
    let failed = points.iter().filter(|p| !p.converged).count();
    if failed > 0 {
        return Err(CliError::Convergence(failed, points.len()));
    }
    Ok(())
}

/// The recoil-free reference line on the same output schema, so the two are
/// drop-in comparable: defect is the closed form's own rounding, truncation
/// columns are trivial.
fn run_ld_limit(args: &CommonArgs) -> Result<(), CliError> {
    let r = config::resolve_ld(args.merged()?).map_err(CliError::Config)?;
    let line = LorentzianSpectrum::new(1.0, r.gamma_ratio)?;
    let step = (r.omega_k_max - r.omega_k_min) / (r.n_points.max(2) - 1) as f64;
    let points: Vec<SpectrumPoint<f64>> = (0..r.n_points)
        .map(|i| {
            let k = r.omega_k_min + i as f64 * step;
            let (reflectance, transmittance) = (line.reflectance(k), line.transmittance(k));
            SpectrumPoint {
                omega_k: k,
                reflectance,
                transmittance,
                unitarity_defect: (reflectance + transmittance - 1.0).abs(),
                n_max_used: 0,
                converged: true,
                channels: ChannelAmplitudes { k_in: k, channels: Vec::new() },
            }
        })
        .collect();
    output::write_to(r.output.as_deref(), &render_spectrum(&points, &r))?;
    Ok(())
}

fn run_validate() -> Result<(), CliError> {
    let mut failures: Vec<&'static str> = Vec::new();
    let mut check = |name: &'static str, ok: bool| {
        println!("{}: {name}", if ok { "ok" } else { "FAILED" });
        if !ok {
            failures.push(name);
        }
    };

    // closed-form identities of the recoil-free line
    let line = LorentzianSpectrum::new(1.0, 0.25)?;
    check(
        "point-scatterer line hits R(Ω) = 1 and R(Ω ± Γ) = ½ exactly",
        ld_reflectance(1.0, 1.0, 0.25) == 1.0
            && line.reflectance(0.75) == 0.5
            && line.reflectance(1.25) == 0.5,
    );

    // displacement columns stay unit norm
    let column = displacement_row(60, 3, 1.6, Sign::Plus);
    let norm: f64 = column.iter().map(|v| v.norm_sqr()).sum();
    check("displacement columns are unit norm at β = 1.6", (norm - 1.0).abs() < 1e-10);

    // kernel diagonal only ever removes probability
    let units = ModelParams::new(0.8, 0.2, 0.05)?.natural_units();
    let kernel = kernel_matrix(1.13, &units, 2, 12, &QuadratureConfig::default())?;
    check(
        "kernel level widths are non-negative",
        (0..=2).all(|m| kernel.f(m, m).im <= 0.0),
    );

    // one full pipeline solve: converged and unitary
    let point = compute_point(1.3, &units, Truncation::Auto, &QuadratureConfig::default())?;
    check(
        "full solve at ε=0.8, ω/Ω=0.2, Γ/Ω=0.05, ω_k/Ω=1.3 is unitary and converged",
        point.converged && point.unitarity_defect < 1e-9,
    );

    if failures.is_empty() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::Validation(failures.join("; ")))
    }
}
