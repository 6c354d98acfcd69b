//! Flat `key = value` configuration with one-for-one command-line overrides.
//!
//! The file format is deliberately minimal: one assignment per line, `#`
//! starts a comment, keys match the long command-line flags. Every flag
//! overrides the same-named key, so a config file pins a study and the
//! command line varies one thing at a time.

use recoil_core::quad::QuadratureConfig;
use recoil_core::spectrum::Truncation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Everything a config file (or the flags mirroring it) can set. `None`
/// means "not mentioned" so that overlaying sources stays one-for-one.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    pub epsilon_ld: Option<f64>,
    pub omega_ratio: Option<f64>,
    pub gamma_ratio: Option<f64>,
    pub omega_k_min: Option<f64>,
    pub omega_k_max: Option<f64>,
    pub n_points: Option<usize>,
    pub n_max: Option<usize>,
    pub auto_truncation: Option<bool>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub output: Option<String>,
    pub format: Option<Format>,
    pub channel_detail: Option<bool>,
}

/// Fully-resolved run parameters after merging and defaulting.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub epsilon_ld: f64,
    pub omega_ratio: f64,
    pub gamma_ratio: f64,
    pub omega_k_min: f64,
    pub omega_k_max: f64,
    pub n_points: usize,
    pub truncation: Truncation,
    pub quad: QuadratureConfig<f64>,
    pub output: Option<String>,
    pub format: Format,
    pub channel_detail: bool,
}

pub fn parse_config(text: &str) -> Result<Settings, String> {
    let mut s = Settings::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("line {line_no}: expected `key = value`, got `{line}`"));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "epsilon_ld" => s.epsilon_ld = Some(number(key, value, line_no)?),
            "omega_ratio" => s.omega_ratio = Some(number(key, value, line_no)?),
            "gamma_ratio" => s.gamma_ratio = Some(number(key, value, line_no)?),
            "omega_k_min" => s.omega_k_min = Some(number(key, value, line_no)?),
            "omega_k_max" => s.omega_k_max = Some(number(key, value, line_no)?),
            "n_points" => s.n_points = Some(integer(key, value, line_no)?),
            "n_max" => s.n_max = Some(integer(key, value, line_no)?),
            "auto_truncation" => s.auto_truncation = Some(boolean(key, value, line_no)?),
            "abs_tol" => s.abs_tol = Some(number(key, value, line_no)?),
            "rel_tol" => s.rel_tol = Some(number(key, value, line_no)?),
            "output" => s.output = Some(value.to_string()),
            "format" => s.format = Some(format_value(value, line_no)?),
            "channel_detail" => s.channel_detail = Some(boolean(key, value, line_no)?),
            other => return Err(format!("line {line_no}: unknown key `{other}`")),
        }
    }
    Ok(s)
}

fn number(key: &str, value: &str, line: usize) -> Result<f64, String> {
    value
        .parse()
        .map_err(|_| format!("line {line}: key `{key}` expects a number, got `{value}`"))
}

fn integer(key: &str, value: &str, line: usize) -> Result<usize, String> {
    value
        .parse()
        .map_err(|_| format!("line {line}: key `{key}` expects a non-negative integer, got `{value}`"))
}

fn boolean(key: &str, value: &str, line: usize) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("line {line}: key `{key}` expects true or false, got `{value}`")),
    }
}

fn format_value(value: &str, line: usize) -> Result<Format, String> {
    match value {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(format!("line {line}: key `format` expects csv or json, got `{value}`")),
    }
}

/// Overlay `flags` on top of `file`: any key the command line mentions wins.
pub fn merge(file: Settings, flags: Settings) -> Settings {
    Settings {
        epsilon_ld: flags.epsilon_ld.or(file.epsilon_ld),
        omega_ratio: flags.omega_ratio.or(file.omega_ratio),
        gamma_ratio: flags.gamma_ratio.or(file.gamma_ratio),
        omega_k_min: flags.omega_k_min.or(file.omega_k_min),
        omega_k_max: flags.omega_k_max.or(file.omega_k_max),
        n_points: flags.n_points.or(file.n_points),
        n_max: flags.n_max.or(file.n_max),
        auto_truncation: flags.auto_truncation.or(file.auto_truncation),
        abs_tol: flags.abs_tol.or(file.abs_tol),
        rel_tol: flags.rel_tol.or(file.rel_tol),
        output: flags.output.or(file.output),
        format: flags.format.or(file.format),
        channel_detail: flags.channel_detail.or(file.channel_detail),
    }
}

fn require(name: &str, value: Option<f64>) -> Result<f64, String> {
    value.ok_or_else(|| format!("missing required key `{name}` (config file or --{})", name.replace('_', "-")))
}

/// Validate cross-key constraints and fill defaults. The model ratios are
/// required — defaulting physics invites silent nonsense — while the grid
/// and numerics have working defaults.
pub fn resolve(s: Settings) -> Result<Resolved, String> {
    let truncation = match (s.n_max, s.auto_truncation) {
        (Some(_), Some(true)) => {
            return Err("`n_max` conflicts with `auto_truncation = true`: pick one".into())
        }
        (Some(n), _) => Truncation::Fixed(n),
        (None, _) => Truncation::Auto,
    };
    let mut quad = QuadratureConfig::default();
    if let Some(tol) = s.abs_tol {
        quad.abs_tol = tol;
    }
    if let Some(tol) = s.rel_tol {
        quad.rel_tol = tol;
    }
    Ok(Resolved {
        epsilon_ld: require("epsilon_ld", s.epsilon_ld)?,
        omega_ratio: require("omega_ratio", s.omega_ratio)?,
        gamma_ratio: require("gamma_ratio", s.gamma_ratio)?,
        omega_k_min: s.omega_k_min.unwrap_or(0.7),
        omega_k_max: s.omega_k_max.unwrap_or(2.2),
        n_points: s.n_points.unwrap_or(400),
        truncation,
        quad,
        output: s.output,
        format: s.format.unwrap_or(Format::Csv),
        channel_detail: s.channel_detail.unwrap_or(false),
    })
}

/// Like [`resolve`], for the analytic reference line: only the linewidth is
/// physical input there.
pub fn resolve_ld(s: Settings) -> Result<Resolved, String> {
    let gamma = require("gamma_ratio", s.gamma_ratio)?;
    resolve(Settings {
        epsilon_ld: s.epsilon_ld.or(Some(1.0)),
        omega_ratio: s.omega_ratio.or(Some(1.0)),
        gamma_ratio: Some(gamma),
        ..s
    })
}
