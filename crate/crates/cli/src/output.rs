//! Text renderings of spectra and peak tables: CSV with a fixed column
//! contract, and a JSON mirror of the same fields.
//!
//! Floats print through `{:.16e}` (17 significant digits), enough for an
//! exact f64 round-trip, so repeated runs produce byte-identical files and
//! downstream diffs are meaningful.

use std::io::Write;

use recoil_core::channels::SpectrumPoint;
use recoil_core::spectrum::Peak;
use serde::Serialize;

pub const SPECTRUM_HEADER: &str = "omega_k_over_Omega,R,T,unitarity_defect,n_max_used,converged";
pub const PEAKS_HEADER: &str = "location,height,nearest_resonance_index,shift";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Channel columns shown under `channel_detail`: every index that is open
/// somewhere in the output. Channels a pinned truncation never solved stay
/// empty rather than being printed as zeros.
fn detail_channel_count(points: &[SpectrumPoint<f64>]) -> usize {
    points
        .iter()
        .flat_map(|p| p.channels.channels.iter())
        .filter(|c| c.open)
        .map(|c| c.n + 1)
        .max()
        .unwrap_or(0)
}

pub fn spectrum_csv(points: &[SpectrumPoint<f64>], channel_detail: bool) -> String {
    let n_detail = if channel_detail { detail_channel_count(points) } else { 0 };
    let mut out = String::from(SPECTRUM_HEADER);
    for n in 0..n_detail {
        out.push_str(&format!(",k_{n},r2_{n},t2_{n}"));
    }
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            fmt(p.omega_k),
            fmt(p.reflectance),
            fmt(p.transmittance),
            fmt(p.unitarity_defect),
            p.n_max_used,
            p.converged
        ));
        for n in 0..n_detail {
            match p.channels.channels.get(n) {
                Some(c) => out.push_str(&format!(
                    ",{},{},{}",
                    fmt(c.k_n),
                    fmt(c.r.norm_sqr()),
                    fmt(c.t.norm_sqr())
                )),
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ChannelDto {
    n: usize,
    k_n: f64,
    open: bool,
    r2: f64,
    t2: f64,
}

#[derive(Serialize)]
struct PointDto {
    omega_k_over_omega: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "T")]
    t: f64,
    unitarity_defect: f64,
    n_max_used: usize,
    converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    channels: Option<Vec<ChannelDto>>,
}

pub fn spectrum_json(points: &[SpectrumPoint<f64>], channel_detail: bool) -> String {
    let n_detail = if channel_detail { detail_channel_count(points) } else { 0 };
    let rows: Vec<PointDto> = points
        .iter()
        .map(|p| PointDto {
            omega_k_over_omega: p.omega_k,
            r: p.reflectance,
            t: p.transmittance,
            unitarity_defect: p.unitarity_defect,
            n_max_used: p.n_max_used,
            converged: p.converged,
            channels: channel_detail.then(|| {
                p.channels
                    .channels
                    .iter()
                    .take(n_detail)
                    .map(|c| ChannelDto {
                        n: c.n,
                        k_n: c.k_n,
                        open: c.open,
                        r2: c.r.norm_sqr(),
                        t2: c.t.norm_sqr(),
                    })
                    .collect()
            }),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("plain records serialize");
    text.push('\n');
    text
}

pub fn peaks_csv(peaks: &[Peak<f64>]) -> String {
    let mut out = String::from(PEAKS_HEADER);
    out.push('\n');
    for p in peaks {
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt(p.location),
            fmt(p.height),
            p.nearest_resonance_index,
            fmt(p.shift)
        ));
    }
    out
}

#[derive(Serialize)]
struct PeakDto {
    location: f64,
    height: f64,
    nearest_resonance_index: usize,
    shift: f64,
}

pub fn peaks_json(peaks: &[Peak<f64>]) -> String {
    let rows: Vec<PeakDto> = peaks
        .iter()
        .map(|p| PeakDto {
            location: p.location,
            height: p.height,
            nearest_resonance_index: p.nearest_resonance_index,
            shift: p.shift,
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("plain records serialize");
    text.push('\n');
    text
}

/// `None` or `-` writes to stdout, anything else is a file path.
pub fn write_to(target: Option<&str>, text: &str) -> std::io::Result<()> {
    match target {
        None | Some("-") => std::io::stdout().write_all(text.as_bytes()),
        Some(path) => std::fs::write(path, text),
    }
}
