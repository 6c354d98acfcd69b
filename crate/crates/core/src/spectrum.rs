//! Energy sweeps, truncation management, and peak analysis.
//!
//! A spectrum point is only reported after a truncation check: the system is
//! solved at two truncations sharing one kernel build (the kernel is the
//! expensive half, and sharing it keeps the comparison about the *linear
//! system's* truncation rather than fluctuations of the intermediate-level
//! tail). If the reflectance moves more than [`R_CONV_TOL`], the pair is
//! escalated once; a point that still fails is returned flagged, never
//! dropped — a gap in a sweep would bias peak analysis silently.

use rayon::prelude::*;

use crate::channels::{channel_amplitudes, totals, SpectrumPoint};
use crate::kernel::{default_m_bar_max, kernel_matrix};
use crate::model::{EnergyBook, ModelParams, NaturalUnits};
use crate::quad::QuadratureConfig;
use crate::solver::{default_n_max, solve_with_kernel};
use crate::{Error, Real, Result};

/// Reflectance movement accepted between the two truncations of a pair.
pub const R_CONV_TOL: f64 = 1e-4;

/// How the external truncation is chosen for each point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Recoil-population heuristic (see `solver::default_n_max`).
    Auto,
    /// Caller-pinned base truncation (the convergence check still runs).
    Fixed(usize),
}

/// A uniform grid of incident frequencies to solve.
#[derive(Clone, Debug)]
pub struct SweepRequest<T> {
    pub params: ModelParams<T>,
    pub omega_k_min: T,
    pub omega_k_max: T,
    pub n_points: usize,
    pub truncation: Truncation,
    pub quad: QuadratureConfig<T>,
}

impl<T: Real> SweepRequest<T> {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.quad.validate()?;
        if !(self.omega_k_min.is_finite() && self.omega_k_min > T::zero()) {
            return Err(Error::InvalidSweep("omega_k_min must be finite and > 0".into()));
        }
        if !(self.omega_k_max.is_finite() && self.omega_k_max > self.omega_k_min) {
            return Err(Error::InvalidSweep("omega_k_max must exceed omega_k_min".into()));
        }
        if self.n_points < 2 {
            return Err(Error::InvalidSweep(format!(
                "n_points must be at least 2, got {}",
                self.n_points
            )));
        }
        Ok(())
    }
}

/// A local maximum of the reflectance curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak<T> {
    /// `ω_k/Ω` at the maximum (grid resolution).
    pub location: T,
    /// Reflectance at the maximum.
    pub height: T,
    /// `n` of the nearest phonon resonance `Ω + nω` (clamped at 0).
    pub nearest_resonance_index: usize,
    /// `location − (Ω + nω)/Ω`.
    pub shift: T,
}

/// Solve the pair `(n_lo, n_hi)` off one kernel built at `n_hi`; returns the
/// low-truncation reflectance and the fully-assembled high point.
fn solve_pair<T: Real>(
    k: T,
    units: &NaturalUnits<T>,
    n_lo: usize,
    n_hi: usize,
    config: &QuadratureConfig<T>,
) -> Result<(T, SpectrumPoint<T>)> {
    let e_total = EnergyBook::new(units.clone()).e_total(k);
    let kernel = kernel_matrix(e_total, units, n_hi, default_m_bar_max(n_hi), config)?;

    let u_lo = solve_with_kernel(k, units, &kernel.restricted(n_lo))?;
    let (r_lo, _, _) = totals(&channel_amplitudes(&u_lo, units));

    let u_hi = solve_with_kernel(k, units, &kernel)?;
    let ch = channel_amplitudes(&u_hi, units);
    let (reflectance, transmittance, unitarity_defect) = totals(&ch);
    let point = SpectrumPoint {
        omega_k: k,
        reflectance,
        transmittance,
        unitarity_defect,
        n_max_used: n_hi,
        converged: false,
        channels: ch,
    };
    Ok((r_lo, point))
}

/// Solve one incident frequency, convergence-checked and flagged.
pub fn compute_point<T: Real>(
    k: T,
    units: &NaturalUnits<T>,
    truncation: Truncation,
    config: &QuadratureConfig<T>,
) -> Result<SpectrumPoint<T>> {
    let n_base = match truncation {
        Truncation::Auto => default_n_max(units, k),
        Truncation::Fixed(n) => n,
    };
    let tol = T::of(R_CONV_TOL);

    let (r_lo, mut point) = solve_pair(k, units, n_base, n_base + 5, config)?;
    if (point.reflectance - r_lo).abs() < tol {
        point.converged = true;
        return Ok(point);
    }
    let (r_lo, mut point) = solve_pair(k, units, n_base + 10, n_base + 15, config)?;
    point.converged = (point.reflectance - r_lo).abs() < tol;
    Ok(point)
}

/// Solve every grid point of the request. Points come back in grid order and
/// bit-identically across repeated calls; hard failures (quadrature,
/// thresholds, singular systems) abort the sweep, convergence failures are
/// flagged on the point instead.
pub fn sweep<T: Real>(req: &SweepRequest<T>) -> Result<Vec<SpectrumPoint<T>>> {
    req.validate()?;
    let units = req.params.natural_units();
    let step = (req.omega_k_max - req.omega_k_min) / T::of_usize(req.n_points - 1);
    (0..req.n_points)
        .into_par_iter()
        .map(|i| {
            let k = req.omega_k_min + T::of_usize(i) * step;
            compute_point(k, &units, req.truncation, &req.quad)
        })
        .collect()
}

/// Strict interior maxima of the reflectance, filtered by prominence (height
/// above the higher of the two bases, scanning to the nearest higher point
/// or grid edge on each side).
pub fn find_peaks<T: Real>(
    points: &[SpectrumPoint<T>],
    units: &NaturalUnits<T>,
    min_prominence: T,
) -> Vec<Peak<T>> {
    let r: Vec<T> = points.iter().map(|p| p.reflectance).collect();
    let mut peaks = Vec::new();
    for i in 1..r.len().saturating_sub(1) {
        if !(r[i] > r[i - 1] && r[i] > r[i + 1]) {
            continue;
        }
        let mut left_min = r[i];
        for j in (0..i).rev() {
            if r[j] > r[i] {
                break;
            }
            left_min = left_min.min(r[j]);
        }
        let mut right_min = r[i];
        for j in (i + 1)..r.len() {
            if r[j] > r[i] {
                break;
            }
            right_min = right_min.min(r[j]);
        }
        let prominence = r[i] - left_min.max(right_min);
        if prominence < min_prominence {
            continue;
        }
        let location = points[i].omega_k;
        let raw = ((location - T::one()) / units.omega).round();
        let nearest = raw.to_f64().unwrap_or(0.0).max(0.0) as usize;
        let shift = location - (T::one() + T::of_usize(nearest) * units.omega);
        peaks.push(Peak {
            location,
            height: r[i],
            nearest_resonance_index: nearest,
            shift,
        });
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelAmplitudes;

    fn units(epsilon: f64, omega: f64, gamma: f64) -> NaturalUnits<f64> {
        ModelParams::new(epsilon, omega, gamma).unwrap().natural_units()
    }

    fn quad() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn point_converges_and_reports_the_high_truncation() {
        let u = units(0.8, 0.2, 0.05);
        let p = compute_point(1.3, &u, Truncation::Auto, &quad()).unwrap();
        assert!(p.converged);
        assert_eq!(p.n_max_used, default_n_max(&u, 1.3) + 5);
        assert!(p.unitarity_defect < 1e-9);
        assert!(p.reflectance > 0.0 && p.reflectance < 1.0);
        assert!((p.reflectance + p.transmittance - 1.0).abs() < 1e-9);
        assert_eq!(p.omega_k, 1.3);
    }

    #[test]
    fn pinned_truncation_still_gets_checked() {
        let u = units(0.8, 0.2, 0.05);
        let p = compute_point(1.3, &u, Truncation::Fixed(12), &quad()).unwrap();
        assert!(p.converged);
        assert_eq!(p.n_max_used, 17);
    }

    #[test]
    fn starved_truncation_is_flagged_not_hidden() {
        // ε = 2 populates far more levels than the pinned base offers; both
        // pairs must disagree and the point must come back flagged
        let u = units(2.0, 0.15, 0.05);
        let p = compute_point(1.7, &u, Truncation::Fixed(0), &quad()).unwrap();
        assert!(!p.converged);
        assert_eq!(p.n_max_used, 15);
        assert!(p.reflectance.is_finite());
    }

    #[test]
    fn zero_coupling_point_is_fully_transparent() {
        let mut u = units(0.3, 0.25, 0.05);
        u.j = 0.0;
        u.gamma = 0.0;
        let p = compute_point(1.1, &u, Truncation::Auto, &quad()).unwrap();
        assert_eq!(p.reflectance, 0.0);
        assert_eq!(p.transmittance, 1.0);
        assert_eq!(p.unitarity_defect, 0.0);
        assert!(p.converged);
    }

    #[test]
    fn sweep_is_ordered_uniform_and_deterministic() {
        let req = SweepRequest {
            params: ModelParams::new(0.3, 0.3, 0.1).unwrap(),
            omega_k_min: 1.21,
            omega_k_max: 1.41,
            n_points: 5,
            truncation: Truncation::Auto,
            quad: quad(),
        };
        let a = sweep(&req).unwrap();
        let b = sweep(&req).unwrap();
        assert_eq!(a.len(), 5);
        let step = (1.41 - 1.21) / 4.0;
        for (i, p) in a.iter().enumerate() {
            assert_eq!(p.omega_k, 1.21 + i as f64 * step);
            assert!(p.converged);
            assert_eq!(p.reflectance.to_bits(), b[i].reflectance.to_bits());
            assert_eq!(p.transmittance.to_bits(), b[i].transmittance.to_bits());
        }
    }

    #[test]
    fn rejects_malformed_requests() {
        let ok = SweepRequest {
            params: ModelParams::new(0.3, 0.25, 0.1).unwrap(),
            omega_k_min: 1.2,
            omega_k_max: 1.4,
            n_points: 5,
            truncation: Truncation::Auto,
            quad: quad(),
        };
        let bad = SweepRequest { omega_k_min: 0.0, ..ok.clone() };
        assert!(matches!(bad.validate(), Err(Error::InvalidSweep(_))));
        let bad = SweepRequest { omega_k_max: 1.1, ..ok.clone() };
        assert!(matches!(bad.validate(), Err(Error::InvalidSweep(_))));
        let bad = SweepRequest { n_points: 1, ..ok.clone() };
        assert!(matches!(bad.validate(), Err(Error::InvalidSweep(_))));
        assert!(ok.validate().is_ok());
    }

    fn synthetic(points: &[(f64, f64)]) -> Vec<SpectrumPoint<f64>> {
        points
            .iter()
            .map(|&(x, r)| SpectrumPoint {
                omega_k: x,
                reflectance: r,
                transmittance: 1.0 - r,
                unitarity_defect: 0.0,
                n_max_used: 0,
                converged: true,
                channels: ChannelAmplitudes { k_in: x, channels: vec![] },
            })
            .collect()
    }

    #[test]
    fn finds_labeled_peaks_with_prominence_filtering() {
        let lorentz = |x: f64, x0: f64, g: f64| g * g / ((x - x0) * (x - x0) + g * g);
        let n = 300;
        let grid: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let x = 0.7 + 1.1 * i as f64 / (n - 1) as f64;
                (x, lorentz(x, 1.0, 0.05) + 0.3 * lorentz(x, 1.42, 0.04))
            })
            .collect();
        let pts = synthetic(&grid);
        let u = units(0.4, 0.4, 0.05);

        let peaks = find_peaks(&pts, &u, 0.02);
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0].location - 1.0).abs() < 0.01);
        assert_eq!(peaks[0].nearest_resonance_index, 0);
        assert!(peaks[0].shift.abs() < 0.01);
        assert!((peaks[1].location - 1.42).abs() < 0.01);
        assert_eq!(peaks[1].nearest_resonance_index, 1);
        assert!((peaks[1].shift - 0.02).abs() < 0.01);
        assert!(peaks[0].height > peaks[1].height);

        // prominence gate drops the sideband
        let only_main = find_peaks(&pts, &u, 0.5);
        assert_eq!(only_main.len(), 1);
        assert!((only_main[0].location - 1.0).abs() < 0.01);
    }

    #[test]
    fn peak_labels_clamp_below_the_first_resonance() {
        // vertex deliberately off the grid's midpoint so one sample is a
        // strict maximum
        let grid: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = 0.6 + 0.2 * i as f64 / 49.0;
                (x, 0.5 - (x - 0.703) * (x - 0.703) * 10.0)
            })
            .collect();
        let pts = synthetic(&grid);
        let u = units(0.4, 0.4, 0.05);
        let peaks = find_peaks(&pts, &u, 0.01);
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].nearest_resonance_index, 0);
        assert!(peaks[0].shift < 0.0);
    }

    #[test]
    fn grid_edges_are_never_peaks() {
        let grid: Vec<(f64, f64)> = (0..20).map(|i| (1.0 + i as f64 * 0.01, 0.9)).collect();
        let pts = synthetic(&grid);
        let u = units(0.4, 0.4, 0.05);
        assert!(find_peaks(&pts, &u, 0.0).is_empty());
    }
}
