//! Truncated linear system for the excited-state amplitudes.
//!
//! With the photon continuum folded into the kernel `F`, the amplitude
//! `u_e(m)` for the emitter to be excited with `m` trap quanta satisfies
//!
//! ```text
//! (E − ω_{e,m}) u_e(m) − J Σ_n F(m,n) u_e(n) = s_m,
//! s_m = J ⟨m|e^{iαk X}|0⟩,
//! ```
//!
//! (`F` carries the other factor of `J`). Open channels give `Im F < 0`,
//! which keeps the system regular without any artificial broadening; a
//! residual check guards every solve a posteriori.

use num_complex::Complex;

use crate::fock::{displacement_element, Sign};
use crate::kernel::{default_m_bar_max, kernel_matrix, KernelMatrix};
use crate::linalg::{lu_solve, norm_inf, residual_inf, CMatrix};
use crate::model::{EnergyBook, NaturalUnits};
use crate::quad::QuadratureConfig;
use crate::{Error, Real, Result};

/// Relative residual bound accepted for a solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Excited-state amplitudes `u_e(m)` at a single incident wavenumber.
#[derive(Clone, Debug)]
pub struct ExcitedAmplitudes<T> {
    pub k_in: T,
    pub n_max: usize,
    /// `u_e(m)`, `m = 0..=n_max`.
    pub values: Vec<Complex<T>>,
    /// `‖A u − s‖_∞` of the accepted solution.
    pub residual_norm: T,
}

/// Source overlap of the incident photon with the trap ground state:
/// `s_m = J·⟨m|e^{iαk X}|0⟩`.
pub fn source_vector<T: Real>(k: T, units: &NaturalUnits<T>, n_max: usize) -> Vec<Complex<T>> {
    (0..=n_max)
        .map(|m| displacement_element(m, 0, units.alpha * k, Sign::Plus).scale(units.j))
        .collect()
}

/// Trap levels populated by recoil plus channels opened by the photon, with
/// fixed headroom: `⌈4ε² + (ω_k−Ω)/ω⌉ + 10`, clamped to `[10, 80]`.
pub fn default_n_max<T: Real>(units: &NaturalUnits<T>, omega_k: T) -> usize {
    let eps = units.alpha; // ε_LD in natural units (k_c = 1)
    let raw = T::of(4.0) * eps * eps + (omega_k - T::one()) / units.omega;
    let base = raw.ceil().to_f64().unwrap_or(0.0).max(0.0) as usize + 10;
    base.clamp(10, 80)
}

/// Solve for `u_e` reusing an already-built kernel (the kernel is the
/// expensive half; truncation-convergence checks share one).
pub fn solve_with_kernel<T: Real>(
    k: T,
    units: &NaturalUnits<T>,
    kernel: &KernelMatrix<T>,
) -> Result<ExcitedAmplitudes<T>> {
    let book = EnergyBook::new(units.clone());
    let e_total = book.e_total(k);
    let scale = T::one().max(kernel.e_total.abs());
    if (e_total - kernel.e_total).abs() > T::of(1e-12) * scale {
        return Err(Error::EnergyMismatch {
            kernel_energy: kernel.e_total.to_f64().unwrap_or(f64::NAN),
            requested: e_total.to_f64().unwrap_or(f64::NAN),
        });
    }

    let n_max = kernel.n_max;
    let s = source_vector(k, units, n_max);
    let mut a = CMatrix::zeros(n_max + 1, n_max + 1);
    a.add_scaled_complex(&kernel.values, Complex::new(-units.j, T::zero()));
    for m in 0..=n_max {
        a[(m, m)] += Complex::new(e_total - book.omega_em(m), T::zero());
    }

    let u = lu_solve(&a, &s)?;
    let residual_norm = residual_inf(&a, &u, &s);
    let bound = T::of(RESIDUAL_TOL) * norm_inf(&s);
    if residual_norm > bound {
        return Err(Error::ResidualTooLarge {
            residual: residual_norm.to_f64().unwrap_or(f64::NAN),
            bound: bound.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(ExcitedAmplitudes { k_in: k, n_max, values: u, residual_norm })
}

/// Build the kernel at `E(k)` (default intermediate headroom) and solve.
pub fn solve_excited_amplitudes<T: Real>(
    k: T,
    units: &NaturalUnits<T>,
    n_max: usize,
    config: &QuadratureConfig<T>,
) -> Result<ExcitedAmplitudes<T>> {
    let e_total = EnergyBook::new(units.clone()).e_total(k);
    let kernel = kernel_matrix(e_total, units, n_max, default_m_bar_max(n_max), config)?;
    solve_with_kernel(k, units, &kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use num_complex::Complex64;

    fn units(epsilon: f64, omega: f64, gamma: f64) -> NaturalUnits<f64> {
        ModelParams::new(epsilon, omega, gamma).unwrap().natural_units()
    }

    fn quad() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn source_matches_displacement_overlaps() {
        let u = units(0.8, 0.2, 0.05);
        let s = source_vector(1.3, &u, 6);
        assert_eq!(s.len(), 7);
        let beta = u.alpha * 1.3;
        assert!((s[0].re - u.j * (-beta * beta / 2.0).exp()).abs() < 1e-16);
        for (m, sm) in s.iter().enumerate() {
            let expect = displacement_element(m, 0, beta, Sign::Plus).scale(u.j);
            assert_eq!(*sm, expect);
        }
        // overlap completeness: Σ|s|²/J² → 1 with enough levels
        let s = source_vector(1.3, &u, 30);
        let total: f64 = s.iter().map(|v| v.norm_sqr()).sum::<f64>() / (u.j * u.j);
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_truncation_policy() {
        let u = units(0.8, 0.2, 0.05);
        assert_eq!(default_n_max(&u, 1.0), 13); // ⌈2.56⌉ + 10
        assert_eq!(default_n_max(&u, 2.0), 18); // ⌈2.56 + 5⌉ + 10
        let u = units(1e-3, 0.2, 0.05);
        assert_eq!(default_n_max(&u, 0.5), 10); // clamped from below
        let u = units(1.6, 0.1, 0.05);
        assert_eq!(default_n_max(&u, 8.0), 80); // clamped from above
    }

    #[test]
    fn zero_coupling_gives_zero_amplitudes() {
        let mut u = units(0.8, 0.2, 0.05);
        u.j = 0.0;
        u.gamma = 0.0;
        let out = solve_excited_amplitudes(1.3, &u, 10, &quad()).unwrap();
        for v in &out.values {
            assert_eq!(*v, Complex64::new(0.0, 0.0));
        }
        assert_eq!(out.residual_norm, 0.0);
    }

    #[test]
    fn narrow_trap_limit_is_a_single_lorentzian_pole() {
        // α → 0: u_e(m) → δ_{m,0}·J/(Δ + iΓ) up to a small real shift of Δ
        let u = units(1e-4, 0.2, 0.05);
        let out = solve_excited_amplitudes(1.05, &u, 10, &quad()).unwrap();
        let u0 = out.values[0];
        for v in &out.values[1..] {
            assert!(v.norm() < 1e-3 * u0.norm());
        }
        // J/u0 = Δ' + iΓ': width from the open-channel residue survives intact
        let inv = Complex64::new(u.j, 0.0) / u0;
        assert!((inv.im - u.gamma).abs() < 1e-4 * u.gamma, "{} vs {}", inv.im, u.gamma);
        let delta = 1.05 - 1.0;
        assert!((inv.re - delta).abs() < 5.0 * u.gamma, "shift {}", inv.re - delta);
    }

    #[test]
    fn solution_satisfies_the_system_reassembled_from_scratch() {
        let u = units(0.8, 0.2, 0.05);
        let n_max = 13;
        let k = 1.05;
        let out = solve_excited_amplitudes(k, &u, n_max, &quad()).unwrap();
        assert!(out.residual_norm <= RESIDUAL_TOL * norm_inf(&source_vector(k, &u, n_max)));

        // independent reconstruction of A·u − s
        let book = EnergyBook::new(u.clone());
        let e = book.e_total(k);
        let kernel =
            kernel_matrix(e, &u, n_max, default_m_bar_max(n_max), &quad()).unwrap();
        let s = source_vector(k, &u, n_max);
        let mut worst = 0.0f64;
        for m in 0..=n_max {
            let mut acc = Complex64::new(e - book.omega_em(m), 0.0) * out.values[m];
            for n in 0..=n_max {
                acc -= kernel.f(m, n) * out.values[n] * u.j;
            }
            worst = worst.max((acc - s[m]).norm());
        }
        assert!(worst < 1e-9 * norm_inf(&s), "fixed-point residual {worst}");
    }

    #[test]
    fn rejects_a_kernel_built_at_another_energy() {
        let u = units(0.8, 0.2, 0.05);
        let e = EnergyBook::new(u.clone()).e_total(1.3);
        let kernel = kernel_matrix(e, &u, 10, default_m_bar_max(10), &quad()).unwrap();
        assert!(matches!(
            solve_with_kernel(1.4, &u, &kernel),
            Err(Error::EnergyMismatch { .. })
        ));
    }

    #[test]
    fn doubling_the_coupling_scales_source_and_kernel_quadratically() {
        // structural weak-coupling scaling: s ∝ J, kernel shift ∝ J²
        let base = units(0.8, 0.2, 0.05);
        let mut twice = base.clone();
        twice.j *= 2.0;
        twice.gamma *= 4.0;
        let s1 = source_vector(1.3, &base, 5);
        let s2 = source_vector(1.3, &twice, 5);
        for (a, b) in s1.iter().zip(&s2) {
            assert!((b - a * 2.0).norm() < 1e-15 * b.norm().max(1e-300));
        }
        let e = EnergyBook::new(base.clone()).e_total(1.3);
        let k1 = kernel_matrix(e, &base, 3, default_m_bar_max(3), &quad()).unwrap();
        let k2 = kernel_matrix(e, &twice, 3, default_m_bar_max(3), &quad()).unwrap();
        for m in 0..=3 {
            for n in 0..=3 {
                let (a, b) = (k1.f(m, n), k2.f(m, n));
                assert!((b - a * 2.0).norm() <= 1e-10 * b.norm().max(1e-12));
            }
        }
    }
}
