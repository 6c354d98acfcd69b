//! Closed-form scattering in the frozen-trap (Lamb–Dicke) limit.
//!
//! When the recoil parameter vanishes the motion decouples and the emitter
//! acts as a structureless two-level scatterer:
//!
//! ```text
//! t(ω_k) = Δ/(Δ + iΓ),   r(ω_k) = −iΓ/(Δ + iΓ),   Δ = ω_k − Ω,
//! R(ω_k) = Γ²/(Δ² + Γ²)  — a Lorentzian of FWHM 2Γ with R(Ω) = 1.
//! ```
//!
//! This module is an independent reference path: it shares no code with the
//! kernel/solver machinery it validates, only plain arithmetic.

use num_complex::Complex;

use crate::{Error, Real, Result};

/// Parameters of the limiting Lorentzian line: emitter splitting and width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianSpectrum<T> {
    pub omega_tls: T,
    pub gamma: T,
}

/// `(t, r)` at incident frequency `omega_k`.
pub fn ld_amplitudes<T: Real>(
    omega_k: T,
    omega_tls: T,
    gamma: T,
) -> (Complex<T>, Complex<T>) {
    let delta = omega_k - omega_tls;
    let denom = Complex::new(delta, gamma);
    let t = Complex::new(delta, T::zero()) / denom;
    let r = Complex::new(T::zero(), -gamma) / denom;
    (t, r)
}

/// `R(ω_k) = Γ²/(Δ² + Γ²)`.
pub fn ld_reflectance<T: Real>(omega_k: T, omega_tls: T, gamma: T) -> T {
    let delta = omega_k - omega_tls;
    gamma * gamma / (delta * delta + gamma * gamma)
}

impl<T: Real> LorentzianSpectrum<T> {
    pub fn new(omega_tls: T, gamma: T) -> Result<Self> {
        if !(gamma.is_finite() && gamma > T::zero()) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: gamma.to_f64().unwrap_or(f64::NAN),
                requirement: "must be finite and > 0",
            });
        }
        if !omega_tls.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega_tls",
                value: omega_tls.to_f64().unwrap_or(f64::NAN),
                requirement: "must be finite",
            });
        }
        Ok(Self { omega_tls, gamma })
    }

    pub fn amplitudes(&self, omega_k: T) -> (Complex<T>, Complex<T>) {
        ld_amplitudes(omega_k, self.omega_tls, self.gamma)
    }

    pub fn reflectance(&self, omega_k: T) -> T {
        ld_reflectance(omega_k, self.omega_tls, self.gamma)
    }

    pub fn transmittance(&self, omega_k: T) -> T {
        T::one() - self.reflectance(omega_k)
    }

    pub fn fwhm(&self) -> T {
        T::of(2.0) * self.gamma
    }
}
