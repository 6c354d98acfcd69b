//! Model inputs and energy bookkeeping.
//!
//! Natural units `Ω = υ_g = ħ = 1` throughout: the emitter splitting sets the
//! frequency scale and the group velocity the length scale, so the resonant
//! wavenumber is `k_c = Ω/υ_g = 1` and the zero-point spread `α = 1/√(2Mω)`
//! is fixed directly by the Lamb–Dicke parameter `ε_LD = α·k_c`. A run is
//! fully specified by three dimensionless ratios; the emitter mass never
//! appears.

use crate::{Error, Real, Result};

/// The three dimensionless inputs that define a model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    /// Lamb–Dicke parameter `ε_LD = α·k_c`.
    pub epsilon_ld: T,
    /// Trap frequency over emitter splitting, `ω/Ω`.
    pub omega_ratio: T,
    /// Spontaneous linewidth over emitter splitting, `Γ/Ω`.
    pub gamma_ratio: T,
}

/// Couplings and scales derived from [`ModelParams`], in natural units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NaturalUnits<T> {
    /// Zero-point spread of the trapped emitter, `α = ε_LD/k_c`.
    pub alpha: T,
    /// Trap frequency `ω` (units of `Ω`).
    pub omega: T,
    /// Photon–emitter coupling `J = √(Γ·υ_g/2π)`.
    pub j: T,
    /// Spontaneous linewidth `Γ` (units of `Ω`).
    pub gamma: T,
    /// Resonant wavenumber `k_c = Ω/υ_g = 1`.
    pub k_c: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(epsilon_ld: T, omega_ratio: T, gamma_ratio: T) -> Result<Self> {
        let params = Self { epsilon_ld, omega_ratio, gamma_ratio };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("epsilon_ld", self.epsilon_ld)?;
        check_positive("omega_ratio", self.omega_ratio)?;
        check_positive("gamma_ratio", self.gamma_ratio)
    }

    /// Derived couplings in natural units.
    pub fn natural_units(&self) -> NaturalUnits<T> {
        let k_c = T::one();
        NaturalUnits {
            alpha: self.epsilon_ld / k_c,
            omega: self.omega_ratio,
            j: j_from_gamma(self.gamma_ratio),
            gamma: self.gamma_ratio,
            k_c,
        }
    }
}

fn check_positive<T: Real>(name: &'static str, value: T) -> Result<()> {
    if !(value.is_finite() && value > T::zero()) {
        return Err(Error::InvalidParameter {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
            requirement: "finite and positive",
        });
    }
    Ok(())
}

/// Coupling from linewidth: `J = √(Γ·υ_g/2π)`.
pub fn j_from_gamma<T: Real>(gamma: T) -> T {
    (gamma / (T::of(2.0) * T::PI())).sqrt()
}

/// Linewidth from coupling: `Γ = 2πJ²/υ_g`.
pub fn gamma_from_j<T: Real>(j: T) -> T {
    T::of(2.0) * T::PI() * j * j
}

/// Energy bookkeeping for the three sectors of the single-excitation space.
///
/// A scattering state at incident wavenumber `k` (emitter in its motional
/// ground state) has total energy `E = ω_k + ω/2`; intermediate photon
/// states carry `ω_p + (n+½)ω` and excited emitter states `Ω + (m+½)ω`.
#[derive(Clone, Copy, Debug)]
pub struct EnergyBook<T> {
    units: NaturalUnits<T>,
}

impl<T: Real> EnergyBook<T> {
    pub fn new(units: NaturalUnits<T>) -> Self {
        Self { units }
    }

    /// Photon dispersion `ω_k = υ_g|k|`.
    pub fn photon_frequency(&self, k: T) -> T {
        k.abs()
    }

    /// Total energy of the incident state, `E = ω_k + ω/2`.
    pub fn e_total(&self, k: T) -> T {
        self.photon_frequency(k) + self.units.omega * T::of(0.5)
    }

    /// Energy of a photon + `n`-phonon ground-sector state, `ω_p + (n+½)ω`.
    pub fn omega_pn(&self, p: T, n: usize) -> T {
        self.photon_frequency(p) + (T::of_usize(n) + T::of(0.5)) * self.units.omega
    }

    /// Energy of an excited emitter with `m` phonons, `Ω + (m+½)ω`.
    pub fn omega_em(&self, m: usize) -> T {
        T::one() + (T::of_usize(m) + T::of(0.5)) * self.units.omega
    }
}
