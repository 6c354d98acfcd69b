//! Single-photon transport through a two-level emitter held in a harmonic
//! trap, with the emitter's recoil treated exactly.
//!
//! An incident photon couples the emitter's internal transition to its
//! motional ladder: absorption and emission kick the trapped emitter, so the
//! photon can scatter elastically (channel n = 0) or leave `n` phonons behind
//! and exit red-shifted by `n·ω`. The crate solves the coupled-channel
//! scattering problem for the excited-state amplitudes, extracts per-channel
//! reflection/transmission amplitudes, and assembles spectra, with the
//! point-scatterer (Lamb–Dicke) limit kept as an independent analytic
//! reference.
//!
//! Everything works in natural units `Ω = υ_g = ħ = 1` and is generic over
//! the floating-point scalar; the `*64` aliases below fix `f64` for ordinary
//! use. Module layout follows the pipeline:
//!
//! * [`model`] — input ratios, derived couplings, energy bookkeeping
//! * [`fock`] — displacement-operator matrix elements on the trap ladder
//! * [`quad`] — adaptive Gauss–Kronrod integration (vector-valued)
//! * [`kernel`] — photon-loop kernel F(m,n) with principal-value handling
//! * [`linalg`] — dense complex LU for the channel-coupled linear system
//! * [`solver`] — excited-state amplitudes u_e(m)
//! * [`channels`] — per-channel amplitudes, reflectance/transmittance, unitarity
//! * [`limits`] — closed-form Lamb–Dicke-limit Lorentzian
//! * [`spectrum`] — energy sweeps, convergence policy, peak finding

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, RemAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

pub mod channels;
mod error;
pub mod fock;
pub mod kernel;
pub mod limits;
pub mod linalg;
pub mod model;
pub mod quad;
pub mod solver;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex;

/// Floating-point scalar the engine is generic over (`f32`, `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + RemAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Conversion from an `f64` literal; rounds on narrower scalars.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal converts")
    }

    /// Conversion from an index/count.
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts")
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + RemAssign
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

pub type C64 = Complex<f64>;
pub type ModelParams64 = model::ModelParams<f64>;
pub type NaturalUnits64 = model::NaturalUnits<f64>;
pub type EnergyBook64 = model::EnergyBook<f64>;
pub type QuadratureConfig64 = quad::QuadratureConfig<f64>;
pub type KernelMatrix64 = kernel::KernelMatrix<f64>;
pub type ExcitedAmplitudes64 = solver::ExcitedAmplitudes<f64>;
pub type ChannelAmplitudes64 = channels::ChannelAmplitudes<f64>;
pub type SpectrumPoint64 = channels::SpectrumPoint<f64>;
pub type LorentzianSpectrum64 = limits::LorentzianSpectrum<f64>;
pub type SweepRequest64 = spectrum::SweepRequest<f64>;
pub type Peak64 = spectrum::Peak<f64>;
