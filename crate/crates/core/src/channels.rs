//! Outgoing-channel amplitudes and the reflection/transmission bookkeeping.
//!
//! A photon leaving the emitter with `n` trap quanta excited has wavenumber
//! `k_n = k − nω` (energy `nω` went into the motion). The outgoing state is
//! *mixed* across `n` — the photon is entangled with the motion — so channel
//! amplitudes are kept index-separated and only their probabilities are
//! summed:
//!
//! ```text
//! t_n = δ_{n,0} + θ(k_n)·(−i2πJ)·Σ_m u_e(m)·⟨n|e^{−iαk_n X}|m⟩
//! r_n =           θ(k_n)·(−i2πJ)·Σ_m u_e(m)·⟨n|e^{+iαk_n X}|m⟩
//! R = Σ|r_n|²,  T = Σ|t_n|²,  defect = |R + T − 1|.
//! ```
//!
//! The defect is the end-to-end error metric: the kernel's pole residues are
//! built from the same displacement elements as these vertices, so `R + T`
//! stays at 1 to solver round-off at any truncation, and a visible defect
//! means flux escaped into channels above `n_max`.

use num_complex::Complex;

use crate::fock::{displacement_element, Sign};
use crate::model::NaturalUnits;
use crate::solver::ExcitedAmplitudes;
use crate::{Error, Real, Result};

/// One outgoing channel: the photon leaves with `n` trap quanta excited.
#[derive(Clone, Debug)]
pub struct Channel<T> {
    pub n: usize,
    /// Outgoing wavenumber `k − nω` (may be ≤ 0 for closed channels).
    pub k_n: T,
    /// Channel carries flux: `k_n > 0` strictly (zero counts as closed).
    pub open: bool,
    pub t: Complex<T>,
    pub r: Complex<T>,
}

/// All channels `n = 0..=n_max` for one incident wavenumber.
#[derive(Clone, Debug)]
pub struct ChannelAmplitudes<T> {
    pub k_in: T,
    pub channels: Vec<Channel<T>>,
}

impl<T: Real> ChannelAmplitudes<T> {
    pub fn open_count(&self) -> usize {
        self.channels.iter().filter(|c| c.open).count()
    }
}

/// Scattering amplitudes per outgoing channel from the excited-state
/// amplitudes.
pub fn channel_amplitudes<T: Real>(
    u: &ExcitedAmplitudes<T>,
    units: &NaturalUnits<T>,
) -> ChannelAmplitudes<T> {
    let k = u.k_in;
    let zero = Complex::new(T::zero(), T::zero());
    let coupling = Complex::new(T::zero(), -T::of(2.0) * T::PI() * units.j);
    let channels = (0..=u.n_max)
        .map(|n| {
            let k_n = k - T::of_usize(n) * units.omega;
            let open = k_n > T::zero();
            let forward = if n == 0 { Complex::new(T::one(), T::zero()) } else { zero };
            if !open {
                return Channel { n, k_n, open, t: forward, r: zero };
            }
            let beta = units.alpha * k_n;
            let mut t_sum = zero;
            let mut r_sum = zero;
            for (m, &u_m) in u.values.iter().enumerate() {
                t_sum += u_m * displacement_element(n, m, beta, Sign::Minus);
                r_sum += u_m * displacement_element(n, m, beta, Sign::Plus);
            }
            Channel { n, k_n, open, t: forward + coupling * t_sum, r: coupling * r_sum }
        })
        .collect();
    ChannelAmplitudes { k_in: k, channels }
}

/// `(R, T, |R + T − 1|)`: total reflectance, transmittance, unitarity defect.
pub fn totals<T: Real>(ch: &ChannelAmplitudes<T>) -> (T, T, T) {
    let mut r = T::zero();
    let mut t = T::zero();
    for c in &ch.channels {
        r += c.r.norm_sqr();
        t += c.t.norm_sqr();
    }
    (r, t, (r + t - T::one()).abs())
}

/// Frequency of the photon leaving through open channel `n`: `ω_k − nω`.
pub fn outgoing_frequency<T: Real>(
    n: usize,
    k: T,
    units: &NaturalUnits<T>,
) -> Result<T> {
    let k_n = k - T::of_usize(n) * units.omega;
    if k_n > T::zero() {
        Ok(k_n)
    } else {
        Err(Error::ClosedChannel { n })
    }
}

/// One fully-processed point of a reflection/transmission spectrum.
#[derive(Clone, Debug)]
pub struct SpectrumPoint<T> {
    /// Incident frequency in units of the emitter splitting (`= k` here).
    pub omega_k: T,
    pub reflectance: T,
    pub transmittance: T,
    pub unitarity_defect: T,
    /// Truncation the reported point was solved at.
    pub n_max_used: usize,
    /// Truncation convergence check passed (see `spectrum`); points that
    /// failed are reported anyway, flagged here.
    pub converged: bool,
    pub channels: ChannelAmplitudes<T>,
}
