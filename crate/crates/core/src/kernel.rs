//! Photon-mediated self-energy kernel of the trapped emitter.
//!
//! Eliminating the single-photon continuum from the scattering equations
//! leaves the excited-state amplitudes coupled through
//!
//! ```text
//! F(m,n) = J · Σ_{m̄} ∫ dp  ⟨m|e^{iαpX}|m̄⟩ ⟨m̄|e^{−iαpX}|n⟩
//!                          ─────────────────────────────────,   X = a† + a,
//!                              E − ω_{p,m̄} + i0⁺
//! ```
//!
//! one factor of the coupling `J` included here and one applied by the
//! solver. The `i0⁺` prescription is split per intermediate level `m̄`:
//! a principal value handled by pole subtraction plus `−iπ` times the
//! residue at each momentum pole.
//!
//! Structure that the evaluation leans on, writing `v_m(p) = ⟨m|e^{iαpX}|m̄⟩`:
//!
//! * `p → −p` flips `v_m` by `(−1)^{|m−m̄|}`, so after folding the line
//!   integral onto `[0, L]` the entries with `m+n` odd cancel exactly and the
//!   even ones double. `F` is checkerboard-sparse.
//! * On the surviving entries `v_m v̄_n` is purely real (the `i^{|m−m̄|}`
//!   phases combine to `±1`), so the principal value is real and the entire
//!   imaginary part of `F` comes from the pole residues. Unitarity of the
//!   scattering amplitudes downstream therefore holds to solver round-off at
//!   *any* truncation, independent of quadrature error.
//!
//! All `(m,n)` pairs share each quadrature node through a matrix-valued
//! integrand, which amortizes the displacement-element evaluations.

use num_complex::Complex;
use rayon::prelude::*;

use crate::fock::laguerre_assoc;
use crate::linalg::CMatrix;
use crate::model::NaturalUnits;
use crate::quad::{integrate, QuadratureConfig, QuadValue};
use crate::{Error, Real, Result};

/// Self-energy matrix `F(m,n)` at a fixed total energy.
#[derive(Clone, Debug)]
pub struct KernelMatrix<T> {
    /// Total energy `E` the kernel was evaluated at (incident photon plus
    /// ground-state trap energy).
    pub e_total: T,
    /// External indices run over `0..=n_max`.
    pub n_max: usize,
    /// Intermediate trap levels summed over `0..=m_bar_max`.
    pub m_bar_max: usize,
    /// `F(m,n)`, single power of `J` included.
    pub values: CMatrix<T>,
}

impl<T: Real> KernelMatrix<T> {
    pub fn f(&self, m: usize, n: usize) -> Complex<T> {
        self.values[(m, n)]
    }

    /// Top-left block of the same kernel at a smaller external truncation.
    /// Used to check truncation convergence without paying for the
    /// integrals twice.
    pub fn restricted(&self, n_max: usize) -> Self {
        assert!(n_max <= self.n_max);
        Self {
            e_total: self.e_total,
            n_max,
            m_bar_max: self.m_bar_max,
            values: CMatrix::from_fn(n_max + 1, n_max + 1, |m, n| self.values[(m, n)]),
        }
    }
}

/// Momentum `p* > 0` where `E − ω_{p,m̄}` vanishes, if the channel is open.
///
/// `p* = 0` counts as closed: a zero-momentum pole sits on the fold boundary
/// and carries no outgoing flux.
pub fn open_channel_momentum<T: Real>(
    e_total: T,
    units: &NaturalUnits<T>,
    m_bar: usize,
) -> Option<T> {
    let e_rel = relative_energy(e_total, units, m_bar);
    (e_rel > T::zero()).then_some(e_rel)
}

/// `E − (m̄+½)ω`: the photon energy left over in intermediate level `m̄`.
fn relative_energy<T: Real>(e_total: T, units: &NaturalUnits<T>, m_bar: usize) -> T {
    e_total - (T::of_usize(m_bar) + T::of(0.5)) * units.omega
}

/// Upper momentum cutoff: past the largest open-channel pole (with headroom)
/// and past the Gaussian support `e^{−(αp)²/2}` of the recoil overlaps, whose
/// tail beyond `αp = 8` is below 1e−14.
pub fn momentum_cutoff<T: Real>(e_total: T, units: &NaturalUnits<T>, config: &QuadratureConfig<T>) -> T {
    let k_max = e_total - units.omega * T::of(0.5);
    (k_max * (T::one() + config.domain_pad)).max(T::of(8.0) / units.alpha)
}

/// Default headroom of intermediate levels above the external truncation.
pub fn default_m_bar_max(n_max: usize) -> usize {
    n_max + 15
}

/// `√(lo!/hi!)` for all `0 ≤ lo ≤ hi ≤ max_level`, built once per kernel.
///
/// Stored directly (not in logs): the ratio is ≤ 1 and stays above f64
/// underflow for every level this engine can reach.
struct RatioTable<T> {
    max_level: usize,
    data: Vec<T>,
}

impl<T: Real> RatioTable<T> {
    fn new(max_level: usize) -> Self {
        let n = max_level + 1;
        let mut data = vec![T::one(); n * n];
        for lo in 0..n {
            for hi in (lo + 1)..n {
                data[lo * n + hi] = data[lo * n + hi - 1] / T::of_usize(hi).sqrt();
            }
        }
        Self { max_level, data }
    }

    #[inline]
    fn get(&self, lo: usize, hi: usize) -> T {
        debug_assert!(lo <= hi && hi <= self.max_level);
        self.data[lo * (self.max_level + 1) + hi]
    }
}

/// The folded two-vertex overlap matrix
/// `G(i,j) = 2·v_i(β) v̄_j(β)` on even `i+j`, zero on odd, at `β = αp`.
///
/// Each `v_i = i^{a} (β^a √(lo!/hi!) e^{−β²/2} L^a_lo(β²))` with
/// `a = |i−m̄|` splits into an exact quarter-cycle phase and a real
/// magnitude, so every surviving entry is real and the matrix is exactly
/// symmetric.
fn g_block<T: Real>(
    indices: &[usize],
    m_bar: usize,
    beta: T,
    ratios: &RatioTable<T>,
) -> CMatrix<T> {
    let x = beta * beta;
    let gauss_half = (-x * T::of(0.5)).exp();
    let a_max = indices.iter().map(|&i| i.abs_diff(m_bar)).max().unwrap_or(0);
    let mut pow = Vec::with_capacity(a_max + 1);
    pow.push(T::one());
    for a in 1..=a_max {
        let prev = pow[a - 1];
        pow.push(prev * beta); // signed β^a keeps the p → −p parity exact
    }

    let k = indices.len();
    let mut mag = vec![T::zero(); k];
    let mut phase = vec![0u8; k];
    for (t, &idx) in indices.iter().enumerate() {
        let a = idx.abs_diff(m_bar);
        let lo = idx.min(m_bar);
        let hi = idx.max(m_bar);
        mag[t] = pow[a] * ratios.get(lo, hi) * gauss_half * laguerre_assoc(lo, a, x);
        phase[t] = (a % 4) as u8;
    }

    let mut g = CMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            if (indices[i] + indices[j]) % 2 != 0 {
                continue;
            }
            let r = T::of(2.0) * mag[i] * mag[j];
            // i^{a_i − a_j}: same index parity ⇒ always ±1, never ±i
            let v = match (phase[i] + 4 - phase[j]) % 4 {
                0 => Complex::new(r, T::zero()),
                1 => Complex::new(T::zero(), r),
                2 => Complex::new(-r, T::zero()),
                _ => Complex::new(T::zero(), -r),
            };
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

/// Contribution of intermediate level `m̄` to the kernel block over
/// `indices`, *without* the overall factor `J`:
///
/// ```text
/// ∫₀^L (G(p) − G(p̃)) / (p̃ − p) dp  +  G(p̃)·ln(|p̃|/(L−p̃))  −  iπ·G(p̃)·[p̃ > 0]
/// ```
///
/// with `p̃ = E − (m̄+½)ω`. The log term is the subtracted pole integrated in
/// closed form (valid for open and closed channels alike); the subtraction is
/// skipped when the pole weight vanishes inside this block, which also covers
/// `p̃ = 0` thresholds that sit above `indices`.
fn block_term<T: Real>(
    indices: &[usize],
    m_bar: usize,
    e_total: T,
    units: &NaturalUnits<T>,
    config: &QuadratureConfig<T>,
    ratios: &RatioTable<T>,
    context: &str,
) -> Result<CMatrix<T>> {
    let p_tilde = relative_energy(e_total, units, m_bar);
    let cutoff = momentum_cutoff(e_total, units, config);
    let alpha = units.alpha;

    let g_pole = g_block(indices, m_bar, alpha * p_tilde, ratios);
    let subtract = g_pole.max_abs() > T::zero();
    if p_tilde == T::zero() && subtract {
        // exact channel threshold with an in-block vertex: log-divergent
        return Err(Error::ThresholdSingularity { m_bar });
    }

    let scale = T::one().max(p_tilde.abs());
    let guard = T::of(1e-8) * scale;
    let h = T::of(1e-5) * scale;
    let integrand = |p: T| -> CMatrix<T> {
        if subtract {
            let d = p_tilde - p;
            if d.abs() < guard {
                // removable point: (G(p)−G(p̃))/(p̃−p) → −G′(p̃)
                let mut diff = g_block(indices, m_bar, alpha * (p_tilde - h), ratios);
                let upper = g_block(indices, m_bar, alpha * (p_tilde + h), ratios);
                diff.add_scaled(&upper, -T::one());
                let mut out = diff.zero_like();
                out.add_scaled(&diff, (T::of(2.0) * h).recip());
                out
            } else {
                let mut diff = g_block(indices, m_bar, alpha * p, ratios);
                diff.add_scaled(&g_pole, -T::one());
                let mut out = diff.zero_like();
                out.add_scaled(&diff, d.recip());
                out
            }
        } else {
            let g = g_block(indices, m_bar, alpha * p, ratios);
            let mut out = g.zero_like();
            out.add_scaled(&g, (p_tilde - p).recip());
            out
        }
    };

    let mut term = integrate(integrand, T::zero(), cutoff, config, context)?;
    if subtract {
        let log_coef = (p_tilde.abs() / (cutoff - p_tilde)).ln();
        term.add_scaled(&g_pole, log_coef);
        if p_tilde > T::zero() {
            term.add_scaled_complex(&g_pole, Complex::new(T::zero(), -T::PI()));
        }
    }
    Ok(term)
}

/// Single `(m, n, m̄)` contribution to `F`, factor `J` included.
///
/// Exactly zero for odd `m+n` (the two half-lines cancel); purely real for
/// closed `m̄` (no pole on the contour).
pub fn kernel_term<T: Real>(
    m: usize,
    n: usize,
    m_bar: usize,
    e_total: T,
    units: &NaturalUnits<T>,
    config: &QuadratureConfig<T>,
) -> Result<Complex<T>> {
    config.validate()?;
    let ratios = RatioTable::new(m.max(n).max(m_bar));
    let context = format!("kernel term (m={m}, n={n}, m\u{304}={m_bar}, E={e_total})");
    let (indices, at): (Vec<usize>, (usize, usize)) =
        if m == n { (vec![m], (0, 0)) } else { (vec![m, n], (0, 1)) };
    let term = block_term(&indices, m_bar, e_total, units, config, &ratios, &context)?;
    Ok(term[at].scale(units.j))
}

/// Assemble `F(m,n) = Σ_{m̄=0}^{m_bar_max}` of the per-level terms over the
/// full block `0 ≤ m,n ≤ n_max`.
///
/// Levels are evaluated independently (in parallel) and reduced in index
/// order, so results are deterministic. On a quadrature failure the offending
/// level is re-run entry by entry to name the failing `(m, n, m̄)`.
pub fn kernel_matrix<T: Real>(
    e_total: T,
    units: &NaturalUnits<T>,
    n_max: usize,
    m_bar_max: usize,
    config: &QuadratureConfig<T>,
) -> Result<KernelMatrix<T>> {
    config.validate()?;
    if m_bar_max < n_max {
        return Err(Error::TruncationMismatch { requested: n_max, available: m_bar_max });
    }
    let indices: Vec<usize> = (0..=n_max).collect();
    let ratios = RatioTable::new(m_bar_max.max(n_max));

    let terms: Result<Vec<CMatrix<T>>> = (0..=m_bar_max)
        .into_par_iter()
        .map(|m_bar| {
            let context = format!("kernel block (m\u{304}={m_bar}, E={e_total}, n_max={n_max})");
            block_term(&indices, m_bar, e_total, units, config, &ratios, &context).map_err(
                |block_err| match block_err {
                    Error::QuadratureDidNotConverge { .. } => {
                        locate_failing_entry(n_max, m_bar, e_total, units, config)
                            .unwrap_or(block_err)
                    }
                    other => other,
                },
            )
        })
        .collect();

    let mut values = CMatrix::zeros(n_max + 1, n_max + 1);
    for term in terms? {
        values.add_scaled(&term, units.j);
    }
    Ok(KernelMatrix { e_total, n_max, m_bar_max, values })
}

/// Error-path refinement: replay level `m_bar` entry by entry and return the
/// first per-entry quadrature failure, if one reproduces.
fn locate_failing_entry<T: Real>(
    n_max: usize,
    m_bar: usize,
    e_total: T,
    units: &NaturalUnits<T>,
    config: &QuadratureConfig<T>,
) -> Option<Error> {
    for m in 0..=n_max {
        for n in m..=n_max {
            if let Err(e) = kernel_term(m, n, m_bar, e_total, units, config) {
                return Some(e);
            }
        }
    }
    None
}
