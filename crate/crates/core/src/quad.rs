//! Adaptive Gauss–Kronrod quadrature for vector-valued integrands.
//!
//! The scattering kernel integrates a *matrix* of pole-subtracted couplings
//! over photon momentum; evaluating all entries on shared nodes amortizes the
//! displacement-element work. The driver is therefore generic over any value
//! that supports scaled accumulation ([`QuadValue`]), with the usual
//! bisect-the-worst-panel strategy on the ∞-norm of the embedded-rule error.

use num_complex::Complex;

use crate::{Error, Real, Result};

/// Values an integral can accumulate: complex scalars, kernel matrices, …
pub trait QuadValue<T: Real>: Clone {
    fn zero_like(&self) -> Self;
    /// `self += c · rhs`
    fn add_scaled(&mut self, rhs: &Self, c: T);
    /// Componentwise ∞-norm.
    fn max_abs(&self) -> T;
}

impl<T: Real> QuadValue<T> for Complex<T> {
    fn zero_like(&self) -> Self {
        Complex::new(T::zero(), T::zero())
    }

    fn add_scaled(&mut self, rhs: &Self, c: T) {
        self.re += rhs.re * c;
        self.im += rhs.im * c;
    }

    fn max_abs(&self) -> T {
        self.re.abs().max(self.im.abs())
    }
}

/// Tolerances and limits shared by every integral in a kernel build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig<T> {
    /// Absolute tolerance on the accumulated error estimate.
    pub abs_tol: T,
    /// Relative tolerance, scaled by the ∞-norm of the running total.
    pub rel_tol: T,
    /// Panel budget per integral before giving up.
    pub max_subdivisions: usize,
    /// Fractional headroom the kernel adds above the incoming momentum when
    /// it truncates the radial momentum integral.
    pub domain_pad: T,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::of(1e-10),
            rel_tol: T::of(1e-10),
            max_subdivisions: 4000,
            domain_pad: T::of(0.5),
        }
    }
}

impl<T: Real> QuadratureConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, v: T, ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                    requirement: "must be finite and > 0",
                })
            }
        };
        check("abs_tol", self.abs_tol, self.abs_tol.is_finite() && self.abs_tol > T::zero())?;
        check("rel_tol", self.rel_tol, self.rel_tol.is_finite() && self.rel_tol > T::zero())?;
        check(
            "max_subdivisions",
            T::of_usize(self.max_subdivisions),
            self.max_subdivisions > 0,
        )?;
        check(
            "domain_pad",
            self.domain_pad,
            self.domain_pad.is_finite() && self.domain_pad > T::zero(),
        )?;
        Ok(())
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
// Abscissae are symmetric; only the non-negative half is stored.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// One Gauss–Kronrod panel over `[a, b]`: returns the Kronrod estimate and
/// the `‖K − G‖_∞ · |b − a|/2` error bound.
fn gk15_panel<T, V, F>(f: &mut F, a: T, b: T) -> (V, T)
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    let half = (b - a) * T::of(0.5);
    let center = (a + b) * T::of(0.5);
    let fc = f(center);
    let mut kron = fc.zero_like();
    let mut gauss = fc.zero_like();
    kron.add_scaled(&fc, T::of(WGK[7]));
    gauss.add_scaled(&fc, T::of(WG[3]));
    for j in 0..7 {
        let dx = half * T::of(XGK[j]);
        let mut pair = f(center - dx);
        let right = f(center + dx);
        pair.add_scaled(&right, T::one());
        kron.add_scaled(&pair, T::of(WGK[j]));
        if j % 2 == 1 {
            // odd-indexed Kronrod nodes carry the embedded 7-point Gauss rule
            gauss.add_scaled(&pair, T::of(WG[j / 2]));
        }
    }
    let mut diff = kron.clone();
    diff.add_scaled(&gauss, -T::one());
    let err = diff.max_abs() * half.abs();
    let mut scaled = kron.zero_like();
    scaled.add_scaled(&kron, half);
    (scaled, err)
}

struct Panel<T, V> {
    a: T,
    b: T,
    value: V,
    err: T,
}

/// Integrate `f` over `[a, b]` to `max(abs_tol, rel_tol·‖I‖_∞)`.
///
/// The running total is tracked incrementally to pick panels, but the
/// returned value is a fresh sum over all final panels so that the split
/// history leaves no round-off residue. `context` names the integral in the
/// failure report.
pub fn integrate<T, V, F>(
    mut f: F,
    a: T,
    b: T,
    config: &QuadratureConfig<T>,
    context: &str,
) -> Result<V>
where
    T: Real,
    V: QuadValue<T>,
    F: FnMut(T) -> V,
{
    config.validate()?;
    let (value, err) = gk15_panel(&mut f, a, b);
    let mut total = value.clone();
    let mut err_sum = err;
    let mut panels = vec![Panel { a, b, value, err }];

    loop {
        let tol = config.abs_tol.max(config.rel_tol * total.max_abs());
        if err_sum <= tol {
            let mut fresh = total.zero_like();
            for p in &panels {
                fresh.add_scaled(&p.value, T::one());
            }
            return Ok(fresh);
        }
        if panels.len() >= config.max_subdivisions {
            return Err(Error::QuadratureDidNotConverge {
                error: err_sum.to_f64().unwrap_or(f64::NAN),
                tolerance: tol.to_f64().unwrap_or(f64::NAN),
                panels: panels.len(),
                context: context.to_owned(),
            });
        }

        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if !(p.err <= panels[worst].err) {
                worst = i;
            }
        }
        let Panel { a, b, value, err } = panels.swap_remove(worst);
        let mid = (a + b) * T::of(0.5);
        if mid <= a || mid >= b {
            // interval no longer splittable in this precision
            return Err(Error::QuadratureDidNotConverge {
                error: err_sum.to_f64().unwrap_or(f64::NAN),
                tolerance: tol.to_f64().unwrap_or(f64::NAN),
                panels: panels.len() + 1,
                context: context.to_owned(),
            });
        }
        let (lv, le) = gk15_panel(&mut f, a, mid);
        let (rv, re) = gk15_panel(&mut f, mid, b);
        total.add_scaled(&value, -T::one());
        total.add_scaled(&lv, T::one());
        total.add_scaled(&rv, T::one());
        err_sum = err_sum - err + le + re;
        panels.push(Panel { a, b: mid, value: lv, err: le });
        panels.push(Panel { a: mid, b, value: rv, err: re });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn cfg() -> QuadratureConfig<f64> {
        QuadratureConfig::default()
    }

    #[test]
    fn kronrod_is_exact_on_low_degree_polynomials() {
        // 15-point Kronrod integrates degree ≤ 22 exactly
        let mut f = |x: f64| Complex64::new(x.powi(10) - 3.0 * x.powi(7) + x, 0.0);
        let (v, err) = gk15_panel(&mut f, 0.0, 2.0);
        let exact = 2.0f64.powi(11) / 11.0 - 3.0 * 2.0f64.powi(8) / 8.0 + 2.0;
        assert!((v.re - exact).abs() < 1e-12 * exact.abs());
        assert!(err < 1e-10);
    }

    #[test]
    fn arctangent_integral() {
        let v = integrate(
            |x: f64| Complex64::new(1.0 / (1.0 + x * x), 0.0),
            0.0,
            1.0,
            &cfg(),
            "arctan",
        )
        .unwrap();
        assert!((v.re - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn oscillatory_complex_integrand() {
        // ∫₀^{6π} e^{ix} dx = 0
        let v = integrate(
            |x: f64| Complex64::new(x.cos(), x.sin()),
            0.0,
            6.0 * std::f64::consts::PI,
            &cfg(),
            "osc",
        )
        .unwrap();
        assert!(v.norm() < 1e-10, "{v}");
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // nodes are interior, so adaptive bisection reaches ∫₀¹ ln x dx = −1
        let v = integrate(
            |x: f64| Complex64::new(x.ln(), 0.0),
            0.0,
            1.0,
            &cfg(),
            "log",
        )
        .unwrap();
        assert!((v.re + 1.0).abs() < 1e-9, "{}", v.re);
    }

    #[test]
    fn relative_tolerance_branch() {
        let config = QuadratureConfig { abs_tol: 1e-300, rel_tol: 1e-12, ..cfg() };
        let v = integrate(
            |x: f64| Complex64::new(1e8 * x.sin(), 0.0),
            0.0,
            std::f64::consts::PI,
            &config,
            "scaled sine",
        )
        .unwrap();
        assert!((v.re - 2e8).abs() < 1e-12 * 2e8);
    }

    #[test]
    fn reports_nonconvergence_with_context() {
        let config = QuadratureConfig { max_subdivisions: 10, ..cfg() };
        let err = integrate(
            |x: f64| Complex64::new((x - 0.5f64.sqrt()).abs().powf(-0.9), 0.0),
            0.0,
            1.0,
            &config,
            "interior algebraic singularity",
        )
        .unwrap_err();
        match err {
            Error::QuadratureDidNotConverge { panels, ref context, .. } => {
                assert_eq!(panels, 10);
                assert!(context.contains("algebraic"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let bad = QuadratureConfig { domain_pad: 0.0, ..cfg() };
        assert!(matches!(
            bad.validate(),
            Err(Error::InvalidParameter { name: "domain_pad", .. })
        ));
        let bad = QuadratureConfig { abs_tol: -1.0, ..cfg() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn works_at_f32() {
        let v = integrate(
            |x: f32| Complex::new(x * x, 0.0f32),
            0.0f32,
            1.0,
            &QuadratureConfig { abs_tol: 1e-6, rel_tol: 1e-6, ..Default::default() },
            "x^2",
        )
        .unwrap();
        assert!((v.re - 1.0 / 3.0).abs() < 1e-6);
    }
}
