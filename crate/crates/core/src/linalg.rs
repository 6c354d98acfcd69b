//! Dense complex matrices and Gaussian elimination for the excited-state
//! linear system.
//!
//! Truncated systems here are small (≲ 100×100) and solved once per energy,
//! so a straightforward partially-pivoted elimination beats pulling in a
//! LAPACK binding. The matrix type doubles as the value carried through the
//! momentum quadrature, which is what lets the kernel integrate all couplings
//! on shared nodes.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::quad::QuadValue;
use crate::{Error, Real, Result};

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    n_rows: usize,
    n_cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            data: vec![Complex::new(T::zero(), T::zero()); n_rows * n_cols],
        }
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// `self += c · rhs` with a complex coefficient.
    pub fn add_scaled_complex(&mut self, rhs: &Self, c: Complex<T>) {
        debug_assert_eq!(self.n_rows, rhs.n_rows);
        debug_assert_eq!(self.n_cols, rhs.n_cols);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b * c;
        }
    }

    pub fn matvec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| {
                let row = &self.data[i * self.n_cols..(i + 1) * self.n_cols];
                row.iter().zip(x).map(|(a, b)| a * b).fold(
                    Complex::new(T::zero(), T::zero()),
                    |acc, v| acc + v,
                )
            })
            .collect()
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &self.data[i * self.n_cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.n_rows && j < self.n_cols);
        &mut self.data[i * self.n_cols + j]
    }
}

impl<T: Real> QuadValue<T> for CMatrix<T> {
    fn zero_like(&self) -> Self {
        Self::zeros(self.n_rows, self.n_cols)
    }

    fn add_scaled(&mut self, rhs: &Self, c: T) {
        debug_assert_eq!(self.n_rows, rhs.n_rows);
        debug_assert_eq!(self.n_cols, rhs.n_cols);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            a.re += b.re * c;
            a.im += b.im * c;
        }
    }

    fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|v| v.re.abs().max(v.im.abs()))
            .fold(T::zero(), T::max)
    }
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
///
/// `A` is copied, not consumed. A vanishing pivot reports a singular system;
/// near-singular systems surface downstream through the residual check.
pub fn lu_solve<T: Real>(a: &CMatrix<T>, b: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    assert_eq!(a.n_rows, a.n_cols, "square systems only");
    assert_eq!(b.len(), a.n_rows);
    let n = a.n_rows;
    let mut m = a.clone();
    let mut rhs = b.to_vec();

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = m[(k, k)].norm_sqr();
        for i in (k + 1)..n {
            let mag = m[(i, k)].norm_sqr();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = i;
            }
        }
        if !(pivot_mag > T::zero()) {
            return Err(Error::SingularSystem {
                pivot: pivot_mag.to_f64().unwrap_or(f64::NAN).sqrt(),
            });
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = tmp;
            }
            rhs.swap(k, pivot_row);
        }
        let pivot = m[(k, k)];
        for i in (k + 1)..n {
            let factor = m[(i, k)] / pivot;
            if factor.re == T::zero() && factor.im == T::zero() {
                continue;
            }
            for j in (k + 1)..n {
                let sub = factor * m[(k, j)];
                m[(i, j)] -= sub;
            }
            let sub = factor * rhs[k];
            rhs[i] -= sub;
            m[(i, k)] = Complex::new(T::zero(), T::zero());
        }
    }

    for k in (0..n).rev() {
        let mut acc = rhs[k];
        for j in (k + 1)..n {
            acc -= m[(k, j)] * rhs[j];
        }
        rhs[k] = acc / m[(k, k)];
    }
    Ok(rhs)
}

/// `‖A x − b‖_∞`, the a-posteriori check on every solve.
pub fn residual_inf<T: Real>(a: &CMatrix<T>, x: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.matvec(x)
        .iter()
        .zip(b)
        .map(|(ax, bv)| (ax - bv).norm())
        .fold(T::zero(), T::max)
}

/// `‖v‖_∞` over complex moduli.
pub fn norm_inf<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm()).fold(T::zero(), T::max)
}
