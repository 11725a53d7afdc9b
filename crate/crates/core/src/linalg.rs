//! Dense complex matrices for operators on H, K and H ⊗ K.
//!
//! Kronecker products are left-major: in `a.kron(&b)` the index of the left
//! factor varies slowest, so entry `(a·r_B + r', c·r_B + c')` equals
//! `A[a,c]·B[r',c']`. Operators on H ⊗ K therefore index the basis vector
//! `|h⟩ ⊗ |i⟩` as `h·dim(K) + i`, and `x ⊗ |i⟩⟨j|` is the block `x` placed at
//! block row `i`, block column `j` of a `dim(K)`-strided layout.
//!
//! Eigendecompositions are delegated to `nalgebra`'s Hermitian solver.

use std::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Absolute and relative tolerances for structural predicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs_eps: 1e-10,
            rel_eps: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Result<Self> {
        if !(abs_eps >= 0.0 && rel_eps >= 0.0) {
            return Err(Error::Domain(format!(
                "tolerances must be nonnegative (abs {abs_eps}, rel {rel_eps})"
            )));
        }
        Ok(Tolerance { abs_eps, rel_eps })
    }

    /// `abs_eps + rel_eps · scale`.
    pub fn bound(&self, scale: f64) -> f64 {
        self.abs_eps + self.rel_eps * scale
    }
}

/// A dense square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        ComplexMatrix {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        ComplexMatrix {
            inner: DMatrix::from_fn(dim, dim, f),
        }
    }

    pub fn from_matrix(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        for c in 0..inner.ncols() {
            for r in 0..inner.nrows() {
                let z = inner[(r, c)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::NonFinite { row: r, col: c });
                }
            }
        }
        Ok(ComplexMatrix { inner })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |r, c| rows[r][c]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |r, c| {
            if r == c {
                C64::new(values[r], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `|i⟩⟨j|` on a `dim`-dimensional space.
    pub fn ketbra(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.inner[(i, j)] = ONE;
        m
    }

    /// `x ⊗ |i⟩⟨j|` with `|i⟩, |j⟩` in a `dim_k`-dimensional lattice space.
    pub fn lattice_block(x: &ComplexMatrix, dim_k: usize, i: usize, j: usize) -> Self {
        let d = x.dim();
        let mut m = Self::zeros(d * dim_k);
        for r in 0..d {
            for c in 0..d {
                m.inner[(r * dim_k + i, c * dim_k + j)] = x.inner[(r, c)];
            }
        }
        m
    }

    /// Block `(i, j)` of `self` viewed as `Σ x_{ij} ⊗ |i⟩⟨j|`.
    pub fn lattice_component(&self, dim_k: usize, i: usize, j: usize) -> Result<Self> {
        if dim_k == 0 || !self.dim().is_multiple_of(dim_k) {
            return Err(Error::DimensionMismatch {
                expected: dim_k,
                actual: self.dim(),
            });
        }
        let d = self.dim() / dim_k;
        Ok(Self::from_fn(d, |r, c| {
            self.inner[(r * dim_k + i, c * dim_k + j)]
        }))
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.inner[(r, c)]
    }

    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.inner[(r, c)] = value;
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|r| (0..self.dim()).map(|c| self.inner[(r, c)]).collect())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        ComplexMatrix {
            inner: &self.inner * factor,
        }
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        let n = self.dim();
        let mut acc = ZERO;
        for r in 0..n {
            for s in 0..n {
                acc += self.inner[(r, s)] * other.inner[(s, r)];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn kron(&self, other: &ComplexMatrix) -> Result<Self> {
        self.dim()
            .checked_mul(other.dim())
            .ok_or(Error::Overflow("Kronecker dimension"))?;
        Ok(ComplexMatrix {
            inner: self.inner.kronecker(&other.inner),
        })
    }

    pub fn kron_all(factors: &[ComplexMatrix]) -> Result<Self> {
        let mut iter = factors.iter();
        let first = iter
            .next()
            .ok_or_else(|| Error::Domain("empty Kronecker product".into()))?
            .clone();
        iter.try_fold(first, |acc, f| acc.kron(f))
    }

    /// Traces out the right tensor factor of a `d_left·d_right` operator.
    pub fn partial_trace_right(&self, d_left: usize, d_right: usize) -> Result<Self> {
        let expected = d_left
            .checked_mul(d_right)
            .ok_or(Error::Overflow("partial trace dimension"))?;
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.dim(),
            });
        }
        Ok(Self::from_fn(d_left, |a, c| {
            (0..d_right)
                .map(|r| self.inner[(a * d_right + r, c * d_right + r)])
                .sum()
        }))
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.distance(&self.adjoint())
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.hermiticity_residual() <= tol.bound(self.frobenius_norm())
    }

    fn check_hermitian(&self, tol: &Tolerance) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual > tol.bound(self.frobenius_norm()) {
            Err(Error::NotHermitian { residual })
        } else {
            Ok(())
        }
    }

    /// Eigenpairs of the Hermitian part, eigenvalues descending.
    fn hermitian_eigen(&self) -> (Vec<f64>, DMatrix<C64>) {
        let sym = (&self.inner + self.inner.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        (values, vectors)
    }

    pub fn hermitian_eigenvalues(&self, tol: &Tolerance) -> Result<Vec<f64>> {
        self.check_hermitian(tol)?;
        Ok(self.hermitian_eigen().0)
    }

    /// `f` applied to the spectrum of the Hermitian part.
    pub(crate) fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let (values, v) = self.hermitian_eigen();
        let d = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            if r == c {
                C64::new(f(values[r]), 0.0)
            } else {
                ZERO
            }
        });
        ComplexMatrix {
            inner: &v * d * v.adjoint(),
        }
    }

    /// Positive square root; eigenvalues in `[−abs_eps, 0)` are clamped to 0.
    pub fn psd_sqrt(&self, tol: &Tolerance) -> Result<Self> {
        self.check_hermitian(tol)?;
        let min = self.hermitian_eigen().0.last().copied().unwrap_or(0.0);
        if min < -tol.abs_eps {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(self.map_spectrum(|x| x.max(0.0).sqrt()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigen().0.last().copied().unwrap_or(0.0)
    }

    pub fn is_psd(&self, tol: &Tolerance) -> bool {
        self.is_hermitian(tol) && self.min_eigenvalue() >= -tol.abs_eps
    }

    pub fn is_projection(&self, tol: &Tolerance) -> bool {
        let bound = tol.bound(self.frobenius_norm());
        self.hermiticity_residual() <= bound && self.distance(&(self * self)) <= bound
    }

    pub fn is_identity(&self, tol: &Tolerance) -> bool {
        self.distance(&Self::identity(self.dim())) <= tol.abs_eps
    }

    pub fn is_zero(&self, eps: f64) -> bool {
        self.frobenius_norm() <= eps
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Add<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.inner += &rhs.inner;
    }
}
