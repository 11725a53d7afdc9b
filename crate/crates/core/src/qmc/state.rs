use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::tree::TreeShape;

use super::{cpow, BoundarySolution, LocalObservable, ProductTerm, QmcKernel};

pub const DEFAULT_DEPTH_CAP: usize = 24;

/// The chain determined by an initial density `ω` at the root and a
/// translation-invariant boundary condition `h`.
///
/// On a product term supported in `Λ_n`,
/// `φ(a) = Σ_{j,j'} Tr(M_{jj'}(ω) a_o) · Π_{u ∈ Λ_[1,n]} ψ_{jj'}(a_u) · t_{jj'}^{k^{n+1}}`
/// with `t_{jj'} = φ_{jj'}(h)`: one boundary factor per vertex of `W_{n+1}`.
#[derive(Debug, Clone)]
pub struct QmcState {
    kernel: Arc<QmcKernel>,
    omega: ComplexMatrix,
    boundary: BoundarySolution,
    normalization: f64,
    // t_{jj'} and M_{jj'}(ω) at [j * L + j']
    coeffs: Vec<C64>,
    root_ops: Vec<ComplexMatrix>,
    depth_cap: usize,
}

/// Builds the state, rescaling `ω` so that `Tr(ω h) = 1`.
pub fn make_qmc(
    kernel: Arc<QmcKernel>,
    omega: ComplexMatrix,
    boundary: BoundarySolution,
) -> Result<QmcState> {
    let tol = *kernel.tol();
    if omega.dim() != kernel.dim() {
        return Err(Error::DimensionMismatch {
            expected: kernel.dim(),
            actual: omega.dim(),
        });
    }
    if !omega.is_hermitian(&tol) {
        return Err(Error::NotHermitian {
            residual: omega.hermiticity_residual(),
        });
    }
    let min = omega.min_eigenvalue();
    if min < -tol.abs_eps {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    let h = &boundary.h;
    let residual = kernel.boundary_residual(h)?;
    if residual > tol.bound(h.frobenius_norm()) {
        return Err(Error::NotBoundary { residual });
    }
    let trace = omega.trace_product(h).re;
    if trace <= tol.abs_eps {
        return Err(Error::NotNormalizable { trace });
    }
    let omega = if (trace - 1.0).abs() > tol.bound(1.0) {
        omega.scale(C64::new(1.0 / trace, 0.0))
    } else {
        omega
    };
    let l = kernel.lambda_size();
    let mut coeffs = Vec::with_capacity(l * l);
    let mut root_ops = Vec::with_capacity(l * l);
    for j in 0..l {
        for jp in 0..l {
            coeffs.push(kernel.phi_jjprime(j, jp, h)?);
            root_ops.push(kernel.m_jjprime(j, jp, &omega)?);
        }
    }
    Ok(QmcState {
        kernel,
        omega,
        boundary,
        normalization: trace,
        coeffs,
        root_ops,
        depth_cap: DEFAULT_DEPTH_CAP,
    })
}

impl QmcState {
    pub fn kernel(&self) -> &Arc<QmcKernel> {
        &self.kernel
    }

    /// The normalized root density.
    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }

    pub fn boundary(&self) -> &BoundarySolution {
        &self.boundary
    }

    /// `Tr(ω h)` of the density passed to [`make_qmc`].
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn was_rescaled(&self) -> bool {
        (self.normalization - 1.0).abs() > self.kernel.tol().bound(1.0)
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Self {
        self.depth_cap = cap;
        self
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    /// `t_{jj'} = φ_{jj'}(h)`.
    pub fn coeff(&self, j: usize, jp: usize) -> C64 {
        self.coeffs[j * self.kernel.lambda_size() + jp]
    }

    /// `M_{jj'}(ω)`.
    pub fn root_operator(&self, j: usize, jp: usize) -> &ComplexMatrix {
        &self.root_ops[j * self.kernel.lambda_size() + jp]
    }

    fn shape(&self) -> Result<TreeShape> {
        TreeShape::new(self.kernel.k())
    }

    /// Vertex counts of `Λ_[1,n]` and `W_{n+1}`.
    fn counts(&self, n: usize) -> Result<(u128, u128)> {
        if n > self.depth_cap {
            return Err(Error::DepthExceeded {
                depth: n,
                cap: self.depth_cap,
            });
        }
        let shape = self.shape()?;
        let interior = shape.ball_size(n)? - 1;
        let leaves = n
            .checked_add(1)
            .ok_or(Error::Overflow("level index"))
            .and_then(|m| shape.level_size(m))?;
        Ok((interior as u128, leaves as u128))
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let l = self.kernel.lambda_size();
        (0..l)
            .flat_map(move |j| (0..l).map(move |jp| (j, jp)))
            .map(|(j, jp)| (j, jp, self.coeff(j, jp)))
            .filter(|&(_, _, t)| t != ZERO)
    }

    fn term_value(&self, term: &ProductTerm, n: usize, interior: u128, leaves: u128) -> Result<C64> {
        let root = term.factors.iter().find(|(v, _)| v.is_root()).map(|(_, a)| a);
        let inner: Vec<&ComplexMatrix> = term
            .factors
            .iter()
            .filter(|(v, _)| !v.is_root() && v.level() <= n)
            .map(|(_, a)| a)
            .collect();
        let identities = interior - inner.len() as u128;
        let mut total = ZERO;
        for (j, jp, t) in self.pairs() {
            let m = self.root_operator(j, jp);
            let mut value = match root {
                Some(a) => m.trace_product(a),
                None => m.trace(),
            };
            if value == ZERO {
                continue;
            }
            let psi = self.kernel.psi_operator(j, jp)?;
            for a in &inner {
                value *= psi.trace_product(a);
            }
            value *= cpow(psi.trace(), identities);
            value *= cpow(t, leaves);
            total += value;
        }
        Ok(term.coeff * total)
    }

    /// `φ(a)` for a finitely supported observable.
    pub fn expectation(&self, a: &LocalObservable) -> Result<C64> {
        a.check(&self.shape()?, self.kernel.dim())?;
        let n = a.support_depth();
        let (interior, leaves) = self.counts(n)?;
        a.terms
            .iter()
            .map(|term| self.term_value(term, n, interior, leaves))
            .sum()
    }

    /// `φ(⊗_{u ∈ Λ_n} a)`, the same factor at every vertex of the ball.
    pub fn expectation_uniform(&self, a: &ComplexMatrix, n: usize) -> Result<C64> {
        let dim = self.kernel.dim();
        if a.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: a.dim(),
            });
        }
        let (interior, leaves) = self.counts(n)?;
        let mut total = ZERO;
        for (j, jp, t) in self.pairs() {
            let root = self.root_operator(j, jp).trace_product(a);
            let psi = self.kernel.psi_jjprime(j, jp, a)?;
            total += root * cpow(psi, interior) * cpow(t, leaves);
        }
        Ok(total)
    }

    /// `φ(I)`; equals 1 for a normalized state.
    pub fn total_mass(&self) -> Result<C64> {
        self.expectation(&LocalObservable::identity())
    }
}
