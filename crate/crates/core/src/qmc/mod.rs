//! Quantum Markov chains on Γ^k_+ built from an OQRW.
//!
//! With `Φ_{jj'} = ρ_{j'}^{1/2} ρ_j^{1/2} ⊗ |j'⟩⟨j| / (Tr ρ_j Tr ρ_{j'})^{1/2}`
//! the functionals are `φ_{jj'}(b) = Tr(Φ_{jj'} b)` and
//! `ψ_{jj'}(b) = φ_{jj'}(M_j^{i*} b M_{j'}^i)` summed over `i`, i.e.
//! `ψ_{jj'}(b) = Tr(Ψ_{jj'} b)` with
//! `Ψ_{jj'} = Σ_i B_{j'}^i ρ_{j'}^{1/2} ρ_j^{1/2} B_j^{i*} ⊗ |i⟩⟨i| / (…)^{1/2}`.

mod boundary;
mod observable;
mod oracle;
mod state;

pub use boundary::{
    solve_boundary_fixed_points, BoundarySet, BoundarySolution, DegenerateBlock, SolverConfig,
};
pub use observable::{LocalObservable, ProductTerm};
pub use oracle::{oracle_qmc_expectation, oracle_transition_expectation, ORACLE_DIM_LIMIT};
pub use state::{make_qmc, QmcState, DEFAULT_DEPTH_CAP};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance, C64, ONE, ZERO};
use crate::model::OqrwModel;

/// Precomputed operators of a validated model.
#[derive(Debug, Clone)]
pub struct QmcKernel {
    model: OqrwModel,
    tol: Tolerance,
    // M_j^i at [i * L + j]
    m_ops: Vec<ComplexMatrix>,
    // Φ_{jj'}, Ψ_{jj'} and G_{jj'} at [j * L + j']
    phi_ops: Vec<ComplexMatrix>,
    psi_ops: Vec<ComplexMatrix>,
    gram: Vec<ComplexMatrix>,
}

impl QmcKernel {
    pub fn new(model: OqrwModel, tol: Tolerance) -> Result<Self> {
        model.ensure_valid(&tol)?;
        let l = model.lambda_size();
        let mut m_ops = Vec::with_capacity(l * l);
        for i in 0..l {
            for j in 0..l {
                m_ops.push(model.m_op(i, j)?);
            }
        }
        let mut phi_ops = Vec::with_capacity(l * l);
        let mut psi_ops = Vec::with_capacity(l * l);
        let mut gram = Vec::with_capacity(l * l);
        for j in 0..l {
            for jp in 0..l {
                let norm = (model.rho_trace(j) * model.rho_trace(jp)).sqrt();
                let core = (model.rho_sqrt(jp) * model.rho_sqrt(j)).scale(C64::new(1.0 / norm, 0.0));
                phi_ops.push(ComplexMatrix::lattice_block(&core, l, jp, j));
                let mut psi = ComplexMatrix::zeros(model.dim());
                let mut g = ComplexMatrix::zeros(model.dim_h());
                for i in 0..l {
                    let bj = model.b(i, j);
                    let bjp = model.b(i, jp);
                    let blk = &(bjp * &core) * &bj.adjoint();
                    psi += &ComplexMatrix::lattice_block(&blk, l, i, i);
                    g += &(&bj.adjoint() * bjp);
                }
                psi_ops.push(psi);
                gram.push(g);
            }
        }
        Ok(QmcKernel {
            model,
            tol,
            m_ops,
            phi_ops,
            psi_ops,
            gram,
        })
    }

    pub fn model(&self) -> &OqrwModel {
        &self.model
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn lambda_size(&self) -> usize {
        self.model.lambda_size()
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn k(&self) -> usize {
        self.model.k()
    }

    fn pair_index(&self, j: usize, jp: usize) -> Result<usize> {
        let l = self.lambda_size();
        for s in [j, jp] {
            if s >= l {
                return Err(Error::IndexOutOfRange { index: s, size: l });
            }
        }
        Ok(j * l + jp)
    }

    fn check_dim(&self, b: &ComplexMatrix) -> Result<()> {
        if b.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: b.dim(),
            })
        }
    }

    /// `M_j^i = B_j^i ⊗ |i⟩⟨j|`.
    pub fn m_op(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.m_ops[i * self.lambda_size() + j]
    }

    /// The density-like operator `Φ_{jj'}` with `φ_{jj'}(b) = Tr(Φ_{jj'} b)`.
    pub fn phi_operator(&self, j: usize, jp: usize) -> Result<&ComplexMatrix> {
        Ok(&self.phi_ops[self.pair_index(j, jp)?])
    }

    /// `Ψ_{jj'}`, with `ψ_{jj'}(b) = Tr(Ψ_{jj'} b)`.
    pub fn psi_operator(&self, j: usize, jp: usize) -> Result<&ComplexMatrix> {
        Ok(&self.psi_ops[self.pair_index(j, jp)?])
    }

    /// `G_{jj'} = Σ_i B_j^{i*} B_{j'}^i` on H.
    pub fn gram(&self, j: usize, jp: usize) -> Result<&ComplexMatrix> {
        Ok(&self.gram[self.pair_index(j, jp)?])
    }

    pub fn phi_jjprime(&self, j: usize, jp: usize, b: &ComplexMatrix) -> Result<C64> {
        self.check_dim(b)?;
        Ok(self.phi_operator(j, jp)?.trace_product(b))
    }

    pub fn psi_jjprime(&self, j: usize, jp: usize, b: &ComplexMatrix) -> Result<C64> {
        self.check_dim(b)?;
        Ok(self.psi_operator(j, jp)?.trace_product(b))
    }

    /// `ψ_{jj'}(I)`, the scalar `α_{jj'}` of the fixed-point equation.
    pub fn alpha(&self, j: usize, jp: usize) -> Result<C64> {
        Ok(self.psi_operator(j, jp)?.trace())
    }

    /// `M_{jj'}(w) = Σ_i M_{j'}^i w M_j^{i*}`.
    pub fn m_jjprime(&self, j: usize, jp: usize, w: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(w)?;
        self.pair_index(j, jp)?;
        let mut out = ComplexMatrix::zeros(self.dim());
        for i in 0..self.lambda_size() {
            out += &(&(self.m_op(i, jp) * w) * &self.m_op(i, j).adjoint());
        }
        Ok(out)
    }

    /// `E(a_0 ⊗ … ⊗ a_k) = Σ_{i,j,j'} Π_ℓ φ_{jj'}(a_ℓ) · M_j^{i*} a_0 M_{j'}^i`.
    pub fn transition_expectation(&self, factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
        let k = self.k();
        if factors.len() != k + 1 {
            return Err(Error::WrongFactorCount {
                expected: k + 1,
                actual: factors.len(),
            });
        }
        for f in factors {
            self.check_dim(f)?;
        }
        let l = self.lambda_size();
        let a0 = &factors[0];
        let mut out = ComplexMatrix::zeros(self.dim());
        for j in 0..l {
            for jp in 0..l {
                let phi = self.phi_operator(j, jp)?;
                let coeff = factors[1..]
                    .iter()
                    .fold(ONE, |acc, a| acc * phi.trace_product(a));
                if coeff == ZERO {
                    continue;
                }
                for i in 0..l {
                    let term = &(&self.m_op(i, j).adjoint() * a0) * self.m_op(i, jp);
                    out += &term.scale(coeff);
                }
            }
        }
        Ok(out)
    }

    /// `‖h − Σ_{j,j'} φ_{jj'}(h)^k · G_{jj'} ⊗ |j⟩⟨j'|‖_F`; zero exactly on
    /// translation-invariant boundary conditions.
    pub fn boundary_residual(&self, h: &ComplexMatrix) -> Result<f64> {
        self.check_dim(h)?;
        let l = self.lambda_size();
        let k = self.k() as u128;
        let mut image = ComplexMatrix::zeros(self.dim());
        for j in 0..l {
            for jp in 0..l {
                let t = self.phi_jjprime(j, jp, h)?;
                let coeff = cpow(t, k);
                if coeff != ZERO {
                    let blk = self.gram(j, jp)?.scale(coeff);
                    image += &ComplexMatrix::lattice_block(&blk, l, j, jp);
                }
            }
        }
        Ok(h.distance(&image))
    }
}

/// `z^e` by repeated squaring.
pub(crate) fn cpow(z: C64, mut e: u128) -> C64 {
    let mut base = z;
    let mut acc = ONE;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        e >>= 1;
        if e > 0 {
            base = base * base;
        }
    }
    acc
}
