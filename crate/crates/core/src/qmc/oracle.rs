//! Dense reference evaluation through the Kraus form of the transition
//! expectation: `K = Σ_{i,j} M_j^{i*} ⊗ (A_j^i)^{⊗k}` and
//! `E(a) = Tr_{successors}(K a K*)`.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::tree::Vertex;

use super::{LocalObservable, QmcKernel, QmcState};

/// Largest `(dim_h·|Λ|)^{k+1}` handled by the oracle.
pub const ORACLE_DIM_LIMIT: usize = 64;

/// Deepest support the nested oracle accepts.
const ORACLE_DEPTH_LIMIT: usize = 4;

fn oracle_dims(kernel: &QmcKernel) -> Result<(usize, usize)> {
    let d = kernel.dim();
    let k = kernel.k();
    let tail = u32::try_from(k)
        .ok()
        .and_then(|k| d.checked_pow(k))
        .ok_or(Error::Overflow("oracle dimension"))?;
    let total = tail.checked_mul(d).ok_or(Error::Overflow("oracle dimension"))?;
    if total > ORACLE_DIM_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: total,
            limit: ORACLE_DIM_LIMIT,
        });
    }
    Ok((d, tail))
}

fn kraus(kernel: &QmcKernel, tail: usize) -> Result<ComplexMatrix> {
    let model = kernel.model();
    let l = model.lambda_size();
    let d = kernel.dim();
    let mut total = ComplexMatrix::zeros(d * tail);
    for i in 0..l {
        for j in 0..l {
            let a = model.a_op(i, j, kernel.tol())?;
            let mut factors = vec![kernel.m_op(i, j).adjoint()];
            factors.extend(std::iter::repeat_n(a, kernel.k()));
            total += &ComplexMatrix::kron_all(&factors)?;
        }
    }
    Ok(total)
}

/// `E` applied to an arbitrary operator on `(H⊗K)^{⊗(k+1)}`.
pub fn oracle_transition_expectation(kernel: &QmcKernel, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (d, tail) = oracle_dims(kernel)?;
    if a.dim() != d * tail {
        return Err(Error::DimensionMismatch {
            expected: d * tail,
            actual: a.dim(),
        });
    }
    let k = kraus(kernel, tail)?;
    (&(&k * a) * &k.adjoint()).partial_trace_right(d, tail)
}

/// `φ(a)` by explicit nesting `Tr(ω E(a_o ⊗ E(…) ⊗ …))` down to the
/// boundary `h` on `W_{n+1}`; `n` must cover the support of `a`.
pub fn oracle_qmc_expectation(state: &QmcState, a: &LocalObservable, n: usize) -> Result<C64> {
    let kernel = state.kernel();
    let (d, tail) = oracle_dims(kernel)?;
    if n > ORACLE_DEPTH_LIMIT {
        return Err(Error::DepthExceeded {
            depth: n,
            cap: ORACLE_DEPTH_LIMIT,
        });
    }
    let depth = a.support_depth();
    if depth > n {
        return Err(Error::DepthExceeded { depth, cap: n });
    }
    let shape = crate::tree::TreeShape::new(kernel.k())?;
    a.check(&shape, d)?;
    let k = kraus(kernel, tail)?;
    let kd = k.adjoint();
    let identity = ComplexMatrix::identity(d);
    let h = &state.boundary().h;

    let mut total = ZERO;
    for term in &a.terms {
        // value at u = E(a_u ⊗ value(u,1) ⊗ … ⊗ value(u,k))
        fn value(
            u: &Vertex,
            n: usize,
            ctx: &(&ComplexMatrix, &ComplexMatrix, &ComplexMatrix, &ComplexMatrix, usize, usize, usize),
            factors: &std::collections::BTreeMap<Vertex, ComplexMatrix>,
        ) -> Result<ComplexMatrix> {
            let (k, kd, h, identity, d, tail, order) = *ctx;
            let mut parts = vec![factors.get(u).unwrap_or(identity).clone()];
            for ell in 1..=order as u32 {
                let child = u.child(ell);
                parts.push(if u.level() == n {
                    h.clone()
                } else {
                    value(&child, n, ctx, factors)?
                });
            }
            let full = ComplexMatrix::kron_all(&parts)?;
            (&(k * &full) * kd).partial_trace_right(d, tail)
        }
        let ctx = (&k, &kd, h, &identity, d, tail, kernel.k());
        let top = value(&Vertex::root(), n, &ctx, &term.factors)?;
        total += term.coeff * state.omega().trace_product(&top);
    }
    Ok(total)
}
