//! Von Neumann entropy and the mean entropy of product-form chains.
//!
//! A chain whose `(j, j')` sum collapses to the single diagonal term
//! `(j, j)` restricts to `Λ_n` as `M_jj(ω) ⊗ D_j^{⊗|Λ_[1,n]|}` with
//! `D_j = Ψ_{jj}`, so `S_n = S(M_jj(ω)) + |Λ_[1,n]| S(D_j)` and the mean
//! entropy is `S(D_j)`. Logarithms are natural.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance, ONE};
use crate::qmc::QmcState;
use crate::tree::TreeShape;

/// `−Σ λ log λ` over eigenvalues `λ > abs_eps`.
pub fn von_neumann_entropy(rho: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    let trace = rho.trace();
    if (trace - ONE).norm() > tol.bound(1.0) {
        return Err(Error::NotDensity(format!("trace {} ≠ 1", trace.re)));
    }
    let values = rho
        .hermitian_eigenvalues(tol)
        .map_err(|e| Error::NotDensity(e.to_string()))?;
    if let Some(&min) = values.last() {
        if min < -tol.abs_eps {
            return Err(Error::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
    }
    let s: f64 = values
        .iter()
        .filter(|&&l| l > tol.abs_eps)
        .map(|&l| -l * l.ln())
        .sum();
    Ok(s.max(0.0))
}

/// Density of `ψ_jj`: `Σ_i B_j^i ρ_j B_j^{i*} ⊗ |i⟩⟨i| / Tr ρ_j`.
pub fn site_density(state: &QmcState, j: usize) -> Result<ComplexMatrix> {
    if !state.boundary().is_diagonal() {
        return Err(Error::UnsupportedBoundary(format!(
            "boundary {} has off-diagonal blocks",
            state.boundary().label.as_deref().unwrap_or("(unlabeled)")
        )));
    }
    Ok(state.kernel().psi_operator(j, j)?.clone())
}

/// The single diagonal pair carrying the state, if there is one.
pub fn active_site(state: &QmcState) -> Result<usize> {
    let kernel = state.kernel();
    let tol = kernel.tol();
    let l = kernel.lambda_size();
    let mut active = Vec::new();
    for j in 0..l {
        for jp in 0..l {
            let t = state.coeff(j, jp);
            if t.norm() > tol.abs_eps && !state.root_operator(j, jp).is_zero(tol.abs_eps) {
                active.push((j, jp, t));
            }
        }
    }
    match active.as_slice() {
        [(j, jp, t)] if j == jp && (t - ONE).norm() <= tol.bound(1.0) => Ok(*j),
        _ => Err(Error::UnsupportedBoundary(format!(
            "state is not of single-site product form ({} active (j, j') terms)",
            active.len()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub site: usize,
    pub site_entropy: f64,
    pub root_entropy: f64,
    /// `(n, S_n / |Λ_n|)`.
    pub finite_values: Vec<(usize, f64)>,
    pub mean_entropy: f64,
}

impl EntropyReport {
    pub fn in_bits(&self) -> Self {
        EntropyReport {
            site: self.site,
            site_entropy: self.site_entropy / LN_2,
            root_entropy: self.root_entropy / LN_2,
            finite_values: self.finite_values.iter().map(|&(n, v)| (n, v / LN_2)).collect(),
            mean_entropy: self.mean_entropy / LN_2,
        }
    }
}

pub fn mean_entropy(state: &QmcState, n_max: usize) -> Result<EntropyReport> {
    let j = active_site(state)?;
    let kernel = state.kernel();
    let tol = kernel.tol();
    let site_entropy = von_neumann_entropy(&site_density(state, j)?, tol)?;
    let root_entropy = von_neumann_entropy(state.root_operator(j, j), tol)?;
    let shape = TreeShape::new(kernel.k())?;
    let finite_values = (0..=n_max)
        .map(|n| {
            let ball = shape.ball_size(n)? as f64;
            Ok((n, (root_entropy + (ball - 1.0) * site_entropy) / ball))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyReport {
        site: j,
        site_entropy,
        root_entropy,
        finite_values,
        mean_entropy: site_entropy,
    })
}
