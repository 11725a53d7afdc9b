//! Open quantum random walk data and the induced classical path measure.
//!
//! Sites are labeled `0..lambda_size` internally. `B_j^i` (stored at
//! `b(i, j)`) is the effect of hopping from site `j` to site `i`, and the
//! dilated operator `M_j^i = B_j^i ⊗ |i⟩⟨j|` acts on H ⊗ K.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance, C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct OqrwModel {
    lambda_size: usize,
    dim_h: usize,
    k: usize,
    // B_j^i at index i * lambda_size + j
    b: Vec<ComplexMatrix>,
    rho: Vec<ComplexMatrix>,
    rho_sqrt: Vec<ComplexMatrix>,
}

/// A single violated model invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `Σ_i B_j^{i*} B_j^i ≠ I`.
    ColumnNormalization { site: usize, residual: f64 },
    NotHermitianBlock { site: usize, residual: f64 },
    NotPositiveBlock { site: usize, min_eigenvalue: f64 },
    ZeroInitialBlock { site: usize, trace: f64 },
    /// `Σ_i Tr ρ_i ≠ 1`.
    TraceNormalization { total: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // sites are reported 1-based
        match self {
            Violation::ColumnNormalization { site, residual } => write!(
                f,
                "column-sum violation for j={}: ‖Σ_i B_j^i* B_j^i − I‖_F = {residual:.3e}",
                site + 1
            ),
            Violation::NotHermitianBlock { site, residual } => write!(
                f,
                "initial block ρ_{} is not Hermitian (residual {residual:.3e})",
                site + 1
            ),
            Violation::NotPositiveBlock {
                site,
                min_eigenvalue,
            } => write!(
                f,
                "initial block ρ_{} is not positive (min eigenvalue {min_eigenvalue:.3e})",
                site + 1
            ),
            Violation::ZeroInitialBlock { site, trace } => write!(
                f,
                "zero initial block ρ_{} (trace {trace:.3e})",
                site + 1
            ),
            Violation::TraceNormalization { total } => {
                write!(f, "Σ_i Tr ρ_i = {total} ≠ 1")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Non-fatal notes; they never make a model unusable.
    pub advisories: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Parameters of the two-site walk on H = C².
///
/// `B_1^1 = diag(a, b)`, `B_2^1 = |1⟩⟨2|`, `B_1^2 = diag(c, d)`,
/// `B_2^2 = |1⟩⟨1|`, with `|a|² + |c|² = |b|² + |d|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateParams {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub rho1: ComplexMatrix,
    pub rho2: ComplexMatrix,
}

impl TwoStateParams {
    /// Initial blocks `ρ_1 = ρ_2 = |1⟩⟨1|/2`. The chain only sees
    /// `ρ_j / Tr ρ_j`, so this is the pure-block model with `Σ_i Tr ρ_i = 1`.
    pub fn with_pure_blocks(a: C64, b: C64, c: C64, d: C64) -> Self {
        let p = ComplexMatrix::ketbra(2, 0, 0).scale(C64::new(0.5, 0.0));
        TwoStateParams {
            a,
            b,
            c,
            d,
            rho1: p.clone(),
            rho2: p,
        }
    }

    /// Real parameters with `|c| = c_abs`, `|a| = sqrt(1 − c_abs²)` and the
    /// given `b`, `d`.
    pub fn real(c_abs: f64, b: f64, d: f64) -> Self {
        let a = (1.0 - c_abs * c_abs).max(0.0).sqrt();
        Self::with_pure_blocks(
            C64::new(a, 0.0),
            C64::new(b, 0.0),
            C64::new(c_abs, 0.0),
            C64::new(d, 0.0),
        )
    }

    pub fn advisories(&self, tol: &Tolerance) -> Vec<String> {
        let mut notes = Vec::new();
        if (self.a * self.c).norm() <= tol.abs_eps {
            notes.push(
                "a·c = 0: the two-state walk is usually taken with a·c ≠ 0; \
                 the a = 0, |c| = 1 branch is still evaluated"
                    .to_string(),
            );
        }
        notes
    }

    pub fn blocks(&self) -> Vec<Vec<ComplexMatrix>> {
        let diag = |x: C64, y: C64| {
            ComplexMatrix::from_rows(&[vec![x, ZERO], vec![ZERO, y]]).expect("2x2 literal")
        };
        vec![
            vec![diag(self.a, self.b), ComplexMatrix::ketbra(2, 0, 1)],
            vec![diag(self.c, self.d), ComplexMatrix::ketbra(2, 0, 0)],
        ]
    }
}

impl OqrwModel {
    /// Builds a model from `b[i][j] = B_j^i` and blocks `rho[i]`.
    ///
    /// Only shapes are checked here; the walk invariants are reported by
    /// [`OqrwModel::validate`].
    pub fn new(k: usize, b: Vec<Vec<ComplexMatrix>>, rho: Vec<ComplexMatrix>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder);
        }
        let lambda_size = rho.len();
        if lambda_size == 0 {
            return Err(Error::InvalidModel("empty site set".into()));
        }
        let dim_h = rho[0].dim();
        if dim_h == 0 {
            return Err(Error::InvalidModel("internal dimension is zero".into()));
        }
        if b.len() != lambda_size {
            return Err(Error::DimensionMismatch {
                expected: lambda_size,
                actual: b.len(),
            });
        }
        let mut flat = Vec::with_capacity(lambda_size * lambda_size);
        for row in b {
            if row.len() != lambda_size {
                return Err(Error::DimensionMismatch {
                    expected: lambda_size,
                    actual: row.len(),
                });
            }
            for m in row {
                if m.dim() != dim_h {
                    return Err(Error::DimensionMismatch {
                        expected: dim_h,
                        actual: m.dim(),
                    });
                }
                flat.push(m);
            }
        }
        if let Some(bad) = rho.iter().find(|r| r.dim() != dim_h) {
            return Err(Error::DimensionMismatch {
                expected: dim_h,
                actual: bad.dim(),
            });
        }
        let rho_sqrt = rho.iter().map(|r| r.map_spectrum(|x| x.max(0.0).sqrt())).collect();
        Ok(OqrwModel {
            lambda_size,
            dim_h,
            k,
            b: flat,
            rho,
            rho_sqrt,
        })
    }

    pub fn two_state(params: &TwoStateParams, k: usize) -> Result<Self> {
        Self::new(k, params.blocks(), vec![params.rho1.clone(), params.rho2.clone()])
    }

    /// Builds the model and rejects it unless [`validate`](Self::validate)
    /// reports no violation.
    pub fn validated(
        k: usize,
        b: Vec<Vec<ComplexMatrix>>,
        rho: Vec<ComplexMatrix>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let m = Self::new(k, b, rho)?;
        m.ensure_valid(tol)?;
        Ok(m)
    }

    pub fn lambda_size(&self) -> usize {
        self.lambda_size
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    /// Dimension of H ⊗ K.
    pub fn dim(&self) -> usize {
        self.dim_h * self.lambda_size
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn with_order(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder);
        }
        Ok(OqrwModel { k, ..self.clone() })
    }

    /// `B_j^i`, the effect of the hop `j → i`.
    pub fn b(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.b[i * self.lambda_size + j]
    }

    pub fn rho(&self, i: usize) -> &ComplexMatrix {
        &self.rho[i]
    }

    pub fn rho_sqrt(&self, i: usize) -> &ComplexMatrix {
        &self.rho_sqrt[i]
    }

    pub fn rho_trace(&self, i: usize) -> f64 {
        self.rho[i].trace().re
    }

    /// All `B_j^i` multiplied by `e^{iθ}`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        let phase = C64::from_polar(1.0, theta);
        OqrwModel {
            b: self.b.iter().map(|m| m.scale(phase)).collect(),
            ..self.clone()
        }
    }

    fn check_site(&self, i: usize) -> Result<()> {
        if i < self.lambda_size {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                size: self.lambda_size,
            })
        }
    }

    pub fn validate(&self, tol: &Tolerance) -> ValidationReport {
        let mut report = ValidationReport::default();
        let id = ComplexMatrix::identity(self.dim_h);
        for j in 0..self.lambda_size {
            let mut sum = ComplexMatrix::zeros(self.dim_h);
            for i in 0..self.lambda_size {
                let b = self.b(i, j);
                sum += &(&b.adjoint() * b);
            }
            let residual = sum.distance(&id);
            if residual > tol.bound(1.0) {
                report
                    .violations
                    .push(Violation::ColumnNormalization { site: j, residual });
            }
        }
        let mut total = 0.0;
        for (i, rho) in self.rho.iter().enumerate() {
            if !rho.is_hermitian(tol) {
                report.violations.push(Violation::NotHermitianBlock {
                    site: i,
                    residual: rho.hermiticity_residual(),
                });
                continue;
            }
            let min = rho.min_eigenvalue();
            if min < -tol.abs_eps {
                report.violations.push(Violation::NotPositiveBlock {
                    site: i,
                    min_eigenvalue: min,
                });
            }
            let trace = rho.trace().re;
            if trace <= tol.abs_eps {
                report
                    .violations
                    .push(Violation::ZeroInitialBlock { site: i, trace });
            }
            total += trace;
        }
        if (total - 1.0).abs() > tol.bound(1.0) {
            report
                .violations
                .push(Violation::TraceNormalization { total });
        }
        report
    }

    pub fn ensure_valid(&self, tol: &Tolerance) -> Result<()> {
        let report = self.validate(tol);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidModel(report.summary()))
        }
    }

    /// `M_j^i = B_j^i ⊗ |i⟩⟨j|`.
    pub fn m_op(&self, i: usize, j: usize) -> Result<ComplexMatrix> {
        self.check_site(i)?;
        self.check_site(j)?;
        Ok(ComplexMatrix::lattice_block(self.b(i, j), self.lambda_size, i, j))
    }

    /// `A_j^i = ρ_j^{1/2} ⊗ |i⟩⟨j| / (Tr ρ_j)^{1/2}`.
    pub fn a_op(&self, i: usize, j: usize, tol: &Tolerance) -> Result<ComplexMatrix> {
        self.check_site(i)?;
        self.check_site(j)?;
        let trace = self.rho_trace(j);
        if trace <= tol.abs_eps {
            return Err(Error::ZeroBlock { site: j, trace });
        }
        let root = self.rho_sqrt(j).scale(C64::new(1.0 / trace.sqrt(), 0.0));
        Ok(ComplexMatrix::lattice_block(&root, self.lambda_size, i, j))
    }

    /// Blocks `ρ_i` of a state `Σ_i ρ_i ⊗ |i⟩⟨i|`.
    pub fn diagonal_blocks(&self, rho_full: &ComplexMatrix, tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
        if rho_full.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rho_full.dim(),
            });
        }
        let l = self.lambda_size;
        let mut off = 0.0;
        for i in 0..l {
            for j in 0..l {
                if i != j {
                    off += rho_full.lattice_component(l, i, j)?.frobenius_norm().powi(2);
                }
            }
        }
        let off = off.sqrt();
        if off > tol.bound(rho_full.frobenius_norm()) {
            return Err(Error::NotBlockDiagonal { residual: off });
        }
        (0..l).map(|i| rho_full.lattice_component(l, i, i)).collect()
    }

    /// `M(ρ) = Σ_i (Σ_j B_j^i ρ_j B_j^{i*}) ⊗ |i⟩⟨i|`.
    pub fn apply_channel(&self, rho_full: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
        let blocks = self.diagonal_blocks(rho_full, tol)?;
        let l = self.lambda_size;
        let mut out = ComplexMatrix::zeros(self.dim());
        for i in 0..l {
            let mut acc = ComplexMatrix::zeros(self.dim_h);
            for (j, rho_j) in blocks.iter().enumerate() {
                let b = self.b(i, j);
                acc += &(&(b * rho_j) * &b.adjoint());
            }
            out += &ComplexMatrix::lattice_block(&acc, l, i, i);
        }
        Ok(out)
    }

    /// `P_ρ(i_0, …, i_n)`, clamped at zero.
    pub fn path_probability(&self, path: &[usize]) -> Result<f64> {
        let (&first, rest) = path
            .split_first()
            .ok_or_else(|| Error::Domain("empty path".into()))?;
        self.check_site(first)?;
        let mut sigma = self.rho[first].clone();
        let mut prev = first;
        for &next in rest {
            self.check_site(next)?;
            let b = self.b(next, prev);
            sigma = &(b * &sigma) * &b.adjoint();
            prev = next;
        }
        Ok(sigma.trace().re.max(0.0))
    }

    pub fn sampler(&self, seed: u64) -> PathSampler<'_> {
        PathSampler {
            model: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// One path with `steps + 1` sites drawn from `P_ρ`.
    pub fn sample_path(&self, steps: usize, seed: u64) -> Vec<usize> {
        self.sampler(seed).sample(steps)
    }
}

/// Chain-rule sampler for `P_ρ`. Deterministic for a fixed seed.
pub struct PathSampler<'m> {
    model: &'m OqrwModel,
    rng: ChaCha8Rng,
}

impl PathSampler<'_> {
    fn draw(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.rng.random::<f64>() * total;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                return i;
            }
            u -= w;
        }
        // round-off fallback: last site with positive weight
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }

    pub fn sample(&mut self, steps: usize) -> Vec<usize> {
        let m = self.model;
        let weights: Vec<f64> = (0..m.lambda_size).map(|i| m.rho_trace(i).max(0.0)).collect();
        let mut site = self.draw(&weights);
        let mut sigma = m.rho[site].scale(C64::new(1.0 / weights[site], 0.0));
        let mut path = Vec::with_capacity(steps + 1);
        path.push(site);
        for _ in 0..steps {
            let candidates: Vec<ComplexMatrix> = (0..m.lambda_size)
                .map(|i| {
                    let b = m.b(i, site);
                    &(b * &sigma) * &b.adjoint()
                })
                .collect();
            let weights: Vec<f64> = candidates.iter().map(|c| c.trace().re.max(0.0)).collect();
            let next = self.draw(&weights);
            sigma = candidates[next].scale(C64::new(1.0 / weights[next], 0.0));
            site = next;
            path.push(site);
        }
        path
    }
}

/// Random valid models: each column `(B_j^i)_i` is a random isometry from
/// H into `Λ` copies of H, and the blocks `ρ_i` are random full-rank.
pub fn random_model(rng: &mut impl Rng, lambda_size: usize, dim_h: usize, k: usize) -> Result<OqrwModel> {
    let mut entry = || C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut b = vec![Vec::with_capacity(lambda_size); lambda_size];
    for _ in 0..lambda_size {
        let g = DMatrix::from_fn(lambda_size * dim_h, dim_h, |_, _| entry());
        let q = g.qr().q();
        for (i, row) in b.iter_mut().enumerate() {
            row.push(ComplexMatrix::from_fn(dim_h, |r, c| q[(i * dim_h + r, c)]));
        }
    }
    let mut rho: Vec<ComplexMatrix> = (0..lambda_size)
        .map(|_| {
            let x = ComplexMatrix::from_fn(dim_h, |_, _| entry());
            let base = &x * &x.adjoint();
            &base + &ComplexMatrix::identity(dim_h).scale(C64::new(0.05, 0.0))
        })
        .collect();
    let total: f64 = rho.iter().map(|r| r.trace().re).sum();
    for r in rho.iter_mut() {
        *r = r.scale(C64::new(1.0 / total, 0.0));
    }
    OqrwModel::new(k, b, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn standard() -> TwoStateParams {
        let mut p = TwoStateParams::with_pure_blocks(c(0.6), c(0.8), c(0.8), c(0.6));
        let half = ComplexMatrix::ketbra(2, 0, 0).scale(c(0.5));
        p.rho1 = half.clone();
        p.rho2 = half;
        p
    }

    #[test]
    fn two_state_validation() {
        let tol = Tolerance::default();
        let m = OqrwModel::two_state(&standard(), 2).unwrap();
        assert!(m.validate(&tol).is_valid());

        let mut bad = standard();
        bad.a = c(0.9);
        let report = OqrwModel::two_state(&bad, 2).unwrap().validate(&tol);
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            report.violations[0],
            Violation::ColumnNormalization { site: 0, .. }
        ));
        assert!(report.summary().contains("j=1"));

        let mut zero = standard();
        zero.rho1 = ComplexMatrix::zeros(2);
        zero.rho2 = ComplexMatrix::ketbra(2, 0, 0);
        let report = OqrwModel::two_state(&zero, 2).unwrap().validate(&tol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ZeroInitialBlock { site: 0, .. })));
        assert!(report.summary().contains("zero initial block"));
    }

    #[test]
    fn advisory_for_vanishing_ac() {
        let tol = Tolerance::default();
        let p = TwoStateParams::real(1.0, 0.8, 0.6);
        assert_eq!(p.advisories(&tol).len(), 1);
        assert!(TwoStateParams::real(0.8, 0.8, 0.6).advisories(&tol).is_empty());
    }

    #[test]
    fn m_op_structure() {
        let tol = Tolerance::default();
        let m = OqrwModel::two_state(&standard(), 2).unwrap();
        let m12 = m.m_op(0, 1).unwrap();
        let expected = m.b(0, 1).kron(&ComplexMatrix::ketbra(2, 0, 1)).unwrap();
        assert_eq!(m12, expected);
        // the single nonzero entry of B_2^1 ⊗ |1⟩⟨2| sits at (h=0,i=0),(h=1,j=1)
        assert_eq!(m12.get(0, 3), c(1.0));
        assert!((m12.frobenius_norm() - 1.0).abs() < 1e-15);

        let mut sum = ComplexMatrix::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                let mij = m.m_op(i, j).unwrap();
                sum += &(&mij.adjoint() * &mij);
            }
        }
        assert!(sum.is_identity(&tol));
        assert!(matches!(m.m_op(2, 0), Err(Error::IndexOutOfRange { .. })));

        let zero_walk = OqrwModel::new(
            1,
            vec![vec![ComplexMatrix::identity(1), ComplexMatrix::zeros(1)], vec![ComplexMatrix::zeros(1), ComplexMatrix::identity(1)]],
            vec![ComplexMatrix::diag(&[0.5]), ComplexMatrix::diag(&[0.5])],
        )
        .unwrap();
        assert!(zero_walk.m_op(0, 1).unwrap().is_zero(0.0));
    }

    #[test]
    fn a_op_examples() {
        let tol = Tolerance::default();
        let m = OqrwModel::two_state(&TwoStateParams::real(0.8, 0.8, 0.6), 2).unwrap();
        let p = ComplexMatrix::ketbra(2, 0, 0);
        for i in 0..2 {
            for j in 0..2 {
                let a = m.a_op(i, j, &tol).unwrap();
                let expected = p.kron(&ComplexMatrix::ketbra(2, i, j)).unwrap();
                assert!(a.distance(&expected) < 1e-14);
            }
        }

        let mut mixed = standard();
        mixed.rho1 = ComplexMatrix::diag(&[0.25, 0.25]);
        mixed.rho2 = ComplexMatrix::diag(&[0.25, 0.25]);
        let m = OqrwModel::two_state(&mixed, 2).unwrap();
        // ρ^{1/2} / (Tr ρ)^{1/2} = diag(1/√2, 1/√2) for ρ = I/4
        let a = m.a_op(1, 0, &tol).unwrap();
        let root = ComplexMatrix::diag(&[0.5f64.sqrt(), 0.5f64.sqrt()]);
        let expected = root.kron(&ComplexMatrix::ketbra(2, 1, 0)).unwrap();
        assert!(a.distance(&expected) < 1e-12);

        let mut zero = standard();
        zero.rho1 = ComplexMatrix::zeros(2);
        let m = OqrwModel::two_state(&zero, 2).unwrap();
        assert!(matches!(m.a_op(0, 0, &tol), Err(Error::ZeroBlock { site: 0, .. })));
    }

    #[test]
    fn a_op_gram_identity() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_model(&mut rng, 3, 2, 2).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let a = m.a_op(i, j, &tol).unwrap();
                assert!((a.adjoint().trace_product(&a) - c(1.0)).norm() < 1e-12);
                for ip in 0..3 {
                    for jp in 0..3 {
                        let ap = m.a_op(ip, jp, &tol).unwrap();
                        let lhs = ap.adjoint().trace_product(&a);
                        // Tr(A'^* A) = δ_{ii'} δ_{jj'}
                        let rhs = if i == ip && j == jp { C64::new(1.0, 0.0) } else { ZERO };
                        assert!((lhs - rhs).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn channel_examples() {
        let tol = Tolerance::default();
        let m = OqrwModel::two_state(&TwoStateParams::real(0.8, 0.8, 0.6), 2).unwrap();
        let rho = ComplexMatrix::ketbra(2, 0, 0).kron(&ComplexMatrix::ketbra(2, 1, 1)).unwrap();
        let out = m.apply_channel(&rho, &tol).unwrap();
        assert!(out.distance(&rho) < 1e-15);

        let identity_walk = OqrwModel::new(
            2,
            vec![
                vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2)],
                vec![ComplexMatrix::zeros(2), ComplexMatrix::identity(2)],
            ],
            vec![ComplexMatrix::diag(&[0.25, 0.25]), ComplexMatrix::diag(&[0.25, 0.25])],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = ComplexMatrix::from_fn(2, |_, _| C64::new(rng.random(), rng.random()));
        let blk = &x * &x.adjoint();
        let state = &ComplexMatrix::lattice_block(&blk, 2, 0, 0)
            + &ComplexMatrix::lattice_block(&ComplexMatrix::diag(&[0.1, 0.2]), 2, 1, 1);
        assert!(identity_walk.apply_channel(&state, &tol).unwrap().distance(&state) < 1e-14);

        let coherent = &rho + &ComplexMatrix::lattice_block(&ComplexMatrix::identity(2), 2, 0, 1);
        assert!(matches!(
            m.apply_channel(&coherent, &tol),
            Err(Error::NotBlockDiagonal { .. })
        ));
    }

    #[test]
    fn channel_preserves_trace_and_positivity() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let m = random_model(&mut rng, 3, 2, 2).unwrap();
            let mut state = ComplexMatrix::zeros(m.dim());
            for i in 0..3 {
                state += &ComplexMatrix::lattice_block(m.rho(i), 3, i, i);
            }
            let out = m.apply_channel(&state, &tol).unwrap();
            assert!((out.trace().re - 1.0).abs() < 1e-12);
            assert!(out.is_psd(&tol));
        }
    }

    #[test]
    fn path_probability_examples() {
        let m = OqrwModel::two_state(&TwoStateParams::real(0.8, 0.8, 0.6), 2).unwrap();
        let mut half = TwoStateParams::real(0.8, 0.8, 0.6);
        half.rho1 = ComplexMatrix::ketbra(2, 0, 0).scale(c(0.3));
        half.rho2 = ComplexMatrix::ketbra(2, 0, 0).scale(c(0.7));
        let mh = OqrwModel::two_state(&half, 2).unwrap();
        assert!((mh.path_probability(&[0]).unwrap() - 0.3).abs() < 1e-15);
        // B_2^1 |1⟩ = 0
        assert_eq!(m.path_probability(&[1, 0]).unwrap(), 0.0);
        assert!(m.path_probability(&[]).is_err());
        assert!(matches!(
            m.path_probability(&[0, 2]),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn path_marginals_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = random_model(&mut rng, 3, 2, 2).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let parent = m.path_probability(&[a, b]).unwrap();
                let children: f64 = (0..3).map(|n| m.path_probability(&[a, b, n]).unwrap()).sum();
                assert!((parent - children).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_model(&mut rng, 2, 2, 2).unwrap();
        assert_eq!(m.sample_path(20, 42), m.sample_path(20, 42));
        assert_eq!(m.sample_path(5, 7).len(), 6);
    }

    #[test]
    fn deterministic_walk_has_a_single_path() {
        // B_j^i = δ_{i, j+1 mod 3} · I
        let l = 3;
        let b = (0..l)
            .map(|i| {
                (0..l)
                    .map(|j| {
                        if i == (j + 1) % l {
                            ComplexMatrix::identity(2)
                        } else {
                            ComplexMatrix::zeros(2)
                        }
                    })
                    .collect()
            })
            .collect();
        let rho = vec![
            ComplexMatrix::diag(&[0.5, 0.5]),
            ComplexMatrix::zeros(2),
            ComplexMatrix::zeros(2),
        ];
        let m = OqrwModel::new(2, b, rho).unwrap();
        let path = m.sample_path(4, 3);
        assert_eq!(path, vec![0, 1, 2, 0, 1]);
        assert!((m.path_probability(&path).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_models_are_valid() {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for l in 1..=3 {
            for d in 1..=3 {
                let m = random_model(&mut rng, l, d, 2).unwrap();
                assert!(m.validate(&tol).is_valid(), "{:?}", m.validate(&tol));
            }
        }
    }
}
