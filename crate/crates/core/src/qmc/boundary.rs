//! Translation-invariant boundary conditions.
//!
//! Writing `h = Σ h_{jj'} ⊗ |j⟩⟨j'|`, the fixed-point equation splits into
//! `h_{jj'} = t_{jj'}^k G_{jj'}` with `t_{jj'} = φ_{jj'}(h)` solving the
//! scalar equation `t = α_{jj'} t^k`. Candidate roots are enumerated per
//! upper-triangular block, the lower blocks follow from `h = h*`, and the
//! assembled matrices are filtered by positivity and residual.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE, ZERO};

use super::{cpow, QmcKernel};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySolution {
    pub h: ComplexMatrix,
    /// `h_{jj'}` for every nonzero block.
    pub blocks: BTreeMap<(usize, usize), ComplexMatrix>,
    /// `t_{jj'} = φ_{jj'}(h)` for every pair.
    pub coeffs: BTreeMap<(usize, usize), C64>,
    pub label: Option<String>,
    pub residual: f64,
}

impl BoundarySolution {
    /// Wraps an arbitrary `h`; the residual is computed, not checked.
    pub fn from_matrix(kernel: &QmcKernel, h: ComplexMatrix) -> Result<Self> {
        let residual = kernel.boundary_residual(&h)?;
        let l = kernel.lambda_size();
        let mut blocks = BTreeMap::new();
        let mut coeffs = BTreeMap::new();
        for j in 0..l {
            for jp in 0..l {
                let blk = h.lattice_component(l, j, jp)?;
                if !blk.is_zero(kernel.tol().abs_eps) {
                    blocks.insert((j, jp), blk);
                }
                coeffs.insert((j, jp), kernel.phi_jjprime(j, jp, &h)?);
            }
        }
        let label = label_for(kernel, &h, &blocks);
        Ok(BoundarySolution {
            h,
            blocks,
            coeffs,
            label,
            residual,
        })
    }

    pub fn is_diagonal(&self) -> bool {
        self.blocks.keys().all(|(j, jp)| j == jp)
    }

    /// Sites `j` with a nonzero diagonal block.
    pub fn diagonal_support(&self) -> Vec<usize> {
        self.blocks
            .keys()
            .filter(|(j, jp)| j == jp)
            .map(|&(j, _)| j)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Residual bound, relative to `max(1, ‖h‖_F)`.
    pub residual_tol: f64,
    /// Frobenius distance under which two solutions are identified.
    pub dedup_eps: f64,
    /// Maximal number of block combinations to assemble.
    pub combination_cap: u128,
    /// `|α| ≤ alpha_eps` marks a degenerate block.
    pub alpha_eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            residual_tol: 1e-9,
            dedup_eps: 1e-8,
            combination_cap: 1 << 20,
            alpha_eps: 1e-12,
        }
    }
}

/// A block whose scalar equation only admits `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegenerateBlock {
    pub j: usize,
    pub jp: usize,
    pub alpha: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySet {
    pub solutions: Vec<BoundarySolution>,
    pub degenerate: Vec<DegenerateBlock>,
    /// Number of combinations examined.
    pub combinations: u128,
}

/// Roots of `t = α t^k`.
fn scalar_roots(alpha: C64, k: usize, eps: f64) -> Vec<C64> {
    let mut roots = vec![ZERO];
    if alpha.norm() <= eps {
        return roots;
    }
    if k == 1 {
        // t = α t: any t if α = 1; keep t = 1 as the representative
        if (alpha - ONE).norm() <= eps.max(1e-12) {
            roots.push(ONE);
        }
        return roots;
    }
    let inv = ONE / alpha;
    let m = (k - 1) as f64;
    let r = inv.norm().powf(1.0 / m);
    let theta = inv.arg();
    for s in 0..k - 1 {
        roots.push(C64::from_polar(r, (theta + TAU * s as f64) / m));
    }
    roots
}

pub fn solve_boundary_fixed_points(kernel: &QmcKernel, config: &SolverConfig) -> Result<BoundarySet> {
    let l = kernel.lambda_size();
    let k = kernel.k();
    let tol = *kernel.tol();

    let mut pairs = Vec::new();
    let mut candidates: Vec<Vec<C64>> = Vec::new();
    let mut degenerate = Vec::new();
    for j in 0..l {
        for jp in j..l {
            let alpha = kernel.alpha(j, jp)?;
            if alpha.norm() <= config.alpha_eps {
                degenerate.push(DegenerateBlock { j, jp, alpha });
            }
            pairs.push((j, jp));
            candidates.push(scalar_roots(alpha, k, config.alpha_eps));
        }
    }
    let required = candidates
        .iter()
        .try_fold(1u128, |acc, c| acc.checked_mul(c.len() as u128))
        .unwrap_or(u128::MAX);
    if required > config.combination_cap {
        return Err(Error::EnumerationCap {
            required,
            cap: config.combination_cap,
        });
    }

    let blocks: Vec<Vec<ComplexMatrix>> = pairs
        .iter()
        .zip(&candidates)
        .map(|(&(j, jp), roots)| {
            let g = kernel.gram(j, jp)?;
            Ok(roots.iter().map(|&t| g.scale(cpow(t, k as u128))).collect())
        })
        .collect::<Result<_>>()?;

    let mut found: Vec<(usize, BoundarySolution)> = Vec::new();
    let mut choice = vec![0usize; pairs.len()];
    let mut index = 0usize;
    loop {
        let mut h = ComplexMatrix::zeros(kernel.dim());
        for (p, &(j, jp)) in pairs.iter().enumerate() {
            let blk = &blocks[p][choice[p]];
            h += &ComplexMatrix::lattice_block(blk, l, j, jp);
            if j != jp {
                h += &ComplexMatrix::lattice_block(&blk.adjoint(), l, jp, j);
            }
        }
        let norm = h.frobenius_norm();
        if norm > tol.abs_eps && h.is_psd(&tol) {
            let residual = kernel.boundary_residual(&h)?;
            let fresh = found
                .iter()
                .all(|(_, s)| s.h.distance(&h) >= config.dedup_eps);
            if residual <= config.residual_tol * norm.max(1.0) && fresh {
                found.push((index, BoundarySolution::from_matrix(kernel, h)?));
            }
        }
        index += 1;
        // odometer over candidate indices
        let mut pos = 0;
        loop {
            if pos == pairs.len() {
                found.sort_by_key(|(ia, a)| sort_key(a, *ia));
                return Ok(BoundarySet {
                    solutions: found.into_iter().map(|(_, s)| s).collect(),
                    degenerate,
                    combinations: required,
                });
            }
            choice[pos] += 1;
            if choice[pos] < candidates[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Identity first, then single sites, other diagonal supports, then
/// solutions with off-diagonal blocks.
fn sort_key(s: &BoundarySolution, index: usize) -> (u8, Vec<usize>, usize) {
    let support = s.diagonal_support();
    let class = if s.label.as_deref() == Some("h_0") {
        0
    } else if !s.is_diagonal() {
        3
    } else if support.len() == 1 {
        1
    } else {
        2
    };
    (class, support, index)
}

fn label_for(
    kernel: &QmcKernel,
    h: &ComplexMatrix,
    blocks: &BTreeMap<(usize, usize), ComplexMatrix>,
) -> Option<String> {
    let tol = kernel.tol();
    let l = kernel.lambda_size();
    let eps = 1e-8;
    if h.distance(&ComplexMatrix::identity(h.dim())) < eps {
        return Some("h_0".into());
    }
    let id = ComplexMatrix::identity(kernel.model().dim_h());
    let diag_identity = |j: usize| blocks.get(&(j, j)).is_some_and(|b| b.distance(&id) < eps);
    let diagonal = blocks.keys().all(|(j, jp)| j == jp);
    if diagonal {
        if !blocks.keys().all(|&(j, _)| diag_identity(j)) {
            return None;
        }
        let support: Vec<usize> = blocks.keys().map(|&(j, _)| j).collect();
        return match support.as_slice() {
            [j] => Some(format!("h_{}", j + 1)),
            _ => Some(format!(
                "diag{{{}}}",
                support.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(",")
            )),
        };
    }
    if l == 2 && diag_identity(0) && diag_identity(1) && h.is_hermitian(tol) {
        return Some("h_3".into());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Tolerance;
    use crate::model::{random_model, OqrwModel, TwoStateParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn kernel(params: &TwoStateParams, k: usize) -> QmcKernel {
        QmcKernel::new(OqrwModel::two_state(params, k).unwrap(), Tolerance::default()).unwrap()
    }

    fn labels(set: &BoundarySet) -> Vec<Option<String>> {
        set.solutions.iter().map(|s| s.label.clone()).collect()
    }

    fn some(xs: &[&str]) -> Vec<Option<String>> {
        xs.iter().map(|s| Some(s.to_string())).collect()
    }

    #[test]
    fn scalar_roots_solve_the_equation() {
        for k in 2..=5 {
            let alpha = C64::new(0.3, 0.7);
            let roots = scalar_roots(alpha, k, 1e-12);
            assert_eq!(roots.len(), k);
            for t in roots {
                assert!((t - alpha * t.powi(k as i32)).norm() < 1e-12);
            }
        }
        assert_eq!(scalar_roots(ZERO, 3, 1e-12), vec![ZERO]);
        assert_eq!(scalar_roots(ONE, 1, 1e-12), vec![ZERO, ONE]);
        assert_eq!(scalar_roots(C64::new(0.5, 0.0), 1, 1e-12), vec![ZERO]);
    }

    #[test]
    fn two_state_with_unimodular_c_has_four_solutions() {
        let params = TwoStateParams::real(1.0, 0.6, 0.8);
        let set = solve_boundary_fixed_points(&kernel(&params, 2), &SolverConfig::default()).unwrap();
        assert_eq!(labels(&set), some(&["h_0", "h_1", "h_2", "h_3"]));
        let h3 = &set.solutions[3];
        let p = ComplexMatrix::ketbra(2, 0, 0);
        // h_3 = I + p ⊗ |1⟩⟨2| + p ⊗ |2⟩⟨1| for c = 1
        let expected = &(&ComplexMatrix::identity(4) + &ComplexMatrix::lattice_block(&p, 2, 0, 1))
            + &ComplexMatrix::lattice_block(&p, 2, 1, 0);
        assert!(h3.h.distance(&expected) < 1e-12);
        for s in &set.solutions {
            assert!(s.residual < 1e-12);
        }
    }

    #[test]
    fn unimodular_c_with_phase() {
        let theta: f64 = 0.7;
        let mut params = TwoStateParams::real(1.0, 0.6, 0.8);
        params.c = C64::from_polar(1.0, theta);
        let set = solve_boundary_fixed_points(&kernel(&params, 2), &SolverConfig::default()).unwrap();
        assert_eq!(set.solutions.len(), 4);
        let h3 = &set.solutions[3];
        let expected = ComplexMatrix::ketbra(2, 0, 0).scale(ONE / params.c.conj());
        assert!(h3.blocks[&(0, 1)].distance(&expected) < 1e-12);
        assert!(h3.blocks[&(1, 0)].distance(&expected.adjoint()) < 1e-12);
    }

    #[test]
    fn subunit_c_has_three_solutions() {
        for c_abs in [0.3, 0.6, 0.8, 0.99] {
            let params = TwoStateParams::real(c_abs, 0.6, 0.8);
            let set = solve_boundary_fixed_points(&kernel(&params, 2), &SolverConfig::default()).unwrap();
            assert_eq!(labels(&set), some(&["h_0", "h_1", "h_2"]), "|c| = {c_abs}");
        }
    }

    #[test]
    fn identity_is_always_found() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let m = random_model(&mut rng, 3, 2, 3).unwrap();
            let kern = QmcKernel::new(m, Tolerance::default()).unwrap();
            let set = solve_boundary_fixed_points(&kern, &SolverConfig::default()).unwrap();
            assert_eq!(set.solutions[0].label.as_deref(), Some("h_0"));
            // the 2^3 − 1 diagonal projections I ⊗ P_S
            assert!(set.solutions.len() >= 7);
            for s in &set.solutions {
                assert!(s.h.is_psd(kern.tol()));
                assert!(s.residual <= 1e-9 * s.h.frobenius_norm().max(1.0));
            }
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let params = TwoStateParams::real(0.8, 0.6, 0.8);
        let config = SolverConfig {
            combination_cap: 4,
            ..SolverConfig::default()
        };
        assert_eq!(
            solve_boundary_fixed_points(&kernel(&params, 2), &config),
            Err(Error::EnumerationCap { required: 8, cap: 4 })
        );
    }

    #[test]
    fn degenerate_blocks_are_reported() {
        // B_j^i = δ_{ij} I makes every off-diagonal Gram block vanish
        let b = vec![
            vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2)],
            vec![ComplexMatrix::zeros(2), ComplexMatrix::identity(2)],
        ];
        let rho = vec![ComplexMatrix::diag(&[0.25, 0.25]), ComplexMatrix::diag(&[0.25, 0.25])];
        let m = OqrwModel::new(2, b, rho).unwrap();
        let kern = QmcKernel::new(m, Tolerance::default()).unwrap();
        let set = solve_boundary_fixed_points(&kern, &SolverConfig::default()).unwrap();
        assert_eq!(set.degenerate.len(), 1);
        assert_eq!((set.degenerate[0].j, set.degenerate[0].jp), (0, 1));
        assert_eq!(labels(&set), some(&["h_0", "h_1", "h_2"]));
    }

    #[test]
    fn order_one_tree() {
        let params = TwoStateParams::real(1.0, 0.6, 0.8);
        let set = solve_boundary_fixed_points(&kernel(&params, 1), &SolverConfig::default()).unwrap();
        assert_eq!(set.solutions[0].label.as_deref(), Some("h_0"));
        for s in &set.solutions {
            assert!(s.residual < 1e-12);
        }
    }
}
