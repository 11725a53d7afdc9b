use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::sync::Arc;

use oqrw_tree_core::entropy::{mean_entropy, von_neumann_entropy};
use oqrw_tree_core::linalg::{ONE, ZERO};
use oqrw_tree_core::model::random_model;
use oqrw_tree_core::phase::{
    detect_phase_transition, gap_sequence, rank1_projector, PhaseConfig, TwoStateFamily,
};
use oqrw_tree_core::qmc::{
    make_qmc, oracle_transition_expectation, solve_boundary_fixed_points, BoundarySolution, LocalObservable,
    QmcKernel, SolverConfig,
};
use oqrw_tree_core::{ComplexMatrix, OqrwModel, Tolerance, TreeShape, Vertex, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn matrix(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn psd(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let x = matrix(rng, d);
    &x * &x.adjoint()
}

fn density(rng: &mut impl Rng, d: usize) -> ComplexMatrix {
    let m = psd(rng, d);
    let t = m.trace().re;
    m.scale(C64::new(1.0 / t, 0.0))
}

fn model_from(seed: u64, l: usize, d: usize, k: usize) -> OqrwModel {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), l, d, k).unwrap()
}

fn kernel(m: OqrwModel) -> Arc<QmcKernel> {
    Arc::new(QmcKernel::new(m, Tolerance::default()).unwrap())
}

fn two_state_family(c: f64) -> OqrwModel {
    TwoStateFamily::new(C64::new(0.6, 0.0), C64::new(0.8, 0.0), 2).model(c).unwrap()
}

fn labelled(sols: &[BoundarySolution], name: &str) -> BoundarySolution {
    sols.iter().find(|s| s.label.as_deref() == Some(name)).unwrap().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn levels_partition_into_successor_sets(k in 1usize..=3, n in 1usize..=8) {
        let shape = TreeShape::new(k).unwrap();
        let level = shape.level_vertices(n).unwrap();
        let from_parents: Vec<Vertex> = shape
            .level_vertices(n - 1)
            .unwrap()
            .iter()
            .flat_map(|u| shape.successors(u))
            .collect();
        let as_set: BTreeSet<_> = from_parents.iter().cloned().collect();
        prop_assert_eq!(as_set.len(), from_parents.len());
        prop_assert_eq!(as_set, level.iter().cloned().collect::<BTreeSet<_>>());
        prop_assert!(level.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(
            shape.ball_size(n).unwrap() - shape.ball_size(n - 1).unwrap(),
            shape.level_size(n).unwrap()
        );
    }

    #[test]
    fn kron_and_partial_trace(seed: u64, da in 1usize..=3, db in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = matrix(&mut rng, da);
        let b = matrix(&mut rng, db);
        let ab = a.kron(&b).unwrap();
        prop_assert!((ab.trace() - a.trace() * b.trace()).norm() < 1e-12);
        let back = ab.partial_trace_right(da, db).unwrap();
        prop_assert!(back.distance(&a.scale(b.trace())) < 1e-12);
    }

    #[test]
    fn psd_square_root_squares_back(seed: u64, d in 1usize..=4) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = &psd(&mut rng, d) + &ComplexMatrix::identity(d).scale(C64::new(1e-3, 0.0));
        let r = m.psd_sqrt(&tol).unwrap();
        prop_assert!(r.is_hermitian(&tol) && r.is_psd(&tol));
        prop_assert!((&r * &r).distance(&m) <= 1e-10 * m.frobenius_norm());
    }

    #[test]
    fn density_spectra(seed: u64, d in 1usize..=4) {
        let tol = Tolerance::default();
        let rho = density(&mut ChaCha8Rng::seed_from_u64(seed), d);
        let values = rho.hermitian_eigenvalues(&tol).unwrap();
        prop_assert!(values.iter().all(|&l| (-tol.abs_eps..=1.0 + tol.abs_eps).contains(&l)));
        prop_assert!((values.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let s = von_neumann_entropy(&rho, &tol).unwrap();
        prop_assert!(s >= 0.0 && s <= (d as f64).ln() + 1e-12);
    }

    #[test]
    fn entropy_is_additive(seed: u64) {
        let tol = Tolerance::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (density(&mut rng, 2), density(&mut rng, 2));
        let joint = von_neumann_entropy(&a.kron(&b).unwrap(), &tol).unwrap();
        let split = von_neumann_entropy(&a, &tol).unwrap() + von_neumann_entropy(&b, &tol).unwrap();
        prop_assert!((joint - split).abs() < 1e-10);
    }

    #[test]
    fn kraus_operators_resolve_identity(seed: u64, l in 1usize..=3, d in 1usize..=3) {
        let m = model_from(seed, l, d, 2);
        let mut sum = ComplexMatrix::zeros(l * d);
        for i in 0..l {
            for j in 0..l {
                let op = m.m_op(i, j).unwrap();
                sum += &(&op.adjoint() * &op);
            }
        }
        prop_assert!(sum.distance(&ComplexMatrix::identity(l * d)) < 1e-10);
    }

    #[test]
    fn lifted_kraus_gram(seed: u64, l in 1usize..=3, d in 1usize..=2) {
        // A_{j'}^{i'*} A_j^i = δ_{ii'} ρ_{j'}^{1/2} ρ_j^{1/2} ⊗ |j'⟩⟨j| / √(Tr ρ_j Tr ρ_{j'})
        let tol = Tolerance::default();
        let m = model_from(seed, l, d, 2);
        let kern = kernel(m.clone());
        for (i, j, ip, jp) in (0..l).flat_map(|i| (0..l).flat_map(move |j| (0..l).flat_map(move |ip| (0..l).map(move |jp| (i, j, ip, jp))))) {
            let a = m.a_op(i, j, &tol).unwrap();
            let ap = m.a_op(ip, jp, &tol).unwrap();
            let got = &ap.adjoint() * &a;
            let root = &(m.rho_sqrt(jp) * m.rho_sqrt(j)).scale(C64::new(1.0 / (m.rho_trace(j) * m.rho_trace(jp)).sqrt(), 0.0));
            let want = if i == ip {
                ComplexMatrix::lattice_block(root, l, jp, j)
            } else {
                ComplexMatrix::zeros(l * d)
            };
            prop_assert!(got.distance(&want) < 1e-10, "({}, {}, {}, {})", i, j, ip, jp);
            if i == ip {
                prop_assert!(got.distance(kern.phi_operator(j, jp).unwrap()) < 1e-10);
            }
            let trace = if i == ip && j == jp { root.trace() } else { ZERO };
            prop_assert!((got.trace() - trace).norm() < 1e-10);
        }
    }

    #[test]
    fn path_marginals_are_consistent(seed: u64, l in 1usize..=3, d in 1usize..=3, path in prop::collection::vec(0usize..3, 1..5)) {
        let m = model_from(seed, l, d, 2);
        let path: Vec<usize> = path.into_iter().map(|i| i % l).collect();
        let mut total = 0.0;
        for next in 0..l {
            let mut longer = path.clone();
            longer.push(next);
            total += m.path_probability(&longer).unwrap();
        }
        prop_assert!((total - m.path_probability(&path).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn channel_preserves_trace_and_positivity(seed: u64, l in 1usize..=3, d in 1usize..=3) {
        let tol = Tolerance::default();
        let m = model_from(seed, l, d, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let mut input = ComplexMatrix::zeros(l * d);
        for i in 0..l {
            input += &ComplexMatrix::lattice_block(&psd(&mut rng, d), l, i, i);
        }
        let out = m.apply_channel(&input, &tol).unwrap();
        prop_assert!((out.trace() - input.trace()).norm() < 1e-10 * input.trace().norm());
        prop_assert!(out.is_psd(&tol));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transition_expectation_is_unital_and_positive(seed: u64, l in 1usize..=2, d in 1usize..=2, k in 1usize..=3) {
        let tol = Tolerance::default();
        let kern = kernel(model_from(seed, l, d, k));
        let id = ComplexMatrix::identity(l * d);
        let e = kern.transition_expectation(&vec![id.clone(); k + 1]).unwrap();
        prop_assert!(e.distance(&id) < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.rotate_left(7));
        let factors: Vec<_> = (0..=k).map(|_| psd(&mut rng, l * d)).collect();
        let out = kern.transition_expectation(&factors).unwrap();
        let scale = out.frobenius_norm().max(1.0);
        prop_assert!(out.is_hermitian(&tol));
        prop_assert!(out.min_eigenvalue() >= -1e-10 * scale);
    }

    #[test]
    fn closed_form_matches_kraus_oracle(seed: u64, c in 0.0f64..=1.0) {
        let kern = kernel(two_state_family(c));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<_> = (0..3).map(|_| matrix(&mut rng, 4)).collect();
        let fast = kern.transition_expectation(&factors).unwrap();
        let slow = oracle_transition_expectation(&kern, &ComplexMatrix::kron_all(&factors).unwrap()).unwrap();
        prop_assert!(fast.distance(&slow) < 1e-10);
    }

    #[test]
    fn boundary_solutions_are_fixed_points(seed: u64, l in 1usize..=3, d in 1usize..=2, k in 1usize..=3) {
        let tol = Tolerance::default();
        let config = SolverConfig::default();
        let kern = kernel(model_from(seed, l, d, k));
        let set = solve_boundary_fixed_points(&kern, &config).unwrap();
        prop_assert!(!set.solutions.is_empty());
        for s in &set.solutions {
            prop_assert!(s.h.is_hermitian(&tol) && s.h.is_psd(&tol));
            prop_assert!(kern.boundary_residual(&s.h).unwrap() <= config.residual_tol * s.h.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn expectation_is_linear_and_normalized(seed: u64, c in 0.0f64..=1.0, x in -2.0f64..2.0) {
        let kern = kernel(two_state_family(c));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sols = solve_boundary_fixed_points(&kern, &SolverConfig::default()).unwrap().solutions;
        for sol in sols {
            let s = make_qmc(kern.clone(), density(&mut rng, 4), sol).unwrap();
            prop_assert!((s.expectation(&LocalObservable::identity()).unwrap() - ONE).norm() < 1e-10);
            let v: Vertex = "1.2".parse().unwrap();
            let (a, b) = (matrix(&mut rng, 4), matrix(&mut rng, 4));
            let mut both = LocalObservable::single(v.clone(), a.clone());
            both.add_term(C64::new(x, 0.5), BTreeMap::from([(v.clone(), b.clone())]));
            let lhs = s.expectation(&both).unwrap();
            let rhs = s.expectation(&LocalObservable::single(v.clone(), a)).unwrap()
                + C64::new(x, 0.5) * s.expectation(&LocalObservable::single(v, b)).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn diagonal_boundaries_factorize(seed: u64, c in 0.0f64..1.0) {
        let kern = kernel(two_state_family(c));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sols = solve_boundary_fixed_points(&kern, &SolverConfig::default()).unwrap().solutions;
        for (j, name) in [(0usize, "h_1"), (1, "h_2")] {
            let s = make_qmc(kern.clone(), density(&mut rng, 4), labelled(&sols, name)).unwrap();
            let shape = TreeShape::new(2).unwrap();
            let mut factors = BTreeMap::new();
            for n in 0..=2 {
                for v in shape.level_vertices(n).unwrap() {
                    factors.insert(v, matrix(&mut rng, 4));
                }
            }
            let got = s.expectation(&LocalObservable::product(factors.clone())).unwrap();
            // Tr(M_jj(ω) a_o) Π ψ_jj(a_u), normalized by the root mass
            let root = kern.m_jjprime(j, j, s.omega()).unwrap();
            let mass = root.trace();
            let mut want = root.trace_product(&factors[&Vertex::root()]) / mass;
            for (v, a) in &factors {
                if !v.is_root() {
                    want *= kern.psi_jjprime(j, j, a).unwrap();
                }
            }
            prop_assert!((got - want).norm() < 1e-10 * (1.0 + want.norm()), "{}: {} vs {}", name, got, want);
        }
    }

    #[test]
    fn two_state_gaps_are_flat(c in 0.0f64..0.999) {
        let kern = kernel(two_state_family(c));
        let sols = solve_boundary_fixed_points(&kern, &SolverConfig::default()).unwrap().solutions;
        let q = ComplexMatrix::ketbra(2, 1, 1);
        let p = ComplexMatrix::ketbra(2, 0, 0);
        let s1 = make_qmc(kern.clone(), ComplexMatrix::lattice_block(&q, 2, 0, 0), labelled(&sols, "h_1")).unwrap();
        let s2 = make_qmc(kern.clone(), ComplexMatrix::lattice_block(&p, 2, 1, 1), labelled(&sols, "h_2")).unwrap();
        let gaps = gap_sequence(&s1, &s2, 8).unwrap();
        // the root term sees B_1^1 through its lower diagonal entry b
        prop_assert!((gaps[0] - 0.36).abs() < 1e-12);
        for g in &gaps[1..] {
            prop_assert!((g - (1.0 - c * c)).abs() < 1e-12, "{:?}", gaps);
        }
        prop_assert!(gaps.iter().all(|g| (0.0..=2.0).contains(g)));
    }

    #[test]
    fn gaps_are_bounded_for_any_pair(seed: u64, l in 1usize..=3, d in 1usize..=2) {
        let kern = kernel(model_from(seed, l, d, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let sols = solve_boundary_fixed_points(&kern, &SolverConfig::default()).unwrap().solutions;
        let states: Vec<_> = sols
            .into_iter()
            .take(3)
            .map(|s| make_qmc(kern.clone(), density(&mut rng, l * d), s).unwrap())
            .collect();
        for a in &states {
            for b in &states {
                let gaps = gap_sequence(a, b, 4).unwrap();
                prop_assert!(gaps.iter().all(|g| (0.0..=2.0 + 1e-12).contains(g)));
            }
        }
    }

    #[test]
    fn rank_one_projectors(eps in 0.0f64..=1.0, theta in 0.0f64..(2.0 * PI), n in 0usize..=2) {
        let tol = Tolerance::default();
        let p = rank1_projector(eps, C64::from_polar(1.0, theta), &tol).unwrap();
        prop_assert!(p.is_projection(&tol));
        let factor = p.kron(&ComplexMatrix::identity(2)).unwrap();
        prop_assert!(factor.is_projection(&tol));
        let sites = TreeShape::new(2).unwrap().ball_size(n).unwrap() as usize;
        if sites <= 3 {
            let full = ComplexMatrix::kron_all(&vec![factor; sites]).unwrap();
            prop_assert!(full.is_projection(&tol));
        }
    }

    #[test]
    fn entropy_residual_and_omega_independence(seed: u64, c in 0.05f64..0.999) {
        let kern = kernel(two_state_family(c));
        let sols = solve_boundary_fixed_points(&kern, &SolverConfig::default()).unwrap().solutions;
        let h1 = labelled(&sols, "h_1");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = TreeShape::new(2).unwrap();
        let mut means = Vec::new();
        for _ in 0..2 {
            let omega = ComplexMatrix::lattice_block(&density(&mut rng, 2), 2, 0, 0);
            let r = mean_entropy(&make_qmc(kern.clone(), omega, h1.clone()).unwrap(), 20).unwrap();
            for &(n, v) in &r.finite_values {
                let bound = (r.root_entropy - r.site_entropy).abs() / shape.ball_size(n).unwrap() as f64;
                prop_assert!((v - r.mean_entropy).abs() <= bound + 1e-15);
            }
            means.push(r.mean_entropy);
        }
        prop_assert!((means[0] - means[1]).abs() < 1e-14);
    }
}

#[test]
fn verdict_is_invariant_under_global_phase() {
    let tol = Tolerance::default();
    let config = PhaseConfig::default();
    for c in [0.3, 0.8, 1.0] {
        let m = two_state_family(c);
        let base = detect_phase_transition(&m, &tol, &config).unwrap();
        for theta in [PI / 3.0, PI] {
            let rotated = detect_phase_transition(&m.with_global_phase(theta), &tol, &config).unwrap();
            assert_eq!(rotated.verdict, base.verdict, "c = {c}, θ = {theta}");
            assert_eq!(rotated.solutions.len(), base.solutions.len());
            for (x, y) in base.pairs.iter().zip(&rotated.pairs) {
                for (g, h) in x.gap_sequence.iter().zip(&y.gap_sequence) {
                    assert!((g - h).abs() < 1e-12);
                }
            }
        }
    }
}
