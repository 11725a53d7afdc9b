//! Phase diagnostics: multiplicity of boundary solutions, a uniform
//! expectation gap on far-localized observables, and non-overlapping
//! supports on product projectors.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance, C64, ONE};
use crate::model::{OqrwModel, TwoStateParams};
use crate::qmc::{
    make_qmc, solve_boundary_fixed_points, BoundarySolution, LocalObservable, QmcKernel, QmcState,
    SolverConfig,
};
use crate::tree::Vertex;

/// `[[ε, z√(ε(1−ε))], [z̄√(ε(1−ε)), 1−ε]]`.
pub fn rank1_projector(eps: f64, z: C64, tol: &Tolerance) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("eps = {eps} outside [0, 1]")));
    }
    if (z.norm() - 1.0).abs() > tol.abs_eps {
        return Err(Error::Domain(format!("|z| = {} ≠ 1", z.norm())));
    }
    let off = (eps * (1.0 - eps)).sqrt();
    ComplexMatrix::from_rows(&[
        vec![C64::new(eps, 0.0), z * off],
        vec![z.conj() * off, C64::new(1.0 - eps, 0.0)],
    ])
}

/// `σ = I ⊗ |1⟩⟨1|`, the walker sitting at the first site.
fn first_site_indicator(kernel: &QmcKernel) -> ComplexMatrix {
    let m = kernel.model();
    ComplexMatrix::lattice_block(&ComplexMatrix::identity(m.dim_h()), m.lambda_size(), 0, 0)
}

fn same_model(s1: &QmcState, s2: &QmcState) -> Result<()> {
    if Arc::ptr_eq(s1.kernel(), s2.kernel()) || s1.kernel().model() == s2.kernel().model() {
        Ok(())
    } else {
        Err(Error::Domain("states belong to different models".into()))
    }
}

/// `|φ_1(E_n) − φ_2(E_n)|` for `n = 0..=n_max`, where `E_n` places
/// `I ⊗ |1⟩⟨1|` at the first vertex of level `n`.
pub fn gap_sequence(s1: &QmcState, s2: &QmcState, n_max: usize) -> Result<Vec<f64>> {
    same_model(s1, s2)?;
    let sigma = first_site_indicator(s1.kernel());
    (0..=n_max)
        .map(|n| {
            let e = LocalObservable::single(Vertex::leftmost(n), sigma.clone());
            Ok((s1.expectation(&e)? - s2.expectation(&e)?).norm())
        })
        .collect()
}

/// A product projector on which one state is near 0 and the other near 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportWitness {
    pub eps: f64,
    pub z: C64,
    pub n: usize,
    pub first_value: f64,
    pub second_value: f64,
}

impl fmt::Display for SupportWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P_{} with p(ε={}, z={}{:+}i): φ_1 = {:.6e}, φ_2 = {:.6e}",
            self.n, self.eps, self.z.re, self.z.im, self.first_value, self.second_value
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapResult {
    pub overlapping: bool,
    pub witness: Option<SupportWitness>,
    /// `Tr(ω_1 p⊗I)` and `Tr(ω_2 p⊗I)`; a value far from 1 on one side
    /// separates the supports at `ε = 1`.
    pub root_weights: (f64, f64),
}

pub const SUPPORT_EPS_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Values of `φ(⊗_{u ∈ Λ_n} p(ε,z)⊗I)` for both states, `n = 0..=n_max`.
pub fn projector_values(
    s1: &QmcState,
    s2: &QmcState,
    eps: f64,
    z: C64,
    n_max: usize,
) -> Result<Vec<(f64, f64)>> {
    let kernel = s1.kernel();
    let m = kernel.model();
    let proj = rank1_projector(eps, z, kernel.tol())?.kron(&ComplexMatrix::identity(m.lambda_size()))?;
    (0..=n_max)
        .map(|n| Ok((s1.expectation_uniform(&proj, n)?.re, s2.expectation_uniform(&proj, n)?.re)))
        .collect()
}

pub fn support_overlap_test(s1: &QmcState, s2: &QmcState, n_max: usize, delta: f64) -> Result<OverlapResult> {
    same_model(s1, s2)?;
    let m = s1.kernel().model();
    if m.dim_h() != 2 || m.lambda_size() != 2 {
        return Err(Error::UnsupportedShape(format!(
            "support test needs dim_h = |Λ| = 2, got dim_h = {}, |Λ| = {}",
            m.dim_h(),
            m.lambda_size()
        )));
    }
    let p_id = ComplexMatrix::ketbra(2, 0, 0).kron(&ComplexMatrix::identity(2))?;
    let root_weights = (
        s1.omega().trace_product(&p_id).re,
        s2.omega().trace_product(&p_id).re,
    );
    for z in [ONE, C64::new(0.0, 1.0)] {
        for eps in SUPPORT_EPS_GRID {
            for (n, (v1, v2)) in projector_values(s1, s2, eps, z, n_max)?.into_iter().enumerate() {
                let split = (v1 < delta && v2 > 1.0 - delta) || (v2 < delta && v1 > 1.0 - delta);
                if split {
                    return Ok(OverlapResult {
                        overlapping: false,
                        witness: Some(SupportWitness {
                            eps,
                            z,
                            n,
                            first_value: v1,
                            second_value: v2,
                        }),
                        root_weights,
                    });
                }
            }
        }
    }
    Ok(OverlapResult {
        overlapping: true,
        witness: None,
        root_weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapVerdict {
    Separated,
    NotSeparated,
    Inconclusive,
}

impl GapVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapVerdict::Separated => "SEPARATED",
            GapVerdict::NotSeparated => "NOT_SEPARATED",
            GapVerdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    PhaseTransition,
    NoTransitionDetected,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::PhaseTransition => "PHASE_TRANSITION",
            Verdict::NoTransitionDetected => "NO_TRANSITION_DETECTED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseConfig {
    pub gap_threshold: f64,
    pub delta: f64,
    pub n_max: usize,
    pub solver: SolverConfig,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        PhaseConfig {
            gap_threshold: 1e-6,
            delta: 0.01,
            n_max: 6,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub first: usize,
    pub second: usize,
    pub gap_sequence: Vec<f64>,
    /// Smallest gap over `n = 1..=n_max` (`n = 0` when `n_max = 0`).
    pub gap_limit: f64,
    pub gap_verdict: GapVerdict,
    /// `None` when the support test does not apply to the model.
    pub overlapping: Option<bool>,
    pub witness: Option<SupportWitness>,
    pub root_weights: Option<(f64, f64)>,
}

impl PairReport {
    /// `ε` of the separating projector, if any.
    pub fn support_eps(&self) -> Option<f64> {
        self.witness.as_ref().map(|w| w.eps)
    }
}

#[derive(Debug, Clone)]
pub struct PhaseReport {
    pub solutions: Vec<BoundarySolution>,
    pub states: Vec<QmcState>,
    pub pairs: Vec<PairReport>,
    pub verdict: Verdict,
    /// Indices of the first pair certifying the transition.
    pub witness_pair: Option<(usize, usize)>,
    pub notes: Vec<String>,
}

impl PhaseReport {
    pub fn label(&self, index: usize) -> String {
        self.solutions[index]
            .label
            .clone()
            .unwrap_or_else(|| format!("#{}", index + 1))
    }

    /// The pair of single-site boundaries `h_1`, `h_2`.
    pub fn canonical_pair(&self) -> Option<&PairReport> {
        let idx = |name: &str| {
            self.solutions
                .iter()
                .position(|s| s.label.as_deref() == Some(name))
        };
        let (a, b) = (idx("h_1")?, idx("h_2")?);
        self.pairs
            .iter()
            .find(|p| (p.first, p.second) == (a.min(b), a.max(b)))
    }
}

/// Parameters of a two-state walk recognized up to phases of `B_2^1`, `B_2^2`
/// and with `ρ_j ∝ |1⟩⟨1|`.
pub fn recognize_two_state(model: &OqrwModel, tol: &Tolerance) -> Option<(C64, C64, C64, C64)> {
    if model.lambda_size() != 2 || model.dim_h() != 2 {
        return None;
    }
    let eps = tol.abs_eps.max(1e-9);
    let p = ComplexMatrix::ketbra(2, 0, 0);
    for j in 0..2 {
        let normalized = model.rho(j).scale(C64::new(1.0 / model.rho_trace(j), 0.0));
        if normalized.distance(&p) > eps {
            return None;
        }
    }
    let only = |m: &ComplexMatrix, keep: &[(usize, usize)]| {
        (0..2).all(|r| (0..2).all(|s| keep.contains(&(r, s)) || m.get(r, s).norm() <= eps))
    };
    let diag = [(0, 0), (1, 1)];
    let (b11, b21, b12, b22) = (model.b(0, 0), model.b(1, 0), model.b(0, 1), model.b(1, 1));
    let unimodular = |z: C64| (z.norm() - 1.0).abs() <= eps;
    let shaped = only(b11, &diag)
        && only(b21, &diag)
        && only(b12, &[(0, 1)])
        && unimodular(b12.get(0, 1))
        && only(b22, &[(0, 0)])
        && unimodular(b22.get(0, 0));
    shaped.then(|| (b11.get(0, 0), b11.get(1, 1), b21.get(0, 0), b21.get(1, 1)))
}

/// Initial density used for `sol` in the phase analysis.
///
/// For the two-state walk the single-site boundaries get
/// `q⊗|1⟩⟨1|` and `p⊗|2⟩⟨2|` when `|c| < 1`, and `p⊗|1⟩⟨1|`, `p⊗|2⟩⟨2|`
/// when `|c| = 1` (so that `M_11(ω_1) = M_22(ω_2)`); everything else
/// starts from the maximally mixed density.
pub fn canonical_omega(kernel: &QmcKernel, sol: &BoundarySolution) -> ComplexMatrix {
    let m = kernel.model();
    let p = ComplexMatrix::ketbra(2, 0, 0);
    let q = ComplexMatrix::ketbra(2, 1, 1);
    if let Some((_, _, c, _)) = recognize_two_state(m, kernel.tol()) {
        let unit_c = (c.norm() - 1.0).abs() <= 1e-9;
        match sol.label.as_deref() {
            Some("h_1") => {
                let x = if unit_c { p } else { q };
                return ComplexMatrix::lattice_block(&x, 2, 0, 0);
            }
            Some("h_2") => return ComplexMatrix::lattice_block(&p, 2, 1, 1),
            _ => {}
        }
    }
    let d = m.dim();
    ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0))
}

fn gap_verdict(gaps: &[f64], threshold: f64) -> (f64, GapVerdict) {
    let far = if gaps.len() > 1 { &gaps[1..] } else { gaps };
    let limit = far.iter().copied().fold(f64::INFINITY, f64::min);
    let verdict = if limit >= threshold {
        GapVerdict::Separated
    } else if gaps.iter().all(|&g| g <= threshold) {
        GapVerdict::NotSeparated
    } else {
        GapVerdict::Inconclusive
    };
    (limit, verdict)
}

pub fn detect_phase_transition(model: &OqrwModel, tol: &Tolerance, config: &PhaseConfig) -> Result<PhaseReport> {
    let kernel = Arc::new(QmcKernel::new(model.clone(), *tol)?);
    let set = solve_boundary_fixed_points(&kernel, &config.solver)?;
    let mut notes: Vec<String> = set
        .degenerate
        .iter()
        .map(|d| format!("degenerate block ({}, {}): α = 0, only t = 0", d.j + 1, d.jp + 1))
        .collect();
    let states = set
        .solutions
        .iter()
        .map(|sol| make_qmc(kernel.clone(), canonical_omega(&kernel, sol), sol.clone()))
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    let mut unsupported = false;
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            let gaps = gap_sequence(&states[a], &states[b], config.n_max)?;
            let (gap_limit, gap_verdict) = gap_verdict(&gaps, config.gap_threshold);
            let overlap = match support_overlap_test(&states[a], &states[b], config.n_max, config.delta) {
                Ok(o) => Some(o),
                Err(Error::UnsupportedShape(msg)) => {
                    if !unsupported {
                        notes.push(msg);
                        unsupported = true;
                    }
                    None
                }
                Err(e) => return Err(e),
            };
            pairs.push(PairReport {
                first: a,
                second: b,
                gap_sequence: gaps,
                gap_limit,
                gap_verdict,
                overlapping: overlap.as_ref().map(|o| o.overlapping),
                witness: overlap.as_ref().and_then(|o| o.witness.clone()),
                root_weights: overlap.map(|o| o.root_weights),
            });
        }
    }

    let witness_pair = pairs
        .iter()
        .find(|p| p.gap_verdict == GapVerdict::Separated && p.overlapping == Some(false))
        .map(|p| (p.first, p.second));
    let verdict = if set.solutions.len() < 2 {
        Verdict::NoTransitionDetected
    } else if witness_pair.is_some() {
        Verdict::PhaseTransition
    } else {
        Verdict::Inconclusive
    };
    Ok(PhaseReport {
        solutions: set.solutions,
        states,
        pairs,
        verdict,
        witness_pair,
        notes,
    })
}

/// The two-state walk with `|c| = x`, `|a| = √(1 − x²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateFamily {
    pub b: C64,
    pub d: C64,
    pub a_phase: f64,
    pub c_phase: f64,
    pub k: usize,
}

impl TwoStateFamily {
    pub fn new(b: C64, d: C64, k: usize) -> Self {
        TwoStateFamily {
            b,
            d,
            a_phase: 0.0,
            c_phase: 0.0,
            k,
        }
    }

    pub fn params(&self, x: f64) -> Result<TwoStateParams> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("grid value {x} outside [0, 1]")));
        }
        let a = C64::from_polar((1.0 - x * x).max(0.0).sqrt(), self.a_phase);
        let c = C64::from_polar(x, self.c_phase);
        Ok(TwoStateParams::with_pure_blocks(a, self.b, c, self.d))
    }

    pub fn model(&self, x: f64) -> Result<OqrwModel> {
        OqrwModel::two_state(&self.params(x)?, self.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub param: f64,
    pub verdict: Verdict,
    pub solution_count: usize,
    /// `gap_limit` of the pair `(h_1, h_2)`.
    pub canonical_gap: Option<f64>,
    pub canonical_verdict: Option<GapVerdict>,
}

pub fn parameter_sweep(
    family: &TwoStateFamily,
    grid: &[f64],
    tol: &Tolerance,
    config: &PhaseConfig,
) -> Result<Vec<SweepPoint>> {
    if let Some(&bad) = grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Domain(format!("grid value {bad} outside [0, 1]")));
    }
    grid.par_iter()
        .map(|&x| {
            let report = detect_phase_transition(&family.model(x)?, tol, config)?;
            let canonical = report.canonical_pair();
            Ok(SweepPoint {
                param: x,
                verdict: report.verdict,
                solution_count: report.solutions.len(),
                canonical_gap: canonical.map(|p| p.gap_limit),
                canonical_verdict: canonical.map(|p| p.gap_verdict),
            })
        })
        .collect()
}
