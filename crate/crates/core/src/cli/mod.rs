//! Batch front end: `oqrw-tree <command> --model FILE …`.
//!
//! Every command prints one JSON report with the command name, a SHA-256
//! digest of its inputs, the tolerances in force and a `results` payload.
//! Reported numbers are rounded to 15 significant digits; the model
//! embedded by `validate` keeps full precision so it re-parses exactly.
//!
//! Exit codes: 0 success, 2 parse/usage, 3 invalid model, 4 unsupported
//! shape or boundary, 5 numerical failure.

pub mod model_file;
pub mod spec;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::entropy::mean_entropy;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance, C64};
use crate::model::{OqrwModel, TwoStateParams};
use crate::phase::{
    canonical_omega, detect_phase_transition, parameter_sweep, recognize_two_state, PhaseConfig,
    TwoStateFamily,
};
use crate::qmc::{
    make_qmc, oracle_qmc_expectation, solve_boundary_fixed_points, QmcKernel, SolverConfig,
};
use model_file::ModelFile;
use spec::OmegaSpec;

pub const THREADS_ENV: &str = "OQRW_TREE_THREADS";

/// Largest path table `pathprob --enumerate` will print.
const ENUMERATION_LIMIT: u64 = 1 << 20;

#[derive(Debug, Parser)]
#[command(name = "oqrw-tree", version, about = "Quantum Markov chains on Cayley trees from open quantum random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Base {
    /// Model file (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Residual tolerance for boundary fixed points.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add wall time to the report (makes it run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogBase {
    #[value(name = "e")]
    E,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the walk invariants and echo the model in explicit form.
    Validate {
        #[command(flatten)]
        base: Base,
    },
    /// Enumerate translation-invariant boundary conditions.
    SolveBoundaries {
        #[command(flatten)]
        base: Base,
    },
    /// Expectation of a local observable in a chain.
    Expect {
        #[command(flatten)]
        base: Base,
        /// Observable spec: inline JSON or a file.
        #[arg(long)]
        observable: String,
        /// Boundary label (h_0, h_1, …), index #n, or {"matrix": …}.
        #[arg(long, default_value = "h_0")]
        boundary: String,
        /// Root density: canonical, mixed, or a factor spec.
        #[arg(long, default_value = "canonical")]
        omega: String,
        /// Also evaluate the dense nested oracle.
        #[arg(long)]
        oracle: bool,
    },
    /// Phase-transition diagnostics, or a sweep over |c| with --grid.
    Phase {
        #[command(flatten)]
        base: Base,
        /// Comma-separated |c| values for a two-state sweep.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        #[arg(long, default_value_t = 1e-6)]
        gap_threshold: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
    /// Mean entropy of a single-site product chain.
    Entropy {
        #[command(flatten)]
        base: Base,
        #[arg(long, default_value = "h_1")]
        boundary: String,
        #[arg(long, default_value = "canonical")]
        omega: String,
        #[arg(long, default_value_t = 20)]
        n_max: usize,
        #[arg(long, value_enum, default_value = "e")]
        log_base: LogBase,
    },
    /// Path probabilities: one path, a full table, or sampled frequencies.
    Pathprob {
        #[command(flatten)]
        base: Base,
        /// Comma-separated 1-based sites, e.g. 1,2,2.
        #[arg(long, conflicts_with_all = ["enumerate", "sample"])]
        path: Option<String>,
        /// Tabulate all paths with this many steps.
        #[arg(long, conflicts_with = "sample")]
        enumerate: Option<usize>,
        /// Number of sampled paths.
        #[arg(long)]
        sample: Option<usize>,
        /// Steps per sampled path.
        #[arg(long, default_value_t = 3)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::Domain(_)
        | Error::InvalidVertex { .. }
        | Error::IndexOutOfRange { .. }
        | Error::InvalidOrder => 2,
        Error::InvalidModel(_) | Error::ZeroBlock { .. } => 3,
        Error::UnsupportedShape(_) | Error::UnsupportedBoundary(_) => 4,
        _ => 5,
    }
}

/// Sizes the global worker pool from `OQRW_TREE_THREADS`, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // a pool built earlier in the process wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn round15(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round15(x))
    } else {
        Value::Null
    }
}

fn cnum(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

fn mat(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.rows()
            .into_iter()
            .map(|row| Value::Array(row.into_iter().map(cnum).collect()))
            .collect(),
    )
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    let bytes = h.finalize();
    let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

struct Loaded {
    text: String,
    file: ModelFile,
    model: OqrwModel,
}

fn load(base: &Base) -> Result<Loaded> {
    let text = std::fs::read_to_string(&base.model)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", base.model.display())))?;
    let file = ModelFile::parse(&text)?;
    let model = file.to_model().map_err(|e| match e {
        Error::Parse(m) => Error::Parse(m),
        other => Error::InvalidModel(other.to_string()),
    })?;
    Ok(Loaded { text, file, model })
}

fn solver_config(base: &Base) -> Result<SolverConfig> {
    let mut config = SolverConfig::default();
    if let Some(t) = base.tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::Parse(format!("--tol must be positive, got {t}")));
        }
        config.residual_tol = t;
    }
    Ok(config)
}

fn tolerances(tol: &Tolerance, solver: &SolverConfig, extra: &[(&str, f64)]) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("abs_eps".into(), num(tol.abs_eps));
    map.insert("rel_eps".into(), num(tol.rel_eps));
    map.insert("residual_tol".into(), num(solver.residual_tol));
    map.insert("dedup_eps".into(), num(solver.dedup_eps));
    for (k, v) in extra {
        map.insert((*k).into(), num(*v));
    }
    Value::Object(map)
}

fn advisories(loaded: &Loaded, tol: &Tolerance) -> Result<Vec<String>> {
    if let Some(params) = loaded.file.two_state_params()? {
        return Ok(params.advisories(tol));
    }
    Ok(match recognize_two_state(&loaded.model, tol) {
        Some((a, b, c, d)) => TwoStateParams::with_pure_blocks(a, b, c, d).advisories(tol),
        None => Vec::new(),
    })
}

fn kernel(model: &OqrwModel, tol: &Tolerance) -> Result<Arc<QmcKernel>> {
    Ok(Arc::new(QmcKernel::new(model.clone(), *tol)?))
}

fn label_or_index(label: &Option<String>, index: usize) -> String {
    label.clone().unwrap_or_else(|| format!("#{}", index + 1))
}

fn resolve_omega(spec: &OmegaSpec, kernel: &QmcKernel, sol: &crate::qmc::BoundarySolution) -> ComplexMatrix {
    match spec {
        OmegaSpec::Canonical => canonical_omega(kernel, sol),
        OmegaSpec::Mixed => {
            let d = kernel.dim();
            ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0))
        }
        OmegaSpec::Explicit(m) => m.clone(),
    }
}

fn cmd_validate(loaded: &Loaded, tol: &Tolerance) -> Result<(Value, bool)> {
    let report = loaded.model.validate(tol);
    let model = serde_json::to_value(ModelFile::from_model(&loaded.model)).expect("model serializes");
    let results = json!({
        "valid": report.is_valid(),
        "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "advisories": advisories(loaded, tol)?,
        "lambda_size": loaded.model.lambda_size(),
        "dim_h": loaded.model.dim_h(),
        "tree_order_k": loaded.model.k(),
        "model": model,
    });
    Ok((results, report.is_valid()))
}

fn cmd_solve(loaded: &Loaded, tol: &Tolerance, config: &SolverConfig) -> Result<Value> {
    let kern = kernel(&loaded.model, tol)?;
    let set = solve_boundary_fixed_points(&kern, config)?;
    let solutions: Vec<Value> = set
        .solutions
        .iter()
        .enumerate()
        .map(|(idx, s)| {
            json!({
                "label": label_or_index(&s.label, idx),
                "residual": num(s.residual),
                "h": mat(&s.h),
                "blocks": s.blocks.iter().map(|(&(j, jp), b)| json!({"j": j + 1, "jp": jp + 1, "block": mat(b)})).collect::<Vec<_>>(),
                "coeffs": s.coeffs.iter().map(|(&(j, jp), &t)| json!({"j": j + 1, "jp": jp + 1, "t": cnum(t)})).collect::<Vec<_>>(),
            })
        })
        .collect();
    Ok(json!({
        "count": set.solutions.len(),
        "combinations": set.combinations.to_string(),
        "solutions": solutions,
        "degenerate_blocks": set.degenerate.iter().map(|d| json!({"j": d.j + 1, "jp": d.jp + 1, "alpha": cnum(d.alpha)})).collect::<Vec<_>>(),
    }))
}

fn cmd_expect(
    loaded: &Loaded,
    tol: &Tolerance,
    config: &SolverConfig,
    observable: &str,
    boundary: &str,
    omega: &str,
    oracle: bool,
) -> Result<Value> {
    let kern = kernel(&loaded.model, tol)?;
    let obs = spec::parse_observable(observable, &loaded.model)?;
    let set = solve_boundary_fixed_points(&kern, config)?;
    let sol = spec::select_boundary(boundary, &kern, &set.solutions)?;
    let omega = resolve_omega(&spec::parse_omega(omega, &loaded.model)?, &kern, &sol);
    let label = sol.label.clone();
    let state = make_qmc(kern, omega, sol)?;
    let value = state.expectation(&obs)?;
    let mut results = json!({
        "value": cnum(value),
        "boundary": label,
        "normalization": num(state.normalization()),
        "rescaled": state.was_rescaled(),
        "support_depth": obs.support_depth(),
        "omega": mat(state.omega()),
    });
    if oracle {
        let o = oracle_qmc_expectation(&state, &obs, obs.support_depth())?;
        results["oracle_value"] = cnum(o);
        results["oracle_difference"] = num((o - value).norm());
    }
    Ok(results)
}

fn family_for(loaded: &Loaded, tol: &Tolerance) -> Result<TwoStateFamily> {
    let (a, b, c, d) = match loaded.file.two_state_params()? {
        Some(p) => (p.a, p.b, p.c, p.d),
        None => recognize_two_state(&loaded.model, tol).ok_or_else(|| {
            Error::UnsupportedShape("--grid sweeps need a two-state model".into())
        })?,
    };
    Ok(TwoStateFamily {
        b,
        d,
        a_phase: if a.norm() > 0.0 { a.arg() } else { 0.0 },
        c_phase: if c.norm() > 0.0 { c.arg() } else { 0.0 },
        k: loaded.model.k(),
    })
}

fn cmd_phase(loaded: &Loaded, tol: &Tolerance, config: &PhaseConfig, grid: Option<&str>) -> Result<Value> {
    if let Some(grid) = grid {
        let grid = spec::parse_grid(grid)?;
        let family = family_for(loaded, tol)?;
        let points = parameter_sweep(&family, &grid, tol, config)?;
        return Ok(json!({
            "family": {
                "b": cnum(family.b), "d": cnum(family.d),
                "a_phase": num(family.a_phase), "c_phase": num(family.c_phase), "k": family.k,
            },
            "points": points.iter().map(|p| json!({
                "param": num(p.param),
                "verdict": p.verdict.as_str(),
                "solution_count": p.solution_count,
                "canonical_gap": opt_num(p.canonical_gap),
                "canonical_verdict": p.canonical_verdict.map(|v| v.as_str()),
            })).collect::<Vec<_>>(),
        }));
    }
    let report = detect_phase_transition(&loaded.model, tol, config)?;
    let label = |i: usize| report.label(i);
    let pairs: Vec<Value> = report
        .pairs
        .iter()
        .map(|p| {
            json!({
                "first": label(p.first),
                "second": label(p.second),
                "gap_sequence": p.gap_sequence.iter().map(|&g| num(g)).collect::<Vec<_>>(),
                "gap_limit": num(p.gap_limit),
                "gap_verdict": p.gap_verdict.as_str(),
                "overlapping": p.overlapping,
                "support_eps": opt_num(p.support_eps()),
                "witness": p.witness.as_ref().map(|w| json!({
                    "eps": num(w.eps), "z": cnum(w.z), "n": w.n,
                    "first_value": num(w.first_value), "second_value": num(w.second_value),
                })),
                "root_weights": p.root_weights.map(|(x, y)| json!([num(x), num(y)])),
            })
        })
        .collect();
    let states: Vec<Value> = report
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| json!({"label": label(i), "omega": mat(s.omega()), "normalization": num(s.normalization())}))
        .collect();
    Ok(json!({
        "verdict": report.verdict.as_str(),
        "solution_count": report.solutions.len(),
        "solutions": (0..report.solutions.len()).map(label).collect::<Vec<_>>(),
        "states": states,
        "pairs": pairs,
        "witness_pair": report.witness_pair.map(|(a, b)| json!([label(a), label(b)])),
        "canonical_gap": opt_num(report.canonical_pair().map(|p| p.gap_limit)),
        "notes": report.notes,
    }))
}

fn cmd_entropy(
    loaded: &Loaded,
    tol: &Tolerance,
    config: &SolverConfig,
    boundary: &str,
    omega: &str,
    n_max: usize,
    base: LogBase,
) -> Result<Value> {
    let kern = kernel(&loaded.model, tol)?;
    let set = solve_boundary_fixed_points(&kern, config)?;
    let sol = spec::select_boundary(boundary, &kern, &set.solutions)?;
    let omega = resolve_omega(&spec::parse_omega(omega, &loaded.model)?, &kern, &sol);
    let label = sol.label.clone();
    let state = make_qmc(kern.clone(), omega, sol)?;
    let mut report = mean_entropy(&state, n_max)?;
    if base == LogBase::Two {
        report = report.in_bits();
    }
    let shape = crate::tree::TreeShape::new(kern.k())?;
    let finite = report
        .finite_values
        .iter()
        .map(|&(n, v)| {
            let ball = shape.ball_size(n)? as f64;
            Ok(json!({
                "n": n,
                "value": num(v),
                "residual": num((report.root_entropy - report.site_entropy) / ball),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({
        "boundary": label,
        "site": report.site + 1,
        "log_base": if base == LogBase::Two { "2" } else { "e" },
        "site_entropy": num(report.site_entropy),
        "root_entropy": num(report.root_entropy),
        "mean_entropy": num(report.mean_entropy),
        "finite_values": finite,
    }))
}

fn path_value(path: &[usize]) -> Value {
    json!(path.iter().map(|i| i + 1).collect::<Vec<_>>())
}

/// All paths with `steps + 1` sites, lexicographic.
fn all_paths(l: usize, steps: usize) -> Result<Vec<Vec<usize>>> {
    let count = u32::try_from(steps + 1)
        .ok()
        .and_then(|e| (l as u64).checked_pow(e))
        .filter(|&c| c <= ENUMERATION_LIMIT)
        .ok_or_else(|| Error::Domain(format!("more than {ENUMERATION_LIMIT} paths to enumerate")))?;
    Ok((0..count)
        .map(|mut code| {
            let mut path = vec![0; steps + 1];
            for slot in path.iter_mut().rev() {
                *slot = (code % l as u64) as usize;
                code /= l as u64;
            }
            path
        })
        .collect())
}

fn cmd_pathprob(
    loaded: &Loaded,
    tol: &Tolerance,
    path: Option<&str>,
    enumerate: Option<usize>,
    sample: Option<usize>,
    steps: usize,
    seed: u64,
) -> Result<Value> {
    let m = &loaded.model;
    m.ensure_valid(tol)?;
    if let Some(p) = path {
        let path = spec::parse_path(p, m.lambda_size())?;
        return Ok(json!({"path": path_value(&path), "probability": num(m.path_probability(&path)?)}));
    }
    if let Some(n) = enumerate {
        let paths = all_paths(m.lambda_size(), n)?;
        let mut total = 0.0;
        let mut rows = Vec::with_capacity(paths.len());
        for p in &paths {
            let prob = m.path_probability(p)?;
            total += prob;
            rows.push(json!({"path": path_value(p), "probability": num(prob)}));
        }
        return Ok(json!({"steps": n, "paths": rows, "total": num(total)}));
    }
    let Some(count) = sample else {
        return Err(Error::Parse("pathprob needs --path, --enumerate or --sample".into()));
    };
    let mut sampler = m.sampler(seed);
    let mut tally: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for _ in 0..count {
        *tally.entry(sampler.sample(steps)).or_default() += 1;
    }
    let rows: Vec<Value> = tally
        .iter()
        .map(|(p, &c)| {
            let exact = m.path_probability(p)?;
            let freq = c as f64 / count as f64;
            let sigma = (exact * (1.0 - exact) / count as f64).sqrt();
            Ok(json!({
                "path": path_value(p),
                "count": c,
                "frequency": num(freq),
                "probability": num(exact),
                "z_score": if sigma > 0.0 { num((freq - exact) / sigma) } else { Value::Null },
            }))
        })
        .collect::<Result<_>>()?;
    Ok(json!({"samples": count, "steps": steps, "seed": seed, "paths": rows}))
}

struct Job {
    name: &'static str,
    base_out: Option<PathBuf>,
}

fn execute(cli: Cli) -> (Job, Result<(Value, i32)>) {
    let tol = Tolerance::default();
    let start = Instant::now();
    let (name, base) = match &cli.command {
        Command::Validate { base } => ("validate", base),
        Command::SolveBoundaries { base } => ("solve-boundaries", base),
        Command::Expect { base, .. } => ("expect", base),
        Command::Phase { base, .. } => ("phase", base),
        Command::Entropy { base, .. } => ("entropy", base),
        Command::Pathprob { base, .. } => ("pathprob", base),
    };
    let job = Job {
        name,
        base_out: base.out.clone(),
    };
    let result = (|| -> Result<(Value, i32)> {
        let loaded = load(base)?;
        let solver = solver_config(base)?;
        let mut extra: Vec<(&str, f64)> = Vec::new();
        let mut args: Vec<String> = Vec::new();
        let (results, code) = match &cli.command {
            Command::Validate { .. } => {
                let (r, ok) = cmd_validate(&loaded, &tol)?;
                (r, if ok { 0 } else { 3 })
            }
            Command::SolveBoundaries { .. } => (cmd_solve(&loaded, &tol, &solver)?, 0),
            Command::Expect {
                observable,
                boundary,
                omega,
                oracle,
                ..
            } => {
                let obs_text = spec::read_inline_or_file(observable)?;
                args.extend([obs_text.clone(), boundary.clone(), omega.clone(), oracle.to_string()]);
                (cmd_expect(&loaded, &tol, &solver, &obs_text, boundary, omega, *oracle)?, 0)
            }
            Command::Phase {
                grid,
                n_max,
                gap_threshold,
                delta,
                ..
            } => {
                let config = PhaseConfig {
                    gap_threshold: *gap_threshold,
                    delta: *delta,
                    n_max: *n_max,
                    solver,
                };
                extra.extend([("gap_threshold", *gap_threshold), ("delta", *delta)]);
                args.extend([format!("{grid:?}"), n_max.to_string(), gap_threshold.to_string(), delta.to_string()]);
                (cmd_phase(&loaded, &tol, &config, grid.as_deref())?, 0)
            }
            Command::Entropy {
                boundary,
                omega,
                n_max,
                log_base,
                ..
            } => {
                args.extend([boundary.clone(), omega.clone(), n_max.to_string(), format!("{log_base:?}")]);
                (cmd_entropy(&loaded, &tol, &solver, boundary, omega, *n_max, *log_base)?, 0)
            }
            Command::Pathprob {
                path,
                enumerate,
                sample,
                steps,
                seed,
                ..
            } => {
                args.extend([
                    format!("{path:?}"),
                    format!("{enumerate:?}"),
                    format!("{sample:?}"),
                    steps.to_string(),
                    seed.to_string(),
                ]);
                (
                    cmd_pathprob(&loaded, &tol, path.as_deref(), *enumerate, *sample, *steps, *seed)?,
                    0,
                )
            }
        };
        let mut parts: Vec<&[u8]> = vec![name.as_bytes(), loaded.text.as_bytes()];
        parts.extend(args.iter().map(|a| a.as_bytes()));
        let tol_text = format!("{:?}", solver);
        parts.push(tol_text.as_bytes());
        let mut report = json!({
            "command": name,
            "schema_version": model_file::SCHEMA_VERSION,
            "inputs_digest": digest(&parts),
            "tolerances": tolerances(&tol, &solver, &extra),
            "results": results,
        });
        if base.timing {
            report["wall_time_s"] = json!(start.elapsed().as_secs_f64());
        }
        Ok((report, code))
    })();
    (job, result)
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let (job, result) = execute(cli);
    match result {
        Ok((report, code)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            let mut stderr = String::new();
            if code != 0 {
                stderr = format!("{}: model failed validation\n", job.name);
            }
            match job.base_out {
                Some(path) => match std::fs::write(&path, &text) {
                    Ok(()) => Outcome { code, stdout: String::new(), stderr },
                    Err(e) => Outcome {
                        code: 2,
                        stdout: String::new(),
                        stderr: format!("error: cannot write {}: {e}\n", path.display()),
                    },
                },
                None => Outcome { code, stdout: text, stderr },
            }
        }
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_fifteen_digits() {
        assert_eq!(round15(0.1 + 0.2), 0.3);
        assert_eq!(round15(1.0 / 3.0).to_string(), "0.333333333333333");
        assert_eq!(round15(-2.5e-300), -2.5e-300);
        assert_eq!(num(f64::NAN), Value::Null);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 2);
        assert_eq!(exit_code(&Error::InvalidModel("x".into())), 3);
        assert_eq!(exit_code(&Error::UnsupportedBoundary("x".into())), 4);
        assert_eq!(exit_code(&Error::NotNormalizable { trace: 0.0 }), 5);
    }

    #[test]
    fn enumerates_paths_lexicographically() {
        let paths = all_paths(2, 1).unwrap();
        assert_eq!(paths, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(all_paths(2, 40).is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        let out = run(["oqrw-tree", "frobnicate"]);
        assert_eq!(out.code, 2);
        let out = run(["oqrw-tree", "validate"]);
        assert_eq!(out.code, 2);
        let out = run(["oqrw-tree", "validate", "--model", "/nonexistent/model.json"]);
        assert_eq!(out.code, 2);
        assert!(out.stderr.contains("cannot read"));
    }
}
