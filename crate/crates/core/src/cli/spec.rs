//! Small expression forms for observables, root densities and boundary
//! selections given on the command line.
//!
//! A factor is `h ⊗ k` with `h` on the internal space and `k` on the sites,
//! each one of `I`, `0`, `p` (= `|1⟩⟨1|`), `q` (= `|2⟩⟨2|`) or
//! `ketbra i j` (1-based), or an explicit `matrix` on the full space.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::model_file::{complex, square_from_file, Complex, Matrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE};
use crate::model::OqrwModel;
use crate::qmc::{BoundarySolution, LocalObservable, QmcKernel};
use crate::tree::Vertex;

pub fn parse_expr(expr: &str, dim: usize) -> Result<ComplexMatrix> {
    let words: Vec<&str> = expr.split_whitespace().collect();
    let ketbra = |i: usize, j: usize| {
        if i == 0 || j == 0 || i > dim || j > dim {
            Err(Error::Parse(format!("{expr:?}: indices must lie in 1..={dim}")))
        } else {
            Ok(ComplexMatrix::ketbra(dim, i - 1, j - 1))
        }
    };
    match words.as_slice() {
        ["I"] => Ok(ComplexMatrix::identity(dim)),
        ["0"] => Ok(ComplexMatrix::zeros(dim)),
        ["p"] => ketbra(1, 1),
        ["q"] => ketbra(2, 2),
        ["ketbra", i, j] => {
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad index {s:?} in {expr:?}")))
            };
            ketbra(idx(i)?, idx(j)?)
        }
        _ => Err(Error::Parse(format!("unknown factor expression {expr:?}"))),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    #[serde(default)]
    pub vertex: Option<String>,
    #[serde(default)]
    pub h: Option<String>,
    #[serde(default)]
    pub k: Option<String>,
    #[serde(default)]
    pub matrix: Option<Matrix>,
    #[serde(default)]
    pub coeff: Option<Complex>,
}

impl FactorSpec {
    pub fn operator(&self, model: &OqrwModel) -> Result<ComplexMatrix> {
        if let Some(m) = &self.matrix {
            if self.h.is_some() || self.k.is_some() {
                return Err(Error::Parse("give either matrix or h/k, not both".into()));
            }
            let out = square_from_file(m, "factor matrix")?;
            if out.dim() != model.dim() {
                return Err(Error::Parse(format!(
                    "factor matrix must be {0}x{0}",
                    model.dim()
                )));
            }
            return Ok(out);
        }
        let h = parse_expr(self.h.as_deref().unwrap_or("I"), model.dim_h())?;
        let k = parse_expr(self.k.as_deref().unwrap_or("I"), model.lambda_size())?;
        h.kron(&k)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    #[serde(default)]
    pub coeff: Option<Complex>,
    #[serde(default)]
    pub factors: Vec<FactorSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub terms: Vec<TermSpec>,
}

/// Inline JSON (starting with `{` or `[`) or a path to a JSON file.
pub fn read_inline_or_file(value: &str) -> Result<String> {
    let t = value.trim_start();
    if t.starts_with('{') || t.starts_with('[') || t.starts_with('"') {
        Ok(value.to_string())
    } else {
        std::fs::read_to_string(value).map_err(|e| Error::Parse(format!("cannot read {value:?}: {e}")))
    }
}

pub fn parse_observable(text: &str, model: &OqrwModel) -> Result<LocalObservable> {
    let spec: ObservableSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("observable: {e}")))?;
    let mut obs = LocalObservable { terms: Vec::new() };
    for term in &spec.terms {
        let mut factors: BTreeMap<Vertex, ComplexMatrix> = BTreeMap::new();
        for f in &term.factors {
            if f.coeff.is_some() {
                return Err(Error::Parse("coeff belongs to the term, not the factor".into()));
            }
            let vertex: Vertex = f.vertex.as_deref().unwrap_or("o").parse()?;
            let vertex = Vertex::new(vertex.coords().to_vec(), model.k())?;
            let op = f.operator(model)?;
            // repeated vertices multiply
            let op = match factors.remove(&vertex) {
                Some(prev) => &prev * &op,
                None => op,
            };
            factors.insert(vertex, op);
        }
        obs.add_term(term.coeff.map(complex).unwrap_or(ONE), factors);
    }
    Ok(obs)
}

/// Root density: `"canonical"`, `"mixed"`, a factor object, or a list of
/// factor objects (each with an optional `coeff`) that is summed.
#[derive(Debug, Clone, PartialEq)]
pub enum OmegaSpec {
    Canonical,
    Mixed,
    Explicit(ComplexMatrix),
}

pub fn parse_omega(value: &str, model: &OqrwModel) -> Result<OmegaSpec> {
    match value.trim() {
        "canonical" => return Ok(OmegaSpec::Canonical),
        "mixed" => return Ok(OmegaSpec::Mixed),
        _ => {}
    }
    let text = read_inline_or_file(value)?;
    let json: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("omega: {e}")))?;
    let items: Vec<FactorSpec> = match json {
        serde_json::Value::Array(_) => serde_json::from_value(json),
        other => serde_json::from_value(other).map(|f| vec![f]),
    }
    .map_err(|e| Error::Parse(format!("omega: {e}")))?;
    if items.is_empty() {
        return Err(Error::Parse("omega: empty list".into()));
    }
    let mut total = ComplexMatrix::zeros(model.dim());
    for item in &items {
        if item.vertex.is_some() {
            return Err(Error::Parse("omega factors carry no vertex".into()));
        }
        let coeff = item.coeff.map(complex).unwrap_or(ONE);
        total += &item.operator(model)?.scale(coeff);
    }
    Ok(OmegaSpec::Explicit(total))
}

/// A boundary label such as `h_1`, a 1-based index `#2`, or a JSON object
/// `{"matrix": …}` naming an explicit `h`.
pub fn select_boundary(
    value: &str,
    kernel: &QmcKernel,
    solutions: &[BoundarySolution],
) -> Result<BoundarySolution> {
    let v = value.trim();
    if let Some(idx) = v.strip_prefix('#') {
        let i: usize = idx
            .parse()
            .map_err(|_| Error::Parse(format!("bad boundary index {v:?}")))?;
        return solutions
            .get(i.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| Error::Parse(format!("boundary index {i} out of range 1..={}", solutions.len())));
    }
    if v.starts_with('{') || std::path::Path::new(v).is_file() {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Explicit {
            matrix: Matrix,
        }
        let text = read_inline_or_file(v)?;
        let e: Explicit = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("boundary: {e}")))?;
        let h = square_from_file(&e.matrix, "boundary matrix")?;
        return BoundarySolution::from_matrix(kernel, h);
    }
    solutions
        .iter()
        .find(|s| s.label.as_deref() == Some(v))
        .cloned()
        .ok_or_else(|| {
            let known: Vec<String> = solutions.iter().filter_map(|s| s.label.clone()).collect();
            Error::Domain(format!("no boundary solution labeled {v:?} (found: {})", known.join(", ")))
        })
}

/// `"1,2,1"` → `[0, 1, 0]`.
pub fn parse_path(value: &str, lambda_size: usize) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|s| {
            let i: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad site {s:?} in path")))?;
            if i == 0 || i > lambda_size {
                Err(Error::Parse(format!("site {i} outside 1..={lambda_size}")))
            } else {
                Ok(i - 1)
            }
        })
        .collect()
}

pub fn parse_grid(value: &str) -> Result<Vec<f64>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad grid value {s:?}")))
        })
        .collect()
}
