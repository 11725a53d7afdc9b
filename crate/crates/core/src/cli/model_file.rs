//! JSON model files. Complex numbers are `[re, im]`, matrices are row-major
//! and `B[i][j]` is the effect of the hop `j → i` (sites 1-based in prose,
//! array positions in the file).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64};
use crate::model::{OqrwModel, TwoStateParams};

pub const SCHEMA_VERSION: &str = "1";

pub type Complex = [f64; 2];
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: String,
    pub lambda_size: usize,
    pub dim_h: usize,
    pub tree_order_k: usize,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<Matrix>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Matrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Builtin {
    pub name: String,
    pub params: TwoStateFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoStateFile {
    pub a: Complex,
    pub b: Complex,
    pub c: Complex,
    pub d: Complex,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho1: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho2: Option<Matrix>,
}

pub fn complex(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

pub fn to_pair(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn matrix_from_file(m: &Matrix, dim: usize, what: &str) -> Result<ComplexMatrix> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(Error::Parse(format!("{what}: expected a {dim}x{dim} matrix")));
    }
    let rows: Vec<Vec<C64>> = m.iter().map(|row| row.iter().map(|&z| complex(z)).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

/// Square matrix of any dimension.
pub fn square_from_file(m: &Matrix, what: &str) -> Result<ComplexMatrix> {
    matrix_from_file(m, m.len(), what)
}

pub fn matrix_to_file(m: &ComplexMatrix) -> Matrix {
    m.rows()
        .into_iter()
        .map(|row| row.into_iter().map(to_pair).collect())
        .collect()
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("model file: {e}")))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version {:?} (expected {SCHEMA_VERSION:?})",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serializes")
    }

    /// The explicit form of a model.
    pub fn from_model(model: &OqrwModel) -> Self {
        let l = model.lambda_size();
        ModelFile {
            schema_version: SCHEMA_VERSION.into(),
            lambda_size: l,
            dim_h: model.dim_h(),
            tree_order_k: model.k(),
            b: Some(
                (0..l)
                    .map(|i| (0..l).map(|j| matrix_to_file(model.b(i, j))).collect())
                    .collect(),
            ),
            rho: Some((0..l).map(|i| matrix_to_file(model.rho(i))).collect()),
            builtin: None,
        }
    }

    pub fn two_state_params(&self) -> Result<Option<TwoStateParams>> {
        let Some(builtin) = &self.builtin else {
            return Ok(None);
        };
        if builtin.name != "two_state" {
            return Err(Error::Parse(format!("unknown builtin model {:?}", builtin.name)));
        }
        let p = &builtin.params;
        let mut params = TwoStateParams::with_pure_blocks(complex(p.a), complex(p.b), complex(p.c), complex(p.d));
        if let Some(r) = &p.rho1 {
            params.rho1 = matrix_from_file(r, 2, "rho1")?;
        }
        if let Some(r) = &p.rho2 {
            params.rho2 = matrix_from_file(r, 2, "rho2")?;
        }
        Ok(Some(params))
    }

    /// Builds the model; invariants are left to validation.
    pub fn to_model(&self) -> Result<OqrwModel> {
        if self.tree_order_k == 0 {
            return Err(Error::Parse("tree_order_k must be at least 1".into()));
        }
        match (&self.b, &self.rho, &self.builtin) {
            (None, None, Some(_)) => {
                if self.lambda_size != 2 || self.dim_h != 2 {
                    return Err(Error::Parse("two_state builtin needs lambda_size = dim_h = 2".into()));
                }
                let params = self.two_state_params()?.expect("builtin present");
                OqrwModel::two_state(&params, self.tree_order_k)
            }
            (Some(b), Some(rho), None) => {
                let (l, d) = (self.lambda_size, self.dim_h);
                if l == 0 || d == 0 {
                    return Err(Error::Parse("lambda_size and dim_h must be positive".into()));
                }
                if b.len() != l || b.iter().any(|row| row.len() != l) {
                    return Err(Error::Parse(format!("B must be a {l}x{l} array of matrices")));
                }
                if rho.len() != l {
                    return Err(Error::Parse(format!("rho must list {l} matrices")));
                }
                let blocks = b
                    .iter()
                    .enumerate()
                    .map(|(i, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(j, m)| matrix_from_file(m, d, &format!("B[{i}][{j}]")))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                let rho = rho
                    .iter()
                    .enumerate()
                    .map(|(i, m)| matrix_from_file(m, d, &format!("rho[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                OqrwModel::new(self.tree_order_k, blocks, rho)
            }
            _ => Err(Error::Parse(
                "model file needs either explicit B and rho or a builtin, not both".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::random_model;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn explicit_round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let m = random_model(&mut rng, 3, 2, 2).unwrap();
            let text = ModelFile::from_model(&m).to_json();
            let back = ModelFile::parse(&text).unwrap().to_model().unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn builtin_two_state() {
        let text = r#"{"schema_version": "1", "lambda_size": 2, "dim_h": 2, "tree_order_k": 2,
            "builtin": {"name": "two_state", "params": {"a": [0.6, 0], "b": [0.8, 0], "c": [0.8, 0], "d": [0.6, 0]}}}"#;
        let m = ModelFile::parse(text).unwrap().to_model().unwrap();
        assert_eq!(m.b(0, 0).get(0, 0), C64::new(0.6, 0.0));
        assert!(m.validate(&Default::default()).is_valid());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ModelFile::parse("{"), Err(Error::Parse(_))));
        let wrong_schema = r#"{"schema_version": "9", "lambda_size": 1, "dim_h": 1, "tree_order_k": 1}"#;
        assert!(matches!(ModelFile::parse(wrong_schema), Err(Error::Parse(_))));
        let neither = r#"{"schema_version": "1", "lambda_size": 1, "dim_h": 1, "tree_order_k": 1}"#;
        assert!(ModelFile::parse(neither).unwrap().to_model().is_err());
        let ragged = r#"{"schema_version": "1", "lambda_size": 1, "dim_h": 2, "tree_order_k": 1,
            "B": [[[[[1,0],[0,0]],[[0,0]]]]], "rho": [[[[1,0],[0,0]],[[0,0],[0,0]]]]}"#;
        assert!(matches!(
            ModelFile::parse(ragged).unwrap().to_model(),
            Err(Error::Parse(_))
        ));
    }
}
