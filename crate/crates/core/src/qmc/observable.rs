use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ONE};
use crate::tree::{TreeShape, Vertex};

/// `coeff · ⊗_u a_u`; vertices not listed carry the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTerm {
    pub coeff: C64,
    pub factors: BTreeMap<Vertex, ComplexMatrix>,
}

impl ProductTerm {
    pub fn depth(&self) -> usize {
        self.factors.keys().map(Vertex::level).max().unwrap_or(0)
    }
}

/// A finite sum of product terms.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalObservable {
    pub terms: Vec<ProductTerm>,
}

impl LocalObservable {
    pub fn identity() -> Self {
        Self::product(BTreeMap::new())
    }

    pub fn product(factors: BTreeMap<Vertex, ComplexMatrix>) -> Self {
        LocalObservable {
            terms: vec![ProductTerm { coeff: ONE, factors }],
        }
    }

    /// `a` at vertex `v`, identity elsewhere.
    pub fn single(v: Vertex, a: ComplexMatrix) -> Self {
        Self::product(BTreeMap::from([(v, a)]))
    }

    pub fn add_term(&mut self, coeff: C64, factors: BTreeMap<Vertex, ComplexMatrix>) {
        self.terms.push(ProductTerm { coeff, factors });
    }

    /// Largest level carrying a factor, 0 for the identity.
    pub fn support_depth(&self) -> usize {
        self.terms.iter().map(ProductTerm::depth).max().unwrap_or(0)
    }

    pub fn check(&self, shape: &TreeShape, dim: usize) -> Result<()> {
        for term in &self.terms {
            for (v, a) in &term.factors {
                if !shape.contains(v) {
                    let coord = v.coords().iter().copied().max().unwrap_or(0);
                    return Err(Error::InvalidVertex {
                        coord,
                        k: shape.k(),
                    });
                }
                if a.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: a.dim(),
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_and_checks() {
        assert_eq!(LocalObservable::identity().support_depth(), 0);
        let shape = TreeShape::new(2).unwrap();
        let v: Vertex = "1.2".parse().unwrap();
        let mut obs = LocalObservable::single(v, ComplexMatrix::identity(4));
        assert_eq!(obs.support_depth(), 2);
        assert!(obs.check(&shape, 4).is_ok());
        assert!(matches!(
            obs.check(&shape, 2),
            Err(Error::DimensionMismatch { .. })
        ));
        obs.add_term(
            ONE,
            BTreeMap::from([("3.1.1".parse().unwrap(), ComplexMatrix::identity(4))]),
        );
        assert_eq!(obs.support_depth(), 3);
        assert_eq!(
            obs.check(&shape, 4),
            Err(Error::InvalidVertex { coord: 3, k: 2 })
        );
    }
}
