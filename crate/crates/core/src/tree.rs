//! Coordinates on the rooted Cayley tree Γ^k_+.
//!
//! The root `o` has the empty coordinate sequence; the direct successors of
//! `(i_1, …, i_n)` are `(i_1, …, i_n, ℓ)` for `ℓ = 1..=k`. Levels `W_n` are
//! enumerated lexicographically, `(1, …, 1)` first and `(k, …, k)` last.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A vertex given by its coordinate path from the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Vertex(Vec<u32>);

impl Vertex {
    pub fn root() -> Self {
        Vertex(Vec::new())
    }

    pub fn new(path: Vec<u32>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder);
        }
        if let Some(&coord) = path.iter().find(|&&c| c == 0 || c as usize > k) {
            return Err(Error::InvalidVertex { coord, k });
        }
        Ok(Vertex(path))
    }

    /// The first vertex of level `n`, `(1, …, 1)`.
    pub fn leftmost(n: usize) -> Self {
        Vertex(vec![1; n])
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn level(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn child(&self, ell: u32) -> Self {
        let mut path = self.0.clone();
        path.push(ell);
        Vertex(path)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.is_root() {
            None
        } else {
            Some(Vertex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// Bijective base-`k` code: the root maps to 0 and codes increase in
    /// breadth-first order.
    pub fn code(&self, k: usize) -> Result<u64> {
        let k = k as u64;
        self.0.iter().try_fold(0u64, |acc, &c| {
            acc.checked_mul(k)
                .and_then(|v| v.checked_add(c as u64))
                .ok_or(Error::Overflow("vertex code"))
        })
    }

    pub fn from_code(mut code: u64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidOrder);
        }
        let k = k as u64;
        let mut path = Vec::new();
        while code > 0 {
            let digit = (code - 1) % k + 1;
            path.push(digit as u32);
            code = (code - digit) / k;
        }
        path.reverse();
        Ok(Vertex(path))
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_root() {
            return f.write_str("o");
        }
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// Parses `"o"` (or the empty string) as the root and `"1.2.1"` as a path.
/// Coordinates are checked against `k` only by [`Vertex::new`].
impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "o" || s == "0" {
            return Ok(Vertex::root());
        }
        s.split('.')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Parse(format!("bad vertex coordinate {part:?} in {s:?}")))
                    .and_then(|c| {
                        if c == 0 {
                            Err(Error::Parse(format!("vertex coordinates start at 1: {s:?}")))
                        } else {
                            Ok(c)
                        }
                    })
            })
            .collect::<Result<Vec<_>>>()
            .map(Vertex)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeShape {
    k: usize,
}

impl TreeShape {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            Err(Error::InvalidOrder)
        } else {
            Ok(TreeShape { k })
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        v.coords().iter().all(|&c| c >= 1 && c as usize <= self.k)
    }

    /// `S(v) = [(v,1), …, (v,k)]`.
    pub fn successors(&self, v: &Vertex) -> Vec<Vertex> {
        (1..=self.k as u32).map(|ell| v.child(ell)).collect()
    }

    /// `W_n` in lexicographic order.
    pub fn level_vertices(&self, n: usize) -> Result<Vec<Vertex>> {
        let size = self.level_size(n)? as usize;
        let mut out = Vec::with_capacity(size);
        let mut path = vec![1u32; n];
        loop {
            out.push(Vertex(path.clone()));
            // odometer increment, last coordinate fastest
            let mut pos = n;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                if (path[pos] as usize) < self.k {
                    path[pos] += 1;
                    break;
                }
                path[pos] = 1;
            }
        }
    }

    /// `|W_n| = k^n`.
    pub fn level_size(&self, n: usize) -> Result<u64> {
        let n = u32::try_from(n).map_err(|_| Error::Overflow("level size"))?;
        (self.k as u64)
            .checked_pow(n)
            .ok_or(Error::Overflow("level size"))
    }

    /// `|Λ_n| = Σ_{j ≤ n} k^j`.
    pub fn ball_size(&self, n: usize) -> Result<u64> {
        (0..=n).try_fold(0u64, |acc, j| {
            acc.checked_add(self.level_size(j)?)
                .ok_or(Error::Overflow("ball size"))
        })
    }
}
