//! Permutations of `{0..n-1}` stored together with their inverses.

use num_integer::Integer;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        let v: Vec<usize> = (0..n).collect();
        Permutation {
            forward: v.clone(),
            inverse: v,
        }
    }

    /// Builds from an image list, rejecting anything that is not a bijection.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut inverse = vec![usize::MAX; n];
        for (p, &q) in images.iter().enumerate() {
            if q >= n {
                return Err(Error::InvalidSystem(format!("image {q} of point {p} out of range")));
            }
            if inverse[q] != usize::MAX {
                return Err(Error::InvalidSystem(format!("point {q} is hit twice")));
            }
            inverse[q] = p;
        }
        Ok(Permutation {
            forward: images,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    #[inline]
    pub fn apply(&self, p: usize) -> usize {
        self.forward[p]
    }

    #[inline]
    pub fn apply_inverse(&self, p: usize) -> usize {
        self.inverse[p]
    }

    pub fn images(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let forward: Vec<usize> = other.forward.iter().map(|&q| self.forward[q]).collect();
        let inverse: Vec<usize> = self.inverse.iter().map(|&q| other.inverse[q]).collect();
        Permutation { forward, inverse }
    }

    /// `self^exp`, negative exponents allowed.
    pub fn pow(&self, exp: i64) -> Permutation {
        let base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut e = exp.unsigned_abs();
        let mut acc = Permutation::identity(self.len());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = sq.compose(&acc);
            }
            sq = sq.compose(&sq);
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(p, &q)| p == q)
    }

    /// Cycle decomposition; each cycle starts at its smallest point, cycles ordered by that point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut p = self.forward[start];
            while p != start {
                seen[p] = true;
                cycle.push(p);
                p = self.forward[p];
            }
            out.push(cycle);
        }
        out
    }

    /// Length of the cycle through each point.
    pub fn cycle_lengths(&self) -> Vec<u64> {
        let mut lens = vec![0u64; self.len()];
        for cycle in self.cycles() {
            for &p in &cycle {
                lens[p] = cycle.len() as u64;
            }
        }
        lens
    }

    /// Order in the symmetric group, or `None` on u64 overflow.
    pub fn order(&self) -> Option<u64> {
        self.cycles()
            .iter()
            .try_fold(1u64, |acc, c| checked_lcm(acc, c.len() as u64))
    }
}

pub(crate) fn checked_lcm(a: u64, b: u64) -> Option<u64> {
    let g = a.gcd(&b);
    (a / g).checked_mul(b)
}
