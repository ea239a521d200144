//! Finite measure-preserving ℤ^d-actions and factor maps between them.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{checked_lcm, Permutation};
use crate::rational::{format_fraction, Rational};

/// A probability measure on `{0..n-1}` with `d` commuting measure-preserving permutations.
///
/// Construction only checks shapes and bijectivity; the measure-theoretic
/// invariants are reported by [`FiniteSystem::validate`].
#[derive(Clone, Debug)]
pub struct FiniteSystem {
    weights: Vec<Rational>,
    maps: Vec<Permutation>,
    id: u64,
}

/// One violated invariant of a [`FiniteSystem`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MassNotOne { total: String },
    NegativeWeight { point: usize },
    WeightNotPreserved { map: usize, point: usize },
    NonCommuting { first: usize, second: usize, point: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

impl FiniteSystem {
    pub fn new(weights: Vec<Rational>, maps: Vec<Permutation>) -> Result<Self> {
        let n = weights.len();
        if n == 0 {
            return Err(Error::InvalidSystem("empty ground set".into()));
        }
        if let Some(m) = maps.iter().find(|m| m.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: m.len(),
            });
        }
        let id = fingerprint(&weights, &maps);
        Ok(FiniteSystem { weights, maps, id })
    }

    /// Like [`FiniteSystem::new`] but also requires [`FiniteSystem::validate`] to pass.
    pub fn new_validated(weights: Vec<Rational>, maps: Vec<Permutation>) -> Result<Self> {
        let sys = Self::new(weights, maps)?;
        let report = sys.validate();
        match report.violations.first() {
            None => Ok(sys),
            Some(v) => Err(Error::InvalidSystem(format!("{v:?}"))),
        }
    }

    /// Uniform measure on `ℤ_{m_1} × … × ℤ_{m_r}` with one translation per shift vector.
    ///
    /// Points are indexed in mixed radix with the first coordinate most significant,
    /// so on `ℤ_m × ℤ_m` the point `(x, y)` has index `x·m + y`.
    pub fn translations(moduli: &[usize], shifts: &[Vec<i64>]) -> Result<Self> {
        if moduli.is_empty() || moduli.contains(&0) {
            return Err(Error::InvalidArgument("moduli must be positive".into()));
        }
        let n: usize = moduli.iter().product();
        let weight = Rational::new(1.into(), (n as i64).into());
        let mut maps = Vec::with_capacity(shifts.len());
        for shift in shifts {
            if shift.len() != moduli.len() {
                return Err(Error::LengthMismatch {
                    expected: moduli.len(),
                    got: shift.len(),
                });
            }
            let images = (0..n)
                .map(|p| {
                    let mut coords = decode(p, moduli);
                    for ((c, s), &m) in coords.iter_mut().zip(shift).zip(moduli) {
                        *c = (*c as i64 + s).rem_euclid(m as i64) as usize;
                    }
                    encode(&coords, moduli)
                })
                .collect();
            maps.push(Permutation::new(images)?);
        }
        Self::new(vec![weight; n], maps)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Number of transformations `d`.
    pub fn rank(&self) -> usize {
        self.maps.len()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn weight(&self, p: usize) -> &Rational {
        &self.weights[p]
    }

    pub fn maps(&self) -> &[Permutation] {
        &self.maps
    }

    pub fn map(&self, j: usize) -> &Permutation {
        &self.maps[j]
    }

    /// Structural fingerprint used to detect objects built on different systems.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let total: Rational = self.weights.iter().sum();
        if !total.is_one() {
            violations.push(Violation::MassNotOne {
                total: format_fraction(&total),
            });
        }
        for (p, w) in self.weights.iter().enumerate() {
            if w.is_negative() {
                violations.push(Violation::NegativeWeight { point: p });
            }
        }
        for (j, t) in self.maps.iter().enumerate() {
            if let Some(p) = (0..self.len()).find(|&p| self.weights[t.apply(p)] != self.weights[p]) {
                violations.push(Violation::WeightNotPreserved { map: j, point: p });
            }
        }
        for a in 0..self.rank() {
            for b in a + 1..self.rank() {
                let (s, t) = (&self.maps[a], &self.maps[b]);
                if let Some(p) = (0..self.len()).find(|&p| s.apply(t.apply(p)) != t.apply(s.apply(p))) {
                    violations.push(Violation::NonCommuting {
                        first: a,
                        second: b,
                        point: p,
                    });
                }
            }
        }
        ValidationReport { violations }
    }

    /// `T_1^{e_1} ∘ … ∘ T_d^{e_d}`.
    pub fn transform_word(&self, exponents: &[i64]) -> Result<Permutation> {
        if exponents.len() != self.rank() {
            return Err(Error::LengthMismatch {
                expected: self.rank(),
                got: exponents.len(),
            });
        }
        Ok(self
            .maps
            .iter()
            .zip(exponents)
            .fold(Permutation::identity(self.len()), |acc, (t, &e)| {
                if e == 0 {
                    acc
                } else {
                    t.pow(e).compose(&acc)
                }
            }))
    }

    /// Unit exponent vector selecting `T_j`.
    pub fn unit_word(&self, j: usize) -> Vec<i64> {
        let mut w = vec![0; self.rank()];
        w[j] = 1;
        w
    }

    /// `lcm` of the orders of all maps, `None` on overflow.
    pub fn period(&self) -> Option<u64> {
        self.maps
            .iter()
            .try_fold(1u64, |acc, t| checked_lcm(acc, t.order()?))
    }

    /// Period of `n ↦ (T_1^n p, …, T_d^n p)` for every point `p`.
    pub fn point_periods(&self) -> Vec<u64> {
        let lens: Vec<Vec<u64>> = self.maps.iter().map(Permutation::cycle_lengths).collect();
        (0..self.len())
            .map(|p| lens.iter().fold(1u64, |acc, l| checked_lcm(acc, l[p]).unwrap_or(u64::MAX)))
            .collect()
    }

    pub fn total_positive(&self) -> usize {
        self.weights.iter().filter(|w| !w.is_zero()).count()
    }
}

fn fingerprint(weights: &[Rational], maps: &[Permutation]) -> u64 {
    let mut h = DefaultHasher::new();
    weights.hash(&mut h);
    maps.hash(&mut h);
    h.finish()
}

pub(crate) fn decode(mut p: usize, moduli: &[usize]) -> Vec<usize> {
    let mut coords = vec![0; moduli.len()];
    for (c, &m) in coords.iter_mut().zip(moduli).rev() {
        *c = p % m;
        p /= m;
    }
    coords
}

pub(crate) fn encode(coords: &[usize], moduli: &[usize]) -> usize {
    coords.iter().zip(moduli).fold(0, |acc, (&c, &m)| acc * m + c)
}

/// An equivariant, measure-preserving map from a source system onto a target system.
#[derive(Clone, Debug)]
pub struct FactorMap {
    source_id: u64,
    target: FiniteSystem,
    assignment: Vec<usize>,
}

impl FactorMap {
    /// Verifies the pushforward and equivariance conditions before accepting the map.
    pub fn new(source: &FiniteSystem, target: FiniteSystem, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != source.len() {
            return Err(Error::LengthMismatch {
                expected: source.len(),
                got: assignment.len(),
            });
        }
        if source.rank() != target.rank() {
            return Err(Error::InvalidArgument("source and target have different ranks".into()));
        }
        if assignment.iter().any(|&c| c >= target.len()) {
            return Err(Error::InvalidArgument("assignment points outside the target".into()));
        }
        let mut pushed = vec![Rational::zero(); target.len()];
        for (p, &c) in assignment.iter().enumerate() {
            pushed[c] += source.weight(p);
        }
        if pushed != target.weights() {
            return Err(Error::PushforwardMismatch);
        }
        for j in 0..source.rank() {
            let (t, s) = (source.map(j), target.map(j));
            if let Some(p) = (0..source.len()).find(|&p| assignment[t.apply(p)] != s.apply(assignment[p])) {
                return Err(Error::NotEquivariant { map: j, point: p });
            }
        }
        Ok(FactorMap {
            source_id: source.id(),
            target,
            assignment,
        })
    }

    pub fn identity(sys: &FiniteSystem) -> Self {
        FactorMap {
            source_id: sys.id(),
            target: sys.clone(),
            assignment: (0..sys.len()).collect(),
        }
    }

    pub fn target(&self) -> &FiniteSystem {
        &self.target
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn apply(&self, p: usize) -> usize {
        self.assignment[p]
    }

    pub fn source_id(&self) -> u64 {
        self.source_id
    }
}
