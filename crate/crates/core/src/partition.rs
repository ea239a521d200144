//! Sub-σ-algebras of finite systems as block partitions.
//!
//! Every sub-σ-algebra of a finite space is generated by a partition. Equality
//! modulo μ is made literal by canonicalization: all zero-weight points share a
//! single designated block, and block ids are assigned in order of first
//! appearance when scanning points `0..n`.

use std::collections::HashMap;
use std::hash::Hash;

use num_traits::Zero;

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::observable::Observable;
use crate::perm::Permutation;
use crate::rational::Rational;
use crate::system::{FactorMap, FiniteSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    system_id: u64,
    labels: Vec<usize>,
    block_mass: Vec<Rational>,
}

impl Partition {
    /// Canonical partition whose blocks are the level sets of `key`.
    pub fn from_keys<K: Eq + Hash>(sys: &FiniteSystem, key: impl Fn(usize) -> K) -> Self {
        let mut ids: HashMap<Option<K>, usize> = HashMap::new();
        let mut labels = Vec::with_capacity(sys.len());
        let mut block_mass: Vec<Rational> = Vec::new();
        for p in 0..sys.len() {
            let w = sys.weight(p);
            let k = if w.is_zero() { None } else { Some(key(p)) };
            let next = ids.len();
            let id = *ids.entry(k).or_insert(next);
            if id == block_mass.len() {
                block_mass.push(Rational::zero());
            }
            block_mass[id] += w;
            labels.push(id);
        }
        Partition {
            system_id: sys.id(),
            labels,
            block_mass,
        }
    }

    pub fn from_labels(sys: &FiniteSystem, labels: &[usize]) -> Result<Self> {
        if labels.len() != sys.len() {
            return Err(Error::LengthMismatch {
                expected: sys.len(),
                got: labels.len(),
            });
        }
        Ok(Self::from_keys(sys, |p| labels[p]))
    }

    /// Every point its own block (modulo null points).
    pub fn discrete(sys: &FiniteSystem) -> Self {
        Self::from_keys(sys, |p| p)
    }

    /// A single block.
    pub fn trivial(sys: &FiniteSystem) -> Self {
        Self::from_keys(sys, |_| ())
    }

    pub fn system_id(&self) -> u64 {
        self.system_id
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, p: usize) -> usize {
        self.labels[p]
    }

    pub fn num_blocks(&self) -> usize {
        self.block_mass.len()
    }

    pub fn block_mass(&self, b: usize) -> &Rational {
        &self.block_mass[b]
    }

    pub fn block_masses(&self) -> &[Rational] {
        &self.block_mass
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (p, &b) in self.labels.iter().enumerate() {
            out[b].push(p);
        }
        out
    }

    fn check_system(&self, sys: &FiniteSystem) -> Result<()> {
        if self.system_id == sys.id() {
            Ok(())
        } else {
            Err(Error::MismatchedSystems)
        }
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.system_id != coarser.system_id {
            return false;
        }
        let mut image: Vec<Option<usize>> = vec![None; self.num_blocks()];
        self.labels.iter().zip(&coarser.labels).all(|(&a, &b)| match image[a] {
            None => {
                image[a] = Some(b);
                true
            }
            Some(c) => c == b,
        })
    }

    /// First `(block, map)` whose image under the map is not a block, if any.
    pub fn invariance_violation(&self, sys: &FiniteSystem) -> Option<(usize, usize)> {
        for (j, t) in sys.maps().iter().enumerate() {
            let mut image: Vec<Option<usize>> = vec![None; self.num_blocks()];
            let mut hit: Vec<Option<usize>> = vec![None; self.num_blocks()];
            for p in 0..sys.len() {
                let (a, b) = (self.labels[p], self.labels[t.apply(p)]);
                match image[a] {
                    None => {
                        if hit[b].is_some_and(|src| src != a) {
                            return Some((a, j));
                        }
                        image[a] = Some(b);
                        hit[b] = Some(a);
                    }
                    Some(c) if c != b => return Some((a, j)),
                    Some(_) => {}
                }
            }
        }
        None
    }

    pub fn is_invariant(&self, sys: &FiniteSystem) -> bool {
        self.invariance_violation(sys).is_none()
    }

    /// True when no block holds two positive-weight points.
    pub fn separates_positive(&self, sys: &FiniteSystem) -> bool {
        let mut seen = vec![false; self.num_blocks()];
        for p in 0..sys.len() {
            if sys.weight(p).is_zero() {
                continue;
            }
            let b = self.labels[p];
            if seen[b] {
                return false;
            }
            seen[b] = true;
        }
        true
    }
}

/// Orbit partition of a permutation: the isotropy factor `{A : μ(A Δ T⁻¹A) = 0}`.
pub fn orbit_partition(sys: &FiniteSystem, t: &Permutation) -> Partition {
    let mut orbit = vec![usize::MAX; sys.len()];
    for (i, cycle) in t.cycles().into_iter().enumerate() {
        for p in cycle {
            orbit[p] = i;
        }
    }
    Partition::from_keys(sys, |p| orbit[p])
}

/// Isotropy factor of the word `T_1^{e_1}⋯T_d^{e_d}`.
pub fn isotropy_partition(sys: &FiniteSystem, exponents: &[i64]) -> Result<Partition> {
    Ok(orbit_partition(sys, &sys.transform_word(exponents)?))
}

/// `𝓘^{T_1} ∨ 𝓘^{T_2T_1^{-1}} ∨ … ∨ 𝓘^{T_dT_1^{-1}}`.
pub fn largest_c_factor(sys: &FiniteSystem) -> Result<Partition> {
    if sys.rank() == 0 {
        return Err(Error::InvalidArgument("largest C-factor needs d ≥ 1".into()));
    }
    let mut acc = isotropy_partition(sys, &sys.unit_word(0))?;
    for j in 1..sys.rank() {
        let mut word = sys.unit_word(j);
        word[0] = -1;
        acc = join_partitions(sys, &acc, &isotropy_partition(sys, &word)?)?;
    }
    Ok(acc)
}

/// Whether the largest C-factor is the whole σ-algebra.
pub fn is_c_system(sys: &FiniteSystem) -> Result<bool> {
    Ok(largest_c_factor(sys)?.separates_positive(sys))
}

/// Common refinement: the coarsest partition finer than both.
pub fn join_partitions(sys: &FiniteSystem, p: &Partition, q: &Partition) -> Result<Partition> {
    p.check_system(sys)?;
    q.check_system(sys)?;
    Ok(Partition::from_keys(sys, |i| (p.labels[i], q.labels[i])))
}

/// `E[f | p]`: block averages on positive-mass blocks, 0 on null blocks.
pub fn conditional_expectation(sys: &FiniteSystem, f: &Observable, p: &Partition) -> Result<Observable> {
    p.check_system(sys)?;
    f.check_len(sys.len())?;
    let values = f.exact_values()?;
    let mut sums = vec![Cyclotomic::zero(); p.num_blocks()];
    for (i, v) in values.iter().enumerate() {
        let w = sys.weight(i);
        if !w.is_zero() {
            sums[p.labels[i]] += &v.scale(w);
        }
    }
    let means: Vec<Cyclotomic> = sums
        .iter()
        .zip(&p.block_mass)
        .map(|(s, m)| if m.is_zero() { Cyclotomic::zero() } else { s.scale(&m.recip()) })
        .collect();
    Ok(Observable::exact(p.labels.iter().map(|&b| means[b].clone()).collect()))
}

/// Quotient system on the blocks of an invariant partition.
pub fn factor_quotient(sys: &FiniteSystem, p: &Partition) -> Result<(FiniteSystem, FactorMap)> {
    p.check_system(sys)?;
    if let Some((block, map)) = p.invariance_violation(sys) {
        return Err(Error::NonInvariantPartition { block, map });
    }
    let blocks = p.blocks();
    let maps = sys
        .maps()
        .iter()
        .map(|t| Permutation::new(blocks.iter().map(|b| p.labels[t.apply(b[0])]).collect()))
        .collect::<Result<Vec<_>>>()?;
    let quotient = FiniteSystem::new(p.block_mass.clone(), maps)?;
    let fmap = FactorMap::new(sys, quotient.clone(), p.labels.clone())?;
    Ok((quotient, fmap))
}

/// Partition induced on the source by a factor map.
pub fn pullback(sys: &FiniteSystem, fmap: &FactorMap) -> Partition {
    Partition::from_keys(sys, |p| fmap.apply(p))
}

/// Smallest invariant partition making every observable measurable.
pub fn generated_factor(sys: &FiniteSystem, fs: &[Observable]) -> Result<Partition> {
    let order = fs.iter().map(Observable::field_order).fold(1u32, |a, b| num_integer::Integer::lcm(&a, &b));
    let mut level_keys: Vec<Vec<Vec<Rational>>> = vec![Vec::with_capacity(fs.len()); sys.len()];
    for f in fs {
        f.check_len(sys.len())?;
        for (p, v) in f.exact_values()?.iter().enumerate() {
            level_keys[p].push(v.key_at(order));
        }
    }
    let mut part = Partition::from_keys(sys, |p| level_keys[p].clone());
    loop {
        let refined = Partition::from_keys(sys, |p| {
            let mut key = Vec::with_capacity(1 + 2 * sys.rank());
            key.push(part.labels[p]);
            for t in sys.maps() {
                key.push(part.labels[t.apply(p)]);
                key.push(part.labels[t.apply_inverse(p)]);
            }
            key
        });
        if refined.num_blocks() == part.num_blocks() {
            return Ok(refined);
        }
        part = refined;
    }
}
