//! Exact joint measures on products of finite systems.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rational::Rational;
use crate::system::FiniteSystem;

/// One exponent vector per component: the product permutation `W_1 ⊗ … ⊗ W_k`.
pub type ProductWord = Vec<Vec<i64>>;

/// Sparse probability measure on `X_1 × … × X_k` with declared equivariances.
///
/// Only positive masses are stored. Every constructor re-verifies total mass,
/// all marginals and every declared equivariance with exact rational equality.
#[derive(Clone, Debug)]
pub struct Coupling {
    components: Vec<FiniteSystem>,
    masses: BTreeMap<Vec<usize>, Rational>,
    equivariances: Vec<ProductWord>,
}

/// Outcome of comparing a coupling with its pushforward under a product word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivarianceCheck {
    pub holds: bool,
    /// First tuple (in lexicographic order) where the pushforward differs.
    pub witness: Option<Vec<usize>>,
    pub max_discrepancy: Rational,
}

/// `(T_j, …, T_j)` for every `j`, one word per map of `d`-rank components.
pub fn diagonal_words(rank: usize, slots: usize) -> Vec<ProductWord> {
    (0..rank)
        .map(|j| {
            let mut e = vec![0; rank];
            e[j] = 1;
            vec![e; slots]
        })
        .collect()
}

impl Coupling {
    pub fn new(
        components: Vec<FiniteSystem>,
        masses: BTreeMap<Vec<usize>, Rational>,
        equivariances: Vec<ProductWord>,
    ) -> Result<Self> {
        let c = Self::new_unverified(components, masses, equivariances)?;
        c.verify()?;
        Ok(c)
    }

    /// Shape checks only; marginals and equivariances are not re-verified.
    pub(crate) fn new_unverified(
        components: Vec<FiniteSystem>,
        mut masses: BTreeMap<Vec<usize>, Rational>,
        equivariances: Vec<ProductWord>,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("coupling needs at least one component".into()));
        }
        masses.retain(|_, m| !m.is_zero());
        for (t, m) in &masses {
            if t.len() != components.len() || t.iter().zip(&components).any(|(&p, x)| p >= x.len()) {
                return Err(Error::InvalidArgument(format!("tuple {t:?} outside the product")));
            }
            if m.is_negative() {
                return Err(Error::InvalidArgument(format!("negative mass at {t:?}")));
            }
        }
        for w in &equivariances {
            if w.len() != components.len() {
                return Err(Error::LengthMismatch {
                    expected: components.len(),
                    got: w.len(),
                });
            }
        }
        Ok(Coupling {
            components,
            masses,
            equivariances,
        })
    }

    /// Total mass, marginals and declared equivariances, exactly.
    pub fn verify(&self) -> Result<()> {
        let total: Rational = self.masses.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidArgument(format!("total mass {total} ≠ 1")));
        }
        for i in 0..self.components.len() {
            if self.marginal(i) != self.components[i].weights() {
                return Err(Error::MarginalMismatch { component: i });
            }
        }
        for w in &self.equivariances {
            let check = self.check_equivariance(w)?;
            if !check.holds {
                return Err(Error::InvalidArgument(format!(
                    "declared equivariance {w:?} fails at {:?}",
                    check.witness
                )));
            }
        }
        Ok(())
    }

    pub fn components(&self) -> &[FiniteSystem] {
        &self.components
    }

    pub fn arity(&self) -> usize {
        self.components.len()
    }

    pub fn masses(&self) -> &BTreeMap<Vec<usize>, Rational> {
        &self.masses
    }

    pub fn mass(&self, tuple: &[usize]) -> Rational {
        self.masses.get(tuple).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support_size(&self) -> usize {
        self.masses.len()
    }

    pub fn equivariances(&self) -> &[ProductWord] {
        &self.equivariances
    }

    pub fn marginal(&self, i: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.components[i].len()];
        for (t, m) in &self.masses {
            out[t[i]] += m;
        }
        out
    }

    pub fn marginals_match(&self) -> bool {
        (0..self.arity()).all(|i| self.marginal(i) == self.components[i].weights())
    }

    fn product_perms(&self, word: &ProductWord) -> Result<Vec<Permutation>> {
        if word.len() != self.arity() {
            return Err(Error::LengthMismatch {
                expected: self.arity(),
                got: word.len(),
            });
        }
        self.components
            .iter()
            .zip(word)
            .map(|(x, e)| x.transform_word(e))
            .collect()
    }

    /// Exact comparison of the coupling with its pushforward under `W_1 ⊗ … ⊗ W_k`.
    pub fn check_equivariance(&self, word: &ProductWord) -> Result<EquivarianceCheck> {
        let perms = self.product_perms(word)?;
        let mut pushed: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (t, m) in &self.masses {
            let image: Vec<usize> = t.iter().zip(&perms).map(|(&p, s)| s.apply(p)).collect();
            pushed.insert(image, m.clone());
        }
        let mut witness = None;
        let mut max_discrepancy = Rational::zero();
        let keys: std::collections::BTreeSet<&Vec<usize>> = self.masses.keys().chain(pushed.keys()).collect();
        for t in keys {
            let a = self.masses.get(t).cloned().unwrap_or_else(Rational::zero);
            let b = pushed.get(t).cloned().unwrap_or_else(Rational::zero);
            if a != b {
                let gap = (a - b).abs();
                if gap > max_discrepancy {
                    max_discrepancy = gap;
                }
                if witness.is_none() {
                    witness = Some(t.clone());
                }
            }
        }
        Ok(EquivarianceCheck {
            holds: witness.is_none(),
            witness,
            max_discrepancy,
        })
    }

    /// `∫ F dλ` for `F` given on tuples.
    pub fn integrate(&self, f: impl Fn(&[usize]) -> Cyclotomic) -> Cyclotomic {
        self.masses.iter().map(|(t, m)| f(t).scale(m)).sum()
    }

    /// Image measure on the selected components, in the given order.
    pub fn project(&self, slots: &[usize]) -> Result<Coupling> {
        if slots.iter().any(|&s| s >= self.arity()) {
            return Err(Error::InvalidArgument("projection slot out of range".into()));
        }
        let mut masses: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        for (t, m) in &self.masses {
            *masses.entry(slots.iter().map(|&s| t[s]).collect()).or_insert_with(Rational::zero) += m;
        }
        let equivariances = self
            .equivariances
            .iter()
            .map(|w| slots.iter().map(|&s| w[s].clone()).collect())
            .collect();
        Coupling::new_unverified(
            slots.iter().map(|&s| self.components[s].clone()).collect(),
            masses,
            equivariances,
        )
    }

    /// Same coupling with additional declared equivariances, verified.
    pub fn with_equivariances(mut self, words: Vec<ProductWord>) -> Result<Self> {
        for w in words {
            let check = self.check_equivariance(&w)?;
            if !check.holds {
                return Err(Error::InvalidArgument(format!(
                    "equivariance {w:?} fails at {:?}",
                    check.witness
                )));
            }
            self.equivariances.push(w);
        }
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn z5() -> FiniteSystem {
        FiniteSystem::translations(&[5], &[vec![1]]).unwrap()
    }

    fn diagonal(x: &FiniteSystem) -> Coupling {
        let masses = (0..x.len()).map(|p| (vec![p, p], x.weight(p).clone())).collect();
        Coupling::new(vec![x.clone(), x.clone()], masses, diagonal_words(x.rank(), 2)).unwrap()
    }

    #[test]
    fn diagonal_is_diagonally_invariant() {
        let c = diagonal(&z5());
        assert!(c.check_equivariance(&vec![vec![3], vec![3]]).unwrap().holds);
    }

    #[test]
    fn diagonal_fails_skew_word_with_witness() {
        let c = diagonal(&z5());
        let check = c.check_equivariance(&vec![vec![1], vec![2]]).unwrap();
        assert!(!check.holds);
        assert_eq!(check.witness, Some(vec![0, 0]));
        assert_eq!(check.max_discrepancy, rat(1, 5));
    }

    #[test]
    fn rejects_bad_marginals() {
        let x = z5();
        let masses = [(vec![0, 0], Rational::one())].into_iter().collect();
        assert!(matches!(
            Coupling::new(vec![x.clone(), x], masses, vec![]),
            Err(Error::MarginalMismatch { component: 0 })
        ));
    }

    #[test]
    fn projection_recovers_marginal() {
        let c = diagonal(&z5());
        let p = c.project(&[1]).unwrap();
        assert_eq!(p.marginal(0), z5().weights());
        assert!(p.verify().is_ok());
    }
}
