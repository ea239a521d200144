//! Finite Fourier polynomials on `𝕋^k`.

use crate::numeric::{cis_turns, pairwise_sum, pairwise_sum_re};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::BTreeMap;

/// `Σ_m c_m e^{2πi⟨m, z⟩}` with finitely many distinct frequencies `m ∈ ℤ^k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierObservable {
    dim: usize,
    terms: BTreeMap<Vec<i64>, Complex64>,
}

impl FourierObservable {
    /// Rejects repeated frequencies and frequencies of the wrong length.
    pub fn new(dim: usize, terms: Vec<(Vec<i64>, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (m, c) in terms {
            if m.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: m.len(),
                });
            }
            if map.insert(m.clone(), c).is_some() {
                return Err(Error::DuplicateFrequency(m));
            }
        }
        Ok(FourierObservable { dim, terms: map })
    }

    /// `e^{2πi⟨m, z⟩}`.
    pub fn character(m: Vec<i64>) -> Self {
        let dim = m.len();
        FourierObservable {
            dim,
            terms: BTreeMap::from([(m, Complex64::new(1.0, 0.0))]),
        }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        FourierObservable {
            dim,
            terms: BTreeMap::from([(vec![0; dim], c)]),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Complex64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &[i64]) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    /// Largest `|m_l|` over all frequencies and coordinates.
    pub fn degree(&self) -> u64 {
        self.terms.keys().flatten().map(|v| v.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[f64]) -> Complex64 {
        let terms: Vec<_> = self.terms.iter().collect();
        pairwise_sum(0, terms.len(), &|i| {
            let (m, c) = terms[i];
            let t: f64 = m.iter().zip(z).map(|(&a, &b)| a as f64 * b).sum();
            c * cis_turns(t)
        })
    }

    /// `‖f‖₂²` by Parseval.
    pub fn l2_norm_sq(&self) -> f64 {
        let coeffs: Vec<_> = self.terms.values().collect();
        pairwise_sum_re(0, coeffs.len(), &|i| coeffs[i].norm_sqr())
    }

    /// Coefficients multiplied term by term; frequencies are unchanged.
    pub(crate) fn map_coefficients<F: Fn(&[i64], Complex64) -> Complex64>(&self, f: F) -> Self {
        FourierObservable {
            dim: self.dim,
            terms: self.terms.iter().map(|(m, &c)| (m.clone(), f(m, c))).collect(),
        }
    }

    /// Adds `c · e^{2πi⟨m, z⟩}`, merging with an existing frequency.
    pub(crate) fn accumulate(&mut self, m: Vec<i64>, c: Complex64) {
        *self.terms.entry(m).or_default() += c;
    }

    pub(crate) fn zero(dim: usize) -> Self {
        FourierObservable {
            dim,
            terms: BTreeMap::new(),
        }
    }
}
