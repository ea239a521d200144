//! Commuting rotations of `𝕋^k` and their action on Fourier polynomials.

use crate::fourier::FourierObservable;
use crate::numeric::{cis_turns, dist_to_integer, frac};
use crate::{Error, Result, RESONANCE_TOL};
use num_complex::Complex64;

/// Phase `⟨m, β⟩ mod 1` of a frequency under a rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phase {
    /// `coeff · α`, known exactly as an integer multiple of the base angle.
    Multiple { coeff: i64, alpha: f64 },
    /// A plain floating-point phase in turns.
    Turns(f64),
}

impl Phase {
    /// `n · phase mod 1`.
    pub fn turns(&self, n: i64) -> f64 {
        match *self {
            Phase::Multiple { coeff, alpha } => frac((n as i128 * coeff as i128) as f64 * alpha),
            Phase::Turns(t) => frac(n as f64 * t),
        }
    }

    /// True only when the phase is zero by integer arithmetic (or is literally `0.0`).
    pub fn is_exactly_zero(&self) -> bool {
        match *self {
            Phase::Multiple { coeff, .. } => coeff == 0,
            Phase::Turns(t) => frac(t) == 0.0,
        }
    }

    pub fn is_resonant(&self) -> bool {
        self.is_exactly_zero() || dist_to_integer(self.turns(1)) <= RESONANCE_TOL
    }

    /// `e^{2πi n·phase}`; exactly `1` when the phase vanishes by integer arithmetic.
    pub fn multiplier(&self, n: i64) -> Complex64 {
        if self.is_exactly_zero() {
            Complex64::new(1.0, 0.0)
        } else {
            cis_turns(self.turns(n))
        }
    }

    pub fn neg(&self) -> Phase {
        match *self {
            Phase::Multiple { coeff, alpha } => Phase::Multiple { coeff: -coeff, alpha },
            Phase::Turns(t) => Phase::Turns(frac(-t)),
        }
    }

    /// Sum of two phases; stays exact when both are multiples of the same angle.
    pub fn add(&self, other: &Phase) -> Phase {
        match (*self, *other) {
            (Phase::Multiple { coeff: a, alpha }, Phase::Multiple { coeff: b, alpha: beta }) if alpha == beta => {
                Phase::Multiple { coeff: a + b, alpha }
            }
            _ => Phase::Turns(frac(self.turns(1) + other.turns(1))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct AlphaMultiples {
    alpha: f64,
    coeffs: Vec<Vec<i64>>,
}

/// `d` translations of `𝕋^k`; rotation vectors are reduced mod 1 and automatically commute.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusSystem {
    dim: usize,
    rotations: Vec<Vec<f64>>,
    exact: Option<AlphaMultiples>,
}

impl TorusSystem {
    pub fn new(rotations: Vec<Vec<f64>>) -> Result<Self> {
        let dim = check_shape(&rotations)?;
        if rotations.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("rotation components must be finite".into()));
        }
        let rotations = rotations.into_iter().map(|r| r.into_iter().map(frac).collect()).collect();
        Ok(TorusSystem {
            dim,
            rotations,
            exact: None,
        })
    }

    /// Rotations `coeffs[j] · α`; phases stay integer multiples of `α`.
    pub fn alpha_multiples(alpha: f64, coeffs: Vec<Vec<i64>>) -> Result<Self> {
        let dim = check_shape(&coeffs)?;
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite".into()));
        }
        let rotations = coeffs
            .iter()
            .map(|c| c.iter().map(|&a| frac(a as f64 * alpha)).collect())
            .collect();
        Ok(TorusSystem {
            dim,
            rotations,
            exact: Some(AlphaMultiples { alpha, coeffs }),
        })
    }

    /// The C-system on `𝕋²`: `T_1 = R_α ⊗ R_{2α}`, `T_2 = R_{2α} ⊗ R_{2α}`.
    pub fn annexb(alpha: f64) -> Self {
        TorusSystem::alpha_multiples(alpha, vec![vec![1, 2], vec![2, 2]]).expect("fixed shape")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rotations.len()
    }

    pub fn rotation(&self, j: usize) -> &[f64] {
        &self.rotations[j]
    }

    /// Integer coefficients of map `j` when the rotations are multiples of one angle.
    pub fn alpha_coeffs(&self, j: usize) -> Option<&[i64]> {
        self.exact.as_ref().map(|e| e.coeffs[j].as_slice())
    }

    /// Phase of frequency `m` under `T_j`.
    pub fn phase(&self, j: usize, m: &[i64]) -> Result<Phase> {
        self.check_map(j)?;
        if m.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: m.len(),
            });
        }
        Ok(match &self.exact {
            Some(e) => Phase::Multiple {
                coeff: m.iter().zip(&e.coeffs[j]).map(|(&a, &b)| a * b).sum(),
                alpha: e.alpha,
            },
            None => Phase::Turns(frac(m.iter().zip(&self.rotations[j]).map(|(&a, &b)| a as f64 * b).sum())),
        })
    }

    /// Phase of `m` under `T_i T_j^{-1}`.
    pub fn relative_phase(&self, i: usize, j: usize, m: &[i64]) -> Result<Phase> {
        Ok(self.phase(i, m)?.add(&self.phase(j, m)?.neg()))
    }

    fn check_map(&self, j: usize) -> Result<()> {
        if j >= self.rank() {
            return Err(Error::InvalidArgument(format!("map index {j} out of range 0..{}", self.rank())));
        }
        Ok(())
    }
}

fn check_shape<T>(rows: &[Vec<T>]) -> Result<usize> {
    let dim = rows.first().map(Vec::len).unwrap_or(0);
    if dim == 0 {
        return Err(Error::InvalidArgument("need at least one map on a torus of positive dimension".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
        return Err(Error::Dimension {
            expected: dim,
            got: bad.len(),
        });
    }
    Ok(dim)
}

/// `f ∘ T_j^n`: the coefficient of `m` is multiplied by `e^{2πi n⟨m, rot_j⟩}`.
pub fn rotate_observable(f: &FourierObservable, sys: &TorusSystem, j: usize, n: i64) -> Result<FourierObservable> {
    if f.dim() != sys.dim() {
        return Err(Error::Dimension {
            expected: sys.dim(),
            got: f.dim(),
        });
    }
    sys.check_map(j)?;
    Ok(f.map_coefficients(|m, c| {
        let phase = sys.phase(j, m).expect("dimensions checked");
        if phase.is_exactly_zero() {
            c
        } else {
            c * phase.multiplier(n)
        }
    }))
}
