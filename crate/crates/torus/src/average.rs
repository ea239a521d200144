//! Multiple ergodic averages `A_N = (1/N) Σ_{n=1}^N Π_i f_i ∘ T_i^n` for torus rotations.

use crate::fourier::FourierObservable;
use crate::numeric::{abs_sin_pi, cis_turns, pairwise_sum, pairwise_sum_re};
use crate::system::{Phase, TorusSystem};
use crate::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Grids larger than this are refused.
pub const MAX_GRID_POINTS: usize = 1 << 22;

/// `A_N` sampled on the uniform grid `(ℤ/Q)^k`, with quadrature norms.
#[derive(Clone, Debug, Serialize)]
pub struct GridAverage {
    pub q: usize,
    pub n: u64,
    /// Row-major over the grid; point `(i_1, …, i_k)` sits at `(i_1/Q, …, i_k/Q)`.
    pub values: Vec<Complex64>,
    /// Quadrature estimate of `‖A_N‖₂`.
    pub l2_norm: f64,
    /// Quadrature estimate of `‖A_{2N} − A_N‖₂`.
    pub cauchy_increment: f64,
    /// `Q > 2·deg(A_N)`, so the quadrature of `|A_N|²` is exact up to rounding.
    pub quadrature_exact: bool,
}

struct Term {
    base: Vec<i64>,
    coeff: Complex64,
    phase: Phase,
}

fn check_inputs(sys: &TorusSystem, fs: &[FourierObservable]) -> Result<()> {
    if fs.len() != sys.rank() {
        return Err(Error::InvalidArgument(format!(
            "expected {} observables, got {}",
            sys.rank(),
            fs.len()
        )));
    }
    if let Some(f) = fs.iter().find(|f| f.dim() != sys.dim()) {
        return Err(Error::Dimension {
            expected: sys.dim(),
            got: f.dim(),
        });
    }
    Ok(())
}

fn terms(sys: &TorusSystem, fs: &[FourierObservable]) -> Vec<Vec<Term>> {
    fs.iter()
        .enumerate()
        .map(|(j, f)| {
            f.terms()
                .map(|(m, &c)| Term {
                    base: m.clone(),
                    coeff: c,
                    phase: sys.phase(j, m).expect("dimensions checked"),
                })
                .collect()
        })
        .collect()
}

/// Evaluates `A_N` and `A_{2N}` on the `Q^k` grid by direct summation over `n`.
pub fn torus_multiple_average(sys: &TorusSystem, fs: &[FourierObservable], q: usize, n: u64) -> Result<GridAverage> {
    check_inputs(sys, fs)?;
    if q < 2 {
        return Err(Error::InvalidArgument("grid size Q must be at least 2".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let k = sys.dim();
    let points = u32::try_from(k)
        .ok()
        .and_then(|k| q.checked_pow(k))
        .filter(|&p| p <= MAX_GRID_POINTS)
        .ok_or_else(|| Error::InvalidArgument(format!("grid {q}^{k} exceeds {MAX_GRID_POINTS} points")))?;
    let terms = terms(sys, fs);
    let n = n as usize;
    let mut values = Vec::with_capacity(points);
    let mut doubled = Vec::with_capacity(points);
    for idx in 0..points {
        let z = grid_point(idx, q, k);
        // Per map: (c·e^{2πi⟨m, z⟩}, phase) for every term.
        let at_z: Vec<Vec<(Complex64, Phase)>> = terms
            .iter()
            .map(|ts| {
                ts.iter()
                    .map(|t| {
                        let s: f64 = t.base.iter().zip(&z).map(|(&a, &b)| a as f64 * b).sum();
                        (t.coeff * cis_turns(s), t.phase)
                    })
                    .collect()
            })
            .collect();
        let summand = |step: usize| -> Complex64 {
            at_z.iter()
                .map(|ts| ts.iter().map(|(c, ph)| c * ph.multiplier(step as i64)).sum::<Complex64>())
                .product()
        };
        let first = pairwise_sum(1, n + 1, &summand);
        let second = pairwise_sum(n + 1, 2 * n + 1, &summand);
        values.push(first / n as f64);
        doubled.push((first + second) / (2 * n) as f64);
    }
    let mean = |f: &dyn Fn(usize) -> f64| (pairwise_sum_re(0, points, &f) / points as f64).sqrt();
    let l2_norm = mean(&|i| values[i].norm_sqr());
    let cauchy_increment = mean(&|i| (doubled[i] - values[i]).norm_sqr());
    let degree: u64 = fs.iter().map(FourierObservable::degree).sum();
    Ok(GridAverage {
        q,
        n: n as u64,
        values,
        l2_norm,
        cauchy_increment,
        quadrature_exact: q as u64 > 2 * degree,
    })
}

fn grid_point(mut idx: usize, q: usize, k: usize) -> Vec<f64> {
    let mut z = vec![0.0; k];
    for c in (0..k).rev() {
        z[c] = (idx % q) as f64 / q as f64;
        idx /= q;
    }
    z
}

/// Every choice of one term per observable.
fn tuples(terms: &[Vec<Term>]) -> Vec<Vec<&Term>> {
    terms.iter().fold(vec![Vec::new()], |acc, ts| {
        acc.iter()
            .flat_map(|prefix| {
                ts.iter().map(move |t| {
                    let mut next = prefix.clone();
                    next.push(t);
                    next
                })
            })
            .collect()
    })
}

fn combine(dim: usize, tuple: &[&Term]) -> (Vec<i64>, Complex64, Phase) {
    let mut freq = vec![0; dim];
    let mut coeff = Complex64::new(1.0, 0.0);
    let mut phase: Option<Phase> = None;
    for t in tuple {
        for (a, b) in freq.iter_mut().zip(&t.base) {
            *a += b;
        }
        coeff *= t.coeff;
        phase = Some(phase.map_or(t.phase, |p| p.add(&t.phase)));
    }
    (freq, coeff, phase.expect("at least one map"))
}

/// `A_N` as a Fourier polynomial: each term tuple contributes its product coefficient times
/// the normalized geometric sum of its total phase.
pub fn multiple_average_fourier(sys: &TorusSystem, fs: &[FourierObservable], n: u64) -> Result<FourierObservable> {
    check_inputs(sys, fs)?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let terms = terms(sys, fs);
    let mut out = FourierObservable::zero(sys.dim());
    for tuple in tuples(&terms) {
        let (freq, coeff, phase) = combine(sys.dim(), &tuple);
        let w = if phase.is_exactly_zero() {
            Complex64::new(1.0, 0.0)
        } else {
            pairwise_sum(1, n as usize + 1, &|k| phase.multiplier(k as i64)) / n as f64
        };
        out.accumulate(freq, coeff * w);
    }
    Ok(out)
}

/// `C` with `‖A_N‖₂ ≤ C/N` for every `N`: `Σ_tuples Π|c_i| / |sin πθ_tuple|`.
/// `None` when some tuple has a resonant total phase.
pub fn decay_constant(sys: &TorusSystem, fs: &[FourierObservable]) -> Result<Option<f64>> {
    check_inputs(sys, fs)?;
    let terms = terms(sys, fs);
    let mut total = 0.0;
    for tuple in tuples(&terms) {
        let (_, coeff, phase) = combine(sys.dim(), &tuple);
        if coeff == Complex64::new(0.0, 0.0) {
            continue;
        }
        if phase.is_resonant() {
            return Ok(None);
        }
        total += coeff.norm() / abs_sin_pi(phase.turns(1));
    }
    Ok(Some(total))
}
