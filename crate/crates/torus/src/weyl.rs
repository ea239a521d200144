//! Normalized exponential sums `|(1/N) Σ_{n=1}^N e^{2πinθ}|` and their closed forms.

use crate::numeric::{abs_sin_pi, dist_to_integer, frac, pairwise_sum};
use crate::system::Phase;
use crate::{Error, Result};
use serde::Serialize;

/// Relative slack for the per-call bound check; covers rounding in the summation.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylSum {
    /// `θ mod 1` in turns.
    pub phase: f64,
    pub n: u64,
    pub value: f64,
    /// `1 / (N |sin πθ|)`.
    pub bound: f64,
    /// `|sin πNθ| / (N |sin πθ|)`.
    pub closed_form: f64,
}

/// `|(1/N) Σ_{n=1}^N e^{2πi n⟨m, β⟩}|`, checked against the geometric-series bound.
pub fn weyl_sum(freq: &[i64], rotation: &[f64], n: u64) -> Result<WeylSum> {
    if freq.len() != rotation.len() {
        return Err(Error::Dimension {
            expected: rotation.len(),
            got: freq.len(),
        });
    }
    if freq.iter().all(|&m| m == 0) {
        return Err(Error::InvalidArgument("frequency must be nonzero".into()));
    }
    let theta = frac(freq.iter().zip(rotation).map(|(&m, &b)| m as f64 * b).sum());
    weyl_sum_phase(freq, &Phase::Turns(theta), n)
}

/// As [`weyl_sum`] for a precomputed phase; `freq` is only used in diagnostics.
pub fn weyl_sum_phase(freq: &[i64], phase: &Phase, n: u64) -> Result<WeylSum> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let theta = phase.turns(1);
    if phase.is_resonant() {
        return Err(Error::Resonance {
            freq: freq.to_vec(),
            phase: theta,
        });
    }
    let sum = pairwise_sum(1, n as usize + 1, &|k| phase.multiplier(k as i64));
    let value = sum.norm() / n as f64;
    let sin = abs_sin_pi(theta);
    let bound = 1.0 / (n as f64 * sin);
    let closed_form = abs_sin_pi(phase.turns(n as i64)) / (n as f64 * sin);
    if value > bound * (1.0 + BOUND_SLACK) {
        return Err(Error::BoundViolated { value, bound });
    }
    Ok(WeylSum {
        phase: theta,
        n,
        value,
        bound,
        closed_form,
    })
}

/// `|sin πNθ| / (N |sin πθ|)`, the exact modulus of the normalized geometric sum.
pub fn closed_form(theta: f64, n: u64) -> f64 {
    abs_sin_pi(n as f64 * theta) / (n as f64 * abs_sin_pi(theta))
}

/// Denominators of the continued-fraction convergents of `θ mod 1`, increasing, up to `max`.
pub fn convergent_denominators(theta: f64, max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut q_prev, mut q) = (0u64, 1u64);
    let mut x = frac(theta);
    out.push(1);
    while x > 1e-15 {
        let inv = 1.0 / x;
        // Absorb rounding just below an integer so rational phases terminate.
        let a = if inv - inv.floor() > 1.0 - 1e-9 { inv.ceil() } else { inv.floor() };
        if a > max as f64 {
            break;
        }
        let next = match (a as u64).checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
            Some(v) if v <= max => v,
            _ => break,
        };
        (q_prev, q) = (q, next);
        if out.last() != Some(&q) {
            out.push(q);
        }
        x = inv - a;
    }
    out
}

/// Smallest `N ≤ n_max` whose closed form is at most `tol / 2`, searched over convergent
/// denominators and the generic threshold `⌈2 / (tol |sin πθ|)⌉`.
pub fn choose_n(phase: &Phase, tol: f64, n_max: u64) -> Option<u64> {
    let theta = phase.turns(1);
    let generic = required_n(theta, tol / 2.0);
    let convergent = convergent_denominators(theta, n_max)
        .into_iter()
        .find(|&q| abs_sin_pi(phase.turns(q as i64)) / (q as f64 * abs_sin_pi(theta)) <= tol / 2.0);
    match (convergent, generic <= n_max) {
        (Some(q), true) => Some(q.min(generic)),
        (Some(q), false) => Some(q),
        (None, true) => Some(generic),
        (None, false) => None,
    }
}

/// `⌈1 / (tol |sin πθ|)⌉`: beyond this `N` the geometric bound alone certifies `tol`.
pub fn required_n(theta: f64, tol: f64) -> u64 {
    let v = (1.0 / (tol * abs_sin_pi(theta))).ceil();
    if v >= u64::MAX as f64 || dist_to_integer(theta) == 0.0 {
        u64::MAX
    } else {
        v as u64
    }
}
