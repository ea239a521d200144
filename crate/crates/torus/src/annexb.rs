//! A factor of a C-system that is not itself a C-system, on `𝕋²`.
//!
//! `T_1 = R_α ⊗ R_{2α}` and `T_2 = R_{2α} ⊗ R_{2α}`. Functions of `2x − y` are `T_1`-invariant and
//! `T_1`, `T_2` agree on functions of `y`, so the factor generated by `2x` lies in the largest
//! C-factor. On that factor the action is `(R_{2α}, R_{4α})`, whose isotropy factors are trivial.

use crate::fourier::FourierObservable;
use crate::system::{rotate_observable, TorusSystem};
use crate::weyl::{choose_n, required_n, weyl_sum_phase};
use crate::{Error, Result};
use serde::Serialize;

/// Golden-ratio conjugate `(√5 − 1)/2`.
pub fn golden_alpha() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnnexBConfig {
    pub alpha: f64,
    /// Largest `N` the experiment may use.
    pub n_max: u64,
    pub tol: f64,
    /// Frequencies `1..=max_freq` on the `2x` factor.
    pub max_freq: i64,
}

impl Default for AnnexBConfig {
    fn default() -> Self {
        AnnexBConfig {
            alpha: golden_alpha(),
            n_max: 10_000_000,
            tol: 1e-8,
            max_freq: 8,
        }
    }
}

/// One Weyl-sum check on the `2x` factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylCheck {
    /// Frequency `m` of `e^{2πi m·(2x)}`.
    pub freq: i64,
    /// `"T1"` or `"T2T1^-1"`, restricted to the factor.
    pub map: String,
    /// `N` chosen for the check; `None` when no `N ≤ n_max` reaches the tolerance.
    pub n: Option<u64>,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    /// `N` from which the geometric bound alone guarantees the tolerance.
    pub required_n: u64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnnexBReport {
    pub alpha: f64,
    pub n_max: u64,
    pub tol: f64,
    /// `e^{2πi(2x−y)} ∘ T_1 = e^{2πi(2x−y)}` with multiplier exactly 1.
    pub invariance_2x_minus_y: bool,
    /// `e^{2πiy}` has identical `T_1` and `T_2` multipliers.
    pub y_action_equality: bool,
    /// The frequency of `2x` is the sum of the two frequencies above.
    pub factor_in_c: bool,
    pub weyl: Vec<WeylCheck>,
    pub passed: bool,
    pub verdict: String,
}

const POWERS: [i64; 4] = [1, 2, 7, 1000];

/// Runs the three checks; refuses with [`Error::Resonance`] when some checked frequency is resonant.
pub fn annexb_experiment(cfg: &AnnexBConfig) -> Result<AnnexBReport> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 || cfg.n_max == 0 || cfg.max_freq < 1 {
        return Err(Error::InvalidArgument("need tol > 0, n_max ≥ 1 and max_freq ≥ 1".into()));
    }
    let sys = TorusSystem::annexb(cfg.alpha);
    let diff = [2, -1];
    let y = [0, 1];

    let f = FourierObservable::character(diff.to_vec());
    let invariance_2x_minus_y = sys.phase(0, &diff)?.is_exactly_zero()
        && POWERS
            .iter()
            .all(|&n| rotate_observable(&f, &sys, 0, n).map(|g| g == f).unwrap_or(false));

    let g = FourierObservable::character(y.to_vec());
    let y_action_equality = sys.phase(0, &y)? == sys.phase(1, &y)?
        && POWERS.iter().all(|&n| {
            matches!((rotate_observable(&g, &sys, 0, n), rotate_observable(&g, &sys, 1, n)), (Ok(a), Ok(b)) if a == b)
        });

    let factor_in_c = invariance_2x_minus_y && y_action_equality && [diff[0] + y[0], diff[1] + y[1]] == [2, 0];

    let mut weyl = Vec::new();
    for m in 1..=cfg.max_freq {
        let freq = [2 * m, 0];
        for (label, phase) in [("T1", sys.phase(0, &freq)?), ("T2T1^-1", sys.relative_phase(1, 0, &freq)?)] {
            if phase.is_resonant() {
                return Err(Error::Resonance {
                    freq: freq.to_vec(),
                    phase: phase.turns(1),
                });
            }
            let need = required_n(phase.turns(1), cfg.tol);
            let check = match choose_n(&phase, cfg.tol, cfg.n_max) {
                Some(n) => {
                    let w = weyl_sum_phase(&freq, &phase, n)?;
                    WeylCheck {
                        freq: m,
                        map: label.into(),
                        n: Some(n),
                        value: Some(w.value),
                        bound: Some(w.bound),
                        required_n: need,
                        passed: w.value <= cfg.tol,
                    }
                }
                None => WeylCheck {
                    freq: m,
                    map: label.into(),
                    n: None,
                    value: None,
                    bound: None,
                    required_n: need,
                    passed: false,
                },
            };
            weyl.push(check);
        }
    }

    let weyl_ok = weyl.iter().all(|c| c.passed);
    let passed = factor_in_c && weyl_ok;
    let verdict = if passed {
        "factor of a C-system that is not a C-system".to_string()
    } else if !factor_in_c {
        "inconclusive: exact frequency checks failed".to_string()
    } else {
        "inconclusive: tolerance not met within n_max; see required_n".to_string()
    };
    Ok(AnnexBReport {
        alpha: cfg.alpha,
        n_max: cfg.n_max,
        tol: cfg.tol,
        invariance_2x_minus_y,
        y_action_equality,
        factor_in_c,
        weyl,
        passed,
        verdict,
    })
}
