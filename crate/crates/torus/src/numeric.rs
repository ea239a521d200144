//! Deterministic summation and exact-quadrant complex exponentials.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

const LEAF: usize = 16;

/// `Σ_{i ∈ [lo, hi)} term(i)` over a fixed binary tree; the order depends only on the range.
pub fn pairwise_sum<F: Fn(usize) -> Complex64>(lo: usize, hi: usize, term: &F) -> Complex64 {
    if hi <= lo {
        return Complex64::new(0.0, 0.0);
    }
    if hi - lo <= LEAF {
        return (lo..hi).fold(Complex64::new(0.0, 0.0), |acc, i| acc + term(i));
    }
    let mid = lo + (hi - lo) / 2;
    pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term)
}

/// Real-valued [`pairwise_sum`].
pub fn pairwise_sum_re<F: Fn(usize) -> f64>(lo: usize, hi: usize, term: &F) -> f64 {
    pairwise_sum(lo, hi, &|i| Complex64::new(term(i), 0.0)).re
}

/// Representative of `t mod 1` in `[0, 1)`.
pub fn frac(t: f64) -> f64 {
    let r = t - t.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance from `t` to the nearest integer.
pub fn dist_to_integer(t: f64) -> f64 {
    let r = frac(t);
    r.min(1.0 - r)
}

/// `e^{2πit}`, exact at multiples of a quarter turn.
pub fn cis_turns(t: f64) -> Complex64 {
    let r = 4.0 * frac(t);
    let q = r.floor();
    let (s, c) = ((r - q) * FRAC_PI_2).sin_cos();
    match q as u8 % 4 {
        0 => Complex64::new(c, s),
        1 => Complex64::new(-s, c),
        2 => Complex64::new(-c, -s),
        _ => Complex64::new(s, -c),
    }
}

/// `|sin(πt)|`, with `t` reduced mod 1 first.
pub fn abs_sin_pi(t: f64) -> f64 {
    (std::f64::consts::PI * dist_to_integer(t)).sin()
}
