//! Bundled example systems with deterministic observables.

use crate::coupling::Coupling;
use crate::cyclotomic::Cyclotomic;
use crate::joinings::rel_indep_over_factor;
use crate::observable::Observable;
use crate::perm::Permutation;
use crate::rational::Rational;
use crate::system::{FactorMap, FiniteSystem};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub system: FiniteSystem,
    /// One observable per map.
    pub observables: Vec<Observable>,
}

/// Gaussian-rational observable indexed by `salt`; values have small numerators and denominators.
pub fn sample_observable(n: usize, salt: usize) -> Observable {
    Observable::from_fn(n, |p| {
        let a = (p * (2 * salt + 3) + salt) % 7;
        let b = (p * (salt + 1) + 2 * salt + 1) % 5;
        Cyclotomic::gaussian(
            Rational::new((a as i64 - 3).into(), 2.into()),
            Rational::new((b as i64 - 2).into(), 3.into()),
        )
    })
}

fn entry(name: String, system: FiniteSystem) -> CorpusEntry {
    let observables = (0..system.rank()).map(|i| sample_observable(system.len(), i)).collect();
    CorpusEntry {
        name,
        system,
        observables,
    }
}

/// Disjoint cycles of the given lengths and total masses; `shifts[j][c]` rotates cycle `c` under map `j`.
pub fn cycle_union(lengths: &[usize], masses: &[Rational], shifts: &[Vec<usize>]) -> FiniteSystem {
    let mut weights = Vec::new();
    let mut offsets = Vec::new();
    for (&len, m) in lengths.iter().zip(masses) {
        offsets.push(weights.len());
        let w = m / Rational::from_integer((len as i64).into());
        weights.extend(std::iter::repeat_n(w, len));
    }
    let maps = shifts
        .iter()
        .map(|s| {
            let mut images = Vec::with_capacity(weights.len());
            for (c, &len) in lengths.iter().enumerate() {
                images.extend((0..len).map(|i| offsets[c] + (i + s[c]) % len));
            }
            Permutation::new(images).expect("rotations of disjoint cycles are bijections")
        })
        .collect();
    FiniteSystem::new(weights, maps).expect("cycle union has consistent shapes")
}

/// Every bundled system: translations on `ℤ_m` and `ℤ_m²` for `m = 2..=7` with `d ≤ 3`,
/// plus non-uniform cycle unions (one with a null point).
pub fn corpus() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for m in 2..=7usize {
        let one: [(&str, Vec<Vec<i64>>); 4] = [
            ("+1", vec![vec![1]]),
            ("+1,+2", vec![vec![1], vec![2]]),
            ("+1,+2,+3", vec![vec![1], vec![2], vec![3]]),
            ("+1,+1", vec![vec![1], vec![1]]),
        ];
        for (label, shifts) in one {
            let sys = FiniteSystem::translations(&[m], &shifts).expect("valid translation system");
            out.push(entry(format!("Z{m} ({label})"), sys));
        }
        let two: [(&str, Vec<Vec<i64>>); 4] = [
            ("(1,2),(2,2)", vec![vec![1, 2], vec![2, 2]]),
            ("(1,0),(0,1)", vec![vec![1, 0], vec![0, 1]]),
            ("(1,1),(1,2)", vec![vec![1, 1], vec![1, 2]]),
            ("(1,0),(0,1),(1,1)", vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
        ];
        for (label, shifts) in two {
            let sys = FiniteSystem::translations(&[m, m], &shifts).expect("valid translation system");
            out.push(entry(format!("Z{m}^2 ({label})"), sys));
        }
    }
    let half = Rational::new(1.into(), 2.into());
    out.push(entry(
        "cycles 2+3".into(),
        cycle_union(&[2, 3], &[half.clone(), half.clone()], &[vec![1, 1], vec![1, 2]]),
    ));
    out.push(entry(
        "cycles 2+3+null".into(),
        cycle_union(
            &[2, 3, 1],
            &[half.clone(), half, Rational::from_integer(0.into())],
            &[vec![1, 1, 0], vec![0, 2, 0]],
        ),
    ));
    out
}

/// `ℤ_5` with `T_1 = +1`, `T_2 = +2`: trivial largest C-factor, not a C-system.
pub fn z5_pair() -> FiniteSystem {
    FiniteSystem::translations(&[5], &[vec![1], vec![2]]).expect("valid translation system")
}

/// `ℤ_5²` with `T_1 = (+1,+2)`, `T_2 = (+2,+2)`: a C-system whose `x`-quotient is [`z5_pair`].
pub fn z5_square() -> FiniteSystem {
    FiniteSystem::translations(&[5, 5], &[vec![1, 2], vec![2, 2]]).expect("valid translation system")
}

/// The `x`-coordinate factor map from [`z5_square`] onto [`z5_pair`].
pub fn z5_square_to_pair() -> FactorMap {
    FactorMap::new(&z5_square(), z5_pair(), (0..25).map(|p| p / 5).collect()).expect("x-coordinate is a factor")
}

/// `p ↦ ζ_5^{k·p}` on `ℤ_5`.
pub fn z5_character(k: i64) -> Observable {
    Observable::roots_of_unity(5, &(0..5).map(|p| k * p).collect::<Vec<_>>())
}

/// Graph joining of `ℤ_5 (+1)` with its extension `ℤ_10 (+1)` along `q ↦ q mod 5`.
pub fn graph_joining() -> Coupling {
    let x = FiniteSystem::translations(&[5], &[vec![1]]).expect("valid translation system");
    let y = FiniteSystem::translations(&[10], &[vec![1]]).expect("valid translation system");
    let fy = FactorMap::new(&y, x.clone(), (0..10).map(|q| q % 5).collect()).expect("reduction mod 5 is a factor");
    rel_indep_over_factor(&x, &y, &FactorMap::identity(&x), &fy).expect("graph joining is a coupling")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_systems_are_valid() {
        let all = corpus();
        assert_eq!(all.len(), 50);
        for e in &all {
            assert!(e.system.validate().passes(), "{}", e.name);
            assert_eq!(e.observables.len(), e.system.rank());
        }
    }
}
