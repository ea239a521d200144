#![allow(dead_code)]

use joinery_core::corpus::cycle_union;
use joinery_core::cyclotomic::Cyclotomic;
use joinery_core::observable::Observable;
use joinery_core::perm::Permutation;
use joinery_core::rational::{int, rat, Rational};
use joinery_core::system::FiniteSystem;
use proptest::prelude::*;

/// Moves point `p` to `sigma[p]`.
pub fn relabel(sys: &FiniteSystem, sigma: &[usize]) -> FiniteSystem {
    let n = sys.len();
    let mut weights = vec![int(0); n];
    for p in 0..n {
        weights[sigma[p]] = sys.weight(p).clone();
    }
    let maps = sys
        .maps()
        .iter()
        .map(|t| {
            let mut images = vec![0; n];
            for p in 0..n {
                images[sigma[p]] = sigma[t.apply(p)];
            }
            Permutation::new(images).unwrap()
        })
        .collect();
    FiniteSystem::new(weights, maps).unwrap()
}

fn arb_translations(max_side: usize) -> impl Strategy<Value = FiniteSystem> {
    (1..=max_side, 1..=max_side, 1usize..=3).prop_flat_map(|(a, b, d)| {
        prop::collection::vec((0..a as i64, 0..b as i64), d).prop_map(move |shifts| {
            let shifts: Vec<Vec<i64>> = shifts.into_iter().map(|(s, t)| vec![s, t]).collect();
            FiniteSystem::translations(&[a, b], &shifts).unwrap()
        })
    })
}

fn arb_cycles(with_null: bool) -> impl Strategy<Value = FiniteSystem> {
    (prop::collection::vec(1usize..=3, 1..=3), 1usize..=3).prop_flat_map(move |(lengths, d)| {
        let k = lengths.len();
        let lo = if with_null { 0u32 } else { 1 };
        (
            Just(lengths.clone()),
            prop::collection::vec(lo..4u32, k),
            prop::collection::vec(prop::collection::vec(0usize..3, k), d),
        )
            .prop_filter("some positive mass", |(_, m, _)| m.iter().any(|&v| v > 0))
            .prop_map(|(lengths, raw, shifts)| {
                let total: u32 = raw.iter().sum();
                let masses: Vec<Rational> = raw.iter().map(|&v| rat(v as i64, total as i64)).collect();
                cycle_union(&lengths, &masses, &shifts)
            })
    })
}

/// Random commuting systems, relabelled by a random permutation.
pub fn arb_system() -> impl Strategy<Value = FiniteSystem> {
    prop_oneof![arb_translations(4), arb_cycles(true)].prop_flat_map(|sys| {
        let n = sys.len();
        (Just(sys), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
            .prop_map(|(sys, sigma)| relabel(&sys, &sigma))
    })
}

/// Random systems with at most 8 points, all of positive weight.
pub fn arb_small_positive_system() -> impl Strategy<Value = FiniteSystem> {
    prop_oneof![arb_translations(2).prop_filter("≤ 8 points", |s| s.len() <= 8), arb_cycles(false)]
        .prop_filter("≤ 8 points", |s| s.len() <= 8)
        .prop_flat_map(|sys| {
            let n = sys.len();
            (Just(sys), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
                .prop_map(|(sys, sigma)| relabel(&sys, &sigma))
        })
}

/// Gaussian-rational values drawn from a small set so that level sets collide.
pub fn arb_observable(n: usize) -> impl Strategy<Value = Observable> {
    prop::collection::vec((-2i64..=2, -1i64..=1), n).prop_map(|v| {
        Observable::exact(v.into_iter().map(|(a, b)| Cyclotomic::gaussian(rat(a, 2), int(b))).collect())
    })
}

pub fn arb_system_with_observable() -> impl Strategy<Value = (FiniteSystem, Observable)> {
    arb_system().prop_flat_map(|sys| {
        let n = sys.len();
        (Just(sys), arb_observable(n))
    })
}

/// Direct `n`-fold application of a map, without the library's power routine.
pub fn iterate(t: &Permutation, p: usize, n: u64) -> usize {
    (0..n).fold(p, |q, _| t.apply(q))
}
