mod common;

use std::collections::BTreeMap;

use common::{arb_system, iterate};
use joinery_core::corpus::{graph_joining, z5_character, z5_pair, z5_square, z5_square_to_pair};
use joinery_core::coupling::{diagonal_words, Coupling};
use joinery_core::cyclotomic::Cyclotomic;
use joinery_core::joinings::{
    big_system, furstenberg_self_joining, lambda_infinity_truncation, product_coupling, recentre,
    rel_indep_over_factor, rel_indep_self_joining, sated_extension_step, satedness_certificate,
    satedness_falsifier, truncation_report, FalsifierOptions, Formulation, JoiningLp, DEFAULT_TRUNCATION_BOUND,
};
use joinery_core::observable::Observable;
use joinery_core::partition::{
    conditional_expectation, factor_quotient, is_c_system, isotropy_partition, largest_c_factor, Partition,
};
use joinery_core::perm::Permutation;
use joinery_core::rational::{int, rat, Rational};
use joinery_core::system::{FactorMap, FiniteSystem};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diagonal(x: &FiniteSystem) -> BTreeMap<Vec<usize>, Rational> {
    (0..x.len())
        .filter(|&p| !x.weight(p).is_zero())
        .map(|p| (vec![p, p], x.weight(p).clone()))
        .collect()
}

fn one_point(rank: usize) -> FiniteSystem {
    FiniteSystem::new(vec![int(1)], vec![Permutation::identity(1); rank]).unwrap()
}

/// `(1/N) Σ_{n=1}^N Σ_p μ(p) δ_{(T_1^n p, …, T_d^n p)}`, by direct iteration.
fn cesaro_oracle(x: &FiniteSystem, n: u64) -> BTreeMap<Vec<usize>, Rational> {
    let mut out: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    let scale = Rational::new(1.into(), (n as i64).into());
    for p in 0..x.len() {
        if x.weight(p).is_zero() {
            continue;
        }
        for k in 1..=n {
            let t: Vec<usize> = x.maps().iter().map(|m| iterate(m, p, k)).collect();
            *out.entry(t).or_insert_with(Rational::zero) += x.weight(p) * &scale;
        }
    }
    out
}

#[test]
fn product_coupling_examples() {
    let c = product_coupling(&[one_point(1), one_point(1)]).unwrap();
    assert_eq!(c.masses().len(), 1);
    assert_eq!(c.mass(&[0, 0]), int(1));
    let swap = FiniteSystem::translations(&[2], &[vec![1]]).unwrap();
    let c = product_coupling(&[swap.clone(), swap.clone()]).unwrap();
    assert!(c.masses().values().all(|m| *m == rat(1, 4)));
    assert!(c.marginals_match());
    assert!(c.check_equivariance(&vec![vec![1], vec![0]]).unwrap().holds);
}

#[test]
fn rel_indep_examples() {
    let x = z5_pair();
    let sq = z5_square();
    let to_point = |s: &FiniteSystem| FactorMap::new(s, one_point(2), vec![0; s.len()]).unwrap();
    let over_point = rel_indep_over_factor(&x, &sq, &to_point(&x), &to_point(&sq)).unwrap();
    assert_eq!(over_point.masses(), product_coupling(&[x.clone(), sq.clone()]).unwrap().masses());
    let id = FactorMap::identity(&x);
    assert_eq!(rel_indep_over_factor(&x, &x, &id, &id).unwrap().masses(), &diagonal(&x));
    // ℤ5² joined with its ℤ5 quotient over that quotient.
    let (quot, fmap) = factor_quotient(&sq, &Partition::from_keys(&sq, |p| p / 5)).unwrap();
    let lam = rel_indep_over_factor(&sq, &quot, &fmap, &FactorMap::identity(&quot)).unwrap();
    for p in 0..25 {
        for c in 0..5 {
            let want = if p / 5 == c { rat(1, 25) } else { int(0) };
            assert_eq!(lam.mass(&[p, c]), want);
        }
    }
    assert!(matches!(
        rel_indep_over_factor(&x, &sq, &id, &to_point(&sq)),
        Err(joinery_core::error::Error::MismatchedFactorTargets)
    ));
}

#[test]
fn rel_indep_self_joining_examples() {
    let sq = z5_square();
    assert_eq!(
        rel_indep_self_joining(&sq, &Partition::discrete(&sq)).unwrap().masses(),
        &diagonal(&sq)
    );
    assert_eq!(
        rel_indep_self_joining(&sq, &Partition::trivial(&sq)).unwrap().masses(),
        product_coupling(&[sq.clone(), sq.clone()]).unwrap().masses()
    );
    let lam = rel_indep_self_joining(&sq, &isotropy_partition(&sq, &[-1, 1]).unwrap()).unwrap();
    assert!(lam.check_equivariance(&vec![vec![1, 0], vec![0, 1]]).unwrap().holds);
    let z5 = FiniteSystem::translations(&[5], &[vec![1]]).unwrap();
    let bad = Partition::from_labels(&z5, &[0, 0, 1, 1, 1]).unwrap();
    assert!(rel_indep_self_joining(&z5, &bad).is_err());
}

#[test]
fn check_equivariance_examples() {
    let z5 = FiniteSystem::translations(&[5], &[vec![1]]).unwrap();
    let diag = Coupling::new(vec![z5.clone(), z5.clone()], diagonal(&z5), vec![]).unwrap();
    assert!(diag.check_equivariance(&vec![vec![2], vec![2]]).unwrap().holds);
    let product = product_coupling(&[z5.clone(), z5.clone()]).unwrap();
    assert!(product.check_equivariance(&vec![vec![1], vec![3]]).unwrap().holds);
    let skew = diag.check_equivariance(&vec![vec![1], vec![2]]).unwrap();
    assert!(!skew.holds);
    assert!(skew.witness.is_some());
    assert_eq!(skew.max_discrepancy, rat(1, 5));
}

#[test]
fn furstenberg_examples() {
    let x = z5_pair();
    let lam = furstenberg_self_joining(&x).unwrap();
    let oracle = cesaro_oracle(&x, 10 * 5);
    assert_eq!(lam.masses(), &oracle);
    assert_eq!(lam.support_size(), 25);
    assert!(lam.masses().values().all(|m| *m == rat(1, 25)));
    let equal = FiniteSystem::translations(&[6], &[vec![1], vec![1]]).unwrap();
    assert_eq!(furstenberg_self_joining(&equal).unwrap().masses(), &diagonal(&equal));
    let single = FiniteSystem::translations(&[6], &[vec![2]]).unwrap();
    let lam = furstenberg_self_joining(&single).unwrap();
    assert!((0..6).all(|p| lam.mass(&[p]) == rat(1, 6)));
}

#[test]
fn big_system_examples() {
    let big = big_system(&one_point(2)).unwrap();
    assert_eq!(big.system.len(), 1);
    let equal = FiniteSystem::translations(&[4], &[vec![1], vec![1]]).unwrap();
    let big = big_system(&equal).unwrap();
    assert_eq!(big.system.len(), 4);
    assert!(big.tuples.iter().all(|t| t[0] == t[1]));
    let big = big_system(&z5_pair()).unwrap();
    assert!(big.system.validate().passes());
    assert!(big.tail_in_c_factor);
    assert_eq!(big.first_coordinate.target().id(), z5_pair().id());
}

#[test]
fn certificate_examples() {
    let x = z5_pair();
    let y = z5_square();
    let f = z5_character(1);
    let product = product_coupling(&[x.clone(), y.clone()]).unwrap();
    assert!(satedness_certificate(&x, &y, &product, &f).unwrap().vanishes);
    // A C-system x: every recentred f vanishes.
    let lam = rel_indep_over_factor(&y, &y, &FactorMap::identity(&y), &FactorMap::identity(&y)).unwrap();
    let g = Observable::indicator(25, 3);
    assert!(satedness_certificate(&y, &y, &lam, &g).unwrap().vanishes);
    // Graph coupling along the x-coordinate factor.
    let graph = rel_indep_over_factor(&x, &y, &FactorMap::identity(&x), &z5_square_to_pair()).unwrap();
    let cert = satedness_certificate(&x, &y, &graph, &f).unwrap();
    assert!(!cert.vanishes);
    // E_λ[ζ^x 1_q] = ζ^{q_x}/25, so the residual is 1/25.
    assert_eq!(cert.residual_sq, Cyclotomic::from_rational(rat(1, 625)));
    assert!((cert.residual - 0.04).abs() < 1e-12);
    assert!(matches!(
        satedness_certificate(&y, &x, &product_coupling(&[y.clone(), x.clone()]).unwrap(), &g),
        Err(joinery_core::error::Error::NotCSystem)
    ));
}

fn signed_objective(lam: &Coupling, f: &[Rational], b: usize) -> Rational {
    lam.masses().iter().filter(|(t, _)| t[1] == b).map(|(t, m)| m * &f[t[0]]).sum()
}

#[test]
fn falsifier_finds_the_z5_witness() {
    let x = z5_pair();
    let y = z5_square();
    let report = satedness_falsifier(&x, &y, &FalsifierOptions::default()).unwrap();
    let w = report.witness.as_ref().expect("a witness against the ℤ5 pair");
    assert!(report.optimal_value.is_positive());
    assert!(w.coupling.marginals_match());
    for word in diagonal_words(2, 2) {
        assert!(w.coupling.check_equivariance(&word).unwrap().holds);
    }
    // Recompute the objective directly from the vertex coupling.
    let xc = largest_c_factor(&x).unwrap();
    let e = conditional_expectation(&x, &Observable::indicator(5, w.f_index), &xc).unwrap();
    let f: Vec<Rational> = (0..5)
        .map(|p| {
            let one = if p == w.f_index { int(1) } else { int(0) };
            one - e.get(p).unwrap().as_rational().unwrap()
        })
        .collect();
    assert_eq!(signed_objective(&w.coupling, &f, w.g_index), w.value);
    assert_eq!(w.value.abs(), report.optimal_value);
}

#[test]
fn falsifier_negative_examples() {
    let sq = z5_square();
    let report = satedness_falsifier(&sq, &z5_square(), &FalsifierOptions::default()).unwrap();
    assert!(report.witness.is_none());
    let swap = FiniteSystem::translations(&[2], &[vec![1]]).unwrap();
    let report = satedness_falsifier(&swap, &one_point(1), &FalsifierOptions::default()).unwrap();
    assert!(report.witness.is_none());
    assert_eq!(report.optimal_value, int(0));
    assert!(report.pairs_examined > 0);
    let small = FalsifierOptions {
        bound: 10,
        stop_at_first: true,
    };
    assert!(matches!(
        satedness_falsifier(&z5_pair(), &sq, &small),
        Err(joinery_core::error::Error::BoundExceeded { tuples: 125, bound: 10 })
    ));
}

/// `x = ℤ5×ℤ3` with `(+1,0), (+2,+1)`, `y = ℤ3²` with `Id, (+1,+1)`: `y` only sees the C-factor of `x`.
fn sated_pair() -> (FiniteSystem, FiniteSystem) {
    let x = FiniteSystem::translations(&[5, 3], &[vec![1, 0], vec![2, 1]]).unwrap();
    let y = FiniteSystem::translations(&[3, 3], &[vec![0, 0], vec![1, 1]]).unwrap();
    (x, y)
}

#[test]
fn falsifier_scan_finds_nothing_on_a_sated_pair() {
    let (x, y) = sated_pair();
    assert!(!is_c_system(&x).unwrap());
    assert!(is_c_system(&y).unwrap());
    let opts = FalsifierOptions {
        stop_at_first: false,
        ..FalsifierOptions::default()
    };
    let report = satedness_falsifier(&x, &y, &opts).unwrap();
    assert!(report.witness.is_none());
    assert_eq!(report.optimal_value, int(0));
    assert_eq!(report.pairs_examined, 15 * 9);
}

#[test]
fn random_vertices_have_zero_residual_when_the_optimum_is_zero() {
    let (x, y) = sated_pair();
    let lp = JoiningLp::new(&x, &y, Formulation::Orbits, 400).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut distinct = std::collections::BTreeSet::new();
    for _ in 0..100 {
        let weights: Vec<i64> = (0..x.len() * y.len()).map(|_| rng.gen_range(-5..=5)).collect();
        let c = lp.objective(|p, q| int(weights[p * y.len() + q]));
        let vertex = lp.maximize(&c).unwrap();
        let lam = lp.coupling(&vertex.x).unwrap();
        distinct.insert(format!("{:?}", lam.masses()));
        let f = Observable::exact(
            (0..x.len())
                .map(|_| Cyclotomic::gaussian(int(rng.gen_range(-3..=3)), int(rng.gen_range(-3..=3))))
                .collect(),
        );
        assert!(satedness_certificate(&x, &y, &lam, &f).unwrap().vanishes);
    }
    assert!(distinct.len() > 1, "the polytope should have several vertices");
}

#[test]
fn sated_extension_examples() {
    let x = z5_pair();
    let id = FactorMap::identity(&x);
    let same = sated_extension_step(&x, &id, &x, &id).unwrap();
    assert_eq!(same.system.len(), 5);
    assert!(same.pairs.iter().all(|&(p, q)| p == q));
    let to_point = |s: &FiniteSystem| FactorMap::new(s, one_point(2), vec![0; s.len()]).unwrap();
    let sq = z5_square();
    let prod = sated_extension_step(&x, &to_point(&x), &sq, &to_point(&sq)).unwrap();
    assert_eq!(prod.system.len(), 125);
    assert!(prod.system.weights().iter().all(|w| *w == rat(1, 125)));
}

#[test]
fn sated_extension_removes_the_witness() {
    let x = z5_pair();
    let y = z5_square();
    assert!(satedness_falsifier(&x, &y, &FalsifierOptions::default()).unwrap().witness.is_some());
    let z = sated_extension_step(&x, &FactorMap::identity(&x), &y, &z5_square_to_pair()).unwrap();
    assert!(z.system.validate().passes());
    assert_eq!(z.system.len(), 25);
    assert!(is_c_system(&z.system).unwrap());
    assert_eq!(z.to_x.target().id(), x.id());
    let opts = FalsifierOptions {
        bound: 625,
        stop_at_first: false,
    };
    let report = satedness_falsifier(&z.system, &y, &opts).unwrap();
    assert!(report.witness.is_none());
    assert_eq!(report.optimal_value, int(0));
}

/// Fiber product built directly from the joint law, with no shared code.
fn truncation_oracle(lam: &Coupling, k: usize) -> BTreeMap<Vec<usize>, Rational> {
    let x = &lam.components()[0];
    let mut out = BTreeMap::new();
    for p in 0..x.len() {
        let mu = x.weight(p);
        if mu.is_zero() {
            continue;
        }
        let fiber: Vec<(usize, Rational)> = lam
            .masses()
            .iter()
            .filter(|(t, _)| t[0] == p)
            .map(|(t, m)| (t[1], m / mu))
            .collect();
        let mut idx = vec![0usize; k];
        loop {
            let mut t = vec![p];
            let mut m = mu.clone();
            for &i in &idx {
                t.push(fiber[i].0);
                m *= &fiber[i].1;
            }
            out.insert(t, m);
            let mut j = 0;
            while j < k {
                idx[j] += 1;
                if idx[j] < fiber.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
        }
    }
    out
}

#[test]
fn truncation_of_the_graph_joining() {
    let lam = graph_joining();
    let g = Observable::indicator(10, 0);
    let expected = [rat(1, 20), rat(1, 40), rat(1, 80), rat(1, 160)];
    for (k, want) in [1usize, 2, 4, 8].into_iter().zip(expected) {
        let t = lambda_infinity_truncation(&lam, k, DEFAULT_TRUNCATION_BOUND).unwrap();
        assert_eq!(t.masses(), &truncation_oracle(&lam, k), "k = {k}");
        let r = truncation_report(&lam, &t, &g).unwrap();
        assert_eq!(r.base_variance, Cyclotomic::from_rational(rat(1, 20)));
        assert_eq!(r.fiber_variance, Cyclotomic::from_rational(want));
        assert!(r.variance_matches && r.cyclic_shift_invariant && r.generated_invariant);
    }
    let one = lambda_infinity_truncation(&lam, 1, 100).unwrap();
    assert_eq!(one.masses(), lam.masses());
    assert!(lambda_infinity_truncation(&lam, 8, 100).is_err());
}

#[test]
fn truncation_of_a_product_is_the_full_product() {
    let x = FiniteSystem::translations(&[3], &[vec![1]]).unwrap();
    let y = FiniteSystem::translations(&[2], &[vec![1]]).unwrap();
    let lam = product_coupling(&[x.clone(), y.clone()]).unwrap();
    let t = lambda_infinity_truncation(&lam, 3, 1000).unwrap();
    let full = product_coupling(&[x, y.clone(), y.clone(), y]).unwrap();
    assert_eq!(t.masses(), full.masses());
    let r = truncation_report(&lam, &t, &Observable::indicator(2, 1)).unwrap();
    assert_eq!(r.conditional, Observable::from_rationals(vec![rat(1, 2); 3]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn furstenberg_matches_brute_force_cesaro(x in arb_system()) {
        let p = x.period().unwrap();
        let lam = furstenberg_self_joining(&x).unwrap();
        prop_assert_eq!(lam.masses(), &cesaro_oracle(&x, p));
        prop_assert_eq!(lam.masses(), &cesaro_oracle(&x, 2 * p));
        for i in 0..x.rank() {
            prop_assert_eq!(lam.marginal(i), x.weights().to_vec());
        }
    }

    #[test]
    fn big_system_is_a_valid_extension(x in arb_system()) {
        let big = big_system(&x).unwrap();
        prop_assert!(big.system.validate().passes());
        prop_assert!(big.tail_in_c_factor);
    }

    #[test]
    fn self_joining_over_difference_isotropy_chain(
        x in arb_system().prop_filter("d = 2", |s| s.rank() == 2),
        raw in prop::collection::vec((-2i64..=2, -1i64..=1), 64),
    ) {
        let iso = isotropy_partition(&x, &[-1, 1]).unwrap();
        let phi = Observable::exact(raw[..x.len()].iter().map(|&(a, b)| Cyclotomic::gaussian(int(a), int(b))).collect());
        let e = |f: &Observable| conditional_expectation(&x, f, &iso).unwrap();
        for t in x.maps() {
            // E[φ∘T | 𝓘] = E[φ | 𝓘]∘T for an invariant 𝓘.
            prop_assert!(e(&phi.compose(t)).sub(&e(&phi).compose(t)).unwrap().is_null(&x).unwrap());
        }
        // E[φ | 𝓘]∘T_1 = E[φ | 𝓘]∘T_2 on 𝓘 = 𝓘^{T_2 T_1^{-1}}.
        prop_assert!(e(&phi).compose(x.map(0)).sub(&e(&phi).compose(x.map(1))).unwrap().is_null(&x).unwrap());
        let lam = rel_indep_self_joining(&x, &iso).unwrap();
        prop_assert!(lam.check_equivariance(&vec![vec![1, 0], vec![0, 1]]).unwrap().holds);
        prop_assert!(lam.check_equivariance(&vec![vec![0, 1], vec![0, 1]]).unwrap().holds);
    }

    #[test]
    fn certificate_vanishes_over_the_c_factor(
        x in arb_system(),
        raw in prop::collection::vec((-2i64..=2, -1i64..=1), 64),
    ) {
        let (y, fmap) = factor_quotient(&x, &largest_c_factor(&x).unwrap()).unwrap();
        let lam = rel_indep_over_factor(&x, &y, &fmap, &FactorMap::identity(&y)).unwrap();
        let f = Observable::exact(raw[..x.len()].iter().map(|&(a, b)| Cyclotomic::gaussian(int(a), int(b))).collect());
        prop_assert!(satedness_certificate(&x, &y, &lam, &f).unwrap().vanishes);
        prop_assert!(recentre(&x, &f).unwrap().integral(&x).unwrap().is_zero());
    }

    #[test]
    fn orbit_and_tuple_polytopes_agree(
        x in arb_system().prop_filter("small", |s| s.len() <= 6 && s.rank() == 1),
        m in 1usize..=3,
        shift in 0i64..3,
        weights in prop::collection::vec(-3i64..=3, 36),
    ) {
        let y = FiniteSystem::translations(&[m], &[vec![shift]]).unwrap();
        let orbits = JoiningLp::new(&x, &y, Formulation::Orbits, 64).unwrap();
        let tuples = JoiningLp::new(&x, &y, Formulation::Tuples, 64).unwrap();
        let c = |p: usize, q: usize| int(weights[(p * m + q) % 36]);
        let a = orbits.maximize(&orbits.objective(c)).unwrap().value;
        prop_assert_eq!(&a, &tuples.maximize(&tuples.objective(c)).unwrap().value);
        prop_assert_eq!(&a, &orbits.maximize_by_vertices(&orbits.objective(c)).unwrap().value);
    }
}
