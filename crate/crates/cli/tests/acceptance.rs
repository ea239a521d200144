//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Every criterion compares the library against an oracle written here, at the stated
//! tolerance (zero for exact criteria). `JOINERY_SEED` fixes the random corpus of criterion 7.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use joinery_core::averages::{
    exact_limit_average, limit_equals_projected, multiple_average, multiple_sequence, vdc_exact, vdc_quantities,
};
use joinery_core::corpus::{corpus, graph_joining, z5_character, z5_pair, z5_square, z5_square_to_pair};
use joinery_core::coupling::{diagonal_words, Coupling};
use joinery_core::cyclotomic::Cyclotomic;
use joinery_core::joinings::{
    furstenberg_self_joining, furstenberg_word, lambda_infinity_truncation, rel_indep_self_joining,
    sated_extension_step, satedness_falsifier, truncation_report, FalsifierOptions, DEFAULT_TRUNCATION_BOUND,
};
use joinery_core::observable::{product, Observable};
use joinery_core::partition::{
    conditional_expectation, factor_quotient, is_c_system, isotropy_partition, largest_c_factor, Partition,
};
use joinery_core::perm::Permutation;
use joinery_core::rational::{int, rat, Rational};
use joinery_core::system::{FactorMap, FiniteSystem};
use joinery_torus::{annexb_experiment, golden_alpha, AnnexBConfig};

const DEFAULT_SEED: u64 = 0x5eed_2009;

fn iterate(t: &Permutation, p: usize, n: u64) -> usize {
    (0..n).fold(p, |q, _| t.apply(q))
}

/// `Ā(p)`: average of `Π f_i(T_i^n p)` over one return time of `p` under the joint action.
fn limit_oracle(x: &FiniteSystem, fs: &[Observable]) -> Vec<Cyclotomic> {
    (0..x.len())
        .map(|p| {
            let start = vec![p; x.rank()];
            let mut pos = start.clone();
            let mut sum = Cyclotomic::zero();
            let mut len = 0i64;
            loop {
                for (i, q) in pos.iter_mut().enumerate() {
                    *q = x.map(i).apply(*q);
                }
                len += 1;
                let term = fs.iter().zip(&pos).fold(Cyclotomic::one(), |acc, (f, &q)| &acc * f.get(q).unwrap());
                sum += &term;
                if pos == start {
                    break;
                }
            }
            sum.scale(&rat(1, len))
        })
        .collect()
}

/// `(1/N) Σ_{n=1}^N Σ_p μ(p) δ_{(T_1^n p, …, T_d^n p)}` by direct iteration, zero masses dropped.
fn cesaro_oracle(x: &FiniteSystem, n: u64) -> BTreeMap<Vec<usize>, Rational> {
    let mut out: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for p in 0..x.len() {
        for k in 1..=n {
            let t: Vec<usize> = x.maps().iter().map(|m| iterate(m, p, k)).collect();
            *out.entry(t).or_insert_with(Rational::zero) += x.weight(p) * rat(1, n as i64);
        }
    }
    out.retain(|_, m| !m.is_zero());
    out
}

fn rational(c: &Cyclotomic) -> Rational {
    c.as_rational().cloned().expect("value is rational")
}

fn criterion_1() {
    for e in corpus() {
        let (x, fs) = (&e.system, &e.observables);
        let oracle = Observable::exact(limit_oracle(x, fs));
        let lim = exact_limit_average(x, fs).unwrap();
        assert_eq!(lim, oracle, "{}: limit", e.name);
        let p = x.period().unwrap();
        for k in 1..=3 {
            assert_eq!(multiple_average(x, fs, k * p).unwrap(), oracle, "{}: A_{{{k}P}}", e.name);
        }
        let sup_sq = product(fs).unwrap().sup_norm_sq(x).unwrap().unwrap();
        for n in 1..=3 * p {
            let gap = rational(&multiple_average(x, fs, n).unwrap().sub(&oracle).unwrap().l2_norm_sq(x).unwrap());
            let bound = rat((4 * p * p) as i64, (n * n) as i64) * &sup_sq;
            assert!(gap <= bound, "{}: N = {n}: {gap} > {bound}", e.name);
        }
    }
}

fn criterion_2() {
    for e in corpus() {
        let x = &e.system;
        let lam = furstenberg_self_joining(x).unwrap();
        for i in 0..x.rank() {
            assert_eq!(lam.marginal(i), x.weights(), "{}: marginal {i}", e.name);
        }
        for w in diagonal_words(x.rank(), x.rank()).into_iter().chain([furstenberg_word(x.rank())]) {
            assert!(lam.check_equivariance(&w).unwrap().holds, "{}: word {w:?}", e.name);
        }
        let p = x.period().unwrap();
        assert_eq!(lam.masses(), &cesaro_oracle(x, 2 * p), "{}: Cesàro at 2P", e.name);
    }
}

fn criterion_3() {
    let mut seen = 0;
    for e in corpus().into_iter().filter(|e| e.system.rank() == 2) {
        let x = &e.system;
        let iso = isotropy_partition(x, &[-1, 1]).unwrap();
        let lam = rel_indep_self_joining(x, &iso).unwrap();
        assert!(lam.marginals_match(), "{}", e.name);
        let check = lam.check_equivariance(&vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert!(check.holds, "{}: witness {:?}", e.name, check.witness);
        seen += 1;
    }
    assert!(seen >= 12);
}

fn criterion_4() {
    let mut c_systems = 0;
    for e in corpus() {
        if is_c_system(&e.system).unwrap() {
            let check = limit_equals_projected(&e.system, &e.observables).unwrap();
            assert!(check.holds && check.discrepancy_sq.is_zero(), "{}", e.name);
            c_systems += 1;
        }
    }
    assert!(c_systems > 0);
    let bad = limit_equals_projected(&z5_pair(), &[z5_character(1), z5_character(2)]).unwrap();
    assert!(!bad.holds);
    assert!(rational(&bad.discrepancy_sq).is_positive());
}

/// `E_λ[(1_a − E[1_a|X_C]) ⊗ 1_b]`, summed over the coupling's support.
fn witness_objective(lam: &Coupling, x: &FiniteSystem, a: usize, b: usize) -> Rational {
    let f = conditional_expectation(x, &Observable::indicator(x.len(), a), &largest_c_factor(x).unwrap()).unwrap();
    lam.masses()
        .iter()
        .filter(|(t, _)| t[1] == b)
        .map(|(t, m)| {
            let one_a = if t[0] == a { int(1) } else { int(0) };
            m * (one_a - rational(f.get(t[0]).unwrap()))
        })
        .sum()
}

fn criterion_5() {
    let (x, y) = (z5_pair(), z5_square());
    let r = satedness_falsifier(&x, &y, &FalsifierOptions::default()).unwrap();
    assert!(r.optimal_value.is_positive());
    let w = r.witness.expect("witness");
    assert!(w.coupling.marginals_match());
    for word in diagonal_words(2, 2) {
        assert!(w.coupling.check_equivariance(&word).unwrap().holds);
    }
    assert_eq!(witness_objective(&w.coupling, &x, w.f_index, w.g_index), w.value);
    assert_eq!(w.value.abs(), r.optimal_value);

    let opts = FalsifierOptions {
        stop_at_first: false,
        ..FalsifierOptions::default()
    };
    let mut c_systems = 0;
    for e in corpus().into_iter().filter(|e| e.system.rank() == 2) {
        if is_c_system(&e.system).unwrap() {
            let r = satedness_falsifier(&e.system, &y, &opts).unwrap();
            assert!(r.witness.is_none() && r.optimal_value.is_zero(), "{}", e.name);
            c_systems += 1;
        }
    }
    assert!(c_systems > 0);
}

fn criterion_6() {
    let (x, y) = (z5_pair(), z5_square());
    assert!(satedness_falsifier(&x, &y, &FalsifierOptions::default()).unwrap().witness.is_some());
    let z = sated_extension_step(&x, &FactorMap::identity(&x), &y, &z5_square_to_pair()).unwrap();
    assert!(z.system.validate().passes());
    // The first coordinate is a factor map onto x.
    let first: Vec<usize> = z.pairs.iter().map(|&(p, _)| p).collect();
    let to_x = FactorMap::new(&z.system, x.clone(), first.clone()).unwrap();
    assert_eq!(z.to_x.assignment(), to_x.assignment());
    let opts = FalsifierOptions {
        bound: 625,
        stop_at_first: false,
    };
    let r = satedness_falsifier(&z.system, &y, &opts).unwrap();
    assert!(r.witness.is_none());
    assert!(r.optimal_value.is_zero());
}

fn criterion_7() {
    let seed = std::env::var("JOINERY_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..1000 {
        let dim = rng.gen_range(1..=8);
        let n = rng.gen_range(1..=256);
        let h = rng.gen_range(1..=16);
        let us: Vec<Vec<Complex64>> = (0..n + h)
            .map(|_| {
                (0..dim)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)))
                    .collect()
            })
            .collect();
        let weights: Option<Vec<f64>> = rng.gen_bool(0.5).then(|| {
            let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|w| w / total).collect()
        });
        let r = vdc_quantities(&us, weights.as_deref(), n, h).unwrap();
        if !r.holds {
            violations += 1;
        }
    }
    assert_eq!(violations, 0, "seed {seed}");

    // ℤ5² with T_1 = (+1,+1), T_2 = (+2,+2), f_1 = ζ^x, f_2 = ζ^y, so E[f_1|X_C] = 0.
    let x = FiniteSystem::translations(&[5, 5], &[vec![1, 1], vec![2, 2]]).unwrap();
    let f1 = Observable::roots_of_unity(5, &(0..25).map(|p| p / 5).collect::<Vec<_>>());
    let f2 = Observable::roots_of_unity(5, &(0..25).map(|p| p % 5).collect::<Vec<_>>());
    assert!(conditional_expectation(&x, &f1, &largest_c_factor(&x).unwrap()).unwrap().is_zero());
    let us = multiple_sequence(&x, &[f1, f2], 125 + 20).unwrap();
    let at = vdc_exact(&x, &us, 125, 5).unwrap();
    assert!(at.holds);
    assert!(rational(&at.rhs_bound) >= rational(&at.lhs_sq));
    let mut envelope = f64::INFINITY;
    for h in 1..=20 {
        let r = vdc_exact(&x, &us, 125, h).unwrap();
        let corr = r.corr.to_complex().norm();
        if h % 5 == 0 {
            assert!(r.corr.is_zero(), "full periods cancel at H = {h}");
        }
        // |corr(H)| ≤ 2/H, an envelope decreasing to 0.
        let bound = 2.0 / h as f64;
        assert!(corr <= bound + 1e-12 && bound < envelope);
        envelope = bound;
    }
}

fn criterion_8() {
    let report = annexb_experiment(&AnnexBConfig::default()).unwrap();
    assert!(report.invariance_2x_minus_y && report.y_action_equality);
    let alpha = golden_alpha();
    let mut freqs = std::collections::BTreeSet::new();
    for c in &report.weyl {
        let n = c.n.expect("an N within budget");
        assert!(n <= 10_000_000);
        let value = c.value.unwrap();
        assert!(c.passed && value <= 1e-8, "freq {} map {}: {value}", c.freq, c.map);
        // Closed-form geometric sum at the same N, as an independent oracle.
        let theta = (2.0 * c.freq as f64 * alpha).fract();
        let pi = std::f64::consts::PI;
        let closed = (pi * n as f64 * theta).sin().abs() / (n as f64 * (pi * theta).sin().abs());
        assert!((value - closed).abs() < 1e-9);
        freqs.insert(c.freq);
    }
    assert_eq!(freqs, (1..=8).collect());
    assert!(report.passed);

    // Exact mirror: ℤ5² (+1,+2)/(+2,+2) is a C-system, its x-quotient is not.
    let sq = z5_square();
    assert!(is_c_system(&sq).unwrap());
    let by_x = Partition::from_keys(&sq, |p| p / 5);
    let (quotient, _) = factor_quotient(&sq, &by_x).unwrap();
    assert!(quotient.validate().passes());
    assert!(!is_c_system(&quotient).unwrap());
    assert_eq!(largest_c_factor(&quotient).unwrap().num_blocks(), 1);
}

fn criterion_9() {
    let lam = graph_joining();
    let (x, y) = (&lam.components()[0], &lam.components()[1]);
    let g = Observable::indicator(y.len(), 0);
    // E_λ[g(y) | x](p) from the joint law.
    let cond: Vec<Rational> = (0..x.len())
        .map(|p| {
            let s: Rational = lam.masses().iter().filter(|(t, _)| t[0] == p && t[1] == 0).map(|(_, m)| m.clone()).sum();
            s / x.weight(p)
        })
        .collect();
    let base: Rational = lam
        .masses()
        .iter()
        .map(|(t, m)| {
            let v = if t[1] == 0 { int(1) } else { int(0) } - &cond[t[0]];
            m * &v * &v
        })
        .sum();
    assert_eq!(base, rat(1, 20));
    for k in [1usize, 2, 4, 8] {
        let trunc = lambda_infinity_truncation(&lam, k, DEFAULT_TRUNCATION_BOUND).unwrap();
        let oracle: Rational = trunc
            .masses()
            .iter()
            .map(|(t, m)| {
                let hits = t[1..].iter().filter(|&&q| q == 0).count() as i64;
                let v = rat(hits, k as i64) - &cond[t[0]];
                m * &v * &v
            })
            .sum();
        assert_eq!(oracle, &base / int(k as i64), "k = {k}");
        let r = truncation_report(&lam, &trunc, &g).unwrap();
        assert_eq!(rational(&r.base_variance), base);
        assert_eq!(rational(&r.fiber_variance), oracle);
        assert!(r.variance_matches && r.cyclic_shift_invariant);
        assert!(r.generated_invariant && r.generated.is_invariant(x));
        let from_cond = Observable::from_rationals(cond.clone());
        assert_eq!(r.conditional, from_cond);
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn(),
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "exact limits, A_kP = limit and 1/N rate on the corpus", limit: Some(Duration::from_secs(10)), run: criterion_1 },
        Criterion { id: 2, name: "Furstenberg self-joining marginals, invariance, Cesàro at 2P", limit: None, run: criterion_2 },
        Criterion { id: 3, name: "relatively independent self-joining is T1xT2-invariant", limit: None, run: criterion_3 },
        Criterion { id: 4, name: "characteristic-factor identity on C-systems, failure on Z5", limit: None, run: criterion_4 },
        Criterion { id: 5, name: "satedness falsifier witness on Z5, zero optimum on C-systems", limit: Some(Duration::from_secs(60)), run: criterion_5 },
        Criterion { id: 6, name: "sated extension removes the witness", limit: None, run: criterion_6 },
        Criterion { id: 7, name: "Van der Corput bound on 1000 random sequences and the exact sequence", limit: None, run: criterion_7 },
        Criterion { id: 8, name: "torus factor of a C-system that is not a C-system, with exact mirror", limit: Some(Duration::from_secs(30)), run: criterion_8 },
        Criterion { id: 9, name: "lambda-infinity truncation variances Var/k and invariant generated factor", limit: None, run: criterion_9 },
    ];
    std::panic::set_hook(Box::new(|info| eprintln!("  {info}")));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run));
        let elapsed = start.elapsed();
        let in_time = c.limit.is_none_or(|l| elapsed < l);
        let verdict = if outcome.is_ok() && in_time { "PASS" } else { "FAIL" };
        let note = if outcome.is_ok() && !in_time { " (over time limit)" } else { "" };
        println!("{verdict} criterion {}: {} [{:.2}s]{note}", c.id, c.name, elapsed.as_secs_f64());
        if verdict == "FAIL" {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
