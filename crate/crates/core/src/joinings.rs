//! Joinings of finite systems: relatively independent joinings, the
//! Furstenberg self-joining and its big system, satedness certificates and
//! falsifiers, the sated-extension step and finite truncations of `λ∞`.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};

use crate::coupling::{diagonal_words, Coupling, ProductWord};
use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::lp::{FeasibleTableau, LpSolution, StandardLp};
use crate::observable::Observable;
use crate::partition::{
    conditional_expectation, factor_quotient, generated_factor, is_c_system, largest_c_factor, Partition,
};
use crate::perm::Permutation;
use crate::rational::Rational;
use crate::system::{FactorMap, FiniteSystem};

pub const DEFAULT_PERIOD_CAP: u64 = 1_000_000;
pub const DEFAULT_LP_BOUND: usize = 400;
pub const DEFAULT_TRUNCATION_BOUND: usize = 1_000_000;
/// Largest product for which the vertex-enumeration fallback is attempted.
pub const VERTEX_FALLBACK_TUPLES: usize = 64;

fn positive_points(x: &FiniteSystem) -> Vec<usize> {
    (0..x.len()).filter(|&p| !x.weight(p).is_zero()).collect()
}

fn common_rank(xs: &[FiniteSystem]) -> Option<usize> {
    let r = xs.first()?.rank();
    xs.iter().all(|x| x.rank() == r).then_some(r)
}

/// Independent product measure, with every diagonal equivariance declared.
pub fn product_coupling(xs: &[FiniteSystem]) -> Result<Coupling> {
    let mut masses: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    masses.insert(Vec::new(), Rational::one());
    for x in xs {
        let support = positive_points(x);
        masses = masses
            .into_iter()
            .flat_map(|(t, m)| {
                support.iter().map(move |&p| {
                    let mut t = t.clone();
                    t.push(p);
                    (t, &m * x.weight(p))
                })
            })
            .collect();
    }
    let words = common_rank(xs).map_or_else(Vec::new, |r| diagonal_words(r, xs.len()));
    Coupling::new(xs.to_vec(), masses, words)
}

/// `λ(p, q) = μ(p)·ν(q)/ρ(c)` when both points lie over the same factor point `c`.
pub fn rel_indep_over_factor(
    x: &FiniteSystem,
    y: &FiniteSystem,
    fx: &FactorMap,
    fy: &FactorMap,
) -> Result<Coupling> {
    if fx.source_id() != x.id() || fy.source_id() != y.id() {
        return Err(Error::MismatchedSystems);
    }
    if fx.target().id() != fy.target().id() {
        return Err(Error::MismatchedFactorTargets);
    }
    let rho = fx.target();
    let mut fiber_y: HashMap<usize, Vec<usize>> = HashMap::new();
    for q in positive_points(y) {
        fiber_y.entry(fy.apply(q)).or_default().push(q);
    }
    let mut masses = BTreeMap::new();
    for p in positive_points(x) {
        let c = fx.apply(p);
        let base = x.weight(p) / rho.weight(c);
        for &q in fiber_y.get(&c).into_iter().flatten() {
            masses.insert(vec![p, q], &base * y.weight(q));
        }
    }
    Coupling::new(vec![x.clone(), y.clone()], masses, diagonal_words(x.rank(), 2))
}

/// Relatively independent self-joining `μ ⊗_p μ` over an invariant partition.
pub fn rel_indep_self_joining(x: &FiniteSystem, p: &Partition) -> Result<Coupling> {
    let (_, fmap) = factor_quotient(x, p)?;
    rel_indep_over_factor(x, x, &fmap, &fmap)
}

/// `(T_1, …, T_d)`: slot `i` carries `T_i`.
pub fn furstenberg_word(rank: usize) -> ProductWord {
    (0..rank)
        .map(|i| {
            let mut e = vec![0; rank];
            e[i] = 1;
            e
        })
        .collect()
}

/// How the Cesàro limit defining the Furstenberg self-joining was evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PeriodRoute {
    /// One common period `P` for all points.
    Global(u64),
    /// Each point averaged over its own orbit period (all bounded by the cap).
    PerPoint { max_period: u64 },
}

/// Furstenberg self-joining with the default period cap.
pub fn furstenberg_self_joining(x: &FiniteSystem) -> Result<Coupling> {
    furstenberg_self_joining_capped(x, DEFAULT_PERIOD_CAP).map(|(c, _)| c)
}

/// `λ = lim (1/N) Σ_{n=1}^N (T_1^n × … × T_d^n)_* Δ_*μ`, evaluated exactly.
///
/// The sequence of pushforwards of `δ_p` is periodic with the period of `p`
/// under `(T_1, …, T_d)`, so averaging each point over its own period (or
/// over any common multiple) gives the limit exactly.
pub fn furstenberg_self_joining_capped(x: &FiniteSystem, cap: u64) -> Result<(Coupling, PeriodRoute)> {
    let d = x.rank();
    if d == 0 {
        return Err(Error::InvalidArgument("Furstenberg self-joining needs d ≥ 1".into()));
    }
    let points = positive_points(x);
    let global = x.period().filter(|&p| p <= cap);
    let periods: Vec<u64> = match global {
        Some(p) => vec![p; x.len()],
        None => {
            let per = x.point_periods();
            if let Some(&worst) = points.iter().map(|&p| &per[p]).max() {
                if worst > cap {
                    return Err(Error::PeriodCapExceeded {
                        period: x.period().map_or_else(|| "overflow".to_string(), |p| p.to_string()),
                        cap,
                    });
                }
            }
            per
        }
    };
    let mut masses: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for &p in &points {
        let share = x.weight(p) / Rational::from_integer(periods[p].into());
        let mut t = vec![p; d];
        for _ in 0..periods[p] {
            for (slot, map) in t.iter_mut().zip(x.maps()) {
                *slot = map.apply(*slot);
            }
            *masses.entry(t.clone()).or_insert_with(Rational::zero) += &share;
        }
    }
    let mut words = diagonal_words(d, d);
    words.push(furstenberg_word(d));
    let route = match global {
        Some(p) => PeriodRoute::Global(p),
        None => PeriodRoute::PerPoint {
            max_period: points.iter().map(|&p| periods[p]).max().unwrap_or(1),
        },
    };
    Ok((Coupling::new(vec![x.clone(); d], masses, words)?, route))
}

/// The system `(X^d, λ, T̃_1, …, T̃_d)` on the support of the Furstenberg self-joining.
#[derive(Clone, Debug)]
pub struct BigSystem {
    pub system: FiniteSystem,
    /// Support tuple of each point of `system`.
    pub tuples: Vec<Vec<usize>>,
    pub joining: Coupling,
    /// First-coordinate projection onto the original system.
    pub first_coordinate: FactorMap,
    /// Whether coordinates `2..d` are measurable with respect to the largest C-factor.
    pub tail_in_c_factor: bool,
}

/// `T̃_1 = T_1 ⊗ T_2 ⊗ … ⊗ T_d` and `T̃_i = T_i ⊗ … ⊗ T_i` for `i ≥ 2`.
pub fn big_system(x: &FiniteSystem) -> Result<BigSystem> {
    big_system_capped(x, DEFAULT_PERIOD_CAP)
}

pub fn big_system_capped(x: &FiniteSystem, cap: u64) -> Result<BigSystem> {
    let (joining, _) = furstenberg_self_joining_capped(x, cap)?;
    let d = x.rank();
    let tuples: Vec<Vec<usize>> = joining.masses().keys().cloned().collect();
    let index: HashMap<&Vec<usize>, usize> = tuples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let words: Vec<ProductWord> = (0..d)
        .map(|i| if i == 0 { furstenberg_word(d) } else { vec![x.unit_word(i); d] })
        .collect();
    let mut maps = Vec::with_capacity(d);
    for word in &words {
        let perms: Vec<Permutation> = word.iter().map(|e| x.transform_word(e)).collect::<Result<_>>()?;
        let images = tuples
            .iter()
            .map(|t| {
                let image: Vec<usize> = t.iter().zip(&perms).map(|(&p, s)| s.apply(p)).collect();
                index
                    .get(&image)
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument("support of λ is not invariant".into()))
            })
            .collect::<Result<Vec<usize>>>()?;
        maps.push(Permutation::new(images)?);
    }
    let weights = tuples.iter().map(|t| joining.mass(t)).collect();
    let system = FiniteSystem::new_validated(weights, maps)?;
    let first_coordinate = FactorMap::new(&system, x.clone(), tuples.iter().map(|t| t[0]).collect())?;
    let tail = Partition::from_keys(&system, |p| tuples[p][1..].to_vec());
    let tail_in_c_factor = largest_c_factor(&system)?.refines(&tail);
    Ok(BigSystem {
        system,
        tuples,
        joining,
        first_coordinate,
        tail_in_c_factor,
    })
}

fn check_pair(x: &FiniteSystem, y: &FiniteSystem, lam: &Coupling) -> Result<()> {
    let c = lam.components();
    if c.len() != 2 || c[0].id() != x.id() || c[1].id() != y.id() {
        return Err(Error::MismatchedSystems);
    }
    for (i, comp) in c.iter().enumerate() {
        if lam.marginal(i) != comp.weights() {
            return Err(Error::MarginalMismatch { component: i });
        }
    }
    Ok(())
}

/// `f − E[f | X_C]`.
pub fn recentre(x: &FiniteSystem, f: &Observable) -> Result<Observable> {
    f.sub(&conditional_expectation(x, f, &largest_c_factor(x)?)?)
}

/// Outcome of evaluating the satedness identity on one joining.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    /// `max_q |E_λ[(f − E[f|X_C])(x)·1_q(y)]|²`.
    pub residual_sq: Cyclotomic,
    pub residual: f64,
    /// A `y`-point attaining the maximum.
    pub argmax: Option<usize>,
    pub vanishes: bool,
}

/// Residual of the relative-independence identity for one joining and one `f`.
pub fn satedness_certificate(
    x: &FiniteSystem,
    y: &FiniteSystem,
    lam: &Coupling,
    f: &Observable,
) -> Result<Certificate> {
    if !is_c_system(y)? {
        return Err(Error::NotCSystem);
    }
    check_pair(x, y, lam)?;
    if x.rank() != y.rank() {
        return Err(Error::InvalidArgument("systems have different ranks".into()));
    }
    for w in diagonal_words(x.rank(), 2) {
        if !lam.check_equivariance(&w)?.holds {
            return Err(Error::InvalidArgument(format!("coupling is not invariant under {w:?}")));
        }
    }
    f.check_len(x.len())?;
    let h = recentre(x, f)?;
    let h = h.exact_values()?;
    let mut corr = vec![Cyclotomic::zero(); y.len()];
    for (t, m) in lam.masses() {
        corr[t[1]] += &h[t[0]].scale(m);
    }
    let mut best: Option<(usize, Cyclotomic, f64)> = None;
    for (q, v) in corr.iter().enumerate() {
        let sq = v.norm_sq();
        let approx = sq.to_complex().re;
        if best.as_ref().is_none_or(|(_, b, a)| approx > *a || (b.is_zero() && !sq.is_zero())) {
            best = Some((q, sq, approx));
        }
    }
    let vanishes = corr.iter().all(Cyclotomic::is_zero);
    let (argmax, residual_sq, approx) = match best {
        Some((q, sq, a)) if !vanishes => (Some(q), sq, a),
        _ => (None, Cyclotomic::zero(), 0.0),
    };
    Ok(Certificate {
        residual_sq,
        residual: approx.max(0.0).sqrt(),
        argmax,
        vanishes,
    })
}

/// Variable layout for the joining polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Formulation {
    /// One variable per orbit of the product action; invariance holds by construction.
    Orbits,
    /// One variable per tuple, with explicit invariance equalities.
    Tuples,
}

/// The polytope of joinings of `x` and `y` invariant under every `T_j ⊗ S_j`.
#[derive(Clone, Debug)]
pub struct JoiningLp {
    x: FiniteSystem,
    y: FiniteSystem,
    /// Tuples carried by each variable.
    variables: Vec<Vec<(usize, usize)>>,
    lp: StandardLp,
    tableau: FeasibleTableau,
    tuples: usize,
}

impl JoiningLp {
    pub fn new(x: &FiniteSystem, y: &FiniteSystem, formulation: Formulation, bound: usize) -> Result<Self> {
        if x.rank() != y.rank() {
            return Err(Error::InvalidArgument("systems have different ranks".into()));
        }
        let xs = positive_points(x);
        let ys = positive_points(y);
        let tuples = xs.len() * ys.len();
        if tuples > bound {
            return Err(Error::BoundExceeded { tuples, bound });
        }
        let mut x_pos = vec![usize::MAX; x.len()];
        xs.iter().enumerate().for_each(|(i, &p)| x_pos[p] = i);
        let mut y_pos = vec![usize::MAX; y.len()];
        ys.iter().enumerate().for_each(|(i, &q)| y_pos[q] = i);
        let idx = |p: usize, q: usize| x_pos[p] * ys.len() + y_pos[q];
        let tuple_of = |t: usize| (xs[t / ys.len()], ys[t % ys.len()]);
        let image = |t: usize, j: usize| {
            let (p, q) = tuple_of(t);
            idx(x.map(j).apply(p), y.map(j).apply(q))
        };

        let mut variables: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut var_of = vec![usize::MAX; tuples];
        match formulation {
            Formulation::Tuples => {
                for (t, v) in var_of.iter_mut().enumerate() {
                    *v = t;
                    variables.push(vec![tuple_of(t)]);
                }
            }
            Formulation::Orbits => {
                for start in 0..tuples {
                    if var_of[start] != usize::MAX {
                        continue;
                    }
                    let v = variables.len();
                    let mut orbit = vec![start];
                    var_of[start] = v;
                    let mut i = 0;
                    while i < orbit.len() {
                        let t = orbit[i];
                        for j in 0..x.rank() {
                            let s = image(t, j);
                            if var_of[s] == usize::MAX {
                                var_of[s] = v;
                                orbit.push(s);
                            }
                        }
                        i += 1;
                    }
                    orbit.sort_unstable();
                    variables.push(orbit.into_iter().map(tuple_of).collect());
                }
            }
        }

        let nv = variables.len();
        let mut a: Vec<Vec<Rational>> = Vec::new();
        let mut b: Vec<Rational> = Vec::new();
        for (i, &p) in xs.iter().enumerate() {
            let mut row = vec![Rational::zero(); nv];
            for k in 0..ys.len() {
                row[var_of[i * ys.len() + k]] += Rational::one();
            }
            a.push(row);
            b.push(x.weight(p).clone());
        }
        for (k, &q) in ys.iter().enumerate() {
            let mut row = vec![Rational::zero(); nv];
            for i in 0..xs.len() {
                row[var_of[i * ys.len() + k]] += Rational::one();
            }
            a.push(row);
            b.push(y.weight(q).clone());
        }
        if formulation == Formulation::Tuples {
            for j in 0..x.rank() {
                for t in 0..tuples {
                    let s = image(t, j);
                    if s != t {
                        let mut row = vec![Rational::zero(); nv];
                        row[s] += Rational::one();
                        row[t] -= Rational::one();
                        a.push(row);
                        b.push(Rational::zero());
                    }
                }
            }
        }
        let lp = StandardLp::new(a, b)?;
        let tableau = lp
            .phase_one()
            .map_err(|e| Error::Lp(format!("joining polytope reported empty: {e}")))?;
        Ok(JoiningLp {
            x: x.clone(),
            y: y.clone(),
            variables,
            lp,
            tableau,
            tuples,
        })
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_tuples(&self) -> usize {
        self.tuples
    }

    pub fn phase_one_pivots(&self) -> usize {
        self.tableau.phase_one_pivots()
    }

    /// Lifts a tuple-level linear functional to the variables.
    pub fn objective(&self, c: impl Fn(usize, usize) -> Rational) -> Vec<Rational> {
        self.variables
            .iter()
            .map(|ts| ts.iter().map(|&(p, q)| c(p, q)).sum())
            .collect()
    }

    pub fn maximize(&self, c: &[Rational]) -> Result<LpSolution> {
        self.tableau.maximize(c)
    }

    /// Exhaustive vertex search; only for small products.
    pub fn maximize_by_vertices(&self, c: &[Rational]) -> Result<LpSolution> {
        if self.tuples > VERTEX_FALLBACK_TUPLES {
            return Err(Error::BoundExceeded {
                tuples: self.tuples,
                bound: VERTEX_FALLBACK_TUPLES,
            });
        }
        self.lp.maximize_by_vertices(c, 5_000_000)
    }

    /// The coupling with the given variable values, re-verified.
    pub fn coupling(&self, values: &[Rational]) -> Result<Coupling> {
        let mut masses = BTreeMap::new();
        for (ts, v) in self.variables.iter().zip(values) {
            if !v.is_zero() {
                for &(p, q) in ts {
                    masses.insert(vec![p, q], v.clone());
                }
            }
        }
        Coupling::new(
            vec![self.x.clone(), self.y.clone()],
            masses,
            diagonal_words(self.x.rank(), 2),
        )
    }
}

#[derive(Clone, Debug)]
pub struct FalsifierOptions {
    pub bound: usize,
    /// Stop at the first basis pair with a positive optimum.
    pub stop_at_first: bool,
}

impl Default for FalsifierOptions {
    fn default() -> Self {
        FalsifierOptions {
            bound: DEFAULT_LP_BOUND,
            stop_at_first: true,
        }
    }
}

/// A joining that violates relative independence over `X_C`.
#[derive(Clone, Debug)]
pub struct Witness {
    /// Point `a` of `x`; the test function is `1_a − E[1_a | X_C]`.
    pub f_index: usize,
    /// Point `b` of `y`; the test function is `1_b`.
    pub g_index: usize,
    /// Vertex of the joining polytope attaining the optimum.
    pub coupling: Coupling,
    /// Signed value `E_λ[f·g]` at that vertex.
    pub value: Rational,
}

#[derive(Clone, Debug)]
pub struct FalsifierReport {
    pub witness: Option<Witness>,
    /// Largest `|E_λ[f·g]|` over the basis pairs examined.
    pub optimal_value: Rational,
    pub lp_pivots: usize,
    pub pairs_examined: usize,
}

/// Searches the joinings of `x` with the C-system `y` for a failure of relative independence over `X_C`.
pub fn satedness_falsifier(x: &FiniteSystem, y: &FiniteSystem, opts: &FalsifierOptions) -> Result<FalsifierReport> {
    if !is_c_system(y)? {
        return Err(Error::NotCSystem);
    }
    let xc = largest_c_factor(x)?;
    // Built on first use: when every recentred indicator vanishes no LP is needed.
    let mut lp: Option<JoiningLp> = None;
    let mut report = FalsifierReport {
        witness: None,
        optimal_value: Rational::zero(),
        lp_pivots: 0,
        pairs_examined: 0,
    };
    for a in positive_points(x) {
        let f = conditional_expectation(x, &Observable::indicator(x.len(), a), &xc)?;
        let recentred: Vec<Rational> = (0..x.len())
            .map(|p| {
                let e = f.get(p).ok().and_then(|v| v.as_rational().cloned()).unwrap_or_else(Rational::zero);
                let one = if p == a { Rational::one() } else { Rational::zero() };
                one - e
            })
            .collect();
        if recentred.iter().enumerate().all(|(p, v)| v.is_zero() || x.weight(p).is_zero()) {
            continue;
        }
        if lp.is_none() {
            let built = JoiningLp::new(x, y, Formulation::Orbits, opts.bound)?;
            report.lp_pivots += built.phase_one_pivots();
            lp = Some(built);
        }
        let lp = lp.as_ref().expect("joining LP built above");
        for b in positive_points(y) {
            report.pairs_examined += 1;
            let c = lp.objective(|p, q| if q == b { recentred[p].clone() } else { Rational::zero() });
            let neg: Vec<Rational> = c.iter().map(|v| -v).collect();
            for (objective, sign) in [(&c, 1), (&neg, -1)] {
                let sol = match lp.maximize(objective) {
                    Ok(s) => s,
                    Err(_) if lp.num_tuples() <= VERTEX_FALLBACK_TUPLES => lp.maximize_by_vertices(objective)?,
                    Err(e) => return Err(Error::Lp(format!("internal simplex failure: {e}"))),
                };
                report.lp_pivots += sol.pivots;
                if sol.value > report.optimal_value {
                    report.optimal_value = sol.value.clone();
                }
                if sol.value.is_positive() && report.witness.is_none() {
                    let value = if sign == 1 { sol.value.clone() } else { -sol.value.clone() };
                    report.witness = Some(Witness {
                        f_index: a,
                        g_index: b,
                        coupling: lp.coupling(&sol.x)?,
                        value,
                    });
                }
                if report.witness.is_some() && opts.stop_at_first {
                    return Ok(report);
                }
            }
        }
    }
    Ok(report)
}

/// `Z`: the relatively independent joining of `x` and `y` over a common factor, as a system.
#[derive(Clone, Debug)]
pub struct SatedExtension {
    pub system: FiniteSystem,
    /// `(p, q)` pair of each point of `system`.
    pub pairs: Vec<(usize, usize)>,
    pub joining: Coupling,
    pub to_x: FactorMap,
    pub to_y: FactorMap,
}

pub fn sated_extension_step(
    x: &FiniteSystem,
    fmap: &FactorMap,
    y: &FiniteSystem,
    ymap: &FactorMap,
) -> Result<SatedExtension> {
    let joining = rel_indep_over_factor(x, y, fmap, ymap)?;
    let pairs: Vec<(usize, usize)> = joining.masses().keys().map(|t| (t[0], t[1])).collect();
    let index: HashMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let maps = (0..x.rank())
        .map(|j| {
            let images = pairs
                .iter()
                .map(|&(p, q)| {
                    index
                        .get(&(x.map(j).apply(p), y.map(j).apply(q)))
                        .copied()
                        .ok_or_else(|| Error::InvalidArgument("joining support is not invariant".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            Permutation::new(images)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = pairs.iter().map(|&(p, q)| joining.mass(&[p, q])).collect();
    let system = FiniteSystem::new_validated(weights, maps)?;
    let to_x = FactorMap::new(&system, x.clone(), pairs.iter().map(|t| t.0).collect())?;
    let to_y = FactorMap::new(&system, y.clone(), pairs.iter().map(|t| t.1).collect())?;
    Ok(SatedExtension {
        system,
        pairs,
        joining,
        to_x,
        to_y,
    })
}

/// Relatively independent joining of `k` copies of `λ` over `x`, on `x × y^k`.
///
/// `mass(p, q_1, …, q_k) = Π_j λ(p, q_j) / μ(p)^{k−1}`: the `q_j` are
/// conditionally independent given `p`, each with the fiber law of `λ`.
pub fn lambda_infinity_truncation(lam: &Coupling, k: usize, bound: usize) -> Result<Coupling> {
    if lam.arity() != 2 {
        return Err(Error::InvalidArgument("λ must couple exactly two systems".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let x = &lam.components()[0];
    let y = &lam.components()[1];
    let mut fibers: BTreeMap<usize, Vec<(usize, Rational)>> = BTreeMap::new();
    for (t, m) in lam.masses() {
        fibers.entry(t[0]).or_default().push((t[1], m.clone()));
    }
    let size: f64 = fibers.values().map(|f| (f.len() as f64).powi(k as i32)).sum();
    if size > bound as f64 {
        return Err(Error::BoundExceeded {
            tuples: size.min(usize::MAX as f64) as usize,
            bound,
        });
    }
    let mut masses = BTreeMap::new();
    for (&p, fiber) in &fibers {
        let mu = x.weight(p);
        let mut partial: Vec<(Vec<usize>, Rational)> = vec![(vec![p], mu.clone())];
        for _ in 0..k {
            partial = partial
                .into_iter()
                .flat_map(|(t, m)| {
                    fiber.iter().map(move |(q, lq)| {
                        let mut t = t.clone();
                        t.push(*q);
                        (t, &m * lq / mu)
                    })
                })
                .collect();
        }
        masses.extend(partial);
    }
    let mut components = vec![x.clone()];
    components.extend(std::iter::repeat_n(y.clone(), k));
    let words = if x.rank() == y.rank() {
        let holds_for_lam = diagonal_words(x.rank(), 2)
            .into_iter()
            .map(|w| lam.check_equivariance(&w).map(|c| c.holds))
            .collect::<Result<Vec<bool>>>()?;
        if holds_for_lam.iter().all(|&h| h) {
            diagonal_words(x.rank(), k + 1)
        } else {
            Vec::new()
        }
    } else {
        Vec::new()
    };
    Coupling::new(components, masses, words)
}

/// `p ↦ E_λ[g(y) | x = p]`, zero on null points.
pub fn conditional_on_first(lam: &Coupling, g: &Observable) -> Result<Observable> {
    let x = &lam.components()[0];
    let gv = g.exact_values()?;
    g.check_len(lam.components()[1].len())?;
    let mut out = vec![Cyclotomic::zero(); x.len()];
    for (t, m) in lam.masses() {
        out[t[0]] += &gv[t[1]].scale(m);
    }
    for (p, v) in out.iter_mut().enumerate() {
        let w = x.weight(p);
        *v = if w.is_zero() { Cyclotomic::zero() } else { v.scale(&w.recip()) };
    }
    Ok(Observable::exact(out))
}

#[derive(Clone, Debug)]
pub struct TruncationReport {
    pub k: usize,
    /// Mass is unchanged by `(p, q_1, …, q_k) ↦ (p, q_2, …, q_k, q_1)`.
    pub cyclic_shift_invariant: bool,
    /// `E_λ[g(y) | x]`.
    pub conditional: Observable,
    /// `E_λ |g(y) − E_λ[g(y)|x]|²`.
    pub base_variance: Cyclotomic,
    /// `E |(1/k) Σ_j g(q_j) − E_λ[g(y)|x](p)|²` under the truncation.
    pub fiber_variance: Cyclotomic,
    /// `fiber_variance = base_variance / k`, exactly.
    pub variance_matches: bool,
    /// The factor generated by `E_λ[g|x]`.
    pub generated: Partition,
    pub generated_invariant: bool,
}

/// Checks the fiberwise independence properties of a truncation against `g` on `y`.
pub fn truncation_report(lam: &Coupling, truncation: &Coupling, g: &Observable) -> Result<TruncationReport> {
    let k = truncation.arity() - 1;
    let x = &lam.components()[0];
    let cond = conditional_on_first(lam, g)?;
    let cv = cond.exact_values()?;
    let gv = g.exact_values()?;
    let base_variance: Cyclotomic = lam
        .masses()
        .iter()
        .map(|(t, m)| (&gv[t[1]] - &cv[t[0]]).norm_sq().scale(m))
        .sum();
    let inv_k = Rational::new(1.into(), (k as i64).into());
    let mut fiber_variance = Cyclotomic::zero();
    let mut cyclic_shift_invariant = true;
    for (t, m) in truncation.masses() {
        let mean: Cyclotomic = t[1..].iter().map(|&q| gv[q].clone()).sum::<Cyclotomic>().scale(&inv_k);
        fiber_variance += &(&mean - &cv[t[0]]).norm_sq().scale(m);
        let mut shifted = t.clone();
        shifted[1..].rotate_left(1);
        if truncation.mass(&shifted) != *m {
            cyclic_shift_invariant = false;
        }
    }
    let variance_matches = fiber_variance == base_variance.scale(&inv_k);
    let generated = generated_factor(x, std::slice::from_ref(&cond))?;
    let generated_invariant = generated.is_invariant(x);
    Ok(TruncationReport {
        k,
        cyclic_shift_invariant,
        conditional: cond,
        base_variance,
        fiber_variance,
        variance_matches,
        generated,
        generated_invariant,
    })
}
