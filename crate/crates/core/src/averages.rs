//! Multiple ergodic averages on finite systems, their exact limits, the
//! characteristic-factor identity and the quantitative Van der Corput bound.

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use crate::coupling::{diagonal_words, Coupling};
use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::joinings::{big_system_capped, satedness_certificate, PeriodRoute, DEFAULT_PERIOD_CAP};
use crate::observable::Observable;
use crate::partition::{conditional_expectation, factor_quotient, isotropy_partition, largest_c_factor};
use crate::rational::Rational;
use crate::system::FiniteSystem;

fn check_inputs(x: &FiniteSystem, fs: &[Observable]) -> Result<()> {
    if fs.len() != x.rank() {
        return Err(Error::WrongObservableCount {
            expected: x.rank(),
            got: fs.len(),
        });
    }
    for f in fs {
        f.check_len(x.len())?;
        f.exact_values()?;
    }
    Ok(())
}

fn frac(num: u64, den: u64) -> Rational {
    Rational::new(num.into(), den.into())
}

/// `u_n = Π_i f_i ∘ T_i^n` for `n = 1..=len`.
pub fn multiple_sequence(x: &FiniteSystem, fs: &[Observable], len: usize) -> Result<Vec<Observable>> {
    check_inputs(x, fs)?;
    let values: Vec<&[Cyclotomic]> = fs.iter().map(|f| f.exact_values()).collect::<Result<_>>()?;
    let mut pos: Vec<Vec<usize>> = vec![(0..x.len()).collect(); fs.len()];
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        for (i, row) in pos.iter_mut().enumerate() {
            for p in row.iter_mut() {
                *p = x.map(i).apply(*p);
            }
        }
        out.push(Observable::from_fn(x.len(), |p| {
            values.iter().zip(&pos).fold(Cyclotomic::one(), |acc, (v, row)| &acc * &v[row[p]])
        }));
    }
    Ok(out)
}

/// `A_N = (1/N) Σ_{n=1}^N Π_i f_i ∘ T_i^n`.
pub fn multiple_average(x: &FiniteSystem, fs: &[Observable], n: u64) -> Result<Observable> {
    check_inputs(x, fs)?;
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    Ok(Observable::exact(partial_sums(x, fs, &vec![n; x.len()])?).scale(&frac(1, n)))
}

/// `Σ_{n=1}^{len_p} Π_i f_i(T_i^n p)` with a separate length for each point.
fn partial_sums(x: &FiniteSystem, fs: &[Observable], lens: &[u64]) -> Result<Vec<Cyclotomic>> {
    let values: Vec<&[Cyclotomic]> = fs.iter().map(|f| f.exact_values()).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(x.len());
    for (p, &len) in lens.iter().enumerate().take(x.len()) {
        let mut pos = vec![p; fs.len()];
        let mut sum = Cyclotomic::zero();
        for _ in 0..len {
            for (i, q) in pos.iter_mut().enumerate() {
                *q = x.map(i).apply(*q);
            }
            sum += &values.iter().zip(&pos).fold(Cyclotomic::one(), |acc, (v, &q)| &acc * &v[q]);
        }
        out.push(sum);
    }
    Ok(out)
}

/// `Ā = lim A_N`, with the default period cap.
pub fn exact_limit_average(x: &FiniteSystem, fs: &[Observable]) -> Result<Observable> {
    exact_limit_average_capped(x, fs, DEFAULT_PERIOD_CAP).map(|(a, _)| a)
}

/// `Ā = (1/P) Σ_{n=1}^P Π_i f_i ∘ T_i^n`; each point may use its own period instead.
pub fn exact_limit_average_capped(
    x: &FiniteSystem,
    fs: &[Observable],
    cap: u64,
) -> Result<(Observable, PeriodRoute)> {
    check_inputs(x, fs)?;
    if let Some(p) = x.period().filter(|&p| p <= cap) {
        return Ok((multiple_average(x, fs, p)?, PeriodRoute::Global(p)));
    }
    let periods = x.point_periods();
    let worst = periods.iter().copied().max().unwrap_or(1);
    if worst > cap {
        return Err(Error::PeriodCapExceeded {
            period: x.period().map_or_else(|| "overflow".to_string(), |p| p.to_string()),
            cap,
        });
    }
    let sums = partial_sums(x, fs, &periods)?;
    let values = sums
        .iter()
        .zip(&periods)
        .map(|(s, &len)| s.scale(&frac(1, len)))
        .collect();
    Ok((Observable::exact(values), PeriodRoute::PerPoint { max_period: worst }))
}

/// Exact report for one averaging length.
#[derive(Clone, Debug)]
pub struct AverageReport {
    pub n: u64,
    pub period: Option<u64>,
    pub average: Observable,
    pub limit: Observable,
    /// `‖A_N − Ā‖₂²`.
    pub discrepancy_sq: Cyclotomic,
}

pub fn average_report(x: &FiniteSystem, fs: &[Observable], n: u64, cap: u64) -> Result<AverageReport> {
    let average = multiple_average(x, fs, n)?;
    let (limit, route) = exact_limit_average_capped(x, fs, cap)?;
    let discrepancy_sq = average.sub(&limit)?.l2_norm_sq(x)?;
    Ok(AverageReport {
        n,
        period: match route {
            PeriodRoute::Global(p) => Some(p),
            PeriodRoute::PerPoint { .. } => None,
        },
        average,
        limit,
        discrepancy_sq,
    })
}

/// Result of replacing `f_1` by `E[f_1 | X_C]` in the limit.
#[derive(Clone, Debug)]
pub struct ProjectionCheck {
    pub holds: bool,
    pub limit: Observable,
    pub projected_limit: Observable,
    /// `‖Ā(f_1, …) − Ā(E[f_1|X_C], …)‖₂²`.
    pub discrepancy_sq: Cyclotomic,
}

pub fn limit_equals_projected(x: &FiniteSystem, fs: &[Observable]) -> Result<ProjectionCheck> {
    check_inputs(x, fs)?;
    let limit = exact_limit_average(x, fs)?;
    let mut projected = fs.to_vec();
    projected[0] = conditional_expectation(x, &fs[0], &largest_c_factor(x)?)?;
    let projected_limit = exact_limit_average(x, &projected)?;
    let discrepancy_sq = limit.sub(&projected_limit)?.l2_norm_sq(x)?;
    Ok(ProjectionCheck {
        holds: discrepancy_sq.is_zero(),
        limit,
        projected_limit,
        discrepancy_sq,
    })
}

/// The three Van der Corput quantities, in floating point.
#[derive(Clone, Debug, PartialEq)]
pub struct VdcReport {
    /// `‖(1/N) Σ_{n≤N} u_n‖`.
    pub lhs: f64,
    /// `(1/H) Σ_{h≤H} (1/N) Σ_{n≤N} ⟨u_n, u_{n+h}⟩`.
    pub corr: Complex64,
    /// `(2/N) Σ_{n≤N} ‖(1/H) Σ_{h≤H} u_{n+h}‖² + 8B²H²/N²`.
    pub rhs_bound: f64,
    /// `max ‖u_n‖` over the supplied sequence.
    pub b: f64,
    pub holds: bool,
}

/// Weighted inner product `Σ_i w_i a_i conj(b_i)`.
fn inner(a: &[Complex64], b: &[Complex64], w: Option<&[f64]>) -> Complex64 {
    match w {
        Some(w) => a.iter().zip(b).zip(w).map(|((x, y), wi)| x * y.conj() * wi).sum(),
        None => a.iter().zip(b).map(|(x, y)| x * y.conj()).sum(),
    }
}

/// Van der Corput quantities for `u_1, …` given as `us[0], …`.
pub fn vdc_quantities(us: &[Vec<Complex64>], weights: Option<&[f64]>, n: usize, h: usize) -> Result<VdcReport> {
    if n == 0 || h == 0 {
        return Err(Error::InvalidArgument("N and H must be positive".into()));
    }
    if us.len() < n + h {
        return Err(Error::LengthMismatch {
            expected: n + h,
            got: us.len(),
        });
    }
    let dim = us[0].len();
    if us.iter().any(|u| u.len() != dim) || weights.is_some_and(|w| w.len() != dim) {
        return Err(Error::InvalidArgument("vectors of different dimensions".into()));
    }
    let norm_sq = |v: &[Complex64]| inner(v, v, weights).re;
    let b = us.iter().map(|u| norm_sq(u).sqrt()).fold(0.0, f64::max);
    let (nf, hf) = (n as f64, h as f64);
    let mean: Vec<Complex64> = (0..dim).map(|i| us[..n].iter().map(|u| u[i]).sum::<Complex64>() / nf).collect();
    let lhs = norm_sq(&mean).sqrt();
    let mut corr = Complex64::zero();
    for k in 1..=h {
        for m in 0..n {
            corr += inner(&us[m], &us[m + k], weights);
        }
    }
    corr /= hf * nf;
    let mut windows = 0.0;
    for m in 0..n {
        let v: Vec<Complex64> = (0..dim)
            .map(|i| (1..=h).map(|k| us[m + k][i]).sum::<Complex64>() / hf)
            .collect();
        windows += norm_sq(&v);
    }
    let rhs_bound = 2.0 * windows / nf + 8.0 * b * b * hf * hf / (nf * nf);
    // Relative slack for rounding in the float evaluation only.
    let holds = lhs * lhs <= rhs_bound * (1.0 + 1e-12) + 1e-300;
    Ok(VdcReport {
        lhs,
        corr,
        rhs_bound,
        b,
        holds,
    })
}

/// Van der Corput quantities for exact observables in `L²(μ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VdcExact {
    pub lhs_sq: Cyclotomic,
    pub corr: Cyclotomic,
    pub rhs_bound: Cyclotomic,
    /// `max ‖u_n‖₂²`.
    pub b_sq: Cyclotomic,
    pub holds: bool,
}

pub fn vdc_exact(x: &FiniteSystem, us: &[Observable], n: usize, h: usize) -> Result<VdcExact> {
    if n == 0 || h == 0 {
        return Err(Error::InvalidArgument("N and H must be positive".into()));
    }
    if us.len() < n + h {
        return Err(Error::LengthMismatch {
            expected: n + h,
            got: us.len(),
        });
    }
    let inv_n = frac(1, n as u64);
    let inv_h = frac(1, h as u64);
    let mut b_sq = Cyclotomic::zero();
    for u in us {
        let s = u.l2_norm_sq(x)?;
        if s.to_complex().re > b_sq.to_complex().re {
            b_sq = s;
        }
    }
    let mean = us[..n]
        .iter()
        .skip(1)
        .try_fold(us[0].clone(), |acc, u| acc.add(u))?
        .scale(&inv_n);
    let lhs_sq = mean.l2_norm_sq(x)?;
    // Window sums S_m = Σ_{k=1}^H u_{m+k}, slid in O(1) observable updates per step.
    let mut window = us[2..=h].iter().try_fold(us[1].clone(), |acc, u| acc.add(u))?;
    let mut corr = Cyclotomic::zero();
    let mut windows = Cyclotomic::zero();
    for m in 0..n {
        if m > 0 {
            window = window.sub(&us[m])?.add(&us[m + h])?;
        }
        corr += &us[m].inner(&window, x)?;
        windows += &window.l2_norm_sq(x)?;
    }
    let corr = corr.scale(&(&inv_n * &inv_h));
    let windows = windows.scale(&(&inv_h * &inv_h));
    let shift = Rational::new((8 * h * h).into(), (n * n).into());
    let rhs_bound = &windows.scale(&(inv_n * Rational::from_integer(2.into()))) + &b_sq.scale(&shift);
    let gap = &rhs_bound - &lhs_sq;
    let holds = match gap.as_rational() {
        Some(g) => !g.is_negative(),
        None => gap.to_complex().re >= -1e-12 * rhs_bound.to_complex().re.abs(),
    };
    Ok(VdcExact {
        lhs_sq,
        corr,
        rhs_bound,
        b_sq,
        holds,
    })
}

/// Evaluation of `∫ F · E_λ̃[F̄ | 𝓘^{T̃_1}] dλ̃` on the big system, `F = f_1 ⊗ … ⊗ f_d`.
#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub integral: Cyclotomic,
    pub vanishes: bool,
    /// `E[f_1 | X_C] = 0`.
    pub projection_zero: bool,
    /// `x` is relatively independent over `X_C` from the C-factor of the big system, for `f_1`.
    pub satedness_residual_zero: bool,
    /// The implication `projection_zero ∧ satedness_residual_zero ⇒ vanishes` holds.
    pub chain_consistent: bool,
}

pub fn vanishing_check(x: &FiniteSystem, fs: &[Observable]) -> Result<VanishingReport> {
    vanishing_check_capped(x, fs, DEFAULT_PERIOD_CAP)
}

pub fn vanishing_check_capped(x: &FiniteSystem, fs: &[Observable], cap: u64) -> Result<VanishingReport> {
    check_inputs(x, fs)?;
    let big = big_system_capped(x, cap)?;
    let sys = &big.system;
    let values: Vec<&[Cyclotomic]> = fs.iter().map(|f| f.exact_values()).collect::<Result<_>>()?;
    let tensor = Observable::from_fn(sys.len(), |p| {
        big.tuples[p]
            .iter()
            .zip(&values)
            .fold(Cyclotomic::one(), |acc, (&q, v)| &acc * &v[q])
    });
    let iso = isotropy_partition(sys, &sys.unit_word(0))?;
    let projected = conditional_expectation(sys, &tensor.conj(), &iso)?;
    let integral = tensor.mul(&projected)?.integral(sys)?;

    let projection_zero = conditional_expectation(x, &fs[0], &largest_c_factor(x)?)?.is_null(x)?;
    let (c_quotient, c_map) = factor_quotient(sys, &largest_c_factor(sys)?)?;
    let mut masses = std::collections::BTreeMap::new();
    for (p, t) in big.tuples.iter().enumerate() {
        *masses
            .entry(vec![t[0], c_map.apply(p)])
            .or_insert_with(Rational::zero) += sys.weight(p);
    }
    let joining = Coupling::new(
        vec![x.clone(), c_quotient.clone()],
        masses,
        diagonal_words(x.rank(), 2),
    )?;
    let satedness_residual_zero = satedness_certificate(x, &c_quotient, &joining, &fs[0])?.vanishes;
    let vanishes = integral.is_zero();
    Ok(VanishingReport {
        vanishes,
        integral,
        projection_zero,
        satedness_residual_zero,
        chain_consistent: !(projection_zero && satedness_residual_zero) || vanishes,
    })
}
