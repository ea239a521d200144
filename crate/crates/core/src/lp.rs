//! Exact linear programming over rationals.
//!
//! Problems are in standard form `A x = b, x ≥ 0`. The simplex uses Bland's
//! rule (smallest eligible index for both the entering and the leaving
//! variable), so it terminates without cycling. Phase one is run once and the
//! resulting feasible basis is reused for any number of objectives.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct StandardLp {
    a: Vec<Vec<Rational>>,
    b: Vec<Rational>,
    vars: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub x: Vec<Rational>,
    pub pivots: usize,
}

/// Tableau in canonical form with respect to a feasible basis.
#[derive(Clone, Debug)]
pub struct FeasibleTableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    vars: usize,
    phase_one_pivots: usize,
}

impl StandardLp {
    pub fn new(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        let vars = a.first().map_or(0, Vec::len);
        if a.iter().any(|r| r.len() != vars) {
            return Err(Error::InvalidArgument("ragged constraint matrix".into()));
        }
        Ok(StandardLp { a, b, vars })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn constraints(&self) -> usize {
        self.a.len()
    }

    /// Finds a feasible basis, dropping redundant rows. Errors when infeasible.
    pub fn phase_one(&self) -> Result<FeasibleTableau> {
        let m = self.a.len();
        let n = self.vars;
        let width = n + m;
        let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, (row, b)) in self.a.iter().zip(&self.b).enumerate() {
            let flip = b.is_negative();
            let mut r: Vec<Rational> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
            r.resize(width, Rational::zero());
            r[n + i] = Rational::from_integer(1.into());
            rows.push(r);
            rhs.push(if flip { -b } else { b.clone() });
        }
        let basis: Vec<usize> = (n..n + m).collect();
        // maximize −Σ artificials
        let cost: Vec<Rational> = (0..width)
            .map(|j| {
                if j >= n {
                    Rational::from_integer((-1).into())
                } else {
                    Rational::zero()
                }
            })
            .collect();
        let mut t = Tableau {
            rows,
            rhs,
            basis,
            width,
        };
        let pivots = t.optimize(&cost, width)?;
        let residual: Rational = t
            .basis
            .iter()
            .zip(&t.rhs)
            .filter(|(&j, _)| j >= n)
            .map(|(_, v)| v.clone())
            .sum();
        if !residual.is_zero() {
            return Err(Error::Lp("infeasible constraint system".into()));
        }
        // Drive artificial variables out of the basis; rows that cannot be are redundant.
        let mut i = 0;
        while i < t.rows.len() {
            if t.basis[i] >= n {
                match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.rhs.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for r in &mut t.rows {
            r.truncate(n);
        }
        Ok(FeasibleTableau {
            rows: t.rows,
            rhs: t.rhs,
            basis: t.basis,
            vars: n,
            phase_one_pivots: pivots,
        })
    }

    /// Maximizes `c·x` by enumerating every basis. Exponential; meant for small problems.
    pub fn maximize_by_vertices(&self, c: &[Rational], max_bases: usize) -> Result<LpSolution> {
        let (rows, rhs) = independent_rows(&self.a, &self.b);
        let r = rows.len();
        let n = self.vars;
        if binomial(n, r) > max_bases as f64 {
            return Err(Error::BoundExceeded {
                tuples: binomial(n, r).min(usize::MAX as f64) as usize,
                bound: max_bases,
            });
        }
        let mut best: Option<LpSolution> = None;
        let mut cols: Vec<usize> = (0..r).collect();
        loop {
            if let Some(x) = solve_basis(&rows, &rhs, &cols, n) {
                if x.iter().all(|v| !v.is_negative()) {
                    let value: Rational = x.iter().zip(c).map(|(a, b)| a * b).sum();
                    if best.as_ref().is_none_or(|s| value > s.value) {
                        best = Some(LpSolution { value, x, pivots: 0 });
                    }
                }
            }
            if !next_combination(&mut cols, n) {
                break;
            }
        }
        best.ok_or_else(|| Error::Lp("no feasible vertex".into()))
    }
}

impl FeasibleTableau {
    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn phase_one_pivots(&self) -> usize {
        self.phase_one_pivots
    }

    /// The current basic feasible solution.
    pub fn point(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.vars];
        for (&j, v) in self.basis.iter().zip(&self.rhs) {
            x[j] = v.clone();
        }
        x
    }

    /// Maximizes `c·x` from this basis. The problem is assumed bounded.
    pub fn maximize(&self, c: &[Rational]) -> Result<LpSolution> {
        if c.len() != self.vars {
            return Err(Error::LengthMismatch {
                expected: self.vars,
                got: c.len(),
            });
        }
        let mut t = Tableau {
            rows: self.rows.clone(),
            rhs: self.rhs.clone(),
            basis: self.basis.clone(),
            width: self.vars,
        };
        let pivots = t.optimize(c, self.vars)?;
        let mut x = vec![Rational::zero(); self.vars];
        for (&j, v) in t.basis.iter().zip(&t.rhs) {
            x[j] = v.clone();
        }
        let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
        Ok(LpSolution { value, x, pivots })
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, col: usize) {
        let inv = self.rows[r][col].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        self.rhs[r] *= &inv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for (v, p) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        self.basis[r] = col;
    }

    /// Maximizes over columns `0..active` with Bland's rule; returns the pivot count.
    fn optimize(&mut self, cost: &[Rational], active: usize) -> Result<usize> {
        let mut pivots = 0;
        loop {
            let entering = (0..active.min(self.width)).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (row, &bj) in self.rows.iter().zip(&self.basis) {
                    if !row[j].is_zero() && !cost[bj].is_zero() {
                        reduced -= &cost[bj] * &row[j];
                    }
                }
                reduced.is_positive()
            });
            let Some(col) = entering else {
                return Ok(pivots);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col].is_positive() {
                    let ratio = &self.rhs[i] / &row[col];
                    let better = match &leave {
                        None => true,
                        Some((li, lr)) => ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Err(Error::Lp("unbounded objective".into()));
            };
            self.pivot(r, col);
            pivots += 1;
        }
    }
}

/// Keeps a maximal linearly independent subset of rows (and their right-hand sides).
fn independent_rows(a: &[Vec<Rational>], b: &[Rational]) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let mut reduced: Vec<(Vec<Rational>, usize)> = Vec::new();
    let mut keep = Vec::new();
    for (i, row) in a.iter().enumerate() {
        let mut r = row.clone();
        for (basis_row, pc) in &reduced {
            if !r[*pc].is_zero() {
                let f = r[*pc].clone();
                for (v, w) in r.iter_mut().zip(basis_row) {
                    *v -= &f * w;
                }
            }
        }
        if let Some(pc) = r.iter().position(|v| !v.is_zero()) {
            let inv = r[pc].recip();
            for v in r.iter_mut() {
                *v *= &inv;
            }
            for (other, _) in reduced.iter_mut() {
                if !other[pc].is_zero() {
                    let f = other[pc].clone();
                    for (v, w) in other.iter_mut().zip(&r) {
                        *v -= &f * w;
                    }
                }
            }
            reduced.push((r, pc));
            keep.push(i);
        }
    }
    (
        keep.iter().map(|&i| a[i].clone()).collect(),
        keep.iter().map(|&i| b[i].clone()).collect(),
    )
}

/// Solves `A_B x_B = b` for the given columns; `None` when singular.
fn solve_basis(a: &[Vec<Rational>], b: &[Rational], cols: &[usize], n: usize) -> Option<Vec<Rational>> {
    let r = cols.len();
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut v: Vec<Rational> = cols.iter().map(|&c| row[c].clone()).collect();
            v.push(bi.clone());
            v
        })
        .collect();
    for k in 0..r {
        let p = (k..r).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, p);
        let inv = m[k][k].recip();
        for v in m[k].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = m[k].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != k && !row[k].is_zero() {
                let f = row[k].clone();
                for (v, w) in row.iter_mut().zip(&pivot_row) {
                    *v -= &f * w;
                }
            }
        }
    }
    let mut x = vec![Rational::zero(); n];
    for (k, &c) in cols.iter().enumerate() {
        x[c] = m[k][r].clone();
    }
    Some(x)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
