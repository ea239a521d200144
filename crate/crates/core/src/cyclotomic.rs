//! Exact complex scalars: elements of cyclotomic fields Q(ζ_m).
//!
//! An element of order `m` is stored as its coordinates in the power basis
//! `1, ζ_m, …, ζ_m^{φ(m)-1}`, i.e. a polynomial reduced modulo the m-th
//! cyclotomic polynomial. Gaussian rationals live in order 4, plain rationals
//! in order 1, and roots of unity of any order are representable, which is
//! what character observables such as `x ↦ e^{2πix/5}` need. Binary operations
//! lift both operands to the field of order `lcm(m, m')`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::rc::Rc;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::{format_fraction, to_f64, Rational};

thread_local! {
    static CYCLOTOMIC_POLYS: RefCell<HashMap<u32, Rc<Vec<i64>>>> = RefCell::new(HashMap::new());
}

/// Coefficients (low degree first) of the m-th cyclotomic polynomial.
pub(crate) fn cyclotomic_poly(m: u32) -> Rc<Vec<i64>> {
    assert!(m >= 1, "cyclotomic order must be positive");
    if let Some(p) = CYCLOTOMIC_POLYS.with(|c| c.borrow().get(&m).cloned()) {
        return p;
    }
    // x^m - 1 divided by every Φ_d with d | m, d < m.
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = divide_monic(&num, &cyclotomic_poly(d));
        }
    }
    let poly = Rc::new(num);
    CYCLOTOMIC_POLYS.with(|c| c.borrow_mut().insert(m, poly.clone()));
    poly
}

fn divide_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (dn..num.len()).rev() {
        let c = rem[i];
        if c != 0 {
            quot[i - dn] = c;
            for (j, &dj) in den.iter().enumerate() {
                rem[i - dn + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

/// Euler's totient.
pub fn totient(m: u32) -> usize {
    cyclotomic_poly(m).len() - 1
}

/// Exact element of a cyclotomic field.
#[derive(Clone, Debug)]
pub struct Cyclotomic {
    order: u32,
    coeffs: Vec<Rational>,
}

impl Cyclotomic {
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(value: Rational) -> Self {
        Cyclotomic {
            order: 1,
            coeffs: vec![value],
        }
    }

    /// `re + i·im`.
    pub fn gaussian(re: Rational, im: Rational) -> Self {
        if im.is_zero() {
            return Self::from_rational(re);
        }
        Cyclotomic {
            order: 4,
            coeffs: vec![re, im],
        }
    }

    /// `ζ_order^exponent`, stored in the smallest field containing it.
    pub fn root_of_unity(order: u32, exponent: i64) -> Self {
        assert!(order >= 1, "root of unity order must be positive");
        let k = exponent.rem_euclid(order as i64) as u32;
        let g = k.gcd(&order);
        let (m, e) = (order / g, k / g);
        let mut poly = vec![Rational::zero(); e as usize + 1];
        poly[e as usize] = Rational::one();
        Self::from_poly(m, poly)
    }

    /// `Σ poly[k]·ζ_order^k` for an arbitrary-length coefficient list.
    pub fn from_poly(order: u32, poly: Vec<Rational>) -> Self {
        assert!(order >= 1, "cyclotomic order must be positive");
        let mut out = Cyclotomic {
            order,
            coeffs: reduce(order, poly),
        };
        out.normalize();
        out
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coordinates in the power basis of ζ_order.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The value as a rational, when it is one.
    pub fn as_rational(&self) -> Option<&Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(&self.coeffs[0])
        } else {
            None
        }
    }

    /// `(re, im)` when both parts are rational.
    pub fn as_gaussian(&self) -> Option<(Rational, Rational)> {
        match self.order {
            1 | 2 => Some((self.coeffs[0].clone(), Rational::zero())),
            4 => Some((self.coeffs[0].clone(), self.coeffs[1].clone())),
            _ => {
                let half = Rational::new(1.into(), 2.into());
                let conj = self.conj();
                let re = (self + &conj).scale(&half);
                let minus_i = Cyclotomic::gaussian(Rational::zero(), -Rational::one());
                let im = &(self - &conj) * &minus_i;
                let im = im.scale(&half);
                Some((re.as_rational()?.clone(), im.as_rational()?.clone()))
            }
        }
    }

    /// Lifts into the field of order `target`, which must be a multiple of the current order.
    pub fn lift(&self, target: u32) -> Cyclotomic {
        if target == self.order {
            return self.clone();
        }
        assert!(target.is_multiple_of(self.order), "lift target must be a multiple of the order");
        let stride = (target / self.order) as usize;
        let mut poly = vec![Rational::zero(); (self.coeffs.len() - 1) * stride + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            poly[k * stride] = c.clone();
        }
        Cyclotomic {
            order: target,
            coeffs: reduce(target, poly),
        }
    }

    /// Key that identifies the value once everything has been lifted to `order`.
    pub fn key_at(&self, order: u32) -> Vec<Rational> {
        self.lift(order).coeffs
    }

    pub fn conj(&self) -> Cyclotomic {
        let m = self.order as usize;
        let mut poly = vec![Rational::zero(); m];
        for (k, c) in self.coeffs.iter().enumerate() {
            poly[(m - k) % m] += c;
        }
        Cyclotomic::from_poly(self.order, poly)
    }

    pub fn scale(&self, factor: &Rational) -> Cyclotomic {
        let mut out = Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        };
        out.normalize();
        out
    }

    /// `|z|²`, an element of the real subfield.
    pub fn norm_sq(&self) -> Cyclotomic {
        self * &self.conj()
    }

    pub fn pow(&self, mut exp: u32) -> Cyclotomic {
        let mut base = self.clone();
        let mut acc = Cyclotomic::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            exp >>= 1;
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.order as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / m;
                Complex64::from_polar(to_f64(c), theta)
            })
            .sum()
    }

    fn normalize(&mut self) {
        if self.order != 1 && self.coeffs[1..].iter().all(Zero::is_zero) {
            let c = std::mem::take(&mut self.coeffs[0]);
            self.order = 1;
            self.coeffs = vec![c];
        }
    }

    fn common(a: &Cyclotomic, b: &Cyclotomic) -> (Cyclotomic, Cyclotomic, u32) {
        let m = a.order.lcm(&b.order);
        (a.lift(m), b.lift(m), m)
    }
}

/// Folds exponents modulo `order` and reduces modulo Φ_order.
fn reduce(order: u32, poly: Vec<Rational>) -> Vec<Rational> {
    let m = order as usize;
    let phi = cyclotomic_poly(order);
    let deg = phi.len() - 1;
    let mut folded = vec![Rational::zero(); m.max(deg + 1)];
    for (k, c) in poly.into_iter().enumerate() {
        if !c.is_zero() {
            folded[k % m] += c;
        }
    }
    for i in (deg..folded.len()).rev() {
        if folded[i].is_zero() {
            continue;
        }
        let c = std::mem::take(&mut folded[i]);
        for (j, &pj) in phi.iter().enumerate().take(deg) {
            if pj != 0 {
                folded[i - deg + j] -= &c * Rational::from_integer(pj.into());
            }
        }
    }
    folded.truncate(deg);
    folded
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let (a, b, _) = Cyclotomic::common(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for Cyclotomic {}

impl From<Rational> for Cyclotomic {
    fn from(value: Rational) -> Self {
        Cyclotomic::from_rational(value)
    }
}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        if self.order == 1 && rhs.order == 1 {
            return Cyclotomic::from_rational(&self.coeffs[0] + &rhs.coeffs[0]);
        }
        let (a, b, m) = Cyclotomic::common(self, rhs);
        let mut out = Cyclotomic {
            order: m,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        };
        out.normalize();
        out
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self + &(-rhs)
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        if self.order == 1 {
            return rhs.scale(&self.coeffs[0]);
        }
        if rhs.order == 1 {
            return self.scale(&rhs.coeffs[0]);
        }
        let (a, b, m) = Cyclotomic::common(self, rhs);
        let mut poly = vec![Rational::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    poly[i + j] += x * y;
                }
            }
        }
        Cyclotomic::from_poly(m, poly)
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: Cyclotomic) -> Cyclotomic {
        &self + &rhs
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        &self - &rhs
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        &self * &rhs
    }
}

impl AddAssign<&Cyclotomic> for Cyclotomic {
    fn add_assign(&mut self, rhs: &Cyclotomic) {
        *self = &*self + rhs;
    }
}

impl std::iter::Sum for Cyclotomic {
    fn sum<I: Iterator<Item = Cyclotomic>>(iter: I) -> Self {
        iter.fold(Cyclotomic::zero(), |acc, x| &acc + &x)
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.as_rational() {
            return write!(f, "{}", format_fraction(q));
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", format_fraction(c))?,
                _ => write!(f, "({})·ζ{}^{}", format_fraction(c), self.order, k)?,
            }
        }
        Ok(())
    }
}
