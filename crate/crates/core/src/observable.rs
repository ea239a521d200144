//! Complex-valued functions on the points of a finite system.

use num_complex::Complex64;

use crate::cyclotomic::Cyclotomic;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::rational::{to_f64, Rational};
use crate::system::FiniteSystem;

#[derive(Clone, Debug, PartialEq)]
pub enum Values {
    Exact(Vec<Cyclotomic>),
    Float(Vec<Complex64>),
}

/// Function on `{0..n-1}`, either exact (cyclotomic values) or double precision.
///
/// Exact arithmetic never falls back to floats; mixing modes is an error.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    values: Values,
}

impl Observable {
    pub fn exact(values: Vec<Cyclotomic>) -> Self {
        Observable {
            values: Values::Exact(values),
        }
    }

    pub fn float(values: Vec<Complex64>) -> Self {
        Observable {
            values: Values::Float(values),
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> Cyclotomic) -> Self {
        Self::exact((0..n).map(f).collect())
    }

    pub fn from_rationals(values: Vec<Rational>) -> Self {
        Self::exact(values.into_iter().map(Cyclotomic::from_rational).collect())
    }

    pub fn constant(n: usize, c: Cyclotomic) -> Self {
        Self::exact(vec![c; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, Cyclotomic::zero())
    }

    pub fn indicator(n: usize, point: usize) -> Self {
        Self::from_fn(n, |p| if p == point { Cyclotomic::one() } else { Cyclotomic::zero() })
    }

    /// `p ↦ ζ_order^{powers[p]}`.
    pub fn roots_of_unity(order: u32, powers: &[i64]) -> Self {
        Self::exact(powers.iter().map(|&k| Cyclotomic::root_of_unity(order, k)).collect())
    }

    pub fn len(&self) -> usize {
        match &self.values {
            Values::Exact(v) => v.len(),
            Values::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.values, Values::Exact(_))
    }

    pub fn values(&self) -> &Values {
        &self.values
    }

    pub fn exact_values(&self) -> Result<&[Cyclotomic]> {
        match &self.values {
            Values::Exact(v) => Ok(v),
            Values::Float(_) => Err(Error::FloatObservable),
        }
    }

    pub fn get(&self, p: usize) -> Result<&Cyclotomic> {
        Ok(&self.exact_values()?[p])
    }

    pub fn to_float(&self) -> Vec<Complex64> {
        match &self.values {
            Values::Exact(v) => v.iter().map(Cyclotomic::to_complex).collect(),
            Values::Float(v) => v.clone(),
        }
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() == n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: n,
                got: self.len(),
            })
        }
    }

    /// `f ∘ T`.
    pub fn compose(&self, t: &Permutation) -> Observable {
        match &self.values {
            Values::Exact(v) => Self::exact((0..v.len()).map(|p| v[t.apply(p)].clone()).collect()),
            Values::Float(v) => Self::float((0..v.len()).map(|p| v[t.apply(p)]).collect()),
        }
    }

    fn zip_with(
        &self,
        other: &Observable,
        exact: impl Fn(&Cyclotomic, &Cyclotomic) -> Cyclotomic,
        float: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Observable> {
        other.check_len(self.len())?;
        match (&self.values, &other.values) {
            (Values::Exact(a), Values::Exact(b)) => {
                Ok(Self::exact(a.iter().zip(b).map(|(x, y)| exact(x, y)).collect()))
            }
            (Values::Float(a), Values::Float(b)) => {
                Ok(Self::float(a.iter().zip(b).map(|(&x, &y)| float(x, y)).collect()))
            }
            _ => Err(Error::FloatObservable),
        }
    }

    pub fn mul(&self, other: &Observable) -> Result<Observable> {
        self.zip_with(other, |a, b| a * b, |a, b| a * b)
    }

    pub fn add(&self, other: &Observable) -> Result<Observable> {
        self.zip_with(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Observable) -> Result<Observable> {
        self.zip_with(other, |a, b| a - b, |a, b| a - b)
    }

    pub fn conj(&self) -> Observable {
        match &self.values {
            Values::Exact(v) => Self::exact(v.iter().map(Cyclotomic::conj).collect()),
            Values::Float(v) => Self::float(v.iter().map(Complex64::conj).collect()),
        }
    }

    pub fn scale(&self, c: &Rational) -> Observable {
        match &self.values {
            Values::Exact(v) => Self::exact(v.iter().map(|x| x.scale(c)).collect()),
            Values::Float(v) => Self::float(v.iter().map(|x| x * to_f64(c)).collect()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.values {
            Values::Exact(v) => v.iter().all(Cyclotomic::is_zero),
            Values::Float(v) => v.iter().all(|x| *x == Complex64::new(0.0, 0.0)),
        }
    }

    /// True when the observable vanishes on every positive-weight point.
    pub fn is_null(&self, sys: &FiniteSystem) -> Result<bool> {
        let v = self.exact_values()?;
        Ok(v.iter()
            .zip(sys.weights())
            .all(|(x, w)| num_traits::Zero::is_zero(w) || x.is_zero()))
    }

    /// `∫ f dμ`.
    pub fn integral(&self, sys: &FiniteSystem) -> Result<Cyclotomic> {
        self.check_len(sys.len())?;
        let v = self.exact_values()?;
        Ok(v.iter()
            .zip(sys.weights())
            .filter(|(_, w)| !num_traits::Zero::is_zero(*w))
            .map(|(x, w)| x.scale(w))
            .sum())
    }

    /// `⟨f, g⟩ = ∫ f·ḡ dμ`.
    pub fn inner(&self, other: &Observable, sys: &FiniteSystem) -> Result<Cyclotomic> {
        self.mul(&other.conj())?.integral(sys)
    }

    /// `‖f‖₂²`, exact.
    pub fn l2_norm_sq(&self, sys: &FiniteSystem) -> Result<Cyclotomic> {
        self.inner(self, sys)
    }

    /// `max_p |f(p)|²` over positive-weight points, when every such value is rational.
    pub fn sup_norm_sq(&self, sys: &FiniteSystem) -> Result<Option<Rational>> {
        let v = self.exact_values()?;
        let mut best = Rational::from_integer(0.into());
        for (x, w) in v.iter().zip(sys.weights()) {
            if num_traits::Zero::is_zero(w) {
                continue;
            }
            match x.norm_sq().as_rational() {
                Some(q) if *q > best => best = q.clone(),
                Some(_) => {}
                None => return Ok(None),
            }
        }
        Ok(Some(best))
    }

    /// `max_p |f(p)|` over positive-weight points, in floating point.
    pub fn sup_norm_f64(&self, sys: &FiniteSystem) -> f64 {
        self.to_float()
            .iter()
            .zip(sys.weights())
            .filter(|(_, w)| !num_traits::Zero::is_zero(*w))
            .map(|(x, _)| x.norm())
            .fold(0.0, f64::max)
    }

    /// Largest order among exact values (1 for float observables).
    pub fn field_order(&self) -> u32 {
        match &self.values {
            Values::Exact(v) => v
                .iter()
                .map(Cyclotomic::order)
                .fold(1u32, |a, b| num_integer::Integer::lcm(&a, &b)),
            Values::Float(_) => 1,
        }
    }
}

/// Pointwise product of a list of exact observables.
pub fn product(fs: &[Observable]) -> Result<Observable> {
    let first = fs
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty product".into()))?;
    fs[1..].iter().try_fold(first.clone(), |acc, f| acc.mul(f))
}
