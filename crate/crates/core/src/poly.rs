//! Exponent vectors, sparse polynomials with rational coefficients, and
//! weight vectors.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith::{lcm_all, rational_to_f64};

/// Exponents of a monomial, one per leaf.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn zeros(n: usize) -> Self {
        ExponentVector(vec![0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    /// True when some coordinate in `set` has a positive exponent.
    pub fn meets(&self, set: &BTreeSet<usize>) -> bool {
        set.iter().any(|&i| self.0[i] > 0)
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Integer pairing with an integer vector.
    pub fn pair_int(&self, w: &[BigInt]) -> BigInt {
        self.0
            .iter()
            .zip(w)
            .filter(|(&e, _)| e != 0)
            .map(|(&e, x)| x * BigInt::from(e))
            .sum()
    }

    /// Graded lexicographic comparison: total degree first, then the
    /// exponent of the earliest leaf.
    pub fn cmp_grlex(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "z{}", i + 1)?;
            } else {
                write!(f, "z{}^{}", i + 1, e)?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("weight vectors must be non-negative and not all zero")]
    BadWeight,
    #[error("cannot parse rational {0:?}")]
    ParseRational(String),
    #[error("exponent vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
}

/// Parses `"p/q"` or an integer string.
pub fn parse_rational(s: &str) -> Result<BigRational, PolyError> {
    let err = || PolyError::ParseRational(s.to_string());
    let t = s.trim();
    match t.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| err())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(t).map_err(|_| err())?)),
    }
}

/// Formats a rational as `"p/q"`, or as an integer when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// A non-negative rational weight vector, not identically zero.
///
/// Alongside the rational entries it keeps an integer multiple (entries times
/// the lcm of denominators) so that comparisons of pairings stay in `BigInt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightVector {
    entries: Vec<BigRational>,
    scaled: Vec<BigInt>,
    scale: BigInt,
}

impl WeightVector {
    pub fn new(entries: Vec<BigRational>) -> Result<Self, PolyError> {
        if entries.iter().any(|x| x.is_negative()) || entries.iter().all(|x| x.is_zero()) {
            return Err(PolyError::BadWeight);
        }
        let scale = lcm_all(entries.iter().map(|x| x.denom()));
        let scaled = entries.iter().map(|x| x.numer() * (&scale / x.denom())).collect();
        Ok(WeightVector { entries, scaled, scale })
    }

    pub fn from_ints(v: &[BigInt]) -> Result<Self, PolyError> {
        Self::new(v.iter().map(|x| BigRational::from_integer(x.clone())).collect())
    }

    pub fn from_i64(v: &[i64]) -> Result<Self, PolyError> {
        Self::new(v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Integer vector proportional to `self`.
    pub fn scaled(&self) -> &[BigInt] {
        &self.scaled
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.entries.iter().all(|x| x.is_positive())
    }

    /// The integer pairing `scale · (w · m)`; order-equivalent to the true one.
    pub fn pair_scaled(&self, m: &ExponentVector) -> BigInt {
        m.pair_int(&self.scaled)
    }

    /// The exact pairing `w · m`.
    pub fn pair(&self, m: &ExponentVector) -> BigRational {
        BigRational::new(self.pair_scaled(m), self.scale.clone())
    }
}

impl FromStr for WeightVector {
    type Err = PolyError;

    /// Comma-separated rationals, e.g. `1,2/3,5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let entries = s.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>()?;
        WeightVector::new(entries)
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(format_rational).collect();
        f.write_str(&parts.join(","))
    }
}

/// A sparse polynomial in `n` variables with nonzero rational coefficients,
/// terms kept in decreasing graded-lex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    n: usize,
    terms: Vec<(BigRational, ExponentVector)>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: Vec::new() }
    }

    /// Builds a polynomial, merging duplicate exponents and dropping zeros.
    pub fn new(n: usize, terms: impl IntoIterator<Item = (BigRational, ExponentVector)>) -> Self {
        let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (c, m) in terms {
            assert_eq!(m.len(), n, "exponent length must match variable count");
            *acc.entry(m.0).or_insert_with(BigRational::zero) += c;
        }
        let mut terms: Vec<(BigRational, ExponentVector)> = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (c, ExponentVector(m)))
            .collect();
        terms.sort_by(|a, b| b.1.cmp_grlex(&a.1));
        Polynomial { n, terms }
    }

    pub fn monomial(c: BigRational, m: ExponentVector) -> Self {
        let n = m.len();
        Polynomial::new(n, [(c, m)])
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(BigRational, ExponentVector)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn coefficient(&self, m: &ExponentVector) -> BigRational {
        self.terms
            .iter()
            .find(|(_, e)| e == m)
            .map(|(c, _)| c.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        Polynomial::new(self.n, self.terms.iter().chain(&other.terms).cloned())
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        Polynomial::new(self.n, self.terms.iter().map(|(a, m)| (a * c, m.clone())))
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, m) in &self.terms {
            for (b, e) in &other.terms {
                terms.push((a * b, m.add(e)));
            }
        }
        Polynomial::new(self.n, terms)
    }

    /// Minimal scaled pairing over the terms; `None` for the zero polynomial.
    pub fn w_weight_scaled(&self, w: &WeightVector) -> Option<BigInt> {
        self.terms.iter().map(|(_, m)| w.pair_scaled(m)).min()
    }

    /// The `w`-weight `min_m w·m`; `None` (standing for +∞) when zero.
    pub fn w_weight(&self, w: &WeightVector) -> Option<BigRational> {
        self.terms.iter().map(|(_, m)| w.pair(m)).min()
    }

    /// Sum of the terms of minimal `w`-weight.
    pub fn initial_form(&self, w: &WeightVector) -> Polynomial {
        let Some(min) = self.w_weight_scaled(w) else {
            return self.clone();
        };
        Polynomial {
            n: self.n,
            terms: self.terms.iter().filter(|(_, m)| w.pair_scaled(m) == min).cloned().collect(),
        }
    }

    /// Sets the variables in `leaves` to zero.
    pub fn tau_truncate(&self, leaves: &BTreeSet<usize>) -> Polynomial {
        Polynomial {
            n: self.n,
            terms: self.terms.iter().filter(|(_, m)| !m.meets(leaves)).cloned().collect(),
        }
    }

    /// Exact evaluation at a rational point.
    pub fn evaluate(&self, point: &[BigRational]) -> BigRational {
        self.terms
            .iter()
            .map(|(c, m)| {
                m.0.iter().zip(point).fold(c.clone(), |acc, (&e, x)| acc * num_traits::pow(x.clone(), e as usize))
            })
            .sum()
    }

    /// Floating evaluation at a complex point.
    pub fn evaluate_complex(&self, point: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, m)| {
                m.0.iter().zip(point).fold(Complex64::new(rational_to_f64(c), 0.0), |acc, (&e, x)| {
                    acc * x.powu(e)
                })
            })
            .sum()
    }

    /// Partial derivative with respect to variable `j`.
    pub fn derivative(&self, j: usize) -> Polynomial {
        Polynomial::new(
            self.n,
            self.terms.iter().filter(|(_, m)| m.0[j] > 0).map(|(c, m)| {
                let mut e = m.clone();
                e.0[j] -= 1;
                (c * BigRational::from_integer(m.0[j].into()), e)
            }),
        )
    }

    /// Exponents of the terms, in term order.
    pub fn monomials(&self) -> impl Iterator<Item = &ExponentVector> {
        self.terms.iter().map(|(_, m)| m)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, m)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let constant = m.degree() == 0;
            if !a.is_one() || constant {
                write!(f, "{}", format_rational(&a))?;
                if !constant {
                    f.write_str("*")?;
                }
            }
            if !constant {
                write!(f, "{m}")?;
            }
        }
        Ok(())
    }
}
