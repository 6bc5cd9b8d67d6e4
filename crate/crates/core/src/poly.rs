//! Sparse polynomials with exact rational coefficients.
//!
//! Variables are `x_1, x_2, ...` indexed by positive integers. A monomial
//! `∏ x_i^{e_i}` is stored as a [`Partition`] with multiplicity `e_i` at part
//! size `i`, so the weight of a monomial is `Σ i·e_i`, and multiplying
//! monomials is partition union.

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::partition::Partition;

pub type Monomial = Partition;

/// Multivariate polynomial over ℚ; no stored coefficient is zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl MPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::empty(), c);
        p
    }

    /// The single variable `x_i`.
    pub fn var(i: usize) -> Self {
        Self::monomial(Monomial::single(i), BigRational::one())
    }

    pub fn monomial(m: Monomial, c: BigRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coefficient_sum(&self) -> BigRational {
        self.terms.values().fold(BigRational::zero(), |acc, c| acc + c)
    }

    pub fn all_coefficients_positive(&self) -> bool {
        self.terms.values().all(|c| c.is_positive())
    }

    pub fn scale(&self, c: &BigRational) -> MPoly {
        if c.is_zero() {
            return MPoly::zero();
        }
        MPoly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn pow(&self, mut e: usize) -> MPoly {
        let mut base = self.clone();
        let mut acc = MPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Renames every variable `x_j` to `x_{j·s}`.
    pub fn dilate(&self, s: usize) -> MPoly {
        assert!(s >= 1);
        if s == 1 {
            return self.clone();
        }
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut d = Monomial::empty();
                for (i, e) in m.iter() {
                    d.add_parts(i * s, e);
                }
                (d, c.clone())
            })
            .collect();
        MPoly { terms }
    }

    /// Sets every variable for which `keep` is false to 1.
    pub fn set_others_to_one<F: Fn(usize) -> bool>(&self, keep: F) -> MPoly {
        let mut out = MPoly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.restrict(&keep), c.clone());
        }
        out
    }

    /// Sets every variable to the same `x`; the exponent of `x` is the number
    /// of factors in the monomial.
    pub fn collapse(&self) -> UniPoly {
        let mut coeffs: Vec<BigRational> = Vec::new();
        for (m, c) in &self.terms {
            let d = m.num_parts();
            if coeffs.len() <= d {
                coeffs.resize(d + 1, BigRational::zero());
            }
            coeffs[d] += c;
        }
        UniPoly::new(coeffs)
    }

    /// Evaluates with floating-point variable values.
    pub fn eval_f64<F: Fn(usize) -> f64>(&self, value: F) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                crate::arith::to_f64(c) * m.iter().map(|(i, e)| value(i).powi(e as i32)).product::<f64>()
            })
            .sum()
    }
}

impl<'a> Add<&'a MPoly> for &'a MPoly {
    type Output = MPoly;

    fn add(self, rhs: &'a MPoly) -> MPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a MPoly> for &'a MPoly {
    type Output = MPoly;

    fn mul(self, rhs: &'a MPoly) -> MPoly {
        let mut out = MPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.union(m2), c1 * c2);
            }
        }
        out
    }
}

/// Univariate polynomial over ℚ, `coeffs[j]` multiplying `x^j`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<BigRational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn one() -> Self {
        Self::new(vec![BigRational::one()])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> BigRational {
        self.coeffs.get(j).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &BigRational) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn pow(&self, e: usize) -> UniPoly {
        (0..e).fold(UniPoly::one(), |acc, _| &acc * self)
    }

    /// `p(1)`.
    pub fn sum(&self) -> BigRational {
        self.coeffs.iter().fold(BigRational::zero(), |a, c| a + c)
    }

    /// `p'(1)`: the mean when `p` is a probability generating function.
    pub fn mean(&self) -> BigRational {
        self.coeffs
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |a, (j, c)| a + c * BigRational::from_integer(j.into()))
    }

    /// `Σ j² c_j`.
    pub fn second_moment(&self) -> BigRational {
        self.coeffs.iter().enumerate().fold(BigRational::zero(), |a, (j, c)| {
            a + c * BigRational::from_integer((j * j).into())
        })
    }
}

impl<'a> Add<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;

    fn add(self, rhs: &'a UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|j| self.coeff(j) + rhs.coeff(j)).collect())
    }
}

impl<'a> Mul<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;

    fn mul(self, rhs: &'a UniPoly) -> UniPoly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return UniPoly::default();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}
