//! Cycle-index polynomials `Z_G = (1/|G|) Σ_{s∈G} ∏ x_i^{a_i(s)}`.
//!
//! The coefficient of `∏ x_i^{a_i}` is the probability that a uniform
//! element of `G` has cycle type `{a_i}`, so every operation here doubles as
//! an exact computation on cycle-type laws.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::arith::{divisors, gcd, lcm, totient};
use crate::error::{Error, Result};
use crate::partition::{partitions_of, Partition};
use crate::perm::Permutation;
use crate::poly::{MPoly, Monomial, UniPoly};

/// A cycle index over `[degree]`.
///
/// Invariants: positive coefficients summing to 1, every monomial of weight
/// `degree`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleIndex {
    degree: usize,
    poly: MPoly,
}

impl CycleIndex {
    /// Wraps a polynomial after checking the invariants.
    pub fn from_poly(degree: usize, poly: MPoly) -> Result<Self> {
        let z = Self { degree, poly };
        z.validate()?;
        Ok(z)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.poly.all_coefficients_positive() {
            return Err(Error::InvalidArgument("cycle index has a non-positive coefficient".into()));
        }
        if self.poly.coefficient_sum() != BigRational::one() {
            return Err(Error::InvalidArgument("cycle index coefficients do not sum to 1".into()));
        }
        for (m, _) in self.poly.terms() {
            if m.weight() != self.degree {
                return Err(Error::WeightMismatch { expected: self.degree, found: m.weight() });
            }
        }
        Ok(())
    }

    /// `x_1^m`: the trivial group on `[m]`.
    pub fn trivial(m: usize) -> Self {
        Self { degree: m, poly: MPoly::monomial(Partition::ones(m), BigRational::one()) }
    }

    /// `Z_{C_n} = (1/n) Σ_{d|n} φ(d) x_d^{n/d}`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic group needs n >= 1");
        let mut poly = MPoly::zero();
        for d in divisors(n) {
            let mut m = Monomial::empty();
            m.add_parts(d, n / d);
            poly.add_term(m, BigRational::new(BigInt::from(totient(d)), BigInt::from(n)));
        }
        Self { degree: n, poly }
    }

    /// `Z_{S_n} = Σ_{λ⊢n} x^λ / z_λ`.
    pub fn symmetric(n: usize) -> Self {
        let mut poly = MPoly::zero();
        for lambda in partitions_of(n) {
            let z = BigInt::from(lambda.z_weight());
            poly.add_term(lambda, BigRational::new(BigInt::one(), z));
        }
        Self { degree: n, poly }
    }

    /// Averages the monomials of the listed permutations.
    pub fn from_elements(perms: &[Permutation]) -> Result<Self> {
        let first = perms.first().ok_or(Error::EmptyInput("permutation list"))?;
        let m = first.degree();
        let mut counts: HashMap<Partition, usize> = HashMap::new();
        for p in perms {
            if p.degree() != m {
                return Err(Error::DegreeMismatch { left: m, right: p.degree() });
            }
            *counts.entry(p.cycle_type()).or_insert(0) += 1;
        }
        let total = BigInt::from(perms.len());
        let mut poly = MPoly::zero();
        for (lambda, c) in counts {
            poly.add_term(lambda, BigRational::new(BigInt::from(c), total.clone()));
        }
        Ok(Self { degree: m, poly })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn poly(&self) -> &MPoly {
        &self.poly
    }

    /// `(cycle type, probability)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&Partition, &BigRational)> {
        self.poly.terms()
    }

    pub fn num_terms(&self) -> usize {
        self.poly.len()
    }

    /// `Z_{Γ ≀ H}`: substitutes `t_i = Z_Γ(x_{i}, x_{2i}, ..., x_{ki})` into
    /// `Z_H` (`self`).
    pub fn wreath_compose(&self, gamma: &CycleIndex) -> CycleIndex {
        let mut cache: HashMap<(usize, usize), MPoly> = HashMap::new();
        let mut poly = MPoly::zero();
        for (m, c) in self.poly.terms() {
            let mut term = MPoly::constant(c.clone());
            for (i, e) in m.iter() {
                let factor = cache
                    .entry((i, e))
                    .or_insert_with(|| gamma.poly.dilate(i).pow(e));
                term = &term * &*factor;
            }
            poly = &poly + &term;
        }
        CycleIndex { degree: self.degree * gamma.degree, poly }
    }

    /// Cycle index of `A × B` acting on the grid `[k] × [n]` (`self` is `Z_A`).
    pub fn product_compose(&self, other: &CycleIndex) -> CycleIndex {
        let mut poly = MPoly::zero();
        for (ma, ca) in self.poly.terms() {
            for (mb, cb) in other.poly.terms() {
                let mut m = Monomial::empty();
                for (i, e) in ma.iter() {
                    for (j, f) in mb.iter() {
                        m.add_parts(lcm(i, j), gcd(i, j) * e * f);
                    }
                }
                poly.add_term(m, ca * cb);
            }
        }
        CycleIndex { degree: self.degree * other.degree, poly }
    }

    /// Probability that a uniform element has cycle type `lambda`.
    pub fn prob_of_type(&self, lambda: &Partition) -> Result<BigRational> {
        if lambda.weight() != self.degree {
            return Err(Error::WeightMismatch { expected: self.degree, found: lambda.weight() });
        }
        Ok(self.poly.coefficient(lambda))
    }

    /// Generating function of the number of cycles: all `x_i = x`.
    pub fn cycles_gf(&self) -> UniPoly {
        self.poly.collapse()
    }

    /// Joint generating function of the cycle counts in `keep`; every other
    /// variable is set to 1.
    pub fn marginal_gf(&self, keep: &BTreeSet<usize>) -> MPoly {
        self.poly.set_others_to_one(|i| keep.contains(&i))
    }

    /// `E[a_i]` under the uniform law.
    pub fn mean_count(&self, i: usize) -> BigRational {
        self.poly.terms().fold(BigRational::zero(), |acc, (m, c)| {
            acc + c * BigRational::from_integer(m.mult(i).into())
        })
    }

    /// JSON form `{"degree", "terms": [{"exponents": {"i": e}, "num", "den"}]}`
    /// in display order.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .sorted_terms()
            .into_iter()
            .map(|(m, c)| {
                let exps: serde_json::Map<String, Value> =
                    m.iter().map(|(i, e)| (i.to_string(), json!(e))).collect();
                json!({
                    "exponents": exps,
                    "num": c.numer().to_string(),
                    "den": c.denom().to_string(),
                })
            })
            .collect();
        json!({ "degree": self.degree, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("cycle index JSON: {what}"));
        let degree = v["degree"].as_u64().ok_or_else(|| bad("missing degree"))? as usize;
        let mut poly = MPoly::zero();
        for t in v["terms"].as_array().ok_or_else(|| bad("missing terms"))? {
            let mut m = Monomial::empty();
            for (i, e) in t["exponents"].as_object().ok_or_else(|| bad("missing exponents"))? {
                let i: usize = i.parse().map_err(|_| bad("variable index"))?;
                let e = e.as_u64().ok_or_else(|| bad("exponent"))? as usize;
                if i == 0 {
                    return Err(bad("variable index 0"));
                }
                m.add_parts(i, e);
            }
            let num: BigInt = t["num"].as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad("num"))?;
            let den: BigInt = t["den"].as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad("den"))?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            poly.add_term(m, BigRational::new(num, den));
        }
        Self::from_poly(degree, poly)
    }

    /// Terms ordered by the exponent list read from the largest variable
    /// down, so `x1^4` precedes `x1^2 x2`, then `x2^2`, then `x4`.
    pub fn sorted_terms(&self) -> Vec<(&Partition, &BigRational)> {
        sorted_by_display(self.poly.terms())
    }
}

pub(crate) fn display_key(m: &Monomial) -> Vec<(usize, usize)> {
    m.iter().rev().collect()
}

pub(crate) fn sorted_by_display<'a, I>(terms: I) -> Vec<(&'a Monomial, &'a BigRational)>
where
    I: Iterator<Item = (&'a Monomial, &'a BigRational)>,
{
    let mut v: Vec<_> = terms.collect();
    v.sort_by_key(|(m, _)| display_key(m));
    v
}

pub(crate) fn format_monomial(m: &Monomial) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter()
        .map(|(i, e)| if e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes polynomial terms as `1/8 x1^4 + 1/4 x1^2 x2 + ...`.
pub fn format_poly(poly: &MPoly) -> String {
    if poly.is_zero() {
        return "0".into();
    }
    sorted_by_display(poly.terms())
        .into_iter()
        .map(|(m, c)| format!("{c} {}", format_monomial(m)))
        .collect::<Vec<_>>()
        .join(" + ")
}

impl fmt::Display for CycleIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(&self.poly))
    }
}

/// `F_0, ..., F_{n_max}` with `F_n = Z_{S_n}[Z_Γ]`, restricted to the
/// variables accepted by `keep` (all others set to 1).
///
/// Uses `n F_n = Σ_{a=1}^n Z_Γ(x_a, x_{2a}, ...) F_{n-a}`, which avoids
/// expanding the `p(n)` terms of `Z_{S_n}` and, when `keep` is small, keeps
/// every intermediate polynomial small.
pub fn symmetric_wreath_series<F: Fn(usize) -> bool>(
    gamma: &CycleIndex,
    n_max: usize,
    keep: F,
) -> Vec<MPoly> {
    let dilated: Vec<MPoly> = (0..=n_max)
        .map(|a| if a == 0 { MPoly::zero() } else { gamma.poly.dilate(a).set_others_to_one(&keep) })
        .collect();
    let mut series = vec![MPoly::one()];
    for n in 1..=n_max {
        let mut acc = MPoly::zero();
        for a in 1..=n {
            acc = &acc + &(&dilated[a] * &series[n - a]);
        }
        series.push(acc.scale(&BigRational::new(BigInt::one(), BigInt::from(n))));
    }
    series
}
