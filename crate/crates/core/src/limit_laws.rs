//! Compound Poisson limit laws for cycle counts.
//!
//! A [`LinearCompoundSpec`] is a list of atoms, each an independent Poisson
//! variable `N` with a vector of nonnegative integer coefficients; the
//! output is `A_i = Σ_atoms coeff_i · N`. Atoms that feed several
//! coordinates make those coordinates dependent.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde_json::{json, Value};

use crate::arith::{divisors, gcd, lcm, to_f64, totient};
use crate::cycle_index::CycleIndex;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::wreath::GroupSpec;

/// Identifies an atom.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum AtomKey {
    /// `Z_{l,λ}`: blocks cycled with period `l` carrying a `Γ`-type `λ`.
    Class { l: usize, lambda: Partition },
    /// A named variable such as `W_3`, `Y_{4,2}` or `X_{1,2,3}`.
    Named { family: String, index: Vec<usize> },
}

impl AtomKey {
    fn named(family: &str, index: &[usize]) -> Self {
        AtomKey::Named { family: family.to_string(), index: index.to_vec() }
    }
}

impl fmt::Display for AtomKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AtomKey::Class { l, lambda } => write!(f, "Z[{l}; {lambda}]"),
            AtomKey::Named { family, index } => {
                let idx: Vec<String> = index.iter().map(|i| i.to_string()).collect();
                write!(f, "{family}[{}]", idx.join(","))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub key: AtomKey,
    pub rate: f64,
    /// The rate as an exact rational when it is one.
    pub exact_rate: Option<BigRational>,
    /// Output index `i` (1-based) to coefficient.
    pub coeffs: BTreeMap<usize, u64>,
}

impl Atom {
    fn exact(key: AtomKey, rate: BigRational, coeffs: BTreeMap<usize, u64>) -> Self {
        Atom { key, rate: to_f64(&rate), exact_rate: Some(rate), coeffs }
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(&i).copied().unwrap_or(0)
    }
}

/// A dependent compound Poisson vector `(A_1, ..., A_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCompoundSpec {
    pub b: usize,
    pub atoms: Vec<Atom>,
    /// Upper bound on `Σ_i E A_i` lost to truncated atoms (0 when exact).
    pub truncation_bias: f64,
}

/// Atoms `Z_{l,λ} ~ Poisson(t^l P_Γ(λ) / l)` for `l ≤ b`, `λ ⊢ k`, with
/// coefficient `a_j(λ)` on output `j·l`.
pub fn build_spec(gamma: &GroupSpec, t: &BigRational, b: usize) -> Result<LinearCompoundSpec> {
    build_spec_from_index(&gamma.cycle_index(), t, b)
}

pub fn build_spec_from_index(z: &CycleIndex, t: &BigRational, b: usize) -> Result<LinearCompoundSpec> {
    if !t.is_positive() || t > &BigRational::one() {
        return Err(Error::InvalidArgument(format!("t = {t} must lie in (0, 1]")));
    }
    let mut atoms = Vec::new();
    let mut tl = BigRational::one();
    for l in 1..=b {
        tl *= t;
        for (lambda, p) in z.terms() {
            let coeffs: BTreeMap<usize, u64> = lambda
                .iter()
                .filter(|(j, _)| j * l <= b)
                .map(|(j, a)| (j * l, a as u64))
                .collect();
            if coeffs.is_empty() {
                continue;
            }
            let rate = &tl * p / BigRational::from_integer(BigInt::from(l));
            atoms.push(Atom::exact(AtomKey::Class { l, lambda: lambda.clone() }, rate, coeffs));
        }
    }
    Ok(LinearCompoundSpec { b, atoms, truncation_bias: 0.0 })
}

/// `A_i = Σ_{l | (i,k)} (k/l) Y_{i,l}` with `Y_{i,l} ~ Poisson(l φ(l) / (k i))`.
pub fn cyclic_spec(k: usize, b: usize) -> LinearCompoundSpec {
    assert!(k >= 1);
    let mut atoms = Vec::new();
    for i in 1..=b {
        for l in divisors(gcd(i, k)) {
            let rate = BigRational::new(BigInt::from(l * totient(l)), BigInt::from(k * i));
            let coeffs = BTreeMap::from([(i, (k / l) as u64)]);
            atoms.push(Atom::exact(AtomKey::named("Y", &[i, l]), rate, coeffs));
        }
    }
    LinearCompoundSpec { b, atoms, truncation_bias: 0.0 }
}

/// The `Γ = S_3` law in residue-class form: `W_i ~ Poisson(1/(6i))` enters
/// `A_i` three times, `Z_i ~ Poisson(1/(2i))` enters `A_i` and `A_{2i}`,
/// and for `3 | i`, `Y_i ~ Poisson(1/i)` enters `A_i`.
pub fn s3_spec(b: usize) -> LinearCompoundSpec {
    let mut atoms = Vec::new();
    for i in 1..=b {
        atoms.push(Atom::exact(
            AtomKey::named("W", &[i]),
            BigRational::new(BigInt::one(), BigInt::from(6 * i)),
            BTreeMap::from([(i, 3)]),
        ));
        let mut z = BTreeMap::from([(i, 1)]);
        if 2 * i <= b {
            z.insert(2 * i, 1);
        }
        atoms.push(Atom::exact(AtomKey::named("Z", &[i]), BigRational::new(BigInt::one(), BigInt::from(2 * i)), z));
        if i % 3 == 0 {
            atoms.push(Atom::exact(
                AtomKey::named("Y", &[i]),
                BigRational::new(BigInt::one(), BigInt::from(i)),
                BTreeMap::from([(i, 1)]),
            ));
        }
    }
    LinearCompoundSpec { b, atoms, truncation_bias: 0.0 }
}

/// Poisson(`mean`) PMF at `j`.
pub fn poisson_pmf(mean: f64, j: usize) -> f64 {
    let mut p = (-mean).exp();
    for m in 1..=j {
        p *= mean / m as f64;
    }
    p
}

/// `Σ_{j' ≥ j} j' · Poisson(1/k)(j')`, computed as `(1/k) P(Poisson(1/k) ≥ j-1)`.
fn size_biased_tail(k: usize, j: usize) -> f64 {
    let mean = 1.0 / k as f64;
    let mut term = poisson_pmf(mean, j.saturating_sub(1));
    let mut tail = 0.0;
    let mut m = j.saturating_sub(1);
    while term > 0.0 && term > tail * 1e-18 {
        tail += term;
        m += 1;
        term *= mean / m as f64;
    }
    mean * tail
}

/// Atoms `X_{l,k,j} ~ Poisson(p^k_j / l)` entering `A_{kl}` with coefficient
/// `j`, where `p^k_j` is the Poisson(`1/k`) PMF at `j`.
///
/// For each `(l, k)` the `j`-sum stops at the first `j` with
/// `j · rate < eps`; the mean mass dropped is recorded in
/// `truncation_bias`.
pub fn skn_limit_spec(b: usize, eps: f64) -> Result<LinearCompoundSpec> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("truncation eps must be positive".into()));
    }
    let mut atoms = Vec::new();
    let mut bias = 0.0;
    for i in 1..=b {
        for k in divisors(i) {
            let l = i / k;
            let mut j = 1;
            loop {
                let rate = poisson_pmf(1.0 / k as f64, j) / l as f64;
                if j as f64 * rate < eps {
                    bias += size_biased_tail(k, j) / l as f64;
                    break;
                }
                atoms.push(Atom {
                    key: AtomKey::named("X", &[l, k, j]),
                    rate,
                    exact_rate: None,
                    coeffs: BTreeMap::from([(i, j as u64)]),
                });
                j += 1;
            }
        }
    }
    Ok(LinearCompoundSpec { b, atoms, truncation_bias: bias })
}

impl LinearCompoundSpec {
    /// `E A_i`.
    pub fn mean(&self, i: usize) -> f64 {
        self.atoms.iter().map(|a| a.rate * a.coeff(i) as f64).sum()
    }

    /// `E A_i` exactly, when every contributing rate is rational.
    pub fn exact_mean(&self, i: usize) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for a in self.atoms.iter().filter(|a| a.coeff(i) > 0) {
            acc += a.exact_rate.as_ref()? * BigRational::from_integer(a.coeff(i).into());
        }
        Some(acc)
    }

    /// `Cov(A_i, A_m) = Σ rate · c_i · c_m`.
    pub fn covariance(&self, i: usize, m: usize) -> f64 {
        self.atoms.iter().map(|a| a.rate * (a.coeff(i) * a.coeff(m)) as f64).sum()
    }

    /// Atoms feeding both `A_i` and `A_m`.
    pub fn shared_atoms(&self, i: usize, m: usize) -> Vec<&AtomKey> {
        self.atoms
            .iter()
            .filter(|a| a.coeff(i) > 0 && a.coeff(m) > 0)
            .map(|a| &a.key)
            .collect()
    }

    /// PMF of `A_i` on `{0, ..., support_max}`.
    pub fn marginal_pmf(&self, i: usize, support_max: usize) -> Vec<f64> {
        let mut pmf = vec![0.0; support_max + 1];
        pmf[0] = 1.0;
        for a in &self.atoms {
            let c = a.coeff(i) as usize;
            if c == 0 || a.rate == 0.0 {
                continue;
            }
            let mut next = vec![0.0; support_max + 1];
            let mut w = (-a.rate).exp();
            let mut m = 0;
            while m * c <= support_max {
                for s in 0..=support_max - m * c {
                    next[s + m * c] += pmf[s] * w;
                }
                m += 1;
                w *= a.rate / m as f64;
            }
            pmf = next;
        }
        pmf
    }

    /// Joint PMF of `(A_i, A_m)`, `i ≠ m`, indexed `[a_i][a_m]` on
    /// `{0..support_max}²`.
    pub fn joint_pmf(&self, i: usize, m: usize, support_max: usize) -> Vec<Vec<f64>> {
        let s = support_max;
        let mut pmf = vec![vec![0.0; s + 1]; s + 1];
        pmf[0][0] = 1.0;
        for a in &self.atoms {
            let (ci, cm) = (a.coeff(i) as usize, a.coeff(m) as usize);
            if (ci == 0 && cm == 0) || a.rate == 0.0 {
                continue;
            }
            let mut next = vec![vec![0.0; s + 1]; s + 1];
            let mut w = (-a.rate).exp();
            let mut n = 0;
            while n * ci <= s && n * cm <= s {
                for x in 0..=s - n * ci {
                    for y in 0..=s - n * cm {
                        next[x + n * ci][y + n * cm] += pmf[x][y] * w;
                    }
                }
                n += 1;
                w *= a.rate / n as f64;
            }
            pmf = next;
        }
        pmf
    }

    /// A sampler with the Poisson variables prepared once.
    pub fn sampler(&self) -> CompoundSampler {
        let entries = self
            .atoms
            .iter()
            .filter(|a| a.rate > 0.0 && !a.coeffs.is_empty())
            .map(|a| {
                let targets = a.coeffs.iter().map(|(&i, &c)| (i - 1, c)).collect();
                (Poisson::new(a.rate).expect("positive finite rate"), targets)
            })
            .collect();
        CompoundSampler { b: self.b, entries }
    }

    /// One draw of `(A_1, ..., A_b)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        self.sampler().sample(rng)
    }

    pub fn to_json(&self) -> Value {
        let atoms: Vec<Value> = self
            .atoms
            .iter()
            .map(|a| {
                let coeffs: serde_json::Map<String, Value> =
                    a.coeffs.iter().map(|(i, c)| (i.to_string(), json!(c))).collect();
                let mut v = match &a.key {
                    AtomKey::Class { l, lambda } => json!({ "l": l, "lambda": lambda.to_string() }),
                    AtomKey::Named { family, index } => {
                        json!({ "label": a.key.to_string(), "family": family, "index": index })
                    }
                };
                match &a.exact_rate {
                    Some(r) => {
                        v["rate_num"] = json!(r.numer().to_string());
                        v["rate_den"] = json!(r.denom().to_string());
                    }
                    None => v["rate"] = json!(a.rate),
                }
                v["coeffs"] = Value::Object(coeffs);
                v
            })
            .collect();
        json!({ "b": self.b, "truncation_bias": self.truncation_bias, "atoms": atoms })
    }
}

/// Prepared sampler for a [`LinearCompoundSpec`].
#[derive(Clone, Debug)]
pub struct CompoundSampler {
    b: usize,
    entries: Vec<(Poisson<f64>, Vec<(usize, u64)>)>,
}

impl CompoundSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let mut out = vec![0u64; self.b];
        for (poisson, targets) in &self.entries {
            let n = poisson.sample(rng) as u64;
            if n > 0 {
                for &(i, c) in targets {
                    out[i] += c * n;
                }
            }
        }
        out
    }
}

/// The limit of cycle counts of `S_k × S_n` on `[k] × [n]`:
/// `A_l = Σ_{a|l} X_a Σ_{i : lcm(i,a) = l} gcd(i,a) Y_i` with independent
/// `X_a ~ Poisson(1/a)`, `Y_i ~ Poisson(1/i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProductActionSpec {
    pub b: usize,
}

impl ProductActionSpec {
    /// `A_1..A_b` from given `X_1..X_b`, `Y_1..Y_b`.
    pub fn combine(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        let b = self.b;
        let mut out = vec![0u64; b];
        for a in 1..=b {
            if x[a - 1] == 0 {
                continue;
            }
            for i in 1..=b {
                let l = lcm(i, a);
                if l <= b {
                    out[l - 1] += x[a - 1] * gcd(i, a) as u64 * y[i - 1];
                }
            }
        }
        out
    }

    /// The output as a formula, e.g. `A_2 = X_1 (Y_2) + X_2 (Y_1 + 2 Y_2)`.
    pub fn formula(&self, l: usize) -> String {
        let mut parts = Vec::new();
        for a in divisors(l) {
            let inner: Vec<String> = divisors(l)
                .into_iter()
                .filter(|&i| lcm(i, a) == l)
                .map(|i| {
                    let g = gcd(i, a);
                    if g == 1 { format!("Y_{i}") } else { format!("{g} Y_{i}") }
                })
                .collect();
            parts.push(format!("X_{a} ({})", inner.join(" + ")));
        }
        format!("A_{l} = {}", parts.join(" + "))
    }

    /// Truncated joint PMF of `(A_1..A_b)` by enumerating every
    /// `X_a, Y_i ≤ cutoff`; mass beyond the cutoff is dropped.
    pub fn exact_law(&self, cutoff: usize) -> BTreeMap<Vec<u32>, f64> {
        let b = self.b;
        let pmfs: Vec<Vec<f64>> = (1..=b)
            .map(|r| (0..=cutoff).map(|j| poisson_pmf(1.0 / r as f64, j)).collect())
            .collect();
        let mut out = BTreeMap::new();
        let vars = 2 * b;
        let mut digits = vec![0usize; vars];
        loop {
            let x: Vec<u64> = digits[..b].iter().map(|&d| d as u64).collect();
            let y: Vec<u64> = digits[b..].iter().map(|&d| d as u64).collect();
            let p: f64 = (0..b).map(|r| pmfs[r][digits[r]] * pmfs[r][digits[b + r]]).product();
            let key: Vec<u32> = self.combine(&x, &y).into_iter().map(|v| v as u32).collect();
            *out.entry(key).or_insert(0.0) += p;
            let mut pos = 0;
            while pos < vars {
                digits[pos] += 1;
                if digits[pos] <= cutoff {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == vars {
                break;
            }
        }
        out
    }
}

/// One draw of the product-action limit.
pub fn sample_product_action<R: Rng + ?Sized>(spec: &ProductActionSpec, rng: &mut R) -> Vec<u64> {
    ProductActionSampler::new(*spec).sample(rng)
}

#[derive(Clone, Debug)]
pub struct ProductActionSampler {
    spec: ProductActionSpec,
    poisson: Vec<Poisson<f64>>,
}

impl ProductActionSampler {
    pub fn new(spec: ProductActionSpec) -> Self {
        let poisson = (1..=spec.b).map(|r| Poisson::new(1.0 / r as f64).expect("positive rate")).collect();
        Self { spec, poisson }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let x: Vec<u64> = self.poisson.iter().map(|p| p.sample(rng) as u64).collect();
        let y: Vec<u64> = self.poisson.iter().map(|p| p.sample(rng) as u64).collect();
        self.spec.combine(&x, &y)
    }
}
