//! Laws of truncated cycle-count vectors, total variation, and the
//! Monte Carlo experiments that compare finite groups with their limits.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::arith::to_f64;
use crate::coupling::{exact_coupled_distribution, sample_product_coupled, sample_skn_type, SknInnerLimitSampler, WreathTypeSampler};
use crate::cycle_index::CycleIndex;
use crate::error::{Error, Result};
use crate::limit_laws::{build_spec, skn_limit_spec, ProductActionSampler, ProductActionSpec};
use crate::mc::par_histogram;
use crate::perm::Permutation;
use crate::wreath::{enumerate_wreath, GroupSpec};

pub type Key = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Exact(BTreeMap<Key, BigRational>),
    Float(BTreeMap<Key, f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistKind {
    Exact,
    Empirical { n_samples: u64 },
}

/// A law on truncated count vectors `(a_1, ..., a_b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub kind: DistKind,
    pub weights: Weights,
}

impl Distribution {
    /// Exact law; probabilities must be nonnegative and sum to 1.
    pub fn exact(map: BTreeMap<Key, BigRational>) -> Result<Self> {
        if map.values().any(|p| p.is_negative()) {
            return Err(Error::InvalidArgument("negative probability".into()));
        }
        let total = map.values().fold(BigRational::zero(), |a, p| a + p);
        if total != BigRational::one() {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { kind: DistKind::Exact, weights: Weights::Exact(map) })
    }

    /// A law computed in floating point; the sum must be within `1e-12` of 1
    /// unless `tolerance` says otherwise (truncated tails).
    pub fn float(map: BTreeMap<Key, f64>, tolerance: f64) -> Result<Self> {
        if map.values().any(|&p| p < 0.0 || !p.is_finite()) {
            return Err(Error::InvalidArgument("invalid probability".into()));
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > tolerance.max(1e-12) {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        Ok(Self { kind: DistKind::Exact, weights: Weights::Float(map) })
    }

    /// Empirical law of observed counts.
    pub fn empirical(counts: &BTreeMap<Key, u64>) -> Result<Self> {
        let n: u64 = counts.values().sum();
        if n == 0 {
            return Err(Error::EmptyInput("sample histogram"));
        }
        let map = counts.iter().map(|(k, &c)| (k.clone(), c as f64 / n as f64)).collect();
        Ok(Self { kind: DistKind::Empirical { n_samples: n }, weights: Weights::Float(map) })
    }

    pub fn prob(&self, key: &Key) -> f64 {
        match &self.weights {
            Weights::Exact(m) => m.get(key).map_or(0.0, to_f64),
            Weights::Float(m) => m.get(key).copied().unwrap_or(0.0),
        }
    }

    pub fn support(&self) -> BTreeSet<Key> {
        match &self.weights {
            Weights::Exact(m) => m.keys().cloned().collect(),
            Weights::Float(m) => m.keys().cloned().collect(),
        }
    }

    pub fn exact_weights(&self) -> Option<&BTreeMap<Key, BigRational>> {
        match &self.weights {
            Weights::Exact(m) => Some(m),
            Weights::Float(_) => None,
        }
    }

    pub fn n_samples(&self) -> Option<u64> {
        match self.kind {
            DistKind::Empirical { n_samples } => Some(n_samples),
            DistKind::Exact => None,
        }
    }
}

/// `½ Σ |p − q|` over the union of supports.
pub fn tv(p: &Distribution, q: &Distribution) -> f64 {
    let keys: BTreeSet<Key> = p.support().union(&q.support()).cloned().collect();
    0.5 * keys.iter().map(|k| (p.prob(k) - q.prob(k)).abs()).sum::<f64>()
}

/// Total variation as an exact rational when both laws are exact.
pub fn tv_exact(p: &Distribution, q: &Distribution) -> Option<BigRational> {
    let (a, b) = (p.exact_weights()?, q.exact_weights()?);
    let keys: BTreeSet<&Key> = a.keys().chain(b.keys()).collect();
    let zero = BigRational::zero();
    let sum = keys
        .into_iter()
        .fold(BigRational::zero(), |acc, k| acc + (a.get(k).unwrap_or(&zero) - b.get(k).unwrap_or(&zero)).abs());
    Some(sum / BigRational::from_integer(BigInt::from(2)))
}

/// Exact law of `(a_1, ..., a_b)` over a list of permutations, each
/// weighted equally.
pub fn census<I: IntoIterator<Item = Permutation>>(perms: I, b: usize) -> Result<Distribution> {
    let mut counts: BTreeMap<Key, u64> = BTreeMap::new();
    for p in perms {
        *counts.entry(p.cycle_type().truncated_counts(b)).or_insert(0) += 1;
    }
    let n: u64 = counts.values().sum();
    if n == 0 {
        return Err(Error::EmptyInput("permutation list"));
    }
    let map = counts
        .into_iter()
        .map(|(k, c)| (k, BigRational::new(BigInt::from(c), BigInt::from(n))))
        .collect();
    Distribution::exact(map)
}

/// Census of `Γⁿ ⋊ Sₙ` by full enumeration.
pub fn census_wreath(gamma: &GroupSpec, n: usize, b: usize, cap: u128) -> Result<Distribution> {
    census(enumerate_wreath(gamma, n, cap)?.map(|(_, s)| s), b)
}

/// The law of `(a_1, ..., a_b)` read off a cycle index.
pub fn cycle_index_law(z: &CycleIndex, b: usize) -> Distribution {
    let mut map: BTreeMap<Key, BigRational> = BTreeMap::new();
    for (m, c) in z.terms() {
        *map.entry(m.truncated_counts(b)).or_insert_with(BigRational::zero) += c;
    }
    Distribution::exact(map).expect("cycle index coefficients form a law")
}

/// The three exact routes to the cycle-type law of `Γⁿ ⋊ Sₙ`.
#[derive(Clone, Debug)]
pub struct TriangleReport {
    pub census: Distribution,
    pub coupling: Distribution,
    pub cycle_index: Distribution,
}

impl TriangleReport {
    pub fn all_equal(&self) -> bool {
        self.census == self.coupling && self.coupling == self.cycle_index
    }
}

/// Enumeration census, exact coupling law and cycle-index coefficients,
/// each over the full count vector `(a_1, ..., a_{kn})`.
pub fn triangle(gamma: &GroupSpec, n: usize, cap: u128) -> Result<TriangleReport> {
    let b = gamma.degree() * n;
    let z = CycleIndex::symmetric(n).wreath_compose(&gamma.cycle_index());
    Ok(TriangleReport {
        census: census_wreath(gamma, n, b, cap)?,
        coupling: Distribution::exact(exact_coupled_distribution(gamma, n, b, cap)?)?,
        cycle_index: cycle_index_law(&z, b),
    })
}

/// Monte Carlo error of a plug-in TV estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McError {
    /// Estimated upward bias `½ Σ (sd(p̂) + sd(q̂))`.
    pub bias: f64,
    /// Bounded-differences standard deviation of the estimate.
    pub se: f64,
}

impl McError {
    pub fn total(&self) -> f64 {
        self.bias + self.se
    }
}

/// Error bars for `tv(p, q)` when either side is empirical.
pub fn mc_error(p: &Distribution, q: &Distribution) -> McError {
    let keys: BTreeSet<Key> = p.support().union(&q.support()).cloned().collect();
    let sd = |d: &Distribution, k: &Key| match d.n_samples() {
        Some(n) => {
            let x = d.prob(k);
            (x * (1.0 - x) / n as f64).sqrt()
        }
        None => 0.0,
    };
    let bias = 0.5 * keys.iter().map(|k| sd(p, k) + sd(q, k)).sum::<f64>();
    let var: f64 = [p, q].iter().filter_map(|d| d.n_samples()).map(|n| 0.25 / n as f64).sum();
    McError { bias, se: var.sqrt() }
}

/// Outcome of a bound experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub experiment: String,
    pub params: Value,
    /// `None` when the bound does not apply to these parameters.
    pub bound: Option<f64>,
    pub empirical_tv: f64,
    pub mc_error: f64,
    pub pass: Option<bool>,
    pub seed: u64,
    pub runtime_ms: u128,
}

impl BoundReport {
    fn new(experiment: &str, params: Value, bound: Option<f64>, p: &Distribution, q: &Distribution, seed: u64, start: Instant) -> Self {
        let empirical_tv = tv(p, q);
        let err = mc_error(p, q).total();
        BoundReport {
            experiment: experiment.to_string(),
            params,
            bound,
            empirical_tv,
            mc_error: err,
            pass: bound.map(|b| empirical_tv <= b + 3.0 * err),
            seed,
            runtime_ms: start.elapsed().as_millis(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "experiment": self.experiment,
            "params": self.params,
            "bound": self.bound,
            "empirical_tv": self.empirical_tv,
            "mc_error": self.mc_error,
            "pass": self.pass,
            "seed": self.seed,
            "runtime_ms": self.runtime_ms,
        })
    }
}

/// Seed for the second sample of a two-sample experiment.
pub fn companion_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

fn to_key(v: Vec<u64>) -> Key {
    v.into_iter().map(|x| x as u32).collect()
}

/// Coupling draws at size `n` against draws from the `t = 1` limit law,
/// with bound `2b/n`.
pub fn check_tv_bound_wreath(gamma: &GroupSpec, n: usize, b: usize, n_samples: usize, seed: u64) -> Result<BoundReport> {
    let start = Instant::now();
    let finite = WreathTypeSampler::new(gamma, n);
    let limit = build_spec(gamma, &BigRational::one(), b)?.sampler();
    let p = Distribution::empirical(&par_histogram(n_samples, seed, |r| finite.sample_counts(r, b)))?;
    let q = Distribution::empirical(&par_histogram(n_samples, companion_seed(seed), |r| to_key(limit.sample(r))))?;
    let params = json!({ "gamma": gamma.name(), "n": n, "b": b, "n_samples": n_samples });
    Ok(BoundReport::new("tv-wreath", params, Some(2.0 * b as f64 / n as f64), &p, &q, seed, start))
}

/// `5 b log b log k / k`, defined for `k ≥ 89`.
pub fn skn_bound(k: usize, b: usize) -> Option<f64> {
    if k < 89 || b == 0 {
        return if k >= 89 { Some(0.0) } else { None };
    }
    let (k, b) = (k as f64, b as f64);
    Some(5.0 * b * b.ln() * k.ln() / k)
}

/// `S_kⁿ ⋊ Sₙ` coupling draws against the same outer construction with
/// infinite inner sequences.
pub fn check_tv_bound_skn(k: usize, n: usize, b: usize, n_samples: usize, seed: u64) -> Result<BoundReport> {
    let start = Instant::now();
    let limit = SknInnerLimitSampler::new(n, b);
    let p = Distribution::empirical(&par_histogram(n_samples, seed, |r| sample_skn_type(k, n, b, r)))?;
    let q = Distribution::empirical(&par_histogram(n_samples, companion_seed(seed), |r| limit.sample(r)))?;
    let params = json!({ "k": k, "n": n, "b": b, "n_samples": n_samples });
    Ok(BoundReport::new("tv-skn", params, skn_bound(k, b), &p, &q, seed, start))
}

/// `S_kⁿ ⋊ Sₙ` coupling draws against the atom-list law of
/// [`skn_limit_spec`], with bound `5 b log b log k / k + 2b/n`.
///
/// The atom list treats all atoms as independent, which matches every
/// single coordinate but not the joint law once `b ≥ 2`; the report makes
/// the gap visible.
pub fn check_skn_limit_spec(k: usize, n: usize, b: usize, n_samples: usize, seed: u64) -> Result<BoundReport> {
    let start = Instant::now();
    let limit = skn_limit_spec(b, 1e-12)?.sampler();
    let p = Distribution::empirical(&par_histogram(n_samples, seed, |r| sample_skn_type(k, n, b, r)))?;
    let q = Distribution::empirical(&par_histogram(n_samples, companion_seed(seed), |r| to_key(limit.sample(r))))?;
    let bound = skn_bound(k, b).map(|x| x + 2.0 * b as f64 / n as f64);
    let params = json!({ "k": k, "n": n, "b": b, "n_samples": n_samples });
    Ok(BoundReport::new("skn-limit-spec", params, bound, &p, &q, seed, start))
}

/// Product-action coupling draws against the product-action limit, with
/// bound `2b/k + 2b/n`.
pub fn check_product_bound(k: usize, n: usize, b: usize, n_samples: usize, seed: u64) -> Result<BoundReport> {
    let start = Instant::now();
    let limit = ProductActionSampler::new(ProductActionSpec { b });
    let p = Distribution::empirical(&par_histogram(n_samples, seed, |r| sample_product_coupled(k, n, b, r)))?;
    let q = Distribution::empirical(&par_histogram(n_samples, companion_seed(seed), |r| to_key(limit.sample(r))))?;
    let params = json!({ "k": k, "n": n, "b": b, "n_samples": n_samples });
    let bound = 2.0 * b as f64 / k as f64 + 2.0 * b as f64 / n as f64;
    Ok(BoundReport::new("tv-product", params, Some(bound), &p, &q, seed, start))
}

/// The permutation of `[k] × [n]` (point `(i, j)` numbered `(i-1)n + j`)
/// given by `(i, j) ↦ (σ(i), τ(j))`.
pub fn product_action(sigma: &Permutation, tau: &Permutation) -> Permutation {
    let n = tau.degree();
    let images: Vec<usize> = sigma
        .as_zero_based()
        .iter()
        .flat_map(|&si| tau.as_zero_based().iter().map(move |&tj| si * n + tj))
        .collect();
    Permutation::from_zero_based(images).expect("product of bijections")
}

/// Exact census of `S_k × S_n` on the grid.
pub fn product_census(k: usize, n: usize, b: usize) -> Result<Distribution> {
    let taus = Permutation::all(n);
    census(Permutation::all(k).into_iter().flat_map(|s| taus.iter().map(move |t| product_action(&s, t))), b)
}

/// TV between the exact grid census and the limit law truncated at
/// `cutoff` per Poisson variable.
pub fn product_small_case_tv(k: usize, n: usize, b: usize, cutoff: usize) -> Result<f64> {
    let finite = product_census(k, n, b)?;
    let limit = Distribution::float(ProductActionSpec { b }.exact_law(cutoff), 1e-9)?;
    Ok(tv(&finite, &limit))
}

/// Pearson χ² statistic with its upper-tail p-value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// χ² goodness of fit of `counts` to `probs`; every expected count must be
/// at least 5.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if counts.len() != probs.len() {
        return Err(Error::DegreeMismatch { left: counts.len(), right: probs.len() });
    }
    if counts.len() < 2 {
        return Err(Error::InvalidArgument("need at least two cells".into()));
    }
    let n: u64 = counts.iter().sum();
    let expected: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    let min_expected = expected.iter().copied().fold(f64::INFINITY, f64::min);
    if min_expected < 5.0 {
        return Err(Error::UnderSampled { min_expected });
    }
    let statistic: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = counts.len() - 1;
    let p_value = ChiSquared::new(dof as f64).expect("positive dof").sf(statistic);
    Ok(ChiSquare { statistic, dof, p_value })
}

pub fn chi_square_uniform(counts: &[u64]) -> Result<ChiSquare> {
    let c = counts.len().max(1);
    chi_square_gof(counts, &vec![1.0 / c as f64; counts.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ratio;
    use crate::limit_laws::poisson_pmf;

    fn point(k: Key) -> Distribution {
        Distribution::exact(BTreeMap::from([(k, BigRational::one())])).unwrap()
    }

    #[test]
    fn tv_basics() {
        let p = census_wreath(&GroupSpec::Cyclic(2), 2, 4, 1000).unwrap();
        assert_eq!(tv(&p, &p), 0.0);
        assert_eq!(tv(&point(vec![1]), &point(vec![2])), 1.0);
        assert_eq!(tv_exact(&point(vec![1]), &point(vec![2])), Some(ratio(1, 1)));
        assert!(Distribution::exact(BTreeMap::from([(vec![1], ratio(1, 2))])).is_err());
    }

    #[test]
    fn hyperoctahedral_census() {
        let p = census_wreath(&GroupSpec::Cyclic(2), 2, 4, 1000).unwrap();
        let w = p.exact_weights().unwrap();
        assert_eq!(w[&vec![4, 0, 0, 0]], ratio(1, 8));
        assert_eq!(w[&vec![2, 1, 0, 0]], ratio(1, 4));
        assert_eq!(w[&vec![0, 2, 0, 0]], ratio(3, 8));
        assert_eq!(w[&vec![0, 0, 0, 1]], ratio(1, 4));
        let trivial = census_wreath(&GroupSpec::Symmetric(1), 1, 1, 10).unwrap();
        assert_eq!(trivial, point(vec![1]));
    }

    #[test]
    fn fixed_points_against_poisson() {
        let s3 = census(Permutation::all(3), 1).unwrap();
        let poisson: BTreeMap<Key, f64> = (0..30).map(|j| (vec![j as u32], poisson_pmf(1.0, j))).collect();
        let q = Distribution::float(poisson, 1e-12).unwrap();
        let d = tv(&s3, &q);
        assert!(d <= 8.0 / 24.0, "tv = {d}");
    }

    #[test]
    fn empty_bound_experiments_are_trivial() {
        let r = check_tv_bound_wreath(&GroupSpec::Symmetric(3), 10, 0, 1000, 1).unwrap();
        assert_eq!(r.empirical_tv, 0.0);
        assert_eq!(r.pass, Some(true));
        let r = check_product_bound(5, 5, 0, 1000, 1).unwrap();
        assert_eq!(r.empirical_tv, 0.0);
    }

    #[test]
    fn skn_bound_threshold() {
        assert!(skn_bound(88, 2).is_none());
        assert!(skn_bound(89, 2).is_some());
        let b = skn_bound(100, 2).unwrap();
        assert!((b - 0.3192).abs() < 1e-3);
        let r = check_tv_bound_skn(88, 5, 2, 2000, 3).unwrap();
        assert_eq!((r.bound, r.pass), (None, None));
    }

    #[test]
    fn chi_square_examples() {
        assert_eq!(chi_square_uniform(&[100; 7]).unwrap().statistic, 0.0);
        let mut point = vec![0u64; 7];
        point[0] = 7000;
        assert!((chi_square_uniform(&point).unwrap().statistic - 42000.0).abs() < 1e-9);
        assert!(matches!(chi_square_uniform(&[1, 2, 3]), Err(Error::UnderSampled { .. })));
    }

    #[test]
    fn grid_action_fixed_points_multiply() {
        for s in Permutation::all(2) {
            for t in Permutation::all(3) {
                let g = product_action(&s, &t);
                assert_eq!(g.cycle_type().mult(1), s.cycle_type().mult(1) * t.cycle_type().mult(1));
            }
        }
    }
}
