//! Feller-type constructions of cycle types.
//!
//! Independent indicators `ζ_i ~ Bernoulli(1/i)`, `i = 1..n`, followed by a
//! terminal 1, split `[n+1]` into spacings whose lengths are the cycle
//! lengths of a uniform element of `S_n`. For `Γⁿ ⋊ Sₙ` each spacing of
//! length `l` additionally draws the cycle type `Y` of a uniform element of
//! `Γ`, and every `j`-cycle of `Y` becomes a `(j·l)`-cycle. None of the
//! samplers here builds a permutation.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Poisson, weighted::WeightedAliasIndex};

use crate::arith::{divisors, gcd, lcm, to_f64, totient};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::wreath::GroupSpec;

/// `ζ_1 ... ζ_n` followed by the terminal 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorSequence {
    bits: Vec<bool>,
}

/// A maximal run `1 0^{length-1}` followed by a 1, starting at `left` (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Spacing {
    pub left: usize,
    pub length: usize,
}

impl IndicatorSequence {
    /// From `ζ_1 ... ζ_n` (terminal not included); `ζ_1` must be 1.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.first() != Some(&true) {
            return Err(Error::InvalidArgument("indicator sequence must start with 1".into()));
        }
        let mut b = bits.to_vec();
        b.push(true);
        Ok(Self { bits: b })
    }

    pub fn n(&self) -> usize {
        self.bits.len() - 1
    }

    /// All `n + 1` bits, terminal included.
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn spacings(&self) -> Vec<Spacing> {
        let ones: Vec<usize> = self
            .bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
            .collect();
        ones.windows(2).map(|w| Spacing { left: w[0], length: w[1] - w[0] }).collect()
    }

    /// Rebuilds the bits from a spacing list.
    pub fn from_spacings(spacings: &[Spacing]) -> Result<Self> {
        let n: usize = spacings.iter().map(|s| s.length).sum();
        let mut bits = vec![false; n];
        let mut pos = 1;
        for s in spacings {
            if s.left != pos || s.length == 0 {
                return Err(Error::InvalidArgument("spacings are not contiguous".into()));
            }
            bits[pos - 1] = true;
            pos += s.length;
        }
        Self::from_bits(&bits)
    }
}

/// Independent `ζ_i ~ Bernoulli(1/i)`.
pub fn sample_indicators<R: Rng + ?Sized>(n: usize, rng: &mut R) -> IndicatorSequence {
    assert!(n >= 1);
    let mut bits: Vec<bool> = (1..=n).map(|i| rng.random_range(0..i) == 0).collect();
    bits.push(true);
    IndicatorSequence { bits }
}

/// Calls `f` with each spacing length of a fresh indicator sequence of
/// length `n`, from the right end down.
///
/// Starting from a 1 at position `m`, the next 1 to its left is uniform on
/// `{1, ..., m-1}`, so only one draw per spacing is needed.
///
/// `f` receives the generator back so it can draw further randomness.
pub fn for_each_feller_length<R: Rng + ?Sized, F: FnMut(&mut R, usize)>(n: usize, rng: &mut R, mut f: F) {
    let mut m = n + 1;
    while m > 1 {
        let next = rng.random_range(1..m);
        f(rng, m - next);
        m = next;
    }
}

/// Cycle type of a uniform permutation of `[n]`.
pub fn sample_symmetric_type<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Partition {
    let mut p = Partition::empty();
    for_each_feller_length(n, rng, |_, l| p.add_parts(l, 1));
    p
}

/// Draws the cycle type of a uniform element of `Γ`.
#[derive(Clone, Debug)]
pub enum TypeSampler {
    Symmetric(usize),
    /// `d`-cycles times `k/d` with probability `φ(d)/k`.
    Cyclic { k: usize, divisors: Vec<usize>, alias: WeightedAliasIndex<f64> },
    Table { types: Vec<Vec<(usize, usize)>>, alias: WeightedAliasIndex<f64> },
}

impl TypeSampler {
    pub fn new(gamma: &GroupSpec) -> Self {
        match gamma {
            GroupSpec::Symmetric(k) => TypeSampler::Symmetric(*k),
            GroupSpec::Cyclic(k) => {
                let divisors = divisors(*k);
                let w: Vec<f64> = divisors.iter().map(|&d| totient(d) as f64).collect();
                TypeSampler::Cyclic { k: *k, divisors, alias: WeightedAliasIndex::new(w).expect("positive weights") }
            }
            GroupSpec::Explicit { .. } => {
                let law = gamma.type_law();
                let types = law.iter().map(|(p, _)| p.iter().collect()).collect();
                let w: Vec<f64> = law.iter().map(|(_, q)| to_f64(q)).collect();
                TypeSampler::Table { types, alias: WeightedAliasIndex::new(w).expect("positive weights") }
            }
        }
    }

    /// Calls `f(part, multiplicity)` for one sampled type.
    pub fn for_each_part<R: Rng + ?Sized, F: FnMut(usize, usize)>(&self, rng: &mut R, mut f: F) {
        match self {
            TypeSampler::Symmetric(k) => for_each_feller_length(*k, rng, |_, l| f(l, 1)),
            TypeSampler::Cyclic { k, divisors, alias } => {
                let d = divisors[alias.sample(rng)];
                f(d, k / d);
            }
            TypeSampler::Table { types, alias } => {
                for &(i, a) in &types[alias.sample(rng)] {
                    f(i, a);
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Partition {
        let mut p = Partition::empty();
        self.for_each_part(rng, |i, a| p.add_parts(i, a));
        p
    }
}

/// Cycle types of uniform elements of `Γⁿ ⋊ Sₙ` via the indicator coupling.
#[derive(Clone, Debug)]
pub struct WreathTypeSampler {
    types: TypeSampler,
    n: usize,
}

impl WreathTypeSampler {
    pub fn new(gamma: &GroupSpec, n: usize) -> Self {
        Self { types: TypeSampler::new(gamma), n }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Partition {
        let mut out = Partition::empty();
        for_each_feller_length(self.n, rng, |rng, l| {
            self.types.for_each_part(rng, |j, a| out.add_parts(j * l, a));
        });
        out
    }

    /// `(C_1, ..., C_b)`.
    pub fn sample_counts<R: Rng + ?Sized>(&self, rng: &mut R, b: usize) -> Vec<u32> {
        let mut counts = vec![0u32; b];
        for_each_feller_length(self.n, rng, |rng, l| {
            if l <= b {
                self.types.for_each_part(rng, |j, a| {
                    if j * l <= b {
                        counts[j * l - 1] += a as u32;
                    }
                });
            }
        });
        counts
    }
}

/// Cycle type of a uniform element of `Γⁿ ⋊ Sₙ`, a partition of `kn`.
pub fn sample_cycle_type<R: Rng + ?Sized>(gamma: &GroupSpec, n: usize, rng: &mut R) -> Partition {
    WreathTypeSampler::new(gamma, n).sample(rng)
}

fn bernoulli_weight(i: usize, one: bool) -> BigRational {
    let inv = BigRational::new(BigInt::one(), BigInt::from(i));
    if one { inv } else { BigRational::one() - inv }
}

/// Every indicator pattern of length `n` with its exact probability.
fn indicator_patterns(n: usize) -> impl Iterator<Item = (Vec<usize>, BigRational)> {
    let free = n.saturating_sub(1);
    (0u64..(1u64 << free)).map(move |mask| {
        let mut weight = BigRational::one();
        let mut lengths = Vec::new();
        let mut last = 1;
        for i in 2..=n {
            let one = mask >> (i - 2) & 1 == 1;
            weight *= bernoulli_weight(i, one);
            if one {
                lengths.push(i - last);
                last = i;
            }
        }
        lengths.push(n + 1 - last);
        (lengths, weight)
    })
}

type ExactLaw = BTreeMap<Vec<u32>, BigRational>;

fn convolve(law: &ExactLaw, contributions: &[(Vec<u32>, BigRational)]) -> ExactLaw {
    let mut out = ExactLaw::new();
    for (v, p) in law {
        for (c, q) in contributions {
            let key: Vec<u32> = v.iter().zip(c).map(|(a, b)| a + b).collect();
            *out.entry(key).or_insert_with(BigRational::zero) += p * q;
        }
    }
    out
}

/// Exact law of `(C_1, ..., C_b)` from the coupling, by exhausting
/// indicator patterns and block types with their rational probabilities.
pub fn exact_coupled_distribution(gamma: &GroupSpec, n: usize, b: usize, cap: u128) -> Result<ExactLaw> {
    let law = gamma.type_law();
    let size = (1u128 << n.saturating_sub(1).min(126))
        .saturating_mul((law.len() as u128).saturating_pow(n as u32));
    if n > 64 || size > cap {
        return Err(Error::CapExceeded { what: "coupling enumeration", size, cap });
    }
    let mut by_length: BTreeMap<usize, Vec<(Vec<u32>, BigRational)>> = BTreeMap::new();
    let mut out = ExactLaw::new();
    for (lengths, weight) in indicator_patterns(n) {
        let mut acc: ExactLaw = BTreeMap::from([(vec![0u32; b], weight)]);
        for l in lengths {
            let contrib = by_length.entry(l).or_insert_with(|| {
                law.iter()
                    .map(|(y, q)| {
                        let mut c = vec![0u32; b];
                        for (j, a) in y.iter() {
                            if j * l <= b {
                                c[j * l - 1] += a as u32;
                            }
                        }
                        (c, q.clone())
                    })
                    .collect()
            });
            acc = convolve(&acc, contrib);
        }
        for (k, v) in acc {
            *out.entry(k).or_insert_with(BigRational::zero) += v;
        }
    }
    Ok(out)
}

/// `(C_1^{k,n}, ..., C_b^{k,n})` for `S_kⁿ ⋊ Sₙ`: an outer indicator
/// sequence of length `n` and, for each outer spacing, an inner one of
/// length `k`; an outer `j`-spacing with an inner `l`-spacing makes a
/// `(j·l)`-cycle.
pub fn sample_skn_type<R: Rng + ?Sized>(k: usize, n: usize, b: usize, rng: &mut R) -> Vec<u32> {
    let mut counts = vec![0u32; b];
    for_each_feller_length(n, rng, |rng, j| {
        for_each_feller_length(k, rng, |_, l| {
            if j * l <= b {
                counts[j * l - 1] += 1;
            }
        });
    });
    counts
}

/// Samples `(C_1^{∞,n}, ..., C_b^{∞,n})`: the outer sequence has length `n`
/// and every inner sequence is infinite, so its `l`-spacing counts are
/// independent `Poisson(1/l)`.
#[derive(Clone, Debug)]
pub struct SknInnerLimitSampler {
    n: usize,
    b: usize,
    poisson: Vec<Poisson<f64>>,
}

impl SknInnerLimitSampler {
    pub fn new(n: usize, b: usize) -> Self {
        let poisson = (1..=b).map(|l| Poisson::new(1.0 / l as f64).expect("positive rate")).collect();
        Self { n, b, poisson }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        let b = self.b;
        let mut counts = vec![0u32; b];
        for_each_feller_length(self.n, rng, |rng, j| {
            for l in 1..=b / j {
                counts[j * l - 1] += self.poisson[l - 1].sample(rng) as u32;
            }
        });
        counts
    }
}

/// Cycle counts of `(σ, τ) ∈ S_k × S_n` acting on `[k] × [n]`: an
/// `i`-spacing of the first sequence and a `j`-spacing of the second give
/// `gcd(i, j)` cycles of length `lcm(i, j)`.
pub fn sample_product_coupled<R: Rng + ?Sized>(k: usize, n: usize, b: usize, rng: &mut R) -> Vec<u32> {
    let mut first = Vec::new();
    for_each_feller_length(k, rng, |_, i| first.push(i));
    let mut counts = vec![0u32; b];
    for_each_feller_length(n, rng, |_, j| {
        for &i in &first {
            let l = lcm(i, j);
            if l <= b {
                counts[l - 1] += gcd(i, j) as u32;
            }
        }
    });
    counts
}

/// Exact law of [`sample_product_coupled`].
pub fn exact_product_coupled(k: usize, n: usize, b: usize, cap: u128) -> Result<ExactLaw> {
    let size = 1u128
        .checked_shl((k + n).saturating_sub(2) as u32)
        .filter(|_| k + n < 100)
        .unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::CapExceeded { what: "product coupling enumeration", size, cap });
    }
    let second: Vec<_> = indicator_patterns(n).collect();
    let mut out = ExactLaw::new();
    for (li, wi) in indicator_patterns(k) {
        for (lj, wj) in &second {
            let mut c = vec![0u32; b];
            for &i in &li {
                for &j in lj {
                    let l = lcm(i, j);
                    if l <= b {
                        c[l - 1] += gcd(i, j) as u32;
                    }
                }
            }
            *out.entry(c).or_insert_with(BigRational::zero) += &wi * wj;
        }
    }
    Ok(out)
}

/// Reference sampler that builds `η` one cycle at a time.
///
/// Starting from the smallest unused block, each step either closes the
/// current cycle or moves to a uniformly chosen unused block, each with
/// probability `1/r` for `r` remaining choices. A uniform `γ` is drawn for
/// every block visited; the product of the `γ`s around an `η`-cycle of
/// length `L` is a uniform element of `Γ` whose `j`-cycles become
/// `(j·L)`-cycles. This is slower than [`WreathTypeSampler`] and exists to
/// cross-check it.
pub fn reference_sequential_type<R: Rng + ?Sized>(gamma: &GroupSpec, n: usize, rng: &mut R) -> Partition {
    let mut unused: Vec<usize> = (0..n).collect();
    let mut out = Partition::empty();
    while !unused.is_empty() {
        unused.remove(0);
        let mut product = gamma.random_element(rng);
        let mut len = 1;
        loop {
            let r = unused.len() + 1;
            let pick = rng.random_range(0..r);
            if pick == unused.len() {
                break;
            }
            unused.swap_remove(pick);
            let g = gamma.random_element(rng);
            product = g.compose(&product).expect("common degree");
            len += 1;
        }
        for (j, a) in product.cycle_type().iter() {
            out.add_parts(j * len, a);
        }
    }
    out
}

/// Converts an exact law to floating point.
pub fn law_to_f64(law: &ExactLaw) -> BTreeMap<Vec<u32>, f64> {
    law.iter().map(|(k, v)| (k.clone(), v.to_f64().unwrap_or(f64::NAN))).collect()
}
