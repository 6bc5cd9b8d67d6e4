//! Descents, inversions and cycle counts: exact moments and normal-limit checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::arith::{divisors, harmonic, harmonic_f64, ratio, to_f64, totient};
use crate::cycle_index::CycleIndex;
use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::poly::UniPoly;
use crate::wreath::GroupSpec;

/// Number of `i < m` with `σ(i) > σ(i+1)`.
pub fn descents(p: &Permutation) -> usize {
    p.as_zero_based().windows(2).filter(|w| w[0] > w[1]).count()
}

/// Number of pairs `i < j` with `σ(i) > σ(j)`, in `O(m log m)`.
pub fn inversions(p: &Permutation) -> u64 {
    let m = p.degree();
    let mut tree = vec![0u32; m + 1];
    let mut inv = 0u64;
    for (seen, &x) in p.as_zero_based().iter().enumerate() {
        // count earlier values <= x
        let mut i = x + 1;
        let mut below = 0u64;
        while i > 0 {
            below += tree[i] as u64;
            i &= i - 1;
        }
        inv += seen as u64 - below;
        let mut i = x + 1;
        while i <= m {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }
    inv
}

pub fn cycle_count(p: &Permutation) -> usize {
    p.cycle_count()
}

/// Exact mean and variance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MomentPair {
    pub mean: BigRational,
    pub variance: BigRational,
}

impl MomentPair {
    pub fn new(mean: BigRational, variance: BigRational) -> Self {
        debug_assert!(variance >= BigRational::zero());
        Self { mean, variance }
    }

    /// Moments of a finite sample, exactly.
    pub fn of_values<I: IntoIterator<Item = u64>>(values: I) -> Result<Self> {
        let mut n = 0u64;
        let mut s1 = BigInt::zero();
        let mut s2 = BigInt::zero();
        for v in values {
            n += 1;
            s1 += v;
            s2 += BigInt::from(v) * v;
        }
        if n == 0 {
            return Err(Error::EmptyInput("moment sample"));
        }
        let n = BigInt::from(n);
        let mean = BigRational::new(s1, n.clone());
        let second = BigRational::new(s2, n);
        let variance = &second - &mean * &mean;
        Ok(Self { mean, variance })
    }

    pub fn mean_f64(&self) -> f64 {
        to_f64(&self.mean)
    }

    pub fn sd_f64(&self) -> f64 {
        to_f64(&self.variance).sqrt()
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Descents of a uniform element of `S_m`: `(m-1)/2` and `(m+1)/12`
/// (variance 0 when `m ≤ 1`).
pub fn symmetric_descent_moments(m: usize) -> MomentPair {
    if m <= 1 {
        return MomentPair::new(BigRational::zero(), BigRational::zero());
    }
    let m = m as i64;
    MomentPair::new(ratio(m - 1, 2), ratio(m + 1, 12))
}

/// Inversions of a uniform element of `S_m`: `m(m-1)/4` and `m(m-1)(2m+5)/72`.
pub fn symmetric_inversion_moments(m: usize) -> MomentPair {
    let m = m as i64;
    MomentPair::new(ratio(m * (m - 1), 4), ratio(m * (m - 1) * (2 * m + 5), 72))
}

/// Descents of the induced permutation of a uniform element of `S_kⁿ ⋊ Sₙ`,
/// from `d(σ) = Σ d(γ_i) + d(η)` with independent summands.
pub fn wreath_descent_moments(k: usize, n: usize) -> MomentPair {
    let inner = symmetric_descent_moments(k);
    let outer = symmetric_descent_moments(n);
    let nn = q(n as i64);
    MomentPair::new(&nn * inner.mean + outer.mean, &nn * inner.variance + outer.variance)
}

/// Inversions of the induced permutation, from `I(σ) = k² I(η) + Σ I(γ_i)`.
pub fn wreath_inversion_moments(k: usize, n: usize) -> MomentPair {
    let inner = symmetric_inversion_moments(k);
    let outer = symmetric_inversion_moments(n);
    let k2 = q((k * k) as i64);
    let nn = q(n as i64);
    MomentPair::new(
        &k2 * outer.mean + &nn * inner.mean,
        &k2 * &k2 * outer.variance + &nn * inner.variance,
    )
}

/// The closed form `E = k² C(n,2)/4`,
/// `Var = k⁴ n(n-1)(2n+5)/72 + n k(k+1)(2k+5)/72` as commonly printed for
/// `S_kⁿ ⋊ Sₙ`. It disagrees with [`wreath_inversion_moments`] (for
/// example at `k = n = 2`); kept only so the mismatch can be reported.
pub fn printed_inversion_moments(k: usize, n: usize) -> MomentPair {
    let (k, n) = (k as i64, n as i64);
    MomentPair::new(
        ratio(k * k * (n * (n - 1) / 2), 4),
        ratio(k.pow(4) * n * (n - 1) * (2 * n + 5), 72) + ratio(n * k * (k + 1) * (2 * k + 5), 72),
    )
}

/// Exact descent and inversion moments for `Γⁿ ⋊ Sₙ` with any block group.
///
/// Symmetric blocks use the closed forms; other groups are enumerated
/// (up to `cap` elements) for the law of `d(γ)` and `I(γ)`.
pub fn wreath_statistic_moments(gamma: &GroupSpec, n: usize, cap: u128) -> Result<(MomentPair, MomentPair)> {
    let k = gamma.degree();
    if let GroupSpec::Symmetric(_) = gamma {
        return Ok((wreath_descent_moments(k, n), wreath_inversion_moments(k, n)));
    }
    let elements = gamma.elements(cap)?;
    let d = MomentPair::of_values(elements.iter().map(|g| descents(g) as u64))?;
    let i = MomentPair::of_values(elements.iter().map(inversions))?;
    let (od, oi) = (symmetric_descent_moments(n), symmetric_inversion_moments(n));
    let nn = q(n as i64);
    let k2 = q((k * k) as i64);
    Ok((
        MomentPair::new(&nn * d.mean + od.mean, &nn * d.variance + od.variance),
        MomentPair::new(&k2 * oi.mean + &nn * i.mean, &k2 * &k2 * oi.variance + &nn * i.variance),
    ))
}

/// Exact moments of the cycle count of `Γⁿ ⋊ Sₙ`:
/// `μ H_n` and `σ² H_n + μ² (H_n − H_n^{(2)})` with `μ, σ²` those of `Γ`.
pub fn wreath_cycle_moments(gamma: &CycleIndex, n: usize) -> MomentPair {
    let gf = gamma.cycles_gf();
    let mu = gf.mean();
    let var = gf.second_moment() - &mu * &mu;
    let h1 = harmonic(n);
    let h2 = (1..=n as i64).fold(BigRational::zero(), |acc, i| acc + ratio(1, i * i));
    MomentPair::new(&mu * &h1, &var * &h1 + &mu * &mu * (h1 - h2))
}

/// `E C` and `E C²` for the number of cycles of a uniform rotation of `[k]`.
pub fn cyclic_cycle_moments(k: usize) -> (BigRational, BigRational) {
    let mut mean = BigRational::zero();
    let mut second = BigRational::zero();
    for d in divisors(k) {
        let phi = BigInt::from(totient(d));
        mean += BigRational::new(phi.clone(), BigInt::from(d));
        second += BigRational::new(phi * k, BigInt::from(d * d));
    }
    (mean, second)
}

/// Cycle-count moments of `C_k` from the divisor sums
/// `E C = Σ_{d|k} φ(d)/d`, `E C² = k Σ_{d|k} φ(d)/d²`.
pub fn cycle_count_moments_cyclic(k: usize) -> MomentPair {
    let (mean, second) = cyclic_cycle_moments(k);
    let variance = &second - &mean * &mean;
    MomentPair::new(mean, variance)
}

/// `E C = 1 + a(1 - 1/p)` for `k = p^a`.
pub fn mean_prime_power_closed(p: usize, a: u32) -> BigRational {
    q(1) + q(a as i64) * (q(1) - ratio(1, p as i64))
}

/// The closed form `p^a [1 + (1/p)(1 - 1/p^{a-1})]` sometimes given for
/// `E C²` at `k = p^a`. It does not match the divisor sum (at `C_4` it
/// gives 5 instead of 11/2); kept so the mismatch can be reported.
pub fn second_moment_prime_power_printed(p: usize, a: u32) -> BigRational {
    let p = p as i64;
    let pa = q(p.pow(a));
    let inner = q(1) - BigRational::new(BigInt::one(), BigInt::from(p).pow(a.saturating_sub(1)));
    pa * (q(1) + ratio(1, p) * inner)
}

/// Result of [`stopped_sum_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct StoppedSumReport {
    pub holds: bool,
    pub mean_holds: bool,
    /// `C_{Γⁿ⋊H}(x)` from the composed cycle index.
    pub composed: UniPoly,
    /// `Σ_j P_H(j) C_Γ(x)^j`.
    pub stopped: UniPoly,
    pub mean: BigRational,
    pub mean_product: BigRational,
}

/// Checks that the cycle count of `Γⁿ ⋊ H` is a sum of `C(η)` independent
/// copies of the cycle count of `Γ`, as polynomials, and that the means
/// multiply.
pub fn stopped_sum_check(gamma: &CycleIndex, h: &CycleIndex) -> StoppedSumReport {
    let composed = h.wreath_compose(gamma).cycles_gf();
    let cg = gamma.cycles_gf();
    let ch = h.cycles_gf();
    let mut stopped = UniPoly::default();
    let mut power = UniPoly::one();
    for j in 0..ch.coeffs().len() {
        if j > 0 {
            power = &power * &cg;
        }
        stopped = &stopped + &power.scale(&ch.coeff(j));
    }
    let mean = composed.mean();
    let mean_product = cg.mean() * ch.mean();
    StoppedSumReport {
        holds: composed == stopped,
        mean_holds: mean == mean_product,
        composed,
        stopped,
        mean,
        mean_product,
    }
}

/// Mean and variance of the cycle count of `Γⁿ ⋊ Sₙ` given the mean `mu`
/// and variance `var` of the cycle count of `Γ`:
/// `μ H_n` and `σ² H_n + μ² (H_n − H_n^{(2)})`.
pub fn stopped_sum_moments(mu: f64, var: f64, n: usize) -> (f64, f64) {
    let (h1, h2) = harmonic_f64(n);
    (mu * h1, var * h1 + mu * mu * (h1 - h2))
}

/// Centering `μ(log n + γ)` and scale `σ √(log n)`.
pub fn log_normalization(mu: f64, var: f64, n: usize) -> (f64, f64) {
    let ln = (n as f64).ln();
    (mu * (ln + crate::arith::EULER_GAMMA), (var * ln).sqrt())
}

/// Kolmogorov–Smirnov distance of already standardized values from N(0,1).
pub fn ks_standard_normal(values: &[f64]) -> f64 {
    let normal = Normal::standard();
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Result of [`clt_report`].
#[derive(Clone, Debug, PartialEq)]
pub struct KsReport {
    pub ks: f64,
    pub n_samples: usize,
    /// `1.63 / √N`, the asymptotic 1% critical value.
    pub critical: f64,
}

/// KS distance of `(x - mean) / sd` from the standard normal.
pub fn clt_report(samples: &[f64], mean: f64, sd: f64) -> Result<KsReport> {
    if !(sd > 0.0) || !sd.is_finite() {
        return Err(Error::DegenerateSd);
    }
    if samples.len() < 1000 {
        return Err(Error::InvalidArgument(format!(
            "need at least 1000 samples, got {}",
            samples.len()
        )));
    }
    let z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    let n = samples.len();
    Ok(KsReport { ks: ks_standard_normal(&z), n_samples: n, critical: 1.63 / (n as f64).sqrt() })
}

/// Adds independent uniform(-1/2, 1/2) noise to integer-valued samples so a
/// lattice law can be compared with a continuous one.
pub fn jitter<R: Rng + ?Sized>(samples: &[f64], rng: &mut R) -> Vec<f64> {
    samples.iter().map(|x| x + rng.random::<f64>() - 0.5).collect()
}
