//! Elementary number theory: gcd/lcm, divisors, Euler's totient, factorials
//! and harmonic numbers.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.5772156649015329;

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn lcm(a: usize, b: usize) -> usize {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// Divisors of `n`, ascending. Empty for `n == 0`.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Euler's totient by trial factorisation.
pub fn totient(n: usize) -> usize {
    assert!(n >= 1, "totient is defined for n >= 1");
    let mut result = n;
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if m > 1 {
        result -= result / m;
    }
    result
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// `H_n = 1 + 1/2 + ... + 1/n`, exactly.
pub fn harmonic(n: usize) -> BigRational {
    (1..=n).fold(BigRational::zero(), |acc, i| acc + BigRational::new(1.into(), i.into()))
}

/// `H_n` and `H_n^(2) = sum 1/i^2` in floating point.
pub fn harmonic_f64(n: usize) -> (f64, f64) {
    (1..=n).fold((0.0, 0.0), |(h1, h2), i| {
        let x = 1.0 / i as f64;
        (h1 + x, h2 + x * x)
    })
}

/// Factorisation of `n` as (prime, exponent) pairs.
pub fn prime_powers(n: usize) -> Vec<(usize, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            let mut a = 0;
            while m % p == 0 {
                m /= p;
                a += 1;
            }
            out.push((p, a));
        }
        p += 1;
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

pub fn to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn totient_by_count(n: usize) -> usize {
        (1..=n).filter(|&j| gcd(j, n) == 1).count()
    }

    #[test]
    fn totient_examples() {
        assert_eq!(totient(1), 1);
        assert_eq!(totient(12), 4);
        for n in 1..200 {
            assert_eq!(totient(n), totient_by_count(n), "n={n}");
        }
    }

    #[test]
    fn divisor_examples() {
        assert_eq!(divisors(6), vec![1, 2, 3, 6]);
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(36), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
    }

    #[test]
    fn totient_sums_over_divisors() {
        for n in 1..=1000 {
            let s: usize = divisors(n).into_iter().map(totient).sum();
            assert_eq!(s, n);
        }
    }

    #[test]
    fn gcd_lcm() {
        assert_eq!(gcd(12, 18), 6);
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(lcm(1, 7), 7);
    }

    #[test]
    fn prime_power_factorisation() {
        assert_eq!(prime_powers(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(prime_powers(1), vec![]);
    }
}
