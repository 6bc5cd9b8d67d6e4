//! Integer partitions stored as sparse multiplicity maps.
//!
//! A partition `λ ⊢ n` is kept as `{i: a_i}` with only positive multiplicities,
//! so structural equality is partition equality. The same representation
//! doubles as a monomial `∏ x_i^{a_i}` in [`crate::poly`], and as the cycle
//! type of a permutation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use crate::arith::factorial;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    mult: BTreeMap<usize, usize>,
    weight: usize,
}

impl Partition {
    /// The empty partition of 0.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds from a multiplicity map, dropping zero entries.
    ///
    /// Part size 0 is rejected.
    pub fn from_mult<I: IntoIterator<Item = (usize, usize)>>(entries: I) -> Result<Self> {
        let mut p = Self::empty();
        for (part, count) in entries {
            if part == 0 {
                return Err(Error::InvalidArgument("part size 0".into()));
            }
            p.add_parts(part, count);
        }
        Ok(p)
    }

    /// Builds from a list of parts in any order.
    pub fn from_parts(parts: &[usize]) -> Result<Self> {
        Self::from_mult(parts.iter().map(|&p| (p, 1)))
    }

    /// `n` copies of the part `1`.
    pub fn ones(n: usize) -> Self {
        let mut p = Self::empty();
        p.add_parts(1, n);
        p
    }

    /// The one-part partition `(n)`.
    pub fn single(n: usize) -> Self {
        let mut p = Self::empty();
        p.add_parts(n, 1);
        p
    }

    pub fn add_parts(&mut self, part: usize, count: usize) {
        debug_assert!(part > 0);
        if count == 0 {
            return;
        }
        *self.mult.entry(part).or_insert(0) += count;
        self.weight += part * count;
    }

    /// Union of two partitions (multiplicities add).
    pub fn union(&self, other: &Partition) -> Partition {
        let mut out = self.clone();
        for (&i, &a) in &other.mult {
            out.add_parts(i, a);
        }
        out
    }

    /// `a_i`, zero when absent.
    pub fn mult(&self, part: usize) -> usize {
        self.mult.get(&part).copied().unwrap_or(0)
    }

    pub fn weight(&self) -> usize {
        self.weight
    }

    pub fn num_parts(&self) -> usize {
        self.mult.values().sum()
    }

    pub fn largest_part(&self) -> Option<usize> {
        self.mult.keys().next_back().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.mult.is_empty()
    }

    /// `(part, multiplicity)` pairs with ascending part sizes.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (usize, usize)> + '_ {
        self.mult.iter().map(|(&i, &a)| (i, a))
    }

    pub fn as_map(&self) -> &BTreeMap<usize, usize> {
        &self.mult
    }

    /// Parts listed in ascending order with repetition.
    pub fn parts_ascending(&self) -> Vec<usize> {
        self.iter()
            .flat_map(|(i, a)| std::iter::repeat_n(i, a))
            .collect()
    }

    /// `(a_1, ..., a_b)`.
    pub fn truncated_counts(&self, b: usize) -> Vec<u32> {
        (1..=b).map(|i| self.mult(i) as u32).collect()
    }

    /// Keeps only the part sizes in `keep`.
    pub fn restrict<F: Fn(usize) -> bool>(&self, keep: F) -> Partition {
        let mut out = Partition::empty();
        for (i, a) in self.iter() {
            if keep(i) {
                out.add_parts(i, a);
            }
        }
        out
    }

    /// `z_λ = ∏ i^{a_i} a_i!`, the centralizer order of a permutation of type λ.
    pub fn z_weight(&self) -> BigUint {
        self.iter().fold(BigUint::one(), |acc, (i, a)| {
            acc * BigUint::from(i).pow(a as u32) * factorial(a)
        })
    }
}

/// All partitions of `n`, each once.
///
/// The order is lexicographic on the ascending part lists, so for `n = 3`
/// the result is `1^3`, `1 2`, `3`.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    fn rec(remaining: usize, min_part: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition::from_parts(current).expect("positive parts"));
            return;
        }
        for part in min_part..=remaining {
            // the rest must still be expressible with parts >= part
            if remaining - part != 0 && remaining - part < part {
                continue;
            }
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, 1, &mut Vec::new(), &mut out);
    out
}

/// Sort key matching [`partitions_of`]: the ascending part list.
pub fn lex_key(p: &Partition) -> Vec<usize> {
    p.parts_ascending()
}

/// Text form `1^3 2`: ascending parts, `part^mult` when the multiplicity
/// exceeds one, space separated. The empty partition prints as `0`.
impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, a) in self.iter() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if a == 1 {
                write!(f, "{i}")?;
            } else {
                write!(f, "{i}^{a}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "0" {
            return Ok(Partition::empty());
        }
        let mut p = Partition::empty();
        for tok in s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            let (part, count) = match tok.split_once('^') {
                Some((a, b)) => (a, b),
                None => (tok, "1"),
            };
            let part: usize = part
                .parse()
                .map_err(|_| Error::Parse(format!("bad part `{tok}` in `{s}`")))?;
            let count: usize = count
                .parse()
                .map_err(|_| Error::Parse(format!("bad multiplicity `{tok}` in `{s}`")))?;
            if part == 0 {
                return Err(Error::Parse(format!("part size 0 in `{s}`")));
            }
            p.add_parts(part, count);
        }
        Ok(p)
    }
}
