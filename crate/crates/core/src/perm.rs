//! Permutations of `[m] = {1, ..., m}`.
//!
//! Every public interface speaks 1-based points; storage is 0-based.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::partition::Partition;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// From one-line notation with 1-based images, e.g. `[6, 5, 2, 1, 3, 4]`.
    pub fn new(images: &[usize]) -> Result<Self> {
        let zero: Vec<usize> = images
            .iter()
            .map(|&x| {
                x.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("image 0 in 1-based input".into()))
            })
            .collect::<Result<_>>()?;
        Self::from_zero_based(zero)
    }

    pub fn from_zero_based(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m];
        for &x in &images {
            if x >= m || seen[x] {
                return Err(Error::InvalidPermutation(format!(
                    "images are not a bijection of [{m}]"
                )));
            }
            seen[x] = true;
        }
        Ok(Self { images })
    }

    pub(crate) fn from_zero_based_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Self::from_zero_based(images.clone()).is_ok());
        Self { images }
    }

    pub fn identity(m: usize) -> Self {
        Self { images: (0..m).collect() }
    }

    /// Uniform random permutation (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..m).collect();
        images.shuffle(rng);
        Self { images }
    }

    /// Builds from disjoint cycles over `[degree]`; points not mentioned are fixed.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut touched = vec![false; degree];
        for cycle in cycles {
            for (idx, &x) in cycle.iter().enumerate() {
                if x == 0 || x > degree {
                    return Err(Error::InvalidPermutation(format!(
                        "point {x} outside [1, {degree}]"
                    )));
                }
                if touched[x - 1] {
                    return Err(Error::InvalidPermutation(format!(
                        "point {x} appears twice in cycle notation"
                    )));
                }
                touched[x - 1] = true;
                let next = cycle[(idx + 1) % cycle.len()];
                images[x - 1] = next - 1;
            }
        }
        Self::from_zero_based(images)
    }

    /// Parses cycle notation such as `(1 3 2)(4 5)`, `(1,3,2)` or `()`.
    pub fn parse_cycles(s: &str, degree: usize) -> Result<Self> {
        Self::from_cycles(degree, &parse_cycle_list(s)?)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    /// `σ(i)` for 1-based `i`.
    pub fn image(&self, i: usize) -> usize {
        self.images[i - 1] + 1
    }

    /// One-line notation, 1-based.
    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|x| x + 1).collect()
    }

    pub fn as_zero_based(&self) -> &[usize] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch { left: self.degree(), right: other.degree() });
        }
        Ok(Self { images: other.images.iter().map(|&x| self.images[x]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Self { images: inv }
    }

    /// Disjoint cycles, each starting at its smallest point, ordered by that
    /// point. Fixed points are included as 1-cycles.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let m = self.degree();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(x + 1);
                x = self.images[x];
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle type: `a_i` = number of `i`-cycles.
    pub fn cycle_type(&self) -> Partition {
        let m = self.degree();
        let mut seen = vec![false; m];
        let mut counts = vec![0usize; m + 1];
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                len += 1;
                x = self.images[x];
            }
            counts[len] += 1;
        }
        Partition::from_mult(counts.into_iter().enumerate().skip(1)).expect("positive parts")
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let m = self.degree();
        let mut seen = vec![false; m];
        let mut c = 0;
        for start in 0..m {
            if seen[start] {
                continue;
            }
            c += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.images[x];
            }
        }
        c
    }

    /// Cycle notation with fixed points omitted; the identity prints as `()`.
    pub fn to_cycle_string(&self) -> String {
        let parts: Vec<String> = self
            .cycles()
            .into_iter()
            .filter(|c| c.len() > 1)
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect();
        if parts.is_empty() {
            "()".to_string()
        } else {
            parts.concat()
        }
    }

    /// Every permutation of `[m]` in lexicographic order of one-line notation.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut current: Vec<usize> = (0..m).collect();
        let mut out = vec![Permutation { images: current.clone() }];
        while next_permutation(&mut current) {
            out.push(Permutation { images: current.clone() });
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycle_string())
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Splits `(1 3 2)(4,5)()` into cycles of 1-based points.
pub fn parse_cycle_list(s: &str) -> Result<Vec<Vec<usize>>> {
    let s = s.trim();
    let mut cycles = Vec::new();
    let mut rest = s;
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected `(` in cycle notation `{s}`")))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unclosed cycle in `{s}`")))?;
        let body = &open[..close];
        let cycle: Vec<usize> = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad point `{t}` in `{s}`"))))
            .collect::<Result<_>>()?;
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        rest = open[close + 1..].trim_start();
    }
    Ok(cycles)
}
