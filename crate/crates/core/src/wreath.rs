//! Wreath products `Γⁿ ⋊ Sₙ` for `Γ ⊆ S_k` and their action on `[kn]`.
//!
//! An element `(γ_1, ..., γ_n; η)` acts on the blocks
//! `{(p-1)k + 1, ..., pk}`: block `p` is carried to block `η(p)` and then
//! permuted by `γ_{η(p)}`, i.e. `σ((p-1)k + j) = (η(p)-1)k + γ_{η(p)}(j)`.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

use crate::arith::{factorial, gcd};
use crate::cycle_index::CycleIndex;
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::perm::{parse_cycle_list, Permutation};

/// Default limit on the number of elements any exhaustive enumeration visits.
pub const DEFAULT_CAP: u128 = 10_000_000;

/// Largest explicit group whose closure is verified at construction.
pub const CLOSURE_CHECK_LIMIT: usize = 10_000;

/// The block group `Γ ⊆ S_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupSpec {
    Symmetric(usize),
    /// The rotations of `[k]`.
    Cyclic(usize),
    Explicit { degree: usize, elements: Vec<Permutation> },
}

impl GroupSpec {
    /// An explicit group from its full element list.
    ///
    /// Checks for a common degree and the identity; closure under composition
    /// is checked when there are at most [`CLOSURE_CHECK_LIMIT`] elements.
    pub fn explicit(elements: Vec<Permutation>) -> Result<Self> {
        let degree = elements.first().ok_or(Error::EmptyInput("group element list"))?.degree();
        if let Some(p) = elements.iter().find(|p| p.degree() != degree) {
            return Err(Error::DegreeMismatch { left: degree, right: p.degree() });
        }
        let set: HashSet<&Permutation> = elements.iter().collect();
        if set.len() != elements.len() {
            return Err(Error::InvalidGroup("repeated element".into()));
        }
        if !set.contains(&Permutation::identity(degree)) {
            return Err(Error::InvalidGroup("identity missing".into()));
        }
        if elements.len() <= CLOSURE_CHECK_LIMIT {
            for a in &elements {
                for b in &elements {
                    if !set.contains(&a.compose(b)?) {
                        return Err(Error::InvalidGroup(format!("not closed: {a} * {b}")));
                    }
                }
            }
        }
        Ok(GroupSpec::Explicit { degree, elements })
    }

    /// Parses `S<k>` or `C<k>`.
    pub fn parse_named(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("group `{s}`: expected S<k> or C<k> with k >= 1"));
        let (kind, k) = s.split_at_checked(1).ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        match kind {
            "S" | "s" => Ok(GroupSpec::Symmetric(k)),
            "C" | "c" => Ok(GroupSpec::Cyclic(k)),
            _ => Err(bad()),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            GroupSpec::Symmetric(k) | GroupSpec::Cyclic(k) => *k,
            GroupSpec::Explicit { degree, .. } => *degree,
        }
    }

    pub fn order(&self) -> BigUint {
        match self {
            GroupSpec::Symmetric(k) => factorial(*k),
            GroupSpec::Cyclic(k) => BigUint::from(*k),
            GroupSpec::Explicit { elements, .. } => BigUint::from(elements.len()),
        }
    }

    pub fn name(&self) -> String {
        match self {
            GroupSpec::Symmetric(k) => format!("S{k}"),
            GroupSpec::Cyclic(k) => format!("C{k}"),
            GroupSpec::Explicit { degree, elements } => {
                format!("explicit(k={degree}, order={})", elements.len())
            }
        }
    }

    pub fn cycle_index(&self) -> CycleIndex {
        match self {
            GroupSpec::Symmetric(k) => CycleIndex::symmetric(*k),
            GroupSpec::Cyclic(k) => CycleIndex::cyclic(*k),
            GroupSpec::Explicit { elements, .. } => {
                CycleIndex::from_elements(elements).expect("explicit groups are nonempty")
            }
        }
    }

    /// Cycle-type law of a uniform element, in cycle-index term order.
    pub fn type_law(&self) -> Vec<(Partition, BigRational)> {
        self.cycle_index().terms().map(|(m, c)| (m.clone(), c.clone())).collect()
    }

    /// Every element, failing when the group is larger than `cap`.
    pub fn elements(&self, cap: u128) -> Result<Vec<Permutation>> {
        let size = self.order().to_u128().unwrap_or(u128::MAX);
        if size > cap {
            return Err(Error::CapExceeded { what: "group enumeration", size, cap });
        }
        Ok(match self {
            GroupSpec::Symmetric(k) => Permutation::all(*k),
            GroupSpec::Cyclic(k) => (0..*k).map(|r| rotation(*k, r)).collect(),
            GroupSpec::Explicit { elements, .. } => elements.clone(),
        })
    }

    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Permutation {
        match self {
            GroupSpec::Symmetric(k) => Permutation::random(*k, rng),
            GroupSpec::Cyclic(k) => rotation(*k, rng.random_range(0..*k)),
            GroupSpec::Explicit { elements, .. } => elements[rng.random_range(0..elements.len())].clone(),
        }
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        if p.degree() != self.degree() {
            return false;
        }
        match self {
            GroupSpec::Symmetric(_) => true,
            GroupSpec::Cyclic(k) => {
                let r = p.as_zero_based()[0];
                *p == rotation(*k, r)
            }
            GroupSpec::Explicit { elements, .. } => elements.contains(p),
        }
    }
}

/// Rotation `i ↦ i + r (mod k)` on `[k]`.
pub fn rotation(k: usize, r: usize) -> Permutation {
    Permutation::from_zero_based_unchecked((0..k).map(|i| (i + r) % k).collect())
}

/// Cycle type of a rotation by `r` on `[k]`: `gcd(r, k)` cycles of length `k / gcd`.
pub fn rotation_type(k: usize, r: usize) -> Partition {
    let g = gcd(r, k);
    let mut p = Partition::empty();
    p.add_parts(k / g, g);
    p
}

/// The subgroup generated by `generators`, by breadth-first closure.
pub fn subgroup_closure(generators: &[Permutation], cap: usize) -> Result<GroupSpec> {
    let degree = generators.first().ok_or(Error::EmptyInput("generator list"))?.degree();
    if let Some(p) = generators.iter().find(|p| p.degree() != degree) {
        return Err(Error::DegreeMismatch { left: degree, right: p.degree() });
    }
    let id = Permutation::identity(degree);
    let mut seen: HashSet<Permutation> = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in generators {
            let h = s.compose(&g)?;
            if seen.insert(h.clone()) {
                if seen.len() > cap {
                    return Err(Error::CapExceeded {
                        what: "subgroup closure",
                        size: seen.len() as u128,
                        cap: cap as u128,
                    });
                }
                order.push(h.clone());
                queue.push_back(h);
            }
        }
    }
    Ok(GroupSpec::Explicit { degree, elements: order })
}

/// `(γ_1, ..., γ_n; η)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WreathElement {
    gammas: Vec<Permutation>,
    eta: Permutation,
}

impl WreathElement {
    pub fn new(gammas: Vec<Permutation>, eta: Permutation) -> Result<Self> {
        if gammas.len() != eta.degree() {
            return Err(Error::DegreeMismatch { left: gammas.len(), right: eta.degree() });
        }
        if let Some(first) = gammas.first() {
            if let Some(g) = gammas.iter().find(|g| g.degree() != first.degree()) {
                return Err(Error::DegreeMismatch { left: first.degree(), right: g.degree() });
            }
        }
        Ok(Self { gammas, eta })
    }

    pub fn identity(k: usize, n: usize) -> Self {
        Self { gammas: vec![Permutation::identity(k); n], eta: Permutation::identity(n) }
    }

    pub fn gammas(&self) -> &[Permutation] {
        &self.gammas
    }

    pub fn eta(&self) -> &Permutation {
        &self.eta
    }

    pub fn k(&self) -> usize {
        self.gammas.first().map_or(0, |g| g.degree())
    }

    pub fn n(&self) -> usize {
        self.eta.degree()
    }

    /// The permutation of `[kn]` this element induces.
    pub fn induced(&self) -> Permutation {
        let k = self.k();
        let eta = self.eta.as_zero_based();
        let mut images = Vec::with_capacity(k * self.n());
        for &target in eta {
            let gamma = self.gammas[target].as_zero_based();
            images.extend(gamma.iter().map(|&j| target * k + j));
        }
        Permutation::from_zero_based_unchecked(images)
    }

    /// The product `self · other`, defined so that
    /// `induced(self · other) = induced(self) ∘ induced(other)`.
    pub fn multiply(&self, other: &WreathElement) -> Result<WreathElement> {
        if self.k() != other.k() || self.n() != other.n() {
            return Err(Error::DegreeMismatch { left: self.k() * self.n(), right: other.k() * other.n() });
        }
        let eta = self.eta.compose(&other.eta)?;
        let inv = self.eta.inverse();
        let gammas = (0..self.n())
            .map(|q| {
                let prev = inv.as_zero_based()[q];
                self.gammas[q].compose(&other.gammas[prev])
            })
            .collect::<Result<_>>()?;
        Ok(WreathElement { gammas, eta })
    }

    /// Parses `[(1 3 2),(1)(2 3),(3 1 2),()];(1 4 3 2)`.
    ///
    /// `k` defaults to the largest point named in any gamma (at least 1).
    pub fn parse(s: &str, k: Option<usize>) -> Result<Self> {
        let (gs, eta) = s
            .split_once(';')
            .ok_or_else(|| Error::Parse(format!("element `{s}` needs `;` before eta")))?;
        let gs = gs.trim();
        let inner = gs
            .strip_prefix('[')
            .and_then(|x| x.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("gammas `{gs}` must be bracketed")))?;
        let pieces = split_top_level(inner);
        let cycles: Vec<Vec<Vec<usize>>> = pieces.iter().map(|p| parse_cycle_list(p)).collect::<Result<_>>()?;
        let inferred = cycles.iter().flatten().flatten().copied().max().unwrap_or(1);
        let k = k.unwrap_or(inferred);
        let gammas = cycles
            .iter()
            .map(|c| Permutation::from_cycles(k, c))
            .collect::<Result<Vec<_>>>()?;
        let eta = Permutation::parse_cycles(eta, gammas.len())?;
        Self::new(gammas, eta)
    }
}

fn split_top_level(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if c == ',' && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur);
    }
    out
}

impl fmt::Display for WreathElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gs: Vec<String> = self.gammas.iter().map(|g| g.to_cycle_string()).collect();
        write!(f, "[{}];{}", gs.join(","), self.eta.to_cycle_string())
    }
}

/// A uniform element: independent uniform `γ_i ∈ Γ` and `η ∈ S_n`.
pub fn sample_uniform<R: Rng + ?Sized>(gamma: &GroupSpec, n: usize, rng: &mut R) -> WreathElement {
    let gammas = (0..n).map(|_| gamma.random_element(rng)).collect();
    let eta = Permutation::random(n, rng);
    WreathElement { gammas, eta }
}

/// `|Γ|ⁿ · n!`.
pub fn wreath_order(gamma: &GroupSpec, n: usize) -> BigUint {
    gamma.order().pow(n as u32) * factorial(n)
}

/// `Z_{Γ ≀ S_n}`.
pub fn wreath_cycle_index(gamma: &GroupSpec, n: usize) -> CycleIndex {
    CycleIndex::symmetric(n).wreath_compose(&gamma.cycle_index())
}

/// Every element of `Γⁿ ⋊ Sₙ` with its induced permutation.
pub fn enumerate_wreath(gamma: &GroupSpec, n: usize, cap: u128) -> Result<WreathEnumerator> {
    let size = wreath_order(gamma, n).to_u128().unwrap_or(u128::MAX);
    if size > cap {
        return Err(Error::CapExceeded { what: "wreath enumeration", size, cap });
    }
    Ok(WreathEnumerator {
        group: gamma.elements(cap)?,
        etas: Permutation::all(n),
        eta_idx: 0,
        digits: vec![0; n],
        done: false,
    })
}

/// Iterator produced by [`enumerate_wreath`]; η varies slowest.
#[derive(Debug)]
pub struct WreathEnumerator {
    group: Vec<Permutation>,
    etas: Vec<Permutation>,
    eta_idx: usize,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for WreathEnumerator {
    type Item = (WreathElement, Permutation);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let w = WreathElement {
            gammas: self.digits.iter().map(|&d| self.group[d].clone()).collect(),
            eta: self.etas[self.eta_idx].clone(),
        };
        let mut pos = 0;
        loop {
            if pos == self.digits.len() {
                self.eta_idx += 1;
                if self.eta_idx == self.etas.len() {
                    self.done = true;
                }
                break;
            }
            self.digits[pos] += 1;
            if self.digits[pos] < self.group.len() {
                break;
            }
            self.digits[pos] = 0;
            pos += 1;
        }
        let sigma = w.induced();
        Some((w, sigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn induced_small_example() {
        let t = Permutation::new(&[2, 1]).unwrap();
        let id = Permutation::identity(2);
        let w = WreathElement::new(vec![t.clone(), id, t], Permutation::new(&[3, 1, 2]).unwrap()).unwrap();
        assert_eq!(w.induced().images(), vec![6, 5, 2, 1, 3, 4]);
    }

    #[test]
    fn induced_block_example() {
        let w = WreathElement::parse("[(1 3 2),(1)(2 3),(3 1 2),()];(1 4 3 2)", Some(3)).unwrap();
        let sigma = w.induced();
        assert_eq!(sigma.images(), vec![10, 11, 12, 3, 1, 2, 4, 6, 5, 8, 9, 7]);
        assert_eq!(sigma.to_cycle_string(), "(1 10 8 6 2 11 9 5)(3 12 7 4)");
        assert_eq!(sigma.cycle_type().to_string(), "4 8");
        assert!(WreathElement::identity(3, 4).induced().is_identity());
    }

    #[test]
    fn parse_and_display() {
        let w = WreathElement::parse("[(1,2),()];(1 2)", None).unwrap();
        assert_eq!(w.k(), 2);
        assert_eq!(w.to_string(), "[(1 2),()];(1 2)");
        assert_eq!(WreathElement::parse(&w.to_string(), None).unwrap(), w);
        assert!(WreathElement::parse("[(1 2)];(1 2)", None).is_err());
        assert!(WreathElement::parse("(1 2);()", None).is_err());
    }

    #[test]
    fn group_names() {
        assert_eq!(GroupSpec::parse_named("S3").unwrap(), GroupSpec::Symmetric(3));
        assert_eq!(GroupSpec::parse_named("C12").unwrap(), GroupSpec::Cyclic(12));
        assert!(GroupSpec::parse_named("S0").is_err());
        assert!(GroupSpec::parse_named("D4").is_err());
        assert!(GroupSpec::parse_named("").is_err());
    }

    #[test]
    fn closure_examples() {
        let g = subgroup_closure(&[Permutation::new(&[2, 1, 3]).unwrap()], 100).unwrap();
        assert_eq!(g.order(), BigUint::from(2u32));
        let g = subgroup_closure(&[Permutation::new(&[2, 3, 4, 5, 1]).unwrap()], 100).unwrap();
        assert_eq!(g.order(), BigUint::from(5u32));
        assert_eq!(g.cycle_index(), CycleIndex::cyclic(5));
        let s3 = subgroup_closure(
            &[Permutation::new(&[2, 1, 3]).unwrap(), Permutation::new(&[1, 3, 2]).unwrap()],
            100,
        )
        .unwrap();
        assert_eq!(s3.order(), BigUint::from(6u32));
        let err = subgroup_closure(
            &[Permutation::new(&[2, 1, 3, 4]).unwrap(), Permutation::new(&[2, 3, 4, 1]).unwrap()],
            10,
        )
        .unwrap_err();
        assert!(err.is_cap_exceeded());
    }

    #[test]
    fn explicit_rejects_non_groups() {
        let t = Permutation::new(&[2, 3, 1]).unwrap();
        assert!(GroupSpec::explicit(vec![Permutation::identity(3), t]).is_err());
        assert!(GroupSpec::explicit(vec![Permutation::new(&[2, 1]).unwrap()]).is_err());
        assert!(GroupSpec::explicit(vec![]).is_err());
    }

    #[test]
    fn multiplication_is_compatible_with_induced() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for gamma in [GroupSpec::Symmetric(3), GroupSpec::Cyclic(4)] {
            for _ in 0..1000 {
                let n = rng.random_range(1..6);
                let a = sample_uniform(&gamma, n, &mut rng);
                let b = sample_uniform(&gamma, n, &mut rng);
                let ab = a.multiply(&b).unwrap();
                assert_eq!(ab.induced(), a.induced().compose(&b.induced()).unwrap());
            }
        }
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_wreath(&GroupSpec::Cyclic(2), 2, DEFAULT_CAP).unwrap().count(), 8);
        assert_eq!(enumerate_wreath(&GroupSpec::Symmetric(3), 2, DEFAULT_CAP).unwrap().count(), 72);
        let trivial: Vec<_> = enumerate_wreath(&GroupSpec::Symmetric(1), 3, DEFAULT_CAP)
            .unwrap()
            .map(|(_, s)| s)
            .collect();
        assert_eq!(trivial.len(), 6);
        assert!(enumerate_wreath(&GroupSpec::Symmetric(5), 4, DEFAULT_CAP).unwrap_err().is_cap_exceeded());
    }

    #[test]
    fn rotation_membership() {
        let c4 = GroupSpec::Cyclic(4);
        assert!(c4.contains(&rotation(4, 3)));
        assert!(!c4.contains(&Permutation::new(&[2, 1, 3, 4]).unwrap()));
        assert_eq!(rotation_type(6, 4).to_string(), "3^2");
        assert_eq!(rotation(4, 1).cycle_type(), rotation_type(4, 1));
    }
}
