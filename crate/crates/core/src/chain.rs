//! The commuting-graph walk: from `s`, move to a uniform element of the
//! centralizer of `s`.
//!
//! On `S_n` the walk lumps to a symmetric chain on partitions of `n`. The
//! centralizer of a permutation of type `λ` is `∏_i C_i^{a_i} ⋊ S_{a_i}`, so
//! one lumped step draws, independently for each part size `i`, the cycle
//! type of a uniform element of `C_i^{a_i} ⋊ S_{a_i}` and takes the union.

use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::cycle_index::CycleIndex;
use crate::coupling::WreathTypeSampler;
use crate::error::{Error, Result};
use crate::partition::{partitions_of, Partition};
use crate::perm::Permutation;
use crate::poly::MPoly;
use crate::wreath::GroupSpec;

/// Largest explicit group the element-level walk accepts.
pub const ELEMENT_CHAIN_LIMIT: usize = 10_000;

/// One lumped step from `lambda`.
pub fn lumped_step<R: Rng + ?Sized>(lambda: &Partition, rng: &mut R) -> Partition {
    let mut out = Partition::empty();
    for (i, a) in lambda.iter() {
        let part = WreathTypeSampler::new(&GroupSpec::Cyclic(i), a).sample(rng);
        out = out.union(&part);
    }
    out
}

/// Exact transition probabilities out of `lambda`, from the cycle indices of
/// the centralizer factors.
pub fn lumped_row(lambda: &Partition) -> BTreeMap<Partition, BigRational> {
    let mut poly = MPoly::one();
    for (i, a) in lambda.iter() {
        let factor = CycleIndex::symmetric(a).wreath_compose(&CycleIndex::cyclic(i));
        poly = &poly * factor.poly();
    }
    poly.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}

/// Exact lumped transition matrix on the partitions of `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LumpedMatrix {
    pub n: usize,
    /// Row and column labels, in the order of [`partitions_of`] unless
    /// reordered.
    pub states: Vec<Partition>,
    pub entries: Vec<Vec<BigRational>>,
}

/// Builds the matrix; `cap` bounds the number of entries `p(n)²`.
pub fn exact_lumped_matrix(n: usize, cap: u128) -> Result<LumpedMatrix> {
    let states = partitions_of(n);
    let size = (states.len() as u128).pow(2);
    if size > cap {
        return Err(Error::CapExceeded { what: "lumped matrix", size, cap });
    }
    let index: HashMap<&Partition, usize> = states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let entries = states
        .iter()
        .map(|s| {
            let mut row = vec![BigRational::zero(); states.len()];
            for (t, p) in lumped_row(s) {
                row[index[&t]] = p;
            }
            row
        })
        .collect();
    Ok(LumpedMatrix { n, states, entries })
}

impl LumpedMatrix {
    pub fn get(&self, from: &Partition, to: &Partition) -> Option<&BigRational> {
        let i = self.states.iter().position(|s| s == from)?;
        let j = self.states.iter().position(|s| s == to)?;
        Some(&self.entries[i][j])
    }

    /// The same matrix with rows and columns listed in `order`.
    pub fn reordered(&self, order: &[Partition]) -> Result<LumpedMatrix> {
        let pos: Vec<usize> = order
            .iter()
            .map(|s| {
                self.states
                    .iter()
                    .position(|t| t == s)
                    .ok_or_else(|| Error::InvalidArgument(format!("state {s} is not a partition of {}", self.n)))
            })
            .collect::<Result<_>>()?;
        if pos.len() != self.states.len() {
            return Err(Error::InvalidArgument("order must list every state once".into()));
        }
        let entries = pos.iter().map(|&i| pos.iter().map(|&j| self.entries[i][j].clone()).collect()).collect();
        Ok(LumpedMatrix { n: self.n, states: order.to_vec(), entries })
    }

    pub fn is_symmetric(&self) -> bool {
        let m = self.states.len();
        (0..m).all(|i| (0..i).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn rows_sum_to_one(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().fold(BigRational::zero(), |a, x| a + x) == BigRational::one())
    }

    /// CSV with a header of partition strings and `num/den` entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state");
        for s in &self.states {
            out.push(',');
            out.push_str(&s.to_string());
        }
        out.push('\n');
        for (s, row) in self.states.iter().zip(&self.entries) {
            out.push_str(&s.to_string());
            for x in row {
                out.push_str(&format!(",{}/{}", x.numer(), x.denom()));
            }
            out.push('\n');
        }
        out
    }
}

/// Trajectory and visit counts of a lumped run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LumpedRun {
    /// States after each step (the start is not included).
    pub trajectory: Vec<Partition>,
    pub occupancy: BTreeMap<Partition, u64>,
}

pub fn run_lumped<R: Rng + ?Sized>(n: usize, steps: usize, start: &Partition, rng: &mut R) -> Result<LumpedRun> {
    if start.weight() != n {
        return Err(Error::WeightMismatch { expected: n, found: start.weight() });
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let mut state = start.clone();
    let mut trajectory = Vec::with_capacity(steps);
    let mut occupancy = BTreeMap::new();
    for _ in 0..steps {
        state = lumped_step(&state, rng);
        *occupancy.entry(state.clone()).or_insert(0) += 1;
        trajectory.push(state.clone());
    }
    Ok(LumpedRun { trajectory, occupancy })
}

/// One step of the element-level walk on an explicit group.
pub fn element_step<R: Rng + ?Sized>(group: &[Permutation], s: &Permutation, rng: &mut R) -> Result<Permutation> {
    if !group.contains(s) {
        return Err(Error::NotInGroup);
    }
    let sid = s;
    let commuting: Vec<&Permutation> = group
        .iter()
        .filter(|t| t.degree() == sid.degree() && sid.compose(t).ok() == t.compose(sid).ok())
        .collect();
    Ok(commuting[rng.random_range(0..commuting.len())].clone())
}

/// The element-level walk with all centralizers precomputed.
#[derive(Clone, Debug)]
pub struct ElementChain {
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    centralizers: Vec<Vec<usize>>,
}

impl ElementChain {
    pub fn new(elements: Vec<Permutation>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::EmptyInput("group element list"));
        }
        if elements.len() > ELEMENT_CHAIN_LIMIT {
            return Err(Error::CapExceeded {
                what: "element chain",
                size: elements.len() as u128,
                cap: ELEMENT_CHAIN_LIMIT as u128,
            });
        }
        let index: HashMap<Permutation, usize> =
            elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let centralizers = elements
            .iter()
            .map(|s| {
                elements
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| s.compose(t).ok() == t.compose(s).ok())
                    .map(|(j, _)| j)
                    .collect()
            })
            .collect();
        Ok(Self { elements, index, centralizers })
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn index_of(&self, p: &Permutation) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn step<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        let c = &self.centralizers[state];
        c[rng.random_range(0..c.len())]
    }

    /// `π(s) = 1 / (z |κ(s)|)` with `κ(s)` the conjugacy class of `s` and
    /// `z` the number of classes, so every class has total mass `1/z`.
    pub fn stationary(&self) -> Vec<f64> {
        let m = self.elements.len();
        let mut class_of = vec![usize::MAX; m];
        let mut sizes = Vec::new();
        for i in 0..m {
            if class_of[i] != usize::MAX {
                continue;
            }
            let c = sizes.len();
            let mut size = 0;
            for g in &self.elements {
                let conj = g
                    .compose(&self.elements[i])
                    .and_then(|x| x.compose(&g.inverse()))
                    .expect("common degree");
                let j = self.index[&conj];
                if class_of[j] == usize::MAX {
                    class_of[j] = c;
                    size += 1;
                }
            }
            sizes.push(size);
        }
        let z = sizes.len() as f64;
        class_of.iter().map(|&c| 1.0 / (z * sizes[c] as f64)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{ratio, totient};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn one_cycle_row() {
        for n in 1..=12 {
            let row = lumped_row(&Partition::single(n));
            let divs = crate::arith::divisors(n);
            assert_eq!(row.len(), divs.len());
            for d in divs {
                let mut t = Partition::empty();
                t.add_parts(d, n / d);
                assert_eq!(row[&t], ratio(totient(d) as i64, n as i64));
            }
        }
    }

    #[test]
    fn all_ones_row_is_class_law() {
        for n in 1..=8 {
            let row = lumped_row(&Partition::ones(n));
            for lambda in partitions_of(n) {
                let z = num_bigint::BigInt::from(lambda.z_weight());
                assert_eq!(row[&lambda], BigRational::new(1.into(), z));
            }
        }
    }

    #[test]
    fn small_matrices() {
        let m1 = exact_lumped_matrix(1, 100).unwrap();
        assert_eq!(m1.entries, vec![vec![BigRational::one()]]);
        for n in 1..=10 {
            let m = exact_lumped_matrix(n, 1 << 20).unwrap();
            assert!(m.is_symmetric(), "n = {n}");
            assert!(m.rows_sum_to_one(), "n = {n}");
        }
        assert!(exact_lumped_matrix(10, 10).unwrap_err().is_cap_exceeded());
    }

    #[test]
    fn distinct_parts_factorize() {
        for n in 1..=9 {
            for lambda in partitions_of(n).into_iter().filter(|l| l.iter().all(|(_, a)| a == 1)) {
                let mut expected: BTreeMap<Partition, BigRational> =
                    BTreeMap::from([(Partition::empty(), BigRational::one())]);
                for (i, _) in lambda.iter() {
                    let part = lumped_row(&Partition::single(i));
                    let mut next = BTreeMap::new();
                    for (a, p) in &expected {
                        for (b, q) in &part {
                            *next.entry(a.union(b)).or_insert_with(BigRational::zero) += p * q;
                        }
                    }
                    expected = next;
                }
                assert_eq!(lumped_row(&lambda), expected);
            }
        }
    }

    #[test]
    fn prime_cycle_reaches_two_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let five = Partition::single(5);
        for _ in 0..500 {
            let next = lumped_step(&five, &mut rng);
            assert!(next == five || next == Partition::ones(5));
        }
    }

    #[test]
    fn element_step_examples() {
        let s3 = Permutation::all(3);
        let c = Permutation::new(&[2, 3, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = HashMap::new();
        for _ in 0..3000 {
            *seen.entry(element_step(&s3, &c, &mut rng).unwrap()).or_insert(0) += 1;
        }
        assert_eq!(seen.len(), 3);
        assert!(seen.contains_key(&Permutation::identity(3)));
        assert!(element_step(&s3[..2], &c, &mut rng).is_err());
        let chain = ElementChain::new(s3.clone()).unwrap();
        let id = chain.index_of(&Permutation::identity(3)).unwrap();
        let mut hits = vec![0; 6];
        for _ in 0..6000 {
            hits[chain.step(id, &mut rng)] += 1;
        }
        assert!(hits.iter().all(|&h| h > 800));
        let pi = chain.stationary();
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((pi[id] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn run_validates_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(run_lumped(5, 10, &Partition::ones(4), &mut rng).is_err());
        let r = run_lumped(5, 10, &Partition::ones(5), &mut rng).unwrap();
        assert_eq!(r.trajectory.len(), 10);
        assert_eq!(r.occupancy.values().sum::<u64>(), 10);
    }
}
