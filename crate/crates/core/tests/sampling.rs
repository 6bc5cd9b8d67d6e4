use std::collections::{BTreeMap, HashSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wreathlab::coupling::{
    exact_coupled_distribution, reference_sequential_type, sample_cycle_type, sample_indicators, IndicatorSequence,
    WreathTypeSampler,
};
use wreathlab::harness::{census_wreath, mc_error, tv, Distribution};
use wreathlab::mc::{par_histogram, with_threads};
use wreathlab::partition::Partition;
use wreathlab::wreath::{enumerate_wreath, sample_uniform, wreath_order, GroupSpec, DEFAULT_CAP};

proptest! {
    #[test]
    fn spacings_round_trip(n in 1usize..200, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seq = sample_indicators(n, &mut rng);
        let sp = seq.spacings();
        prop_assert_eq!(sp.iter().map(|s| s.length).sum::<usize>(), n);
        prop_assert_eq!(IndicatorSequence::from_spacings(&sp).unwrap(), seq);
    }
}

#[test]
fn sampled_types_conserve_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for gamma in [GroupSpec::Symmetric(3), GroupSpec::Cyclic(6), GroupSpec::Symmetric(1), GroupSpec::Cyclic(1)] {
        for _ in 0..2000 {
            let n = rng.random_range(1..300);
            let t = sample_cycle_type(&gamma, n, &mut rng);
            assert_eq!(t.weight(), gamma.degree() * n);
        }
    }
}

#[test]
fn coupling_law_equals_census() {
    for gamma in [GroupSpec::Cyclic(2), GroupSpec::Symmetric(2), GroupSpec::Cyclic(3), GroupSpec::Symmetric(3), GroupSpec::Cyclic(4), GroupSpec::Symmetric(4)] {
        for n in 1..=6 {
            if wreath_order(&gamma, n) > 100_000u32.into() {
                continue;
            }
            let b = gamma.degree() * n;
            let coupled = Distribution::exact(exact_coupled_distribution(&gamma, n, b, DEFAULT_CAP).unwrap()).unwrap();
            let census = census_wreath(&gamma, n, b, DEFAULT_CAP).unwrap();
            assert_eq!(coupled, census, "{} wreath S{n}", gamma.name());
        }
    }
}

#[test]
fn induced_is_injective_on_small_groups() {
    for (gamma, n) in [(GroupSpec::Symmetric(3), 3), (GroupSpec::Cyclic(4), 4), (GroupSpec::Cyclic(2), 5)] {
        let mut seen = HashSet::new();
        let mut count = 0;
        for (_, s) in enumerate_wreath(&gamma, n, 10_000).unwrap() {
            seen.insert(s);
            count += 1;
        }
        assert_eq!(seen.len(), count);
    }
}

#[test]
fn hyperoctahedral_fixed_points_even() {
    for n in 1..=5 {
        for (_, s) in enumerate_wreath(&GroupSpec::Cyclic(2), n, DEFAULT_CAP).unwrap() {
            assert_eq!(s.cycle_type().mult(1) % 2, 0);
        }
    }
}

#[test]
fn monte_carlo_matches_exact_law() {
    let gamma = GroupSpec::Symmetric(3);
    let sampler = WreathTypeSampler::new(&gamma, 2);
    let hist = par_histogram(1_000_000, 42, |r| sampler.sample_counts(r, 6));
    let emp = Distribution::empirical(&hist).unwrap();
    let exact = Distribution::exact(exact_coupled_distribution(&gamma, 2, 6, DEFAULT_CAP).unwrap()).unwrap();
    assert!(tv(&emp, &exact) <= 0.005);
}

fn type_histogram<F: FnMut(&mut ChaCha8Rng) -> Partition>(n: usize, seed: u64, mut f: F) -> BTreeMap<Vec<u32>, u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = BTreeMap::new();
    for _ in 0..n {
        *h.entry(f(&mut rng).truncated_counts(4)).or_insert(0) += 1;
    }
    h
}

#[test]
fn three_samplers_agree() {
    // fast coupling, sequential block construction, and explicit elements
    let gamma = GroupSpec::Symmetric(3);
    let n = 12;
    let draws = 40_000;
    let a = Distribution::empirical(&type_histogram(draws, 1, |r| sample_cycle_type(&gamma, n, r))).unwrap();
    let b = Distribution::empirical(&type_histogram(draws, 2, |r| reference_sequential_type(&gamma, n, r))).unwrap();
    let c = Distribution::empirical(&type_histogram(draws, 3, |r| sample_uniform(&gamma, n, r).induced().cycle_type()))
        .unwrap();
    for (p, q) in [(&a, &b), (&a, &c), (&b, &c)] {
        let err = mc_error(p, q);
        assert!(tv(p, q) <= 3.0 * err.total(), "tv {} err {:?}", tv(p, q), err);
    }
}

#[test]
fn histograms_do_not_depend_on_thread_count() {
    let sampler = WreathTypeSampler::new(&GroupSpec::Cyclic(3), 40);
    let run = |t| with_threads(t, || par_histogram(50_000, 9, |r| sampler.sample_counts(r, 3)));
    assert_eq!(run(1), run(4));
}
