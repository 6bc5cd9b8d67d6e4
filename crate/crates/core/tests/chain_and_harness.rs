use std::collections::BTreeMap;

use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wreathlab::arith::{divisors, ratio, totient};
use wreathlab::chain::{exact_lumped_matrix, lumped_row, lumped_step, ElementChain};
use wreathlab::harness::{chi_square_gof, mc_error, tv, Distribution};
use wreathlab::mc::par_histogram;
use wreathlab::partition::{partitions_of, Partition};
use wreathlab::perm::Permutation;
use wreathlab::wreath::DEFAULT_CAP;

#[test]
fn lumped_matrices_are_symmetric_stochastic() {
    for n in 1..=10 {
        let m = exact_lumped_matrix(n, DEFAULT_CAP).unwrap();
        assert!(m.is_symmetric() && m.rows_sum_to_one(), "n = {n}");
    }
}

#[test]
fn row_from_identity_is_inverse_z() {
    for n in 1..=8 {
        let row = lumped_row(&Partition::ones(n));
        for l in partitions_of(n) {
            let want = BigRational::new(1.into(), l.z_weight().into());
            assert_eq!(row[&l], want);
        }
    }
}

#[test]
fn row_from_long_cycle() {
    for n in 1..=12usize {
        let row = lumped_row(&Partition::single(n));
        let mut want = BTreeMap::new();
        for d in divisors(n) {
            let mut p = Partition::empty();
            p.add_parts(d, n / d);
            want.insert(p, ratio(totient(d) as i64, n as i64));
        }
        assert_eq!(row, want, "n = {n}");
    }
    let row = lumped_row(&Partition::single(7));
    assert_eq!(row.len(), 2);
}

fn distinct_part_partitions(n: usize) -> Vec<Partition> {
    partitions_of(n).into_iter().filter(|p| p.iter().all(|(_, a)| a == 1)).collect()
}

#[test]
fn distinct_parts_rows_factor() {
    for n in 2..=9 {
        for lambda in distinct_part_partitions(n) {
            let mut conv: BTreeMap<Partition, BigRational> = BTreeMap::from([(Partition::empty(), ratio(1, 1))]);
            for (part, _) in lambda.iter() {
                let row = lumped_row(&Partition::single(part));
                let mut next = BTreeMap::new();
                for (a, p) in &conv {
                    for (b, q) in &row {
                        *next.entry(a.union(b)).or_insert_with(|| ratio(0, 1)) += p * q;
                    }
                }
                conv = next;
            }
            assert_eq!(conv, lumped_row(&lambda), "{lambda}");
        }
    }
}

#[test]
fn lumped_step_matches_rows() {
    for (idx, lambda) in partitions_of(5).into_iter().enumerate() {
        let hist = par_histogram(100_000, 50 + idx as u64, |r| lumped_step(&lambda, r).truncated_counts(5));
        let emp = Distribution::empirical(&hist).unwrap();
        let exact = Distribution::exact(
            lumped_row(&lambda).into_iter().map(|(p, q)| (p.truncated_counts(5), q)).collect(),
        )
        .unwrap();
        assert!(tv(&emp, &exact) <= 0.01, "{lambda}");
    }
}

#[test]
fn element_chain_stationary_law() {
    let chain = ElementChain::new(Permutation::all(4)).unwrap();
    let pi = chain.stationary();
    assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut state = 0;
    let mut visits = vec![0u64; pi.len()];
    for t in 1..=1_000_000 {
        state = chain.step(state, &mut rng);
        if t % 20 == 0 {
            visits[state] += 1;
        }
    }
    assert!(chi_square_gof(&visits, &pi).unwrap().p_value > 0.001);
}

fn random_dist(seed: u64) -> Distribution {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    Distribution::float(w.iter().enumerate().map(|(i, x)| (vec![i as u32], x / s)).collect(), 1e-12).unwrap()
}

#[test]
fn tv_is_a_metric() {
    for seed in 0..50 {
        let (p, q, r) = (random_dist(3 * seed), random_dist(3 * seed + 1), random_dist(3 * seed + 2));
        assert_eq!(tv(&p, &p), 0.0);
        assert!((tv(&p, &q) - tv(&q, &p)).abs() < 1e-15);
        assert!(tv(&p, &r) <= tv(&p, &q) + tv(&q, &r) + 1e-15);
        assert!(tv(&p, &q) <= 1.0);
    }
}

#[test]
fn mc_error_heuristic_scale() {
    let hist = par_histogram(20_000, 7, |r| {
        use rand::Rng;
        vec![r.random_range(0..30u32)]
    });
    let p = Distribution::empirical(&hist).unwrap();
    let e = mc_error(&p, &p).total();
    assert!(e <= 1.3 * (30.0f64 / 20_000.0).sqrt());
}
