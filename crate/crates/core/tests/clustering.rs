mod common;

use common::rng;
use lrmf_core::oracle::{exact_cluster, DEFAULT_BUDGET};
use lrmf_core::{
    point_distance, random_partition, Assignment, CenterSet, ClusteringInstance, Metric, Relation, RelationSet,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn naive_d(x: u8, c: u8, p: u8, q: u32) -> u64 {
    let d = ((x as i64 - c as i64).rem_euclid(p as i64)) as u64;
    if d == 0 {
        0
    } else {
        d.pow(q)
    }
}

fn all_tuples(p: u8, k: usize) -> Vec<Vec<u8>> {
    let total = (p as usize).pow(k as u32);
    (0..total)
        .map(|mut idx| {
            (0..k)
                .map(|_| {
                    let v = (idx % p as usize) as u8;
                    idx /= p as usize;
                    v
                })
                .collect()
        })
        .collect()
}

/// A random instance with per-row random relations.
fn random_instance(rng: &mut ChaCha8Rng, p: u8, m: usize, k: usize, n: usize, q: u32) -> ClusteringInstance {
    let universe = all_tuples(p, k);
    let relations: Vec<Relation> = (0..m)
        .map(|_| {
            let mut chosen: Vec<Vec<u8>> = universe.iter().filter(|_| rng.random_bool(0.4)).cloned().collect();
            if chosen.is_empty() {
                chosen.push(universe[rng.random_range(0..universe.len())].clone());
            }
            Relation::new(k, p, &chosen).unwrap()
        })
        .collect();
    let points: Vec<Vec<u8>> = (0..n).map(|_| (0..m).map(|_| rng.random_range(0..p)).collect()).collect();
    ClusteringInstance::new(&points, k, RelationSet::per_row(p, relations).unwrap(), q).unwrap()
}

fn partition_cost(inst: &ClusteringInstance, part: &Assignment, centers: &CenterSet) -> u64 {
    inst.points()
        .zip(part.labels())
        .map(|(x, &j)| {
            x.iter()
                .zip(centers.center(j))
                .map(|(&a, &b)| naive_d(a, b, inst.modulus(), inst.q()))
                .sum::<u64>()
        })
        .sum()
}

#[test]
fn centers_from_clusters_is_optimal_for_fixed_partition() {
    let mut r = rng(17);
    for _ in 0..150 {
        let p = [2u8, 3][r.random_range(0..2)];
        let m = r.random_range(1..=3);
        let k = r.random_range(1..=3);
        let n = r.random_range(1..=6);
        let q = r.random_range(1..=2);
        let inst = random_instance(&mut r, p, m, k, n, q);
        let part = random_partition(n, k, &mut r).unwrap();
        let chosen = inst.centers_from_clusters(&part).unwrap();
        assert!(inst.relations().is_satisfied_by(&chosen));
        let chosen_cost = partition_cost(&inst, &part, &chosen);

        // enumerate every satisfying center set
        let sizes: Vec<usize> = (0..m).map(|i| inst.relations().relation(i).len()).collect();
        let mut digits = vec![0usize; m];
        let mut best = u64::MAX;
        'outer: loop {
            let tuples: Vec<&[u8]> = (0..m).map(|i| inst.relations().relation(i).tuple(digits[i])).collect();
            let c = CenterSet::from_row_tuples(k, &tuples);
            best = best.min(partition_cost(&inst, &part, &c));
            for i in (0..m).rev() {
                digits[i] += 1;
                if digits[i] < sizes[i] {
                    continue 'outer;
                }
                digits[i] = 0;
            }
            break;
        }
        assert_eq!(chosen_cost, best);
    }
}

#[test]
fn alg_clus_invariants_on_random_instances() {
    let mut r = rng(5);
    for case in 0..60 {
        let p = [2u8, 3, 5][case % 3];
        let m = r.random_range(1..=5);
        let k = r.random_range(1..=3);
        let n = r.random_range(1..=12);
        let inst = random_instance(&mut r, p, m, k, n, 1);
        let seed: u64 = r.random();
        let run = inst.alg_clus(&mut rng(seed)).unwrap();
        assert!(run.cost_history.windows(2).all(|w| w[1] <= w[0]), "{:?}", run.cost_history);
        assert!(run.iterations as u64 <= p as u64 * m as u64 * n as u64 + 1);
        assert!(inst.relations().is_satisfied_by(&run.centers));
        assert_eq!(run.cost, inst.cost(&run.centers).unwrap());
        let (assign, cost) = inst.clusters_from_centers(&run.centers).unwrap();
        assert_eq!((assign, cost), (run.assignment.clone(), run.cost));
        assert_eq!(inst.alg_clus(&mut rng(seed)).unwrap(), run);
    }
}

#[test]
fn identical_columns_reach_zero_quickly() {
    // rank-1 reduction relation {(0,0),(0,1)} and eight copies of one point
    let rel = RelationSet::uniform(4, 2, Relation::new(2, 2, &[[0u8, 0], [0, 1]]).unwrap());
    let v = [1u8, 0, 1, 1];
    let inst = ClusteringInstance::new(&[v; 8], 2, rel, 1).unwrap();
    assert_eq!(exact_cluster(&inst, DEFAULT_BUDGET).unwrap().cost, 0);
    for seed in 0..50 {
        let start = random_partition(8, 2, &mut rng(seed)).unwrap();
        let run = inst.alg_clus(&mut rng(seed)).unwrap();
        if start.cluster_sizes()[1] > 0 {
            assert_eq!(run.cost, 0);
            assert!(run.iterations <= 2);
        } else {
            // everything started in the zero cluster: no signal for the free center
            assert_eq!(run.cost, 3);
        }
    }
}

#[test]
fn full_relation_with_enough_centers() {
    let rel = RelationSet::uniform(3, 3, Relation::new(4, 3, &all_tuples(3, 4)).unwrap());
    let pts = [[0u8, 2, 1], [1, 1, 1], [2, 0, 0], [0, 2, 2]];
    let inst = ClusteringInstance::new(&pts, 4, rel, 1).unwrap();
    assert_eq!(exact_cluster(&inst, DEFAULT_BUDGET).unwrap().cost, 0);
    let best = (0..10).map(|s| inst.alg_clus(&mut rng(s)).unwrap().cost).min().unwrap();
    assert_eq!(best, 0);
}

#[test]
fn point_distance_uses_modular_difference() {
    let metric = Metric::new(5, 1).unwrap();
    let c = CenterSet::new(&[[4u8], [0]]).unwrap();
    // (0 − 4) mod 5 = 1 beats (0 − 0) only if smaller; here 0 wins at index 1
    assert_eq!(point_distance(&[0], &c, &metric).unwrap(), (0, 1));
    let c = CenterSet::new(&[[4u8], [3]]).unwrap();
    assert_eq!(point_distance(&[0], &c, &metric).unwrap(), (1, 0));
    assert_eq!(point_distance(&[4], &CenterSet::new(&[[0u8]]).unwrap(), &metric).unwrap(), (4, 0));
}

proptest! {
    #[test]
    fn induced_cost_matches_point_distances(
        seed in any::<u64>(),
        p in prop::sample::select(vec![2u8, 3, 5]),
        q in 0u32..3,
    ) {
        let mut r = rng(seed);
        let m = r.random_range(1..=70);
        let n = r.random_range(1..=10);
        let k = r.random_range(1..=4);
        let rel = RelationSet::uniform(m, p, Relation::new(k, p, &[vec![0u8; k]]).unwrap());
        let points: Vec<Vec<u8>> = (0..n).map(|_| (0..m).map(|_| r.random_range(0..p)).collect()).collect();
        let inst = ClusteringInstance::new(&points, k, rel, q).unwrap();
        let centers: Vec<Vec<u8>> = (0..k).map(|_| (0..m).map(|_| r.random_range(0..p)).collect()).collect();
        let c = CenterSet::new(&centers).unwrap();
        let (assign, cost) = inst.clusters_from_centers(&c).unwrap();
        let mut total = 0;
        for (x, &label) in points.iter().zip(assign.labels()) {
            let (d, idx) = point_distance(x, &c, inst.metric()).unwrap();
            prop_assert_eq!(idx, label);
            total += d;
        }
        prop_assert_eq!(total, cost);
    }
}
