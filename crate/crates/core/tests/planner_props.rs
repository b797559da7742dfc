//! Planning over random digraphs, checked against a reachability oracle, and on the quadtree.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use common::graphs::{func, oracle_partition, random_graph};
use ptrkg::planner::{find_sccs, order, plan};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn scc_partition_matches_reachability_oracle() {
    for seed in 0..100u64 {
        let (n, pairs, g) = random_graph(&mut ChaCha8Rng::seed_from_u64(seed));
        let got: BTreeSet<BTreeSet<String>> = find_sccs(&g).into_iter().collect();
        assert_eq!(got, oracle_partition(n, &pairs), "seed {seed}, edges {pairs:?}");
    }
}

#[test]
fn order_puts_dependencies_first() {
    for seed in 0..100u64 {
        let (_, pairs, g) = random_graph(&mut ChaCha8Rng::seed_from_u64(seed));
        let p = order(&find_sccs(&g), &g).unwrap();
        p.check(&g).unwrap();
        let pos: BTreeMap<String, usize> = p
            .units
            .iter()
            .enumerate()
            .flat_map(|(i, u)| u.members.iter().map(move |m| (m.clone(), i)))
            .collect();
        assert_eq!(pos.len(), g.units.len());
        for (a, b) in pairs {
            assert!(pos[&func(b).id] <= pos[&func(a).id], "seed {seed}: n{a} -> n{b}");
        }
    }
}

#[test]
fn order_is_deterministic() {
    let (_, _, g) = random_graph(&mut ChaCha8Rng::seed_from_u64(7));
    let a = order(&find_sccs(&g), &g).unwrap();
    let b = order(&find_sccs(&g), &g).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn quadtree_recursion_is_one_unit() {
    let kg = common::kg_of(&common::fixture("quadtree"));
    let (p, stripped) = plan(&kg, &Default::default()).unwrap();
    p.check(&stripped).unwrap();
    let unit = p.position_of("Func:insert_").unwrap();
    assert_eq!(p.position_of("Func:split_node_"), Some(unit));
    assert!(p.position_of("Struct:quadtree_node_t").unwrap() < unit);
    assert!(p.position_of("Func:quadtree_insert").unwrap() > unit);
    let dropped: Vec<&str> = p.dropped_units.iter().map(|d| d.id.as_str()).collect();
    assert!(dropped.contains(&"Func:quadtree_free"), "{dropped:?}");
    assert!(p.position_of("Func:quadtree_free").is_none());
}
