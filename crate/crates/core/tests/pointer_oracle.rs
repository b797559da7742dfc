//! Random pointer programs: the analysis must reproduce the IR oracle exactly.

mod common;

use std::collections::BTreeSet;

use common::randprog::{deviations, RandProgram};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_programs_match_oracle() {
    let start = std::time::Instant::now();
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let p = RandProgram::generate(&mut ChaCha8Rng::seed_from_u64(seed));
        let bad = deviations(&p);
        if !bad.is_empty() {
            failures.push(format!("seed {seed}:\n{}\n  {}", p.to_c(), bad.join("\n  ")));
        }
    }
    assert!(failures.is_empty(), "{} of 100 programs deviate:\n{}", failures.len(), failures.join("\n"));
    assert!(start.elapsed().as_secs() < 60, "took {:?}", start.elapsed());
}

#[test]
fn generator_covers_every_expression_form() {
    let mut seen = BTreeSet::new();
    for seed in 0..100u64 {
        let c = RandProgram::generate(&mut ChaCha8Rng::seed_from_u64(seed)).to_c();
        for (tag, pat) in [("load", "->next"), ("inner", "&p"), ("local", "&l"), ("deref", "(*"), ("null", "NULL")] {
            if c.contains(pat) {
                seen.insert(tag);
            }
        }
    }
    assert_eq!(seen.len(), 5, "{seen:?}");
}

#[test]
fn oracle_fixtures_are_not_trivial() {
    let (mut pts, mut acc, mut der, mut may, mut unobs) = (0, 0, 0, 0, 0);
    for seed in 0..100u64 {
        let ex = RandProgram::generate(&mut ChaCha8Rng::seed_from_u64(seed)).expected();
        pts += ex.param_pts.values().filter(|s| !s.is_empty()).count();
        acc += ex.access.values().filter(|s| !s.is_empty()).count();
        der += ex.derives.len();
        may += ex.alias.values().filter(|m| **m).count();
        unobs += ex.uncalled.len();
    }
    eprintln!("nonempty points_to {pts}, access {acc}, derives {der}, may-alias {may}, uncalled {unobs}");
    assert!(pts > 50 && acc > 50 && der > 5 && may > 5 && unobs > 5);
}
