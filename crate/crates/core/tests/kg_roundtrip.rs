//! Export then import of knowledge graphs is the identity.

mod common;

use common::graphs::random_kg;
use ptrkg::depgraph::DependencyEdge;
use ptrkg::kgstore::KnowledgeGraph;

#[test]
fn import_export_is_identity() {
    for seed in 0..200u64 {
        let kg = random_kg(seed);
        let text = kg.to_json().unwrap();
        let back = KnowledgeGraph::from_json(&text).unwrap();
        assert_eq!(back, kg, "seed {seed}");
        assert_eq!(back.to_json().unwrap(), text, "seed {seed}");
    }
}

#[test]
fn import_rejects_broken_invariants() {
    let kg = random_kg(3);
    let mut dangling = kg.clone();
    let from = dangling.graph.units.keys().next().unwrap().clone();
    dangling.graph.edges.insert(DependencyEdge {
        from,
        to: "Func:nowhere".into(),
        relation: ptrkg::depgraph::Relation::for_target(ptrkg::depgraph::UnitKind::Func),
    });
    assert!(KnowledgeGraph::from_json(&dangling.to_json().unwrap()).is_err());

    let text = kg.to_json().unwrap().replacen("\"ptrkg/1\"", "\"ptrkg/9\"", 1);
    assert!(KnowledgeGraph::from_json(&text).is_err());
}
