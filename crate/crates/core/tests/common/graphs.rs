//! Random dependency graphs and knowledge graphs.

use std::collections::BTreeSet;

use ptrkg::cli::commands::build_knowledge_graph;
use ptrkg::cli::PipelineConfig;
use ptrkg::depgraph::{CodeUnit, DependencyEdge, DependencyGraph, Relation, UnitDecl, UnitKind};
use ptrkg::frontend::ast::CType;
use ptrkg::frontend::OriginKind;
use ptrkg::kgstore::KnowledgeGraph;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::randprog::RandProgram;

pub fn func(i: usize) -> CodeUnit {
    let name = format!("n{i}");
    CodeUnit {
        id: UnitKind::Func.unit_id(&name),
        kind: UnitKind::Func,
        source_text: format!("void {name}(void) {{}}"),
        name: name.clone(),
        origin_file: "g.c".into(),
        origin_kind: OriginKind::Source,
        line: 1,
        system: false,
        decl: UnitDecl::Func {
            c_name: name,
            params: Vec::new(),
            ret: CType::Void,
            variadic: false,
            parsed: true,
            outline: Vec::new(),
        },
    }
}

pub fn random_graph(rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize)>, DependencyGraph) {
    let n = rng.random_range(1..=10);
    let density = rng.random_range(0.05..0.4);
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if rng.random_bool(density) {
                pairs.push((a, b));
            }
        }
    }
    let edges: BTreeSet<DependencyEdge> = pairs
        .iter()
        .map(|&(a, b)| DependencyEdge {
            from: func(a).id,
            to: func(b).id,
            relation: Relation::for_target(UnitKind::Func),
        })
        .collect();
    (n, pairs, DependencyGraph::new((0..n).map(func), edges))
}

/// Components from the transitive closure: u and v share one iff each reaches the other.
pub fn oracle_partition(n: usize, pairs: &[(usize, usize)]) -> BTreeSet<BTreeSet<String>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in pairs {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| reach[u][v] && reach[v][u])
                .map(|v| func(v).id)
                .collect()
        })
        .collect()
}

const NOISE: [&str; 8] = ["\"", "\\", "\n", "\t", "é", "指针", "🦀", "}{"];

fn noise(rng: &mut ChaCha8Rng) -> String {
    (0..rng.random_range(0..6)).map(|_| *NOISE.choose(rng).unwrap()).collect()
}

/// A graph from a random program, with free-text fields scrambled; still invariant-clean.
pub fn random_kg(seed: u64) -> KnowledgeGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prog = RandProgram::generate(&mut rng);
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("prog.c"), prog.to_c()).unwrap();
    let mut kg = build_knowledge_graph(dir.path(), &PipelineConfig::default())
        .unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", prog.to_c()));
    kg.project = format!("p{seed}{}", noise(&mut rng));
    for u in kg.graph.units.values_mut() {
        u.source_text.push_str(&noise(&mut rng));
        u.line = rng.random_range(1..100_000);
    }
    for f in kg.facts.values_mut() {
        for s in &mut f.usage_snippets {
            s.text.push_str(&noise(&mut rng));
        }
    }
    kg.validate().unwrap();
    kg
}
