//! Stores the quadtree knowledge graph as JSON, loads it back and lists the semantic
//! triples attached to `split_node_`.
//!
//! cargo run --example kg_triples

use std::path::Path;

use ptrkg::cli::commands::build_knowledge_graph;
use ptrkg::cli::PipelineConfig;
use ptrkg::kgstore::KnowledgeGraph;

fn main() -> ptrkg::Result<()> {
    let kg = build_knowledge_graph(
        &Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/quadtree"),
        &PipelineConfig::default(),
    )?;
    let path = std::env::temp_dir().join("quadtree.ptrkg.json");
    kg.save(&path)?;
    let back = KnowledgeGraph::load(&path)?;
    assert_eq!(back, kg);
    println!("{} units, {} edges, stored at {}", back.graph.units.len(), back.graph.edges.len(), path.display());

    for t in back.site_triples("Func:split_node_") {
        println!("{t}");
    }
    for h in back.hints_for("Func:split_node_") {
        println!("{}", h.render(&back.sites, &back.annotations));
    }
    Ok(())
}
