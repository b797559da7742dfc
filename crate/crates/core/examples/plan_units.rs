//! Computes the translation order for the quadtree fixture: mutually recursive functions
//! share a unit, deallocation-only functions are dropped.
//!
//! cargo run --example plan_units

use std::path::Path;

use ptrkg::cli::commands::build_knowledge_graph;
use ptrkg::cli::PipelineConfig;
use ptrkg::planner::plan;

fn main() -> ptrkg::Result<()> {
    let cfg = PipelineConfig::default();
    let kg = build_knowledge_graph(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/quadtree"), &cfg)?;
    let (p, _) = plan(&kg, &cfg.analysis)?;
    for u in &p.units {
        let members: Vec<&str> = u.members.iter().map(String::as_str).collect();
        println!("{:>3}  {}  ({} triples)", u.id, members.join(" + "), u.semantics.len());
    }
    for d in &p.dropped_units {
        println!("  -  {} ({})", d.id, d.reason);
    }
    Ok(())
}
