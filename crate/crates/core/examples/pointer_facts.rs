//! Runs the pointer analysis on the quadtree fixture and prints points-to sets, alias
//! verdicts and member-path relations between parameters.
//!
//! cargo run --example pointer_facts

use std::path::Path;

use ptrkg::cli::PipelineConfig;
use ptrkg::depgraph::build_graph;
use ptrkg::frontend::{parse_project, preprocess, ProjectSource};
use ptrkg::ptrfacts::analyze;

fn main() -> ptrkg::Result<()> {
    let cfg = PipelineConfig::default();
    let source = ProjectSource::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/quadtree"))?;
    let model = parse_project(&preprocess(&source, &cfg)?)?;
    let graph = build_graph(&model)?;
    let analysis = analyze(&graph, &model, Some(&source), &cfg.analysis)?;
    println!("solver settled after {} rounds", analysis.rounds);

    for (id, f) in &analysis.facts {
        let objs: Vec<&str> = f.points_to.iter().map(|o| o.id.as_str()).collect();
        println!("{id}\n  points to {objs:?}");
        if !f.derives_from.is_empty() {
            println!("  derives from {:?}", f.derives_from);
        }
        if !f.access_set.is_empty() {
            println!("  accesses {:?}", f.access_set);
        }
    }
    for v in &analysis.alias {
        println!("{} ~ {}: {:?}{}", v.a, v.b, v.verdict, v.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default());
    }
    Ok(())
}
