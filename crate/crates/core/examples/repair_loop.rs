//! Feeds a translation with a type error for `quadtree_insert` and shows the correction
//! prompt the compiler diagnostic produced.
//!
//! cargo run --example repair_loop

use std::path::Path;

use ptrkg::cli::commands::{build_knowledge_graph, translate_with};
use ptrkg::cli::PipelineConfig;
use ptrkg::translator::{ReplayBackend, ReplayFixtures};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::temp_dir().join("ptrkg-repair-loop");
    let cfg = PipelineConfig {
        output: out.clone(),
        force: true,
        ..PipelineConfig::default()
    };
    let kg = build_knowledge_graph(&root.join("fixtures/quadtree"), &cfg)?;
    let mut fixtures = ReplayFixtures::load(&root.join("fixtures/quadtree_rs"))?;
    fixtures.use_variant("Func:quadtree_insert", "mismatch")?;
    let report = translate_with(&kg, None, &cfg, &mut ReplayBackend::new(fixtures))?;

    let unit = report.units.iter().find(|u| u.id == "Func:quadtree_insert").expect("planned");
    println!("{}: {:?} after {} repair cycle(s)", unit.id, unit.status, unit.repair_cycles);

    let archived = out.join("rust/artifacts/prompts/Func_quadtree_insert/01-repair.json");
    let entry: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(archived)?)?;
    println!("{}", entry["rendered"].as_str().unwrap_or_default());
    Ok(())
}
