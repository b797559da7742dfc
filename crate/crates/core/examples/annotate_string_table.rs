//! Builds the knowledge graph of the string_table fixture and prints every pointer site's
//! Rust annotation, plus the usage path that made `arr` an owning pointer.
//!
//! cargo run --example annotate_string_table

use std::path::Path;

use ptrkg::cli::commands::build_knowledge_graph;
use ptrkg::cli::PipelineConfig;

fn main() -> ptrkg::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/string_table");
    let kg = build_knowledge_graph(&dir, &PipelineConfig::default())?;

    for (id, a) in &kg.annotations {
        println!("{id:<48} {} {} {}", a.ownership, a.mutability, a.lifetime);
    }

    let arr = kg.sites.values().find(|s| s.label() == "arr").expect("arr member");
    println!("\nusage of {}:", arr.id);
    for ev in &kg.facts[&arr.id].usage_path {
        println!("  {:<24} {}:{} ({:?})", ev.kind.to_string(), ev.file, ev.line, ev.scope);
    }
    for rule in &kg.annotations[&arr.id].rule_trace {
        println!("  rule {rule:?}");
    }
    Ok(())
}
