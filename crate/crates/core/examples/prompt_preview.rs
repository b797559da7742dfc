//! Renders the translation prompt for the unit holding `insert_`: C source, pointer
//! semantics, refactoring guidance and the Rust signatures of already-translated
//! dependencies. The dependencies come from a replay run whose Rust copy is reloaded.
//!
//! cargo run --example prompt_preview

use std::path::Path;

use ptrkg::cli::commands::{build_knowledge_graph, translate_with, RUST_COPY_FILE};
use ptrkg::cli::PipelineConfig;
use ptrkg::kgstore::RustCopy;
use ptrkg::planner::plan;
use ptrkg::translator::{assemble_translation_prompt, ReplayBackend, ReplayFixtures};

fn main() -> ptrkg::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = PipelineConfig {
        output: std::env::temp_dir().join("ptrkg-prompt-preview"),
        force: true,
        ..PipelineConfig::default()
    };
    let kg = build_knowledge_graph(&root.join("fixtures/quadtree"), &cfg)?;
    let fixtures = ReplayFixtures::load(&root.join("fixtures/quadtree_rs"))?;
    translate_with(&kg, None, &cfg, &mut ReplayBackend::new(fixtures))?;
    let copy = RustCopy::load(&cfg.output.join(RUST_COPY_FILE))?;

    let (p, stripped) = plan(&kg, &cfg.analysis)?;
    let tu = &p.units[p.position_of("Func:insert_").expect("planned")];
    println!("{}", assemble_translation_prompt(tu, &kg, &stripped, &copy)?.render());
    Ok(())
}
