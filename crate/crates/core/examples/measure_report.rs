//! Translates the quadtree fixture, then measures the generated crate with the configured
//! lint and unsafe counters (cargo clippy and cargo geiger by default).
//!
//! cargo run --example measure_report

use std::path::Path;

use ptrkg::cli::commands::{build_knowledge_graph, cmd_report, translate_with};
use ptrkg::cli::PipelineConfig;
use ptrkg::translator::{ReplayBackend, ReplayFixtures};

fn main() -> ptrkg::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let cfg = PipelineConfig {
        output: std::env::temp_dir().join("ptrkg-measure-report"),
        force: true,
        ..PipelineConfig::default()
    };
    let kg = build_knowledge_graph(&root.join("fixtures/quadtree"), &cfg)?;
    let fixtures = ReplayFixtures::load(&root.join("fixtures/quadtree_rs"))?;
    translate_with(&kg, None, &cfg, &mut ReplayBackend::new(fixtures))?;
    print!("{}", cmd_report(&cfg)?.summary());
    Ok(())
}
