//! Translates the quadtree fixture with the deterministic replay backend and prints the
//! pipeline report. Pass `--adversarial` to use a backend that never produces compiling
//! code: every unit then falls back to a stub and the crate still builds.
//!
//! cargo run --example translate_replay [-- --adversarial]

use std::path::Path;

use ptrkg::cli::commands::{build_knowledge_graph, translate_with};
use ptrkg::cli::PipelineConfig;
use ptrkg::translator::{ReplayBackend, ReplayFixtures};

fn main() -> ptrkg::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = std::env::temp_dir().join("ptrkg-translate-replay");
    let cfg = PipelineConfig {
        output: out.clone(),
        force: true,
        ..PipelineConfig::default()
    };
    let kg = build_knowledge_graph(&root.join("fixtures/quadtree"), &cfg)?;
    let mut backend = if std::env::args().any(|a| a == "--adversarial") {
        ReplayBackend::adversarial()
    } else {
        ReplayBackend::new(ReplayFixtures::load(&root.join("fixtures/quadtree_rs"))?)
    };
    let report = translate_with(&kg, None, &cfg, &mut backend)?;
    print!("{}", report.summary());
    for u in &report.units {
        println!("  {:<32} {:?} after {} repairs", u.id, u.status, u.repair_cycles);
    }
    println!("generated crate: {}", out.join("rust").display());
    Ok(())
}
