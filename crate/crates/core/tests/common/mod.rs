//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub mod graphs;
pub mod randprog;

use ptrkg::annotator::{Lifetime, Mutability};
use ptrkg::cli::commands::build_knowledge_graph;
use ptrkg::cli::PipelineConfig;
use ptrkg::kgstore::KnowledgeGraph;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    crate_dir().join("fixtures").join(name)
}

pub fn corpus_dirs() -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(crate_dir().join("tests/corpus"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.join("labels.txt").is_file())
        .collect();
    dirs.sort();
    dirs
}

pub fn kg_of(dir: &Path) -> KnowledgeGraph {
    build_knowledge_graph(dir, &PipelineConfig::default())
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
}

/// Checks one corpus program against its hand labels; returns the deviations.
///
/// `labels.txt` lines read `<unit> <site> <ownership> <mutability|-> <lifetime|->`, where the
/// lifetime is `Elided`, `Static` or `Generic`. An optional `@source <dir>` line (relative to
/// the crate root) points at sources kept elsewhere. Every pointer site must be labeled.
pub fn check_corpus_program(dir: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(dir.join("labels.txt")).unwrap();
    let mut source = dir.to_path_buf();
    let mut rows = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        if let Some(s) = line.strip_prefix("@source") {
            source = crate_dir().join(s.trim());
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(f.len(), 5, "bad label line `{line}`");
        rows.push((f[0], f[1], f[2], f[3], f[4]));
    }
    let kg = kg_of(&source);
    let mut bad = Vec::new();
    if kg.annotations.len() != rows.len() {
        bad.push(format!(
            "{} sites annotated, {} labeled",
            kg.annotations.len(),
            rows.len()
        ));
    }
    for (unit, site, own, mutab, lt) in rows {
        let Some(a) = kg.annotation(unit, site) else {
            bad.push(format!("{unit} {site}: no annotation"));
            continue;
        };
        let got_mut = match a.mutability {
            Mutability::NotApplicable => "-".to_string(),
            m => m.to_string(),
        };
        let got_lt = match &a.lifetime {
            Lifetime::NotApplicable => "-",
            Lifetime::Elided => "Elided",
            Lifetime::Static => "Static",
            Lifetime::Generic(_) => "Generic",
        };
        let got = (a.ownership.to_string(), got_mut, got_lt.to_string());
        if (got.0.as_str(), got.1.as_str(), got.2.as_str()) != (own, mutab, lt) {
            bad.push(format!(
                "{unit} {site}: expected {own} {mutab} {lt}, got {} {} {}",
                got.0, got.1, got.2
            ));
        }
    }
    bad
}
