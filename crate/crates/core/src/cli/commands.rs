//! The four pipeline commands. Each reads and writes files under the configured output directory:
//!
//! ```text
//! <output>/<project>.ptrkg.json   knowledge graph (analyze)
//! <output>/plan.json              translation plan (plan)
//! <output>/rust/                  generated crate, prompt archive in rust/artifacts (translate)
//! <output>/rust_copy.json         Rust-side mirror of the dependency graph (translate)
//! <output>/report.json            pipeline report (translate, completed by report)
//! ```

use std::path::{Path, PathBuf};

use super::config::{BackendKind, PipelineConfig};
use super::report::{measure_lints, measure_unsafe, PipelineReport};
use crate::annotator::annotate_project;
use crate::depgraph::{build_graph, DependencyGraph, UnitKind};
use crate::error::{Error, Result};
use crate::frontend::{parse_project, preprocess, ProjectSource};
use crate::kgstore::KnowledgeGraph;
use crate::planner::{plan, TranslationPlan};
use crate::ptrfacts::analyze;
use crate::translator::{GeneratedProject, HttpBackend, ReplayBackend, ReplayFixtures, Translator, TranslatorBackend};

pub const PLAN_FILE: &str = "plan.json";
pub const REPORT_FILE: &str = "report.json";
pub const RUST_COPY_FILE: &str = "rust_copy.json";
pub const GENERATED_DIR: &str = "rust";

fn project_name(dir: &Path) -> String {
    dir.canonicalize()
        .ok()
        .as_deref()
        .unwrap_or(dir)
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .filter(|n| !n.is_empty())
        .unwrap_or_else(|| "project".into())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Runs the whole analysis side on a C project directory.
pub fn build_knowledge_graph(project_dir: &Path, cfg: &PipelineConfig) -> Result<KnowledgeGraph> {
    let source = ProjectSource::load(project_dir)?;
    let pre = preprocess(&source, cfg)?;
    let model = parse_project(&pre)?;
    let graph = build_graph(&model)?;
    let analysis = analyze(&graph, &model, Some(&source), &cfg.analysis)?;
    let annotations = annotate_project(&analysis);
    KnowledgeGraph::build(project_name(project_dir), graph, analysis, annotations)
}

pub fn kg_path(cfg: &PipelineConfig, project: &str) -> PathBuf {
    cfg.output.join(format!("{project}.ptrkg.json"))
}

/// `analyze`: writes the knowledge graph and returns a summary.
pub fn cmd_analyze(project_dir: &Path, cfg: &PipelineConfig) -> Result<(PathBuf, String)> {
    let kg = build_knowledge_graph(project_dir, cfg)?;
    ensure_dir(&cfg.output)?;
    let path = kg_path(cfg, &kg.project);
    kg.save(&path)?;
    let count = |k: UnitKind| kg.graph.units.values().filter(|u| u.kind == k).count();
    let summary = format!(
        "{}: {} units ({} functions, {} structs), {} edges, {} pointer sites, {} refactor hints\n\
         knowledge graph written to {}\n",
        kg.project,
        kg.graph.units.len(),
        count(UnitKind::Func),
        count(UnitKind::Struct),
        kg.graph.edges.len(),
        kg.sites.len(),
        kg.hints.len(),
        path.display()
    );
    Ok((path, summary))
}

fn plan_summary(p: &TranslationPlan) -> String {
    let mut s = String::new();
    for u in &p.units {
        let members: Vec<&str> = u.members.iter().map(String::as_str).collect();
        s.push_str(&format!("{:>3}  {}\n", u.id, members.join(", ")));
    }
    for d in &p.dropped_units {
        s.push_str(&format!("  -  {} (dropped: {})\n", d.id, d.reason));
    }
    s
}

/// `plan`: computes and writes the translation plan for a stored knowledge graph.
pub fn cmd_plan(kg_file: &Path, cfg: &PipelineConfig) -> Result<(PathBuf, String)> {
    let kg = KnowledgeGraph::load(kg_file)?;
    let (p, _) = plan(&kg, &cfg.analysis)?;
    ensure_dir(&cfg.output)?;
    let path = cfg.output.join(PLAN_FILE);
    let text = serde_json::to_string_pretty(&p)? + "\n";
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok((path, plan_summary(&p)))
}

/// Loads a stored plan and checks it against the plan derived from `kg`.
pub fn validated_plan(
    kg: &KnowledgeGraph,
    plan_file: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<(TranslationPlan, DependencyGraph)> {
    let (fresh, stripped) = plan(kg, &cfg.analysis)?;
    let Some(file) = plan_file else {
        return Ok((fresh, stripped));
    };
    let text = std::fs::read_to_string(file).map_err(|e| Error::io(file, e))?;
    let stored: TranslationPlan =
        serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", file.display())))?;
    stored.check(&stripped)?;
    let dropped = |p: &TranslationPlan| -> Vec<String> {
        let mut v: Vec<String> = p.dropped_units.iter().map(|d| d.id.clone()).collect();
        v.sort();
        v
    };
    if dropped(&stored) != dropped(&fresh) {
        return Err(Error::PlanViolation(format!(
            "{} drops a different set of units than the knowledge graph implies",
            file.display()
        )));
    }
    Ok((stored, stripped))
}

pub fn make_backend(cfg: &PipelineConfig) -> Result<Box<dyn TranslatorBackend>> {
    match cfg.backend.kind {
        BackendKind::Mock => {
            let path = cfg.backend.fixtures.as_deref().ok_or_else(|| {
                Error::Config("the mock backend needs `backend.fixtures`".into())
            })?;
            Ok(Box::new(ReplayBackend::new(ReplayFixtures::load(path)?)))
        }
        BackendKind::Http => Ok(Box::new(HttpBackend::from_config(&cfg.backend)?)),
    }
}

/// Translates with an explicit backend; the plan is validated before any backend call.
pub fn translate_with(
    kg: &KnowledgeGraph,
    plan_file: Option<&Path>,
    cfg: &PipelineConfig,
    backend: &mut dyn TranslatorBackend,
) -> Result<PipelineReport> {
    let (p, stripped) = validated_plan(kg, plan_file, cfg)?;
    ensure_dir(&cfg.output)?;
    let project = GeneratedProject::scaffold(
        &cfg.output.join(GENERATED_DIR),
        &cfg.compile_check,
        cfg.force,
    )?;
    let mut t = Translator::new(kg, &stripped, project, backend, cfg.max_repair_iterations);
    let report = t.run(&p)?;
    t.copy.save(&cfg.output.join(RUST_COPY_FILE))?;
    report.save(&cfg.output.join(REPORT_FILE))?;
    Ok(report)
}

/// `translate`: runs the pipeline with the configured backend.
pub fn cmd_translate(
    kg_file: &Path,
    plan_file: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<PipelineReport> {
    let kg = KnowledgeGraph::load(kg_file)?;
    validated_plan(&kg, plan_file, cfg)?;
    let mut backend = make_backend(cfg)?;
    translate_with(&kg, plan_file, cfg, backend.as_mut())
}

/// `report`: adds lint and unsafe measurements to the stored report.
pub fn cmd_report(cfg: &PipelineConfig) -> Result<PipelineReport> {
    let path = cfg.output.join(REPORT_FILE);
    let mut report = PipelineReport::load(&path)?;
    let root = cfg.output.join(GENERATED_DIR);
    if !root.join("Cargo.toml").is_file() {
        return Err(Error::NotFound(format!(
            "no generated crate at {}",
            root.display()
        )));
    }
    report.lint = measure_lints(&cfg.report.lint_command, &root);
    let package = crate::translator::project::crate_name_for(&root);
    report.unsafe_usages = measure_unsafe(&cfg.report.unsafe_command, &root, &package);
    report.save(&path)?;
    Ok(report)
}
