//! End-to-end behaviour of the translate loop, plan validation and the command line.

mod common;

use std::process::Command;

use ptrkg::cli::commands::{build_knowledge_graph, cmd_analyze, cmd_plan, cmd_translate, translate_with};
use ptrkg::cli::report::UnitStatus;
use ptrkg::cli::PipelineConfig;
use ptrkg::ptrfacts::EventKind;
use ptrkg::translator::{Fault, PromptKind, ReplayBackend, ReplayFixtures};
use ptrkg::Error;

fn cfg_in(dir: &std::path::Path) -> PipelineConfig {
    PipelineConfig {
        output: dir.to_path_buf(),
        ..PipelineConfig::default()
    }
}

fn fixtures() -> ReplayFixtures {
    ReplayFixtures::load(&common::fixture("quadtree_rs")).unwrap()
}

#[test]
fn type_mismatch_is_repaired_from_the_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cfg_in(dir.path());
    let kg = build_knowledge_graph(&common::fixture("quadtree"), &cfg).unwrap();
    let mut fx = fixtures();
    fx.use_variant("Func:quadtree_insert", "mismatch").unwrap();
    let mut backend = ReplayBackend::new(fx);
    let report = translate_with(&kg, None, &cfg, &mut backend).unwrap();

    let unit = report.units.iter().find(|u| u.id == "Func:quadtree_insert").unwrap();
    assert_eq!((unit.status, unit.repair_cycles), (UnitStatus::Translated, 1));
    assert_eq!(report.compiled_ratio, 1.0);
    assert!(report.final_check_green);

    let archive = dir.path().join("rust/artifacts/prompts/Func_quadtree_insert");
    let repair = std::fs::read_to_string(archive.join("01-repair.json")).unwrap();
    assert!(archive.join("00-translate.json").is_file());
    assert!(repair.contains("E0308"), "{repair}");
}

#[test]
fn late_fix_counts_every_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cfg_in(dir.path());
    let kg = build_knowledge_graph(&common::fixture("quadtree"), &cfg).unwrap();
    let mut backend = ReplayBackend::new(fixtures())
        .with_faults([("Func:quadtree_search".to_string(), Fault::Broken { fixed_after: Some(3) })]);
    let report = translate_with(&kg, None, &cfg, &mut backend).unwrap();
    let unit = report.units.iter().find(|u| u.id == "Func:quadtree_search").unwrap();
    assert_eq!((unit.status, unit.repair_cycles), (UnitStatus::Translated, 3));
    assert_eq!(backend.repair_calls("Func:quadtree_search"), 3);
    assert!(backend.calls.iter().filter(|c| c.kind == PromptKind::Correction).count() == 3);
    assert!(report.final_check_green);
}

#[test]
fn tampered_plan_is_rejected_before_translation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cfg_in(dir.path());
    let (kg, _) = cmd_analyze(&common::fixture("quadtree"), &cfg).unwrap();
    let (plan, _) = cmd_plan(&kg, &cfg).unwrap();
    let mut p: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    p["units"].as_array_mut().unwrap().reverse();
    std::fs::write(&plan, serde_json::to_string(&p).unwrap()).unwrap();

    // No fixtures configured: reaching the backend would be a configuration error instead.
    let err = cmd_translate(&kg, Some(&plan), &cfg).unwrap_err();
    assert!(matches!(err, Error::PlanViolation(_)), "{err}");
    assert!(!dir.path().join("rust").exists());
}

#[test]
fn string_table_buffer_is_reallocated_then_written() {
    let kg = common::kg_of(&common::fixture("string_table"));
    let id = kg
        .sites
        .values()
        .find(|s| s.owner_unit == "Struct:string_table_t" && s.label() == "arr")
        .unwrap()
        .id
        .clone();
    let facts = &kg.facts[&id];
    assert!(
        facts.usage_snippets.iter().any(|s| s.text.contains("realloc(")),
        "{:?}",
        facts.usage_snippets
    );
    let kinds: Vec<&EventKind> = facts.usage_path.iter().map(|e| &e.kind).collect();
    let alloc = kinds
        .iter()
        .position(|k| matches!(k, EventKind::Alloc { via } if via == "realloc"))
        .expect("realloc event");
    let write = kinds.iter().position(|k| k.is_write()).expect("write event");
    assert!(alloc < write, "{kinds:?}");
    assert!(kinds.iter().any(|k| matches!(k, EventKind::Free { .. })));
}

#[test]
fn credential_is_not_a_flag() {
    let bin = env!("CARGO_BIN_EXE_ptrkg");
    let help = Command::new(bin).args(["translate", "--help"]).output().unwrap();
    let text = String::from_utf8_lossy(&help.stdout).to_lowercase();
    assert!(help.status.success());
    for word in ["key", "token", "credential", "secret"] {
        assert!(!text.contains(&format!("--{word}")) && !text.contains(&format!("-{word}")), "{text}");
    }
    let out = Command::new(bin).args(["translate", "--api-key", "x", "kg.json"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn http_backend_needs_the_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let (kg, _) = cmd_analyze(&common::fixture("string_table"), &cfg_in(dir.path())).unwrap();
    let config = dir.path().join("ptrkg.toml");
    std::fs::write(
        &config,
        "[backend]\nkind = \"http\"\ncredential_env = \"PTRKG_TEST_UNSET_CREDENTIAL\"\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ptrkg"))
        .arg("--config")
        .arg(&config)
        .arg("--output")
        .arg(dir.path())
        .arg("translate")
        .arg(&kg)
        .env_remove("PTRKG_TEST_UNSET_CREDENTIAL")
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("PTRKG_TEST_UNSET_CREDENTIAL"), "{err}");
}

#[test]
fn cli_runs_analyze_plan_translate_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ptrkg.toml");
    std::fs::write(
        &config,
        format!(
            "[backend]\nkind = \"mock\"\nfixtures = {:?}\n",
            common::fixture("quadtree_rs")
        ),
    )
    .unwrap();
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_ptrkg"))
            .arg("--config")
            .arg(&config)
            .arg("--output")
            .arg(dir.path())
            .args(args)
            .output()
            .unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8_lossy(&out.stdout).into_owned()
    };
    let src = common::fixture("quadtree");
    run(&["analyze", src.to_str().unwrap()]);
    let kg = dir.path().join("quadtree.ptrkg.json");
    let plan = dir.path().join("plan.json");
    run(&["plan", kg.to_str().unwrap()]);
    let t = run(&["translate", kg.to_str().unwrap(), "--plan", plan.to_str().unwrap()]);
    assert!(t.contains("functions compiled: 19/19"), "{t}");
    let r = run(&["report"]);
    assert!(r.contains("unsafe usages: 0"), "{r}");
    assert!(r.contains("lints:") && !r.contains("lints: unavailable"), "{r}");
}
