//! Acceptance run: one PASS/FAIL line per criterion; exits nonzero if any fails.
//! Runs without the libtest harness so the lines always reach the output.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use common::graphs::{oracle_partition, random_graph, random_kg};
use common::randprog::{deviations, RandProgram};
use ptrkg::cli::commands::{build_knowledge_graph, cmd_analyze, cmd_plan, cmd_report, translate_with};
use ptrkg::cli::report::{measure_unsafe, Measured, PipelineReport, UnitStatus};
use ptrkg::cli::PipelineConfig;
use ptrkg::kgstore::KnowledgeGraph;
use ptrkg::planner::{find_sccs, order, plan};
use ptrkg::translator::project::crate_name_for;
use ptrkg::translator::{ReplayBackend, ReplayFixtures, TranslatorBackend};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.1}s (limit {}s)", e.as_secs_f64(), limit.as_secs()))
}

fn annotation_suite() -> Outcome {
    let t = Instant::now();
    let dirs = common::corpus_dirs();
    let bad: Vec<String> = dirs
        .iter()
        .flat_map(|d| {
            let name = d.file_name().unwrap().to_string_lossy().into_owned();
            common::check_corpus_program(d)
                .into_iter()
                .map(move |b| format!("{name}: {b}"))
        })
        .collect();
    let (fast, time) = within(t, Duration::from_secs(10));
    outcome(
        dirs.len() >= 20 && bad.is_empty() && fast,
        format!("{} programs, {} deviations, {time} {}", dirs.len(), bad.len(), bad.join("; ")),
    )
}

fn pointer_oracle() -> Outcome {
    let t = Instant::now();
    let mut bad = 0;
    for seed in 0..100u64 {
        let p = RandProgram::generate(&mut ChaCha8Rng::seed_from_u64(seed));
        bad += deviations(&p).len();
    }
    let (fast, time) = within(t, Duration::from_secs(60));
    outcome(bad == 0 && fast, format!("100 fixtures, {bad} deviations, {time}"))
}

fn planner_soundness() -> Outcome {
    let mut violations = Vec::new();
    for seed in 0..100u64 {
        let (n, pairs, g) = random_graph(&mut ChaCha8Rng::seed_from_u64(seed));
        let sccs = find_sccs(&g);
        if sccs.iter().cloned().collect::<std::collections::BTreeSet<_>>() != oracle_partition(n, &pairs) {
            violations.push(format!("seed {seed}: partition"));
            continue;
        }
        match order(&sccs, &g) {
            Ok(p) => {
                for e in &g.edges {
                    let (dep, user) = (p.position_of(&e.to).unwrap(), p.position_of(&e.from).unwrap());
                    if dep > user {
                        violations.push(format!("seed {seed}: {} before {}", e.from, e.to));
                    }
                }
            }
            Err(e) => violations.push(format!("seed {seed}: {e}")),
        }
    }
    let kg = common::kg_of(&common::fixture("quadtree"));
    let (p, _) = plan(&kg, &Default::default()).unwrap();
    let together = p.position_of("Func:insert_").is_some()
        && p.position_of("Func:insert_") == p.position_of("Func:split_node_");
    if !together {
        violations.push("insert_ and split_node_ are in different units".into());
    }
    outcome(
        violations.is_empty(),
        format!("100 digraphs + quadtree, {} violations {}", violations.len(), violations.join("; ")),
    )
}

struct Run {
    dir: TempDir,
    report: PipelineReport,
    elapsed: Duration,
}

fn run_quadtree(backend: &mut dyn TranslatorBackend) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PipelineConfig {
        output: dir.path().to_path_buf(),
        ..PipelineConfig::default()
    };
    let t = Instant::now();
    let kg = build_knowledge_graph(&common::fixture("quadtree"), &cfg).unwrap();
    let report = translate_with(&kg, None, &cfg, backend).unwrap();
    Run {
        dir,
        report,
        elapsed: t.elapsed(),
    }
}

fn green_build(faithful: &Run, adversarial: &Run) -> Outcome {
    let f = &faithful.report;
    let a = &adversarial.report;
    let a_all_stubbed = a
        .units
        .iter()
        .all(|u| matches!(u.status, UnitStatus::Stubbed | UnitStatus::Dropped));
    let pass = f.compiled_ratio == 1.0
        && f.final_check_green
        && a_all_stubbed
        && a.compiled_ratio == 0.0
        && a.final_check_green
        && faithful.elapsed + adversarial.elapsed < Duration::from_secs(300);
    outcome(
        pass,
        format!(
            "faithful {}/{} compiled, green={} ({:.1}s); adversarial {}/{} compiled, {} stubbed, green={} ({:.1}s)",
            f.compiled_func_count,
            f.translated_func_count,
            f.final_check_green,
            faithful.elapsed.as_secs_f64(),
            a.compiled_func_count,
            a.translated_func_count,
            a.count(UnitStatus::Stubbed),
            a.final_check_green,
            adversarial.elapsed.as_secs_f64(),
        ),
    )
}

/// Repair prompts per archived unit directory.
fn repair_counts(archive: &Path) -> Vec<(String, usize)> {
    let mut out: Vec<(String, usize)> = std::fs::read_dir(archive)
        .unwrap()
        .map(|e| {
            let dir = e.unwrap().path();
            let n = std::fs::read_dir(&dir)
                .unwrap()
                .filter(|f| f.as_ref().unwrap().file_name().to_string_lossy().ends_with("-repair.json"))
                .count();
            (dir.file_name().unwrap().to_string_lossy().into_owned(), n)
        })
        .collect();
    out.sort();
    out
}

fn bounded_repair(adversarial: &Run) -> Outcome {
    let max = PipelineConfig::default().max_repair_iterations as usize;
    let counts = repair_counts(&adversarial.dir.path().join("rust/artifacts/prompts"));
    let units = adversarial.report.units.iter().filter(|u| u.status != UnitStatus::Dropped).count();
    let off: Vec<String> = counts
        .iter()
        .filter(|(_, n)| *n != max)
        .map(|(u, n)| format!("{u}={n}"))
        .collect();
    let cycles_ok = adversarial
        .report
        .units
        .iter()
        .filter(|u| u.status != UnitStatus::Dropped)
        .all(|u| u.repair_cycles as usize == max);
    outcome(
        !counts.is_empty() && off.is_empty() && cycles_ok && counts.len() <= units,
        format!("{} archived units, each with {max} repair prompts expected; off: [{}]", counts.len(), off.join(", ")),
    )
}

fn safety_scan(faithful: &Run) -> Outcome {
    let cfg = PipelineConfig {
        output: faithful.dir.path().to_path_buf(),
        ..PipelineConfig::default()
    };
    let root = faithful.dir.path().join("rust");
    let direct = measure_unsafe(&cfg.report.unsafe_command, &root, &crate_name_for(&root));
    let reported = cmd_report(&cfg).map(|r| r.unsafe_usages);
    let pass = matches!(direct, Measured::Available { value: 0 })
        && matches!(reported, Ok(Measured::Available { value: 0 }));
    outcome(pass, format!("scanner: {direct:?}; report: {reported:?}"))
}

fn determinism() -> Outcome {
    let once = || {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig {
            output: dir.path().to_path_buf(),
            ..PipelineConfig::default()
        };
        let (kg, _) = cmd_analyze(&common::fixture("quadtree"), &cfg).unwrap();
        let (plan, _) = cmd_plan(&kg, &cfg).unwrap();
        (std::fs::read(kg).unwrap(), std::fs::read(plan).unwrap())
    };
    let (a, b) = (once(), once());
    outcome(
        a == b,
        format!("kg {} bytes, plan {} bytes, identical={}", a.0.len(), a.1.len(), a == b),
    )
}

fn kg_roundtrip() -> Outcome {
    let mut bad = Vec::new();
    for seed in 0..200u64 {
        let kg = random_kg(seed);
        let text = kg.to_json().unwrap();
        match KnowledgeGraph::from_json(&text) {
            Ok(back) if back == kg && back.to_json().unwrap() == text => {}
            Ok(_) => bad.push(format!("seed {seed}: differs")),
            Err(e) => bad.push(format!("seed {seed}: {e}")),
        }
    }
    outcome(bad.is_empty(), format!("200 graphs, {} mismatches {}", bad.len(), bad.join("; ")))
}

fn main() -> std::process::ExitCode {
    let fixtures = ReplayFixtures::load(&common::crate_dir().join("fixtures/quadtree_rs")).unwrap();
    let faithful = run_quadtree(&mut ReplayBackend::new(fixtures));
    let adversarial = run_quadtree(&mut ReplayBackend::adversarial());

    let results = [
        ("1 annotation ground truth", annotation_suite()),
        ("2 pointer-fact oracle", pointer_oracle()),
        ("3 planner soundness", planner_soundness()),
        ("4 green-build guarantee", green_build(&faithful, &adversarial)),
        ("5 bounded repair", bounded_repair(&adversarial)),
        ("6 safety scan", safety_scan(&faithful)),
        ("7 determinism", determinism()),
        ("8 kg round-trip", kg_roundtrip()),
    ];
    for (name, o) in &results {
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        std::process::ExitCode::SUCCESS
    } else {
        std::process::ExitCode::FAILURE
    }
}
