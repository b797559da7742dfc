//! The unit-by-unit translation loop.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::Serialize;

use super::backend::TranslatorBackend;
use super::project::{placement_for, split_sections, CompileOutcome, GeneratedProject};
use super::prompt::{assemble_correction_prompt, assemble_translation_prompt, PromptDocument};
use super::stub::{signature_of, StubBuilder};
use crate::cli::report::{PipelineReport, UnitReport, UnitStatus};
use crate::depgraph::{CodeUnit, DependencyGraph, UnitDecl};
use crate::error::{Error, Result};
use crate::kgstore::{KnowledgeGraph, NodeStatus, RustCopy};
use crate::planner::{TranslationPlan, TranslationUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairOutcome {
    Fixed { cycles: u32 },
    Exhausted { cycles: u32 },
}

#[derive(Serialize)]
struct ArchiveEntry<'a> {
    prompt: &'a PromptDocument,
    rendered: String,
    response: std::result::Result<&'a str, String>,
}

pub struct Translator<'a> {
    kg: &'a KnowledgeGraph,
    /// Deallocation-stripped graph whose texts are translated.
    graph: &'a DependencyGraph,
    pub project: GeneratedProject,
    pub copy: RustCopy,
    backend: &'a mut dyn TranslatorBackend,
    max_repairs: u32,
    archive: Option<PathBuf>,
    abandoned: BTreeSet<String>,
    steps: BTreeMap<String, u32>,
}

fn archive_key(tu: &TranslationUnit) -> String {
    tu.members
        .iter()
        .next()
        .map(|m| m.replace([':', '/', '\\', '.'], "_"))
        .unwrap_or_default()
}

impl<'a> Translator<'a> {
    pub fn new(
        kg: &'a KnowledgeGraph,
        graph: &'a DependencyGraph,
        project: GeneratedProject,
        backend: &'a mut dyn TranslatorBackend,
        max_repairs: u32,
    ) -> Self {
        let archive = Some(project.root.join("artifacts").join("prompts"));
        Translator {
            kg,
            graph,
            project,
            copy: RustCopy::default(),
            backend,
            max_repairs: max_repairs.max(1),
            archive,
            abandoned: BTreeSet::new(),
            steps: BTreeMap::new(),
        }
    }

    /// Disables the prompt archive.
    pub fn without_archive(mut self) -> Self {
        self.archive = None;
        self
    }

    fn unit(&self, id: &str) -> Result<&'a CodeUnit> {
        self.graph
            .units
            .get(id)
            .ok_or_else(|| Error::Validation(format!("plan names unknown unit {id}")))
    }

    fn archive_step(
        &mut self,
        tu: &TranslationUnit,
        kind: &str,
        prompt: &PromptDocument,
        response: &Result<String>,
    ) -> Result<()> {
        let Some(dir) = &self.archive else {
            return Ok(());
        };
        let key = archive_key(tu);
        let step = self.steps.entry(key.clone()).or_insert(0);
        let dir = dir.join(&key);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(format!("{:02}-{kind}.json", *step));
        *step += 1;
        let entry = ArchiveEntry {
            prompt,
            rendered: prompt.render(),
            response: match response {
                Ok(s) => Ok(s.as_str()),
                Err(e) => Err(e.to_string()),
            },
        };
        let text = serde_json::to_string_pretty(&entry)? + "\n";
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    fn record(&mut self, tu: &TranslationUnit, status: NodeStatus) -> Result<()> {
        for m in &tu.members {
            let unit = self.unit(m)?;
            let text = self.project.section(m).unwrap_or("").to_string();
            let signature = match &unit.decl {
                UnitDecl::Func { c_name, .. } => signature_of(&text, c_name),
                _ => signature_of(&text, ""),
            };
            self.copy.record_translation(
                m,
                &text,
                &signature,
                &placement_for(unit),
                self.kg.site_triples(m),
                status,
                self.graph,
            );
        }
        Ok(())
    }

    /// Writes `code` into the project, records it in the Rust copy and runs the compile check.
    pub fn integrate_and_verify(&mut self, tu: &TranslationUnit, code: &str) -> Result<CompileOutcome> {
        if code.trim().is_empty() {
            return Err(Error::Validation("empty code for integration".into()));
        }
        let first = tu
            .members
            .iter()
            .next()
            .ok_or_else(|| Error::Validation("translation unit without members".into()))?;
        let mut texts: BTreeMap<&str, String> = BTreeMap::new();
        for (id, text) in split_sections(code) {
            let target = match id.as_deref() {
                Some(i) if tu.members.contains(i) => tu.members.get(i).map(String::as_str),
                _ => Some(first.as_str()),
            };
            if let Some(t) = target {
                texts.entry(t).or_default().push_str(&text);
            }
        }
        for (m, text) in texts {
            let unit = self.unit(m)?;
            self.project.put_section(&placement_for(unit), m, &text);
        }
        self.project.render()?;
        self.record(tu, NodeStatus::Translated)?;
        let outcome = self.project.check()?;
        if outcome == CompileOutcome::Clean {
            self.project.commit();
        }
        Ok(outcome)
    }

    /// Bounded repair loop; a failing backend call still consumes a cycle.
    pub fn correct_errors(
        &mut self,
        tu: &TranslationUnit,
        mut outcome: CompileOutcome,
    ) -> Result<RepairOutcome> {
        if outcome == CompileOutcome::Clean {
            return Err(Error::Validation("repair invoked without diagnostics".into()));
        }
        for cycle in 1..=self.max_repairs {
            let prompt =
                assemble_correction_prompt(tu, &outcome, &self.project, &self.copy, self.graph)?;
            let response = self.backend.repair(&prompt);
            self.archive_step(tu, "repair", &prompt, &response)?;
            let code = match response {
                Ok(c) if !c.trim().is_empty() => c,
                Ok(_) => continue,
                Err(e) => {
                    tracing::warn!(error = %e, "repair request failed");
                    continue;
                }
            };
            outcome = self.integrate_and_verify(tu, &code)?;
            if outcome == CompileOutcome::Clean {
                return Ok(RepairOutcome::Fixed { cycles: cycle });
            }
        }
        Ok(RepairOutcome::Exhausted {
            cycles: self.max_repairs,
        })
    }

    fn drop_from_copy(&mut self, tu: &TranslationUnit) {
        for m in &tu.members {
            self.copy.remove(m);
        }
    }

    /// Restores the last green state and integrates signature-faithful stubs; degrades to opaque
    /// types once, then abandons the unit.
    pub fn stub_fallback(&mut self, tu: &TranslationUnit) -> Result<UnitStatus> {
        self.project.revert()?;
        self.drop_from_copy(tu);
        for opaque in [false, true] {
            let mut stubs = Vec::new();
            {
                let mut b = StubBuilder::new(self.kg, self.graph, &self.copy);
                b.opaque = opaque;
                for m in &tu.members {
                    let u = self.unit(m)?;
                    if !matches!(u.decl, UnitDecl::Func { .. }) {
                        b.pending.insert(m.clone(), StubBuilder::type_name(u));
                    }
                }
                for m in &tu.members {
                    stubs.push((m.clone(), b.stub(self.unit(m)?)));
                }
            }
            for (m, text) in &stubs {
                let place = placement_for(self.unit(m)?);
                self.project.put_section(&place, m, text);
            }
            self.project.render()?;
            self.record(tu, NodeStatus::Stubbed)?;
            if self.project.check()? == CompileOutcome::Clean {
                self.project.commit();
                return Ok(UnitStatus::Stubbed);
            }
            self.project.revert()?;
            self.drop_from_copy(tu);
        }
        self.abandoned.extend(tu.members.iter().cloned());
        Ok(UnitStatus::Abandoned)
    }

    fn depends_on_abandoned(&self, tu: &TranslationUnit) -> Option<String> {
        tu.members.iter().find_map(|m| {
            self.graph
                .successors(m)
                .find(|e| self.abandoned.contains(&e.to))
                .map(|e| e.to.clone())
        })
    }

    fn translate_unit(&mut self, tu: &TranslationUnit) -> Result<(UnitStatus, u32, Option<String>)> {
        if let Some(dep) = self.depends_on_abandoned(tu) {
            let status = self.stub_fallback(tu)?;
            return Ok((status, 0, Some(format!("stubbed because {dep} was abandoned"))));
        }
        let prompt = assemble_translation_prompt(tu, self.kg, self.graph, &self.copy)?;
        let response = self.backend.translate(&prompt);
        self.archive_step(tu, "translate", &prompt, &response)?;
        let outcome = match response {
            Ok(code) if !code.trim().is_empty() => self.integrate_and_verify(tu, &code)?,
            Ok(_) => CompileOutcome::Diagnostics(vec![backend_failure("empty response")]),
            Err(e) => CompileOutcome::Diagnostics(vec![backend_failure(&e.to_string())]),
        };
        if outcome == CompileOutcome::Clean {
            return Ok((UnitStatus::Translated, 0, None));
        }
        match self.correct_errors(tu, outcome)? {
            RepairOutcome::Fixed { cycles } => Ok((UnitStatus::Translated, cycles, None)),
            RepairOutcome::Exhausted { cycles } => {
                let status = self.stub_fallback(tu)?;
                Ok((status, cycles, Some("repair budget exhausted".into())))
            }
        }
    }

    /// Translates every unit of `plan` in order and reports per-unit outcomes.
    pub fn run(&mut self, plan: &TranslationPlan) -> Result<PipelineReport> {
        for tu in &plan.units {
            for m in &tu.members {
                self.unit(m)?;
            }
        }
        let mut units = Vec::new();
        for tu in &plan.units {
            let (status, cycles, note) = match self.translate_unit(tu) {
                Ok(r) => r,
                Err(e) => {
                    self.project.revert()?;
                    return Err(e);
                }
            };
            tracing::info!(unit = %tu.members.iter().next().map(String::as_str).unwrap_or(""), ?status, cycles, "unit done");
            for m in &tu.members {
                let u = self.unit(m)?;
                units.push(UnitReport {
                    id: m.clone(),
                    kind: u.kind,
                    status,
                    translation_unit: Some(tu.id),
                    repair_cycles: cycles,
                    note: note.clone(),
                });
            }
        }
        for d in &plan.dropped_units {
            let kind = self
                .kg
                .unit(&d.id)
                .map(|u| u.kind)
                .ok_or_else(|| Error::Validation(format!("plan drops unknown unit {}", d.id)))?;
            units.push(UnitReport {
                id: d.id.clone(),
                kind,
                status: UnitStatus::Dropped,
                translation_unit: None,
                repair_cycles: 0,
                note: Some(d.reason.clone()),
            });
        }
        let green = self.project.check()? == CompileOutcome::Clean;
        Ok(PipelineReport::new(units, green))
    }
}

fn backend_failure(msg: &str) -> super::project::Diagnostic {
    super::project::Diagnostic {
        code: None,
        message: format!("backend produced no usable code: {msg}"),
        file: None,
        line_start: 0,
        line_end: 0,
        unit: None,
        rendered: String::new(),
    }
}
