//! Prompt documents for translation and correction requests.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::project::{begin_marker, CompileOutcome, Diagnostic, GeneratedProject};
use crate::depgraph::{DependencyGraph, UnitKind};
use crate::error::{Error, Result};
use crate::kgstore::{neighbors_of, KnowledgeGraph, RustCopy, Triple};
use crate::planner::TranslationUnit;

pub const RULES: &str = include_str!("../../templates/rules.txt");
const TRANSLATION_TEMPLATE: &str = include_str!("../../templates/translation.txt");
const CORRECTION_TEMPLATE: &str = include_str!("../../templates/correction.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptKind {
    Translation,
    Correction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptDocument {
    pub kind: PromptKind,
    /// Code unit ids of the translation unit, in order.
    pub unit_ids: Vec<String>,
    pub unit_source: String,
    pub semantics: Vec<Triple>,
    pub refactor_hints: String,
    /// `(unit name, signature or full text)`.
    pub translated_context: Vec<(String, String)>,
    pub rules: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub current_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_description: Option<String>,
    /// `(rust text, annotations)` of Rust-copy neighbours.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neighbor_context: Vec<(String, Vec<Triple>)>,
}

/// Replaces `{key}` placeholders in one pass so substituted text is never re-expanded.
fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(i) = rest.find('{') {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 1..];
        let hit = tail.find('}').and_then(|j| {
            let key = &tail[..j];
            vars.iter().find(|(k, _)| *k == key).map(|(_, v)| (j, *v))
        });
        match hit {
            Some((j, v)) => {
                out.push_str(v);
                rest = &tail[j + 1..];
            }
            None => {
                out.push('{');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    out
}

fn or_none(s: String) -> String {
    if s.trim().is_empty() {
        "(none)".into()
    } else {
        s
    }
}

impl PromptDocument {
    /// The text sent to a model.
    pub fn render(&self) -> String {
        let units = self.unit_ids.join(", ");
        let source = self.unit_source.trim_end();
        let rules = self.rules.trim_end();
        match self.kind {
            PromptKind::Translation => {
                let semantics = self
                    .semantics
                    .iter()
                    .map(|t| format!("{t}\n"))
                    .collect::<String>();
                let context = self
                    .translated_context
                    .iter()
                    .map(|(n, t)| format!("// {n}\n{}\n", t.trim_end()))
                    .collect::<String>();
                let context = if context.is_empty() {
                    String::new()
                } else {
                    format!("```rust\n{context}```")
                };
                fill(
                    TRANSLATION_TEMPLATE,
                    &[
                        ("units", &units),
                        ("source", source),
                        ("semantics", &or_none(semantics)),
                        ("hints", &or_none(self.refactor_hints.clone())),
                        ("context", &or_none(context)),
                        ("rules", rules),
                    ],
                )
            }
            PromptKind::Correction => {
                let neighbors = self
                    .neighbor_context
                    .iter()
                    .map(|(code, ann)| {
                        let ann: String = ann.iter().map(|t| format!("// {t}\n")).collect();
                        format!("```rust\n{ann}{}\n```\n", code.trim_end())
                    })
                    .collect::<String>();
                fill(
                    CORRECTION_TEMPLATE,
                    &[
                        ("units", &units),
                        ("code", self.current_code.as_deref().unwrap_or("").trim_end()),
                        ("errors", self.error_description.as_deref().unwrap_or("")),
                        ("neighbors", &or_none(neighbors)),
                        ("source", source),
                        ("rules", rules),
                    ],
                )
            }
        }
    }
}

fn unit_source(tu: &TranslationUnit, graph: &DependencyGraph) -> String {
    tu.members
        .iter()
        .filter_map(|m| graph.units.get(m))
        .map(|u| format!("/* {} */\n{}\n", u.id, u.source_text.trim_end()))
        .collect()
}

/// Translation request for `tu`; every dependency outside the unit must already be in `copy`.
pub fn assemble_translation_prompt(
    tu: &TranslationUnit,
    kg: &KnowledgeGraph,
    graph: &DependencyGraph,
    copy: &RustCopy,
) -> Result<PromptDocument> {
    let mut deps: BTreeSet<&str> = BTreeSet::new();
    for m in &tu.members {
        for e in graph.successors(m) {
            if !tu.members.contains(&e.to) {
                deps.insert(e.to.as_str());
            }
        }
    }
    let mut context = Vec::new();
    for d in deps {
        let node = copy.nodes.get(d).ok_or_else(|| {
            Error::PlanViolation(format!(
                "{d} is needed by {} but has not been translated yet",
                tu.members.iter().next().map(String::as_str).unwrap_or("")
            ))
        })?;
        let is_func = graph.units.get(d).is_some_and(|u| u.kind == UnitKind::Func);
        let text = if is_func {
            node.signature_text.clone()
        } else {
            node.rust_text.clone()
        };
        let name = graph.units.get(d).map_or(d.to_string(), |u| u.name.clone());
        context.push((name, text));
    }
    let hints: Vec<String> = tu
        .members
        .iter()
        .flat_map(|m| kg.hints_for(m))
        .map(|h| h.render(&kg.sites, &kg.annotations))
        .collect();
    Ok(PromptDocument {
        kind: PromptKind::Translation,
        unit_ids: tu.members.iter().cloned().collect(),
        unit_source: unit_source(tu, graph),
        semantics: kg.semantics_for(&tu.members),
        refactor_hints: hints.join("\n\n"),
        translated_context: context,
        rules: RULES.to_string(),
        current_code: None,
        error_description: None,
        neighbor_context: Vec::new(),
    })
}

/// All errors of one unit folded into one description.
pub fn aggregate_errors(diags: &[Diagnostic]) -> String {
    let mut seen = BTreeSet::new();
    diags
        .iter()
        .filter(|d| seen.insert(d.rendered.clone()))
        .map(|d| {
            let head = match &d.code {
                Some(c) => format!("error[{c}]: {}", d.message),
                None => format!("error: {}", d.message),
            };
            let at = match &d.file {
                Some(f) => format!(" ({f}:{})", d.line_start),
                None => String::new(),
            };
            let body = d.rendered.trim_end();
            if body.is_empty() || body == d.message {
                format!("{head}{at}\n")
            } else {
                format!("{head}{at}\n{body}\n")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Correction request built from the unit's current code, its errors and Rust-copy neighbours.
pub fn assemble_correction_prompt(
    tu: &TranslationUnit,
    outcome: &CompileOutcome,
    project: &GeneratedProject,
    copy: &RustCopy,
    graph: &DependencyGraph,
) -> Result<PromptDocument> {
    let CompileOutcome::Diagnostics(diags) = outcome else {
        return Err(Error::Validation(
            "correction requested for a unit that compiles".into(),
        ));
    };
    let code: String = tu
        .members
        .iter()
        .map(|m| {
            format!(
                "{}\n{}",
                begin_marker(m),
                project.section(m).unwrap_or("").trim_end()
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let mut seen = BTreeSet::new();
    let mut neighbors = Vec::new();
    for m in &tu.members {
        if !copy.nodes.contains_key(m) {
            continue;
        }
        for (node, ann) in neighbors_of(m, copy)? {
            if tu.members.contains(&node.source_unit) || !seen.insert(node.source_unit.clone()) {
                continue;
            }
            neighbors.push((node.rust_text.clone(), ann));
        }
    }
    Ok(PromptDocument {
        kind: PromptKind::Correction,
        unit_ids: tu.members.iter().cloned().collect(),
        unit_source: unit_source(tu, graph),
        semantics: Vec::new(),
        refactor_hints: String::new(),
        translated_context: Vec::new(),
        rules: RULES.to_string(),
        current_code: Some(code),
        error_description: Some(aggregate_errors(diags)),
        neighbor_context: neighbors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fill_is_single_pass() {
        let s = fill("a {x} b {y} {z}", &[("x", "{y}"), ("y", "2")]);
        assert_eq!(s, "a {y} b 2 {z}");
    }

    #[test]
    fn errors_are_aggregated_once() {
        let d = Diagnostic {
            code: Some("E0308".into()),
            message: "mismatched types".into(),
            file: Some("src/q.rs".into()),
            line_start: 3,
            line_end: 3,
            unit: None,
            rendered: "error[E0308]: mismatched types".into(),
        };
        let mut e = d.clone();
        e.code = Some("E0425".into());
        e.message = "cannot find value".into();
        e.rendered = "error[E0425]: cannot find value".into();
        let text = aggregate_errors(&[d.clone(), d, e]);
        assert_eq!(text.matches("E0308]: mismatched").count(), 2);
        assert!(text.contains("E0425"));
    }
}
