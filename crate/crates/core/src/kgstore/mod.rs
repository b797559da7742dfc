//! The pointer knowledge graph: typed store, triple projection, JSON persistence, and the
//! Rust-side copy maintained during translation.

mod rustcopy;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::annotator::{Annotations, Lifetime, Mutability, RefactorHint, RustAnnotation};
use crate::depgraph::{CodeUnit, DependencyEdge, DependencyGraph};
use crate::error::{Error, Result};
use crate::ptrfacts::{
    AliasVerdict, EventScope, PointerAnalysis, PointerFacts, PointerSite, SiteKind, Verdict,
};

pub use rustcopy::{neighbors_of, NodeStatus, RustCopy, RustCopyNode};

pub const SCHEMA_VERSION: &str = "ptrkg/1";

/// Relation names a triple may carry.
pub const PREDICATES: [&str; 13] = [
    "call",
    "refS",
    "refE",
    "refU",
    "refT",
    "refG",
    "pointsTo",
    "mayAlias",
    "noAlias",
    "derivesFrom",
    "Access",
    "usedIn",
    "isA",
];

/// `<subject, predicate, object>`; `owner` names the unit the subject belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub owner: String,
}

impl Triple {
    fn new(owner: &str, subject: impl Into<String>, predicate: &str, object: impl Into<String>) -> Self {
        debug_assert!(PREDICATES.contains(&predicate));
        Triple {
            subject: subject.into(),
            predicate: predicate.to_string(),
            object: object.into(),
            owner: owner.to_string(),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}, {}, {}>", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    pub project: String,
    pub graph: DependencyGraph,
    pub sites: BTreeMap<String, PointerSite>,
    pub facts: BTreeMap<String, PointerFacts>,
    pub annotations: BTreeMap<String, RustAnnotation>,
    pub alias: Vec<AliasVerdict>,
    pub hints: Vec<RefactorHint>,
}

/// On-disk layout: flat, id-sorted sections.
#[derive(Serialize, Deserialize)]
struct Document {
    schema_version: String,
    project: String,
    units: Vec<CodeUnit>,
    edges: Vec<DependencyEdge>,
    sites: Vec<PointerSite>,
    facts: Vec<PointerFacts>,
    annotations: Vec<RustAnnotation>,
    alias: Vec<AliasVerdict>,
    hints: Vec<RefactorHint>,
}

impl KnowledgeGraph {
    pub fn build(
        project: impl Into<String>,
        graph: DependencyGraph,
        analysis: PointerAnalysis,
        annotations: Annotations,
    ) -> Result<Self> {
        let kg = KnowledgeGraph {
            project: project.into(),
            graph,
            sites: analysis.sites,
            facts: analysis.facts,
            annotations: annotations.annotations,
            alias: analysis.alias,
            hints: annotations.hints,
        };
        kg.validate()?;
        Ok(kg)
    }

    /// Closure of the graph plus site/fact/annotation referential integrity.
    pub fn validate(&self) -> Result<()> {
        self.graph.check_closure()?;
        for s in self.sites.values() {
            if !self.graph.units.contains_key(&s.owner_unit) {
                return Err(Error::Schema(format!(
                    "site {} belongs to missing unit {}",
                    s.id, s.owner_unit
                )));
            }
        }
        let known = |id: &str, what: &str| -> Result<()> {
            if self.sites.contains_key(id) {
                Ok(())
            } else {
                Err(Error::Schema(format!("{what} refers to unknown site {id}")))
            }
        };
        for (k, f) in &self.facts {
            known(k, "facts")?;
            for d in &f.derives_from {
                known(d, "derivesFrom")?;
            }
        }
        for k in self.annotations.keys() {
            known(k, "annotation")?;
        }
        for a in &self.alias {
            known(&a.a, "alias")?;
            known(&a.b, "alias")?;
        }
        for h in &self.hints {
            known(&h.param_1, "hint")?;
            known(&h.param_2, "hint")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = Document {
            schema_version: SCHEMA_VERSION.to_string(),
            project: self.project.clone(),
            units: self.graph.units.values().cloned().collect(),
            edges: self.graph.edges.iter().cloned().collect(),
            sites: self.sites.values().cloned().collect(),
            facts: self.facts.values().cloned().collect(),
            annotations: self.annotations.values().cloned().collect(),
            alias: self.alias.clone(),
            hints: self.hints.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("schema_version").and_then(|v| v.as_str()) {
            Some(SCHEMA_VERSION) => {}
            Some(other) => {
                return Err(Error::Schema(format!("unsupported schema version {other}")));
            }
            None => return Err(Error::Schema("missing schema_version".into())),
        }
        let doc: Document =
            serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        let kg = KnowledgeGraph {
            project: doc.project,
            graph: DependencyGraph::new(doc.units, doc.edges.into_iter().collect()),
            sites: doc.sites.into_iter().map(|s| (s.id.clone(), s)).collect(),
            facts: doc.facts.into_iter().map(|f| (f.site.clone(), f)).collect(),
            annotations: doc
                .annotations
                .into_iter()
                .map(|a| (a.site.clone(), a))
                .collect(),
            alias: doc.alias,
            hints: doc.hints,
        };
        kg.validate()?;
        Ok(kg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn unit(&self, id: &str) -> Option<&CodeUnit> {
        self.graph.units.get(id)
    }

    pub fn sites_of<'a>(&'a self, unit: &'a str) -> impl Iterator<Item = &'a PointerSite> + 'a {
        self.sites.values().filter(move |s| s.owner_unit == unit)
    }

    /// Triples whose subject is one of `unit`'s sites, in a fixed order.
    pub fn site_triples(&self, unit: &str) -> Vec<Triple> {
        let mut out = Vec::new();
        for site in self.sites_of(unit) {
            let subj = site.label();
            let owner = site.owner_name();
            let facts = self.facts.get(&site.id);
            if let Some(f) = facts {
                let objs: BTreeSet<&str> = f
                    .points_to
                    .iter()
                    .map(|o| {
                        if o.is_unknown() {
                            "unknown"
                        } else {
                            o.element_type.as_str()
                        }
                    })
                    .collect();
                for o in objs {
                    out.push(Triple::new(owner, &subj, "pointsTo", o));
                }
            }
            for v in self.alias.iter().filter(|v| v.a == site.id) {
                let other = self.sites.get(&v.b).map(|s| s.label()).unwrap_or_default();
                let pred = match v.verdict {
                    Verdict::MayAlias => "mayAlias",
                    Verdict::NoAlias => "noAlias",
                };
                out.push(Triple::new(owner, &subj, pred, other));
            }
            if let Some(f) = facts {
                for d in &f.derives_from {
                    let base = self.sites.get(d).map(|s| s.label()).unwrap_or_default();
                    out.push(Triple::new(owner, &subj, "derivesFrom", base));
                }
                for (rec, m) in &f.access_set {
                    out.push(Triple::new(owner, &subj, "Access", format!("{rec}.{m}")));
                }
                for s in &f.usage_snippets {
                    out.push(Triple::new(
                        owner,
                        &subj,
                        "usedIn",
                        format!("{}:{}: {}", s.file, s.line, s.text),
                    ));
                }
                // Caller-side events stay in the facts; prompts only carry the site's own
                // and its callees' behaviour.
                for e in &f.usage_path {
                    let scope = match e.scope {
                        EventScope::Local => String::new(),
                        EventScope::Callee => format!(" (in callee {})", e.unit),
                        EventScope::Caller => continue,
                    };
                    out.push(Triple::new(
                        owner,
                        &subj,
                        "usedIn",
                        format!("{} at {}:{}{scope}", e.kind, e.file, e.line),
                    ));
                }
            }
            if let Some(a) = self.annotations.get(&site.id) {
                out.extend(annotation_triples(owner, &subj, a));
            }
        }
        let mut seen = BTreeSet::new();
        out.retain(|t| seen.insert(t.clone()));
        out
    }

    /// Dependency edges as triples (unit names as subjects and objects).
    pub fn edge_triples(&self) -> Vec<Triple> {
        self.graph
            .edges
            .iter()
            .map(|e| {
                let name = |id: &str| self.unit(id).map_or(id.to_string(), |u| u.name.clone());
                Triple::new(&name(&e.from), name(&e.from), e.relation.as_str(), name(&e.to))
            })
            .collect()
    }

    /// Semantics of a translation unit: the site triples of all its members.
    pub fn semantics_for<'a>(&self, members: impl IntoIterator<Item = &'a String>) -> Vec<Triple> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for m in members {
            for t in self.site_triples(m) {
                if seen.insert(t.clone()) {
                    out.push(t);
                }
            }
        }
        out
    }

    pub fn hints_for(&self, unit: &str) -> impl Iterator<Item = &RefactorHint> + '_ {
        let unit = unit.to_string();
        self.hints.iter().filter(move |h| h.func == unit)
    }

    /// Annotation of the site `label` of `unit`.
    pub fn annotation(&self, unit: &str, label: &str) -> Option<&RustAnnotation> {
        let site = self.sites_of(unit).find(|s| match &s.site_kind {
            SiteKind::Param { name, .. } | SiteKind::Member { name } => name == label,
            SiteKind::ReturnValue => label == "return",
        })?;
        self.annotations.get(&site.id)
    }
}

pub(crate) fn annotation_triples(owner: &str, subj: &str, a: &RustAnnotation) -> Vec<Triple> {
    let mut out = vec![Triple::new(owner, subj, "isA", a.ownership.to_string())];
    if a.mutability != Mutability::NotApplicable {
        out.push(Triple::new(owner, subj, "isA", a.mutability.to_string()));
    }
    if a.lifetime != Lifetime::NotApplicable {
        out.push(Triple::new(owner, subj, "isA", format!("Lifetime:{}", a.lifetime)));
    }
    if a.nullable {
        out.push(Triple::new(owner, subj, "isA", "Nullable"));
    }
    out
}
