//! Project-wide pointer facts: points-to sets, alias verdicts, derivation links, member
//! access sets, usage snippets and usage paths for every pointer site.

mod program;
mod relations;
mod solver;
mod usage;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cli::config::AnalysisConfig;
use crate::depgraph::{DependencyGraph, UnitDecl, UnitKind};
use crate::error::Result;
use crate::frontend::{ProjectSource, SourceModel};

use program::Program;
use solver::Solver;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteKind {
    Param { index: usize, name: String },
    ReturnValue,
    Member { name: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointerSite {
    pub id: String,
    pub owner_unit: String,
    pub site_kind: SiteKind,
    pub declared_type: String,
    pub is_function_pointer: bool,
}

impl PointerSite {
    pub fn param_id(owner: &str, index: usize, name: &str) -> String {
        format!("{owner}::param{index}:{name}")
    }

    pub fn return_id(owner: &str) -> String {
        format!("{owner}::return")
    }

    pub fn member_id(owner: &str, name: &str) -> String {
        format!("{owner}::member:{name}")
    }

    /// Name of the owning unit without its kind prefix.
    pub fn owner_name(&self) -> &str {
        self.owner_unit
            .split_once(':')
            .map_or(self.owner_unit.as_str(), |(_, n)| n)
    }

    /// Short human label: the parameter or member name, or `f.return`.
    pub fn label(&self) -> String {
        match &self.site_kind {
            SiteKind::Param { name, .. } => name.clone(),
            SiteKind::Member { name } => name.clone(),
            SiteKind::ReturnValue => format!("{}.return", self.owner_name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectKind {
    HeapAlloc { site: String },
    Global { name: String },
    Local { func: String, var: String },
    StringLiteral,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MemoryObject {
    pub id: String,
    pub kind: ObjectKind,
    pub element_type: String,
}

impl MemoryObject {
    pub fn is_unknown(&self) -> bool {
        self.kind == ObjectKind::Unknown
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum EventKind {
    Alloc { via: String },
    Free { via: String },
    Write,
    Read,
    PassAsArg { callee: String, index: usize },
    StoreIntoStructure { target: String },
    ReturnOut,
    NullCheck,
    CastAliasWrite,
    StdFnWrite { function: String },
}

impl EventKind {
    /// Ordering bucket: acquisition/initialization, uses, release.
    fn phase(&self) -> u8 {
        match self {
            EventKind::Alloc { .. } => 0,
            EventKind::Free { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_write(&self) -> bool {
        matches!(
            self,
            EventKind::Write | EventKind::StdFnWrite { .. } | EventKind::CastAliasWrite
        )
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::Alloc { via } => write!(f, "Alloc({via})"),
            EventKind::Free { via } => write!(f, "Free({via})"),
            EventKind::Write => f.write_str("Write"),
            EventKind::Read => f.write_str("Read"),
            EventKind::PassAsArg { callee, index } => write!(f, "PassAsArg({callee}, {index})"),
            EventKind::StoreIntoStructure { target } => write!(f, "StoreIntoStructure({target})"),
            EventKind::ReturnOut => f.write_str("ReturnOut"),
            EventKind::NullCheck => f.write_str("NullCheck"),
            EventKind::CastAliasWrite => f.write_str("CastAliasWrite"),
            EventKind::StdFnWrite { function } => write!(f, "StdFnWrite({function})"),
        }
    }
}

/// Where an event was observed relative to the site's own function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventScope {
    /// In the owning function's body.
    Local,
    /// Inside a callee the pointer was handed to.
    Callee,
    /// In a caller, around the call.
    Caller,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UsageEvent {
    #[serde(flatten)]
    pub kind: EventKind,
    pub file: String,
    pub line: u32,
    pub scope: EventScope,
    /// Function whose body contains the event.
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Snippet {
    pub file: String,
    pub line: u32,
    pub text: String,
}

/// Where a returned pointer or a member's stored value can come from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "origin", rename_all = "snake_case")]
pub enum Origin {
    Param { index: usize },
    Literal,
    Global { name: String },
    Heap,
    Local,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointerFacts {
    pub site: String,
    pub points_to: BTreeSet<MemoryObject>,
    pub derives_from: BTreeSet<String>,
    pub access_set: BTreeSet<(String, String)>,
    pub usage_snippets: Vec<Snippet>,
    pub usage_path: Vec<UsageEvent>,
    #[serde(default)]
    pub origins: BTreeSet<Origin>,
}

impl PointerFacts {
    fn empty(site: &str) -> Self {
        PointerFacts {
            site: site.to_string(),
            points_to: BTreeSet::new(),
            derives_from: BTreeSet::new(),
            access_set: BTreeSet::new(),
            usage_snippets: Vec::new(),
            usage_path: Vec::new(),
            origins: BTreeSet::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    MayAlias,
    NoAlias,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AliasVerdict {
    pub a: String,
    pub b: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Every pointer-typed param, return and record member of the graph's units.
pub fn collect_sites(graph: &DependencyGraph, model: &SourceModel) -> BTreeSet<PointerSite> {
    let mut sites = BTreeSet::new();
    for unit in graph.units.values() {
        match &unit.decl {
            UnitDecl::Func { params, ret, .. } => {
                for (i, p) in params.iter().enumerate() {
                    if model.is_pointer(&p.ty) {
                        sites.insert(PointerSite {
                            id: PointerSite::param_id(&unit.id, i, &p.name),
                            owner_unit: unit.id.clone(),
                            site_kind: SiteKind::Param {
                                index: i,
                                name: p.name.clone(),
                            },
                            declared_type: model.display_type(&p.ty),
                            is_function_pointer: model.is_function_pointer(&p.ty),
                        });
                    }
                }
                if model.is_pointer(ret) {
                    sites.insert(PointerSite {
                        id: PointerSite::return_id(&unit.id),
                        owner_unit: unit.id.clone(),
                        site_kind: SiteKind::ReturnValue,
                        declared_type: model.display_type(ret),
                        is_function_pointer: model.is_function_pointer(ret),
                    });
                }
            }
            UnitDecl::Record { fields, .. } if unit.kind.is_record() => {
                for fd in fields {
                    if model.is_pointer(&fd.ty) {
                        sites.insert(PointerSite {
                            id: PointerSite::member_id(&unit.id, &fd.name),
                            owner_unit: unit.id.clone(),
                            site_kind: SiteKind::Member {
                                name: fd.name.clone(),
                            },
                            declared_type: model.display_type(&fd.ty),
                            is_function_pointer: model.is_function_pointer(&fd.ty),
                        });
                    }
                }
            }
            _ => {}
        }
    }
    sites
}

/// The complete fact base for one project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointerAnalysis {
    pub sites: BTreeMap<String, PointerSite>,
    pub facts: BTreeMap<String, PointerFacts>,
    pub alias: Vec<AliasVerdict>,
    /// Solver rounds needed to reach the fixed point.
    pub rounds: usize,
}

impl PointerAnalysis {
    pub fn site(&self, id: &str) -> Option<&PointerSite> {
        self.sites.get(id)
    }

    pub fn facts(&self, id: &str) -> Option<&PointerFacts> {
        self.facts.get(id)
    }

    /// Sites owned by `unit`, in id order.
    pub fn sites_of<'a>(&'a self, unit: &'a str) -> impl Iterator<Item = &'a PointerSite> + 'a {
        self.sites.values().filter(move |s| s.owner_unit == unit)
    }

    /// Looks a site up by owner and label (`param name`, `member name` or `return`).
    pub fn find(&self, unit: &str, label: &str) -> Option<&PointerSite> {
        self.sites.values().find(|s| {
            s.owner_unit == unit
                && match &s.site_kind {
                    SiteKind::Param { name, .. } | SiteKind::Member { name } => name == label,
                    SiteKind::ReturnValue => label == "return",
                }
        })
    }

    pub fn verdict(&self, a: &str, b: &str) -> Option<Verdict> {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.alias
            .iter()
            .find(|v| v.a == a && v.b == b)
            .map(|v| v.verdict)
    }
}

/// Runs every analysis over the project and assembles per-site facts.
pub fn analyze(
    graph: &DependencyGraph,
    model: &SourceModel,
    source: Option<&ProjectSource>,
    cfg: &AnalysisConfig,
) -> Result<PointerAnalysis> {
    Analyzer::new(graph, model, cfg)?.finish(source)
}

/// Intermediate analysis state; exposes the individual computations.
pub struct Analyzer<'m> {
    prog: Program<'m>,
    graph: &'m DependencyGraph,
    cfg: &'m AnalysisConfig,
    sites: BTreeMap<String, PointerSite>,
    points_to: BTreeMap<String, BTreeSet<MemoryObject>>,
    access: BTreeMap<String, BTreeSet<(String, String)>>,
    paths: BTreeMap<String, Vec<UsageEvent>>,
    origins: BTreeMap<String, BTreeSet<Origin>>,
    rounds: usize,
}

impl<'m> Analyzer<'m> {
    pub fn new(
        graph: &'m DependencyGraph,
        model: &'m SourceModel,
        cfg: &'m AnalysisConfig,
    ) -> Result<Self> {
        let prog = Program::new(model);
        let sites: BTreeMap<String, PointerSite> = collect_sites(graph, model)
            .into_iter()
            .map(|s| (s.id.clone(), s))
            .collect();
        let mut a = Analyzer {
            prog,
            graph,
            cfg,
            sites,
            points_to: BTreeMap::new(),
            access: BTreeMap::new(),
            paths: BTreeMap::new(),
            origins: BTreeMap::new(),
            rounds: 0,
        };
        a.solve_points_to()?;
        a.access = relations::access_sets(&a.prog, &a.sites);
        a.origins = usage::origins(&a.prog, &a.sites, cfg);
        a.paths = usage::usage_paths(&a.prog, &a.sites, cfg, a.iteration_cap())?;
        Ok(a)
    }

    /// |units| × |sites|, the documented bound for every fixed-point loop.
    fn iteration_cap(&self) -> usize {
        (self.graph.units.len() * self.sites.len()).max(2)
    }

    fn solve_points_to(&mut self) -> Result<()> {
        let mut solver = Solver::new(&self.prog, self.cfg);
        solver.solve(self.iteration_cap())?;
        self.rounds = solver.rounds;
        for site in self.sites.values() {
            let key = site.owner_name();
            let set = match &site.site_kind {
                SiteKind::Param { index, .. } => {
                    let mut acc = BTreeSet::new();
                    let calls: Vec<_> = self.prog.calls_to(key).cloned().collect();
                    for c in calls {
                        if let Some(arg) = c.args.get(*index) {
                            let f = self.prog.funcs.get(&c.caller);
                            acc.extend(solver.eval(f, arg));
                        }
                    }
                    acc
                }
                SiteKind::ReturnValue => solver
                    .pts
                    .get(&solver::Var::Ret(key.to_string()))
                    .cloned()
                    .unwrap_or_default(),
                SiteKind::Member { name } => {
                    let tag = self.record_tag(&site.owner_unit);
                    solver
                        .pts
                        .get(&solver::Var::Field(tag, name.clone()))
                        .cloned()
                        .unwrap_or_default()
                }
            };
            self.points_to
                .insert(site.id.clone(), solver.object_set(&set));
        }
        Ok(())
    }

    fn record_tag(&self, unit: &str) -> String {
        match self.graph.units.get(unit).map(|u| &u.decl) {
            Some(UnitDecl::Record { tag, .. }) => tag.clone(),
            _ => String::new(),
        }
    }

    pub fn sites(&self) -> &BTreeMap<String, PointerSite> {
        &self.sites
    }

    /// Points-to set of a site (params: union over all direct call sites).
    pub fn compute_points_to(&self, site: &str) -> BTreeSet<MemoryObject> {
        self.points_to.get(site).cloned().unwrap_or_default()
    }

    /// Access sets of the pointer params of `func`.
    pub fn compute_access(&self, func: &str) -> BTreeMap<String, BTreeSet<(String, String)>> {
        self.sites
            .values()
            .filter(|s| s.owner_unit == func && matches!(s.site_kind, SiteKind::Param { .. }))
            .map(|s| (s.id.clone(), self.access.get(&s.id).cloned().unwrap_or_default()))
            .collect()
    }

    /// Alias verdicts for every pair of pointer params of `func`.
    pub fn compute_alias(&self, func: &str) -> Vec<AliasVerdict> {
        let params: Vec<&PointerSite> = self
            .sites
            .values()
            .filter(|s| s.owner_unit == func && matches!(s.site_kind, SiteKind::Param { .. }))
            .collect();
        let called = self
            .graph
            .units
            .get(func)
            .is_some_and(|u| self.prog.calls_to(&u.name).next().is_some());
        let mut out = Vec::new();
        for (i, a) in params.iter().enumerate() {
            for b in &params[i + 1..] {
                let (a, b) = if a.id <= b.id { (a, b) } else { (b, a) };
                let pa = self.compute_points_to(&a.id);
                let pb = self.compute_points_to(&b.id);
                let (verdict, note) = if !called {
                    (Verdict::NoAlias, Some("unobserved".to_string()))
                } else if pa.iter().chain(&pb).any(MemoryObject::is_unknown)
                    || pa.intersection(&pb).next().is_some()
                {
                    (Verdict::MayAlias, None)
                } else {
                    (Verdict::NoAlias, None)
                };
                out.push(AliasVerdict {
                    a: a.id.clone(),
                    b: b.id.clone(),
                    verdict,
                    note,
                });
            }
        }
        out
    }

    /// `(derived, base)` site pairs for params of `func`.
    pub fn compute_derives_from(&self, func: &str) -> BTreeSet<(String, String)> {
        let Some(unit) = self.graph.units.get(func) else {
            return BTreeSet::new();
        };
        relations::derives_from(&self.prog, &self.sites, unit)
    }

    /// Source lines operating on a member site.
    pub fn collect_member_usage(&self, site: &str, source: Option<&ProjectSource>) -> Vec<Snippet> {
        match self.sites.get(site) {
            Some(s @ PointerSite {
                site_kind: SiteKind::Member { name },
                ..
            }) => usage::member_snippets(&self.prog, &self.record_tag(&s.owner_unit), name, source),
            _ => Vec::new(),
        }
    }

    pub fn build_usage_path(&self, site: &str) -> Vec<UsageEvent> {
        self.paths.get(site).cloned().unwrap_or_default()
    }

    /// Recomputes one site's path from the published paths of everything else.
    pub fn rebuild_usage_path(&self, site: &str) -> Vec<UsageEvent> {
        match self.sites.get(site) {
            Some(s) => usage::path_for(&self.prog, self.cfg, &self.sites, &self.paths, s),
            None => Vec::new(),
        }
    }

    pub fn origins(&self, site: &str) -> BTreeSet<Origin> {
        self.origins.get(site).cloned().unwrap_or_default()
    }

    pub fn finish(self, source: Option<&ProjectSource>) -> Result<PointerAnalysis> {
        let mut facts = BTreeMap::new();
        let mut alias = Vec::new();
        let mut derived: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for unit in self.graph.units.values().filter(|u| u.kind == UnitKind::Func) {
            alias.extend(self.compute_alias(&unit.id));
            for (d, b) in self.compute_derives_from(&unit.id) {
                derived.entry(d).or_default().insert(b);
            }
        }
        for site in self.sites.values() {
            let mut f = PointerFacts::empty(&site.id);
            f.points_to = self.compute_points_to(&site.id);
            f.derives_from = derived.remove(&site.id).unwrap_or_default();
            f.access_set = self.access.get(&site.id).cloned().unwrap_or_default();
            f.usage_snippets = self.collect_member_usage(&site.id, source);
            f.usage_path = self.build_usage_path(&site.id);
            f.origins = self.origins(&site.id);
            facts.insert(site.id.clone(), f);
        }
        alias.sort();
        Ok(PointerAnalysis {
            sites: self.sites,
            facts,
            alias,
            rounds: self.rounds,
        })
    }
}

/// Phase ordering (acquire, use, release) with duplicates removed.
pub(crate) fn normalize_path(events: Vec<UsageEvent>) -> Vec<UsageEvent> {
    // Canonical order (phase, then scope and source position) so that paths assembled
    // from imports in different orders compare equal.
    let set: BTreeSet<UsageEvent> = events.into_iter().collect();
    let mut out: Vec<UsageEvent> = set.into_iter().collect();
    out.sort_by(|a, b| {
        (a.kind.phase(), a.scope, &a.file, a.line, &a.unit)
            .cmp(&(b.kind.phase(), b.scope, &b.file, b.line, &b.unit))
            .then_with(|| a.kind.cmp(&b.kind))
    });
    out
}
