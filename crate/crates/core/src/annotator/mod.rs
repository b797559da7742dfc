//! Ownership, mutability, lifetime and nullability labels derived from usage paths.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ptrfacts::{
    EventKind, EventScope, Origin, PointerAnalysis, PointerSite, SiteKind, UsageEvent,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Ownership {
    Owning,
    Borrowed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Mutability {
    Mutable,
    Immutable,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "class", content = "label")]
pub enum Lifetime {
    Generic(String),
    Static,
    Elided,
    NotApplicable,
}

impl fmt::Display for Ownership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Mutability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl fmt::Display for Lifetime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lifetime::Generic(l) => write!(f, "Generic('{l})"),
            Lifetime::Static => f.write_str("Static"),
            Lifetime::Elided => f.write_str("Elided"),
            Lifetime::NotApplicable => f.write_str("NotApplicable"),
        }
    }
}

/// Rule identifiers recorded in traces.
pub mod rules {
    pub const OWN_ALLOC: &str = "ownership/allocates";
    pub const OWN_FREE: &str = "ownership/releases";
    pub const OWN_STORE: &str = "ownership/stored-and-released";
    pub const MUT_WRITE: &str = "mutability/write";
    pub const LT_SHARED: &str = "lifetime/shared-input";
    pub const LT_STATIC: &str = "lifetime/static-origin";
    pub const LT_ELIDED: &str = "lifetime/single-input";
    pub const LT_TIED: &str = "lifetime/tied-to-input";
    pub const LT_AMBIGUOUS: &str = "lifetime/ambiguous-origin";
    pub const LT_MEMBER: &str = "lifetime/member-borrow";
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleFiring {
    pub rule: String,
    pub file: String,
    pub line: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RuleFiring {
    fn at(rule: &str, e: &UsageEvent) -> Self {
        RuleFiring {
            rule: rule.to_string(),
            file: e.file.clone(),
            line: e.line,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RustAnnotation {
    pub site: String,
    pub ownership: Ownership,
    pub mutability: Mutability,
    pub lifetime: Lifetime,
    pub nullable: bool,
    pub rule_trace: Vec<RuleFiring>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefactorHint {
    pub func: String,
    /// The derived parameter (its actual is a member path of `param_2`'s actual).
    pub param_1: String,
    pub param_2: String,
    pub accessed_members_1: BTreeSet<(String, String)>,
    pub accessed_members_2: BTreeSet<(String, String)>,
}

impl RefactorHint {
    /// Guidance text for translation prompts.
    pub fn render(
        &self,
        sites: &BTreeMap<String, PointerSite>,
        annotations: &BTreeMap<String, RustAnnotation>,
    ) -> String {
        let name = |id: &str| sites.get(id).map(|s| s.label()).unwrap_or_default();
        let members = |m: &BTreeSet<(String, String)>| {
            m.iter()
                .map(|(_, f)| f.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mutab = |id: &str| {
            annotations
                .get(id)
                .map(|a| a.mutability.to_string())
                .unwrap_or_default()
        };
        let (p1, p2) = (name(&self.param_1), name(&self.param_2));
        format!(
            "Parameter `{p1}` is obtained from `{p2}` at a call site, yet `{p1}` is {} and \
             `{p2}` is {}. A direct translation would borrow `{p2}` while part of it is already \
             borrowed through `{p1}`.\n\
             - `{p1}` touches: {}\n\
             - `{p2}` touches: {}\n\
             Pass only what each side needs (for example the members of `{p2}` listed above, \
             by value or by shared reference) instead of the whole structure.",
            mutab(&self.param_1).to_lowercase(),
            mutab(&self.param_2).to_lowercase(),
            members(&self.accessed_members_1),
            members(&self.accessed_members_2),
        )
    }
}

/// Annotation set for a project.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Annotations {
    pub annotations: BTreeMap<String, RustAnnotation>,
    pub hints: Vec<RefactorHint>,
}

impl Annotations {
    pub fn get(&self, site: &str) -> Option<&RustAnnotation> {
        self.annotations.get(site)
    }
}

/// Events that describe what a site's own function (and its callees) does.
fn own_events<'a>(site: &PointerSite, path: &'a [UsageEvent]) -> Vec<&'a UsageEvent> {
    match site.site_kind {
        SiteKind::Param { .. } => path
            .iter()
            .filter(|e| e.scope != EventScope::Caller)
            .collect(),
        _ => path.iter().collect(),
    }
}

/// Owning iff an allocation, a release, or a store into a structure that later releases it
/// occurs on the path. `released_by` returns the release event of a `Rec.field` target.
pub fn infer_ownership<'a>(
    path: impl IntoIterator<Item = &'a UsageEvent>,
    released_by: &dyn Fn(&str) -> Option<UsageEvent>,
) -> (Ownership, Vec<RuleFiring>) {
    let mut trace = Vec::new();
    for e in path {
        match &e.kind {
            EventKind::Alloc { .. } => trace.push(RuleFiring::at(rules::OWN_ALLOC, e)),
            EventKind::Free { .. } => trace.push(RuleFiring::at(rules::OWN_FREE, e)),
            EventKind::StoreIntoStructure { target } => {
                if let Some(rel) = released_by(target) {
                    let mut f = RuleFiring::at(rules::OWN_STORE, e);
                    f.note = Some(format!("{target} released at {}:{}", rel.file, rel.line));
                    trace.push(f);
                }
            }
            _ => {}
        }
    }
    trace.dedup();
    if trace.is_empty() {
        (Ownership::Borrowed, trace)
    } else {
        (Ownership::Owning, trace)
    }
}

/// Mutable iff the path writes through the pointer (directly, via a std writer or a cast alias).
pub fn infer_mutability<'a>(
    path: impl IntoIterator<Item = &'a UsageEvent>,
) -> (Mutability, Vec<RuleFiring>) {
    let trace: Vec<RuleFiring> = path
        .into_iter()
        .filter(|e| e.kind.is_write())
        .map(|e| RuleFiring::at(rules::MUT_WRITE, e))
        .collect();
    if trace.is_empty() {
        (Mutability::Immutable, trace)
    } else {
        (Mutability::Mutable, trace)
    }
}

fn firing(rule: &str, site: &PointerSite, note: Option<String>, analysis: &PointerAnalysis) -> RuleFiring {
    let (file, line) = analysis
        .facts(&site.id)
        .and_then(|f| f.usage_path.first())
        .map(|e| (e.file.clone(), e.line))
        .unwrap_or_default();
    RuleFiring {
        rule: rule.to_string(),
        file,
        line,
        note,
    }
}

/// Lifetime decisions for one function: the return's class plus labels forced onto params.
pub fn infer_return_lifetime(
    ret: &PointerSite,
    origins: &BTreeSet<Origin>,
    borrowed_params: &[&PointerSite],
    analysis: &PointerAnalysis,
) -> (Lifetime, BTreeMap<String, Lifetime>, Vec<RuleFiring>) {
    let mut tied = BTreeMap::new();
    let param_origins: Vec<&PointerSite> = borrowed_params
        .iter()
        .copied()
        .filter(|p| match p.site_kind {
            SiteKind::Param { index, .. } => origins.contains(&Origin::Param { index }),
            _ => false,
        })
        .collect();
    let static_only = !origins.is_empty()
        && origins
            .iter()
            .all(|o| matches!(o, Origin::Literal | Origin::Global { .. }));
    let has_static = origins
        .iter()
        .any(|o| matches!(o, Origin::Literal | Origin::Global { .. }));
    let label = || Lifetime::Generic("a".into());
    let fire = |rule, note| vec![firing(rule, ret, note, analysis)];

    if param_origins.len() >= 2 {
        for p in &param_origins {
            tied.insert(p.id.clone(), label());
        }
        let names: Vec<String> = param_origins.iter().map(|p| p.label()).collect();
        let note = Some(format!("may return any of {}", names.join(", ")));
        return (label(), tied, fire(rules::LT_SHARED, note));
    }
    if let [p] = param_origins.as_slice() {
        if has_static {
            tied.insert(p.id.clone(), label());
            let note = Some(format!(
                "returns `{}` or static data; tied to the parameter",
                p.label()
            ));
            return (label(), tied, fire(rules::LT_AMBIGUOUS, note));
        }
        if borrowed_params.len() == 1 {
            return (Lifetime::Elided, tied, fire(rules::LT_ELIDED, None));
        }
        tied.insert(p.id.clone(), label());
        let note = Some(format!("derived from `{}`", p.label()));
        return (label(), tied, fire(rules::LT_TIED, note));
    }
    if static_only {
        return (Lifetime::Static, tied, fire(rules::LT_STATIC, None));
    }
    if borrowed_params.len() == 1 {
        return (Lifetime::Elided, tied, fire(rules::LT_ELIDED, None));
    }
    (label(), tied, fire(rules::LT_TIED, Some("no borrowed input to elide from".into())))
}

/// Member lifetime: static when every observed initializer is static data.
pub fn infer_member_lifetime(origins: &BTreeSet<Origin>) -> Lifetime {
    let static_only = !origins.is_empty()
        && origins
            .iter()
            .all(|o| matches!(o, Origin::Literal | Origin::Global { .. }));
    if static_only {
        Lifetime::Static
    } else {
        Lifetime::Generic("a".into())
    }
}

/// Labels every site (ownership first) and derives refactoring hints.
pub fn annotate_project(analysis: &PointerAnalysis) -> Annotations {
    let released_by = |target: &str| -> Option<UsageEvent> {
        let (rec, field) = target.split_once('.')?;
        let site = analysis
            .find(&format!("Struct:{rec}"), field)
            .or_else(|| analysis.find(&format!("Union:{rec}"), field))?;
        analysis
            .facts(&site.id)?
            .usage_path
            .iter()
            .find(|e| matches!(e.kind, EventKind::Free { .. }))
            .cloned()
    };

    let mut out = Annotations::default();
    for site in analysis.sites.values() {
        let path = analysis
            .facts(&site.id)
            .map(|f| f.usage_path.as_slice())
            .unwrap_or_default();
        let events = own_events(site, path);
        let (ownership, mut trace) = infer_ownership(events.iter().copied(), &released_by);
        let (mutability, lifetime) = if ownership == Ownership::Owning {
            (Mutability::NotApplicable, Lifetime::NotApplicable)
        } else {
            let (m, t) = infer_mutability(events.iter().copied());
            trace.extend(t);
            (m, Lifetime::Elided)
        };
        out.annotations.insert(
            site.id.clone(),
            RustAnnotation {
                site: site.id.clone(),
                ownership,
                mutability,
                lifetime,
                nullable: true,
                rule_trace: trace,
            },
        );
    }

    // Lifetimes need every ownership label of a function first.
    let funcs: BTreeSet<&str> = analysis
        .sites
        .values()
        .map(|s| s.owner_unit.as_str())
        .collect();
    for unit in funcs {
        let sites: Vec<&PointerSite> = analysis.sites_of(unit).collect();
        let borrowed_params: Vec<&PointerSite> = sites
            .iter()
            .copied()
            .filter(|s| matches!(s.site_kind, SiteKind::Param { .. }))
            .filter(|s| !s.is_function_pointer)
            .filter(|s| out.annotations[&s.id].ownership == Ownership::Borrowed)
            .collect();
        for site in &sites {
            if out.annotations[&site.id].ownership == Ownership::Owning {
                continue;
            }
            let origins = analysis
                .facts(&site.id)
                .map(|f| f.origins.clone())
                .unwrap_or_default();
            match site.site_kind {
                SiteKind::ReturnValue => {
                    let (lt, tied, trace) =
                        infer_return_lifetime(site, &origins, &borrowed_params, analysis);
                    let a = out.annotations.get_mut(&site.id).expect("annotated");
                    a.lifetime = lt;
                    a.rule_trace.extend(trace);
                    for (p, lt) in tied {
                        let pa = out.annotations.get_mut(&p).expect("annotated");
                        pa.lifetime = lt;
                        let note = Some(format!("shares the lifetime of {}", site.label()));
                        pa.rule_trace.push(firing(rules::LT_TIED, site, note, analysis));
                    }
                }
                SiteKind::Member { .. } => {
                    let lt = infer_member_lifetime(&origins);
                    let rule = if lt == Lifetime::Static {
                        rules::LT_STATIC
                    } else {
                        rules::LT_MEMBER
                    };
                    let f = firing(rule, site, None, analysis);
                    let a = out.annotations.get_mut(&site.id).expect("annotated");
                    a.lifetime = lt;
                    a.rule_trace.push(f);
                }
                SiteKind::Param { .. } => {}
            }
        }
    }

    for (id, facts) in &analysis.facts {
        for base in &facts.derives_from {
            let (Some(a1), Some(a2)) = (out.annotations.get(id), out.annotations.get(base)) else {
                continue;
            };
            let borrowed = a1.ownership == Ownership::Borrowed && a2.ownership == Ownership::Borrowed;
            if borrowed && a1.mutability != a2.mutability {
                out.hints.push(RefactorHint {
                    func: analysis.sites[id].owner_unit.clone(),
                    param_1: id.clone(),
                    param_2: base.clone(),
                    accessed_members_1: facts.access_set.clone(),
                    accessed_members_2: analysis
                        .facts(base)
                        .map(|f| f.access_set.clone())
                        .unwrap_or_default(),
                });
            }
        }
    }
    out
}
