//! Removing manual deallocation from the graph that gets translated.
//!
//! A function is dropped when, after deleting deallocation calls (direct frees, calls to
//! other dropped functions, release callbacks) and the side-effect-free guards around
//! them, nothing but pure declarations or a bare `return;` remains. The dropped set is
//! the greatest fixpoint of that test, restricted to functions that actually reach a
//! deallocator. Retained functions only lose direct deallocation statements.

use std::collections::{BTreeMap, BTreeSet};

use crate::cli::config::AnalysisConfig;
use crate::depgraph::{
    CodeUnit, DependencyGraph, OutlineKind, OutlineStmt, Relation, UnitDecl, UnitKind,
};
use crate::frontend::ast::CType;

use super::DroppedUnit;

#[derive(Debug, Clone)]
pub struct Stripped {
    pub graph: DependencyGraph,
    pub dropped: Vec<DroppedUnit>,
    /// Number of statements deleted from each retained function.
    pub removed: BTreeMap<String, usize>,
}

struct Ctx<'a> {
    graph: &'a DependencyGraph,
    cfg: &'a AnalysisConfig,
}

impl<'a> Ctx<'a> {
    /// The unit a call by C name from `caller` refers to.
    fn resolve(&self, caller: &str, name: &str) -> Option<&'a str> {
        let graph: &'a DependencyGraph = self.graph;
        graph
            .edges
            .iter()
            .filter(|e| e.from == caller && e.relation == Relation::Call)
            .map(|e| e.to.as_str())
            .find(|to| match graph.units.get(*to).map(|u| &u.decl) {
                Some(UnitDecl::Func { c_name, .. }) => c_name == name,
                _ => false,
            })
    }

    fn dealloc_call(&self, caller: &str, name: &str, set: &BTreeSet<String>) -> bool {
        if let Some(target) = self.resolve(caller, name) {
            return set.contains(target);
        }
        self.cfg.is_deallocator(name)
    }

    fn resolve_typedef<'t>(&'t self, mut ty: &'t CType) -> &'t CType {
        for _ in 0..16 {
            let CType::Named(n) = ty.unqualified() else { break };
            match self.graph.units.get(&UnitKind::Typedef.unit_id(n)).map(|u| &u.decl) {
                Some(UnitDecl::Typedef { ty: t }) => ty = t,
                _ => break,
            }
        }
        ty.unqualified()
    }

    /// `void (*)(T *)`: the shape of a caller-supplied release callback.
    fn is_release_fn(&self, ty: &CType) -> bool {
        let Some(pointee) = self.resolve_typedef(ty).pointee() else {
            return false;
        };
        match self.resolve_typedef(pointee) {
            CType::Function {
                ret,
                params,
                variadic: false,
            } => {
                matches!(self.resolve_typedef(ret), CType::Void)
                    && params.len() == 1
                    && self.resolve_typedef(&params[0]).is_pointer()
            }
            _ => false,
        }
    }

    fn is_release_callback(&self, func: &CodeUnit, via: &str) -> bool {
        if let Some(p) = func.func_params().iter().find(|p| p.name == via) {
            return self.is_release_fn(&p.ty);
        }
        self.graph.units.values().any(|u| match &u.decl {
            UnitDecl::Record { fields, .. } => fields
                .iter()
                .any(|f| f.name == via && self.is_release_fn(&f.ty)),
            _ => false,
        })
    }

    /// Statement is deallocation-only logic relative to `set`.
    fn pass(&self, func: &CodeUnit, s: &OutlineStmt, set: &BTreeSet<String>) -> bool {
        match &s.kind {
            OutlineKind::PureDecl => true,
            OutlineKind::Return => func
                .source_text
                .get(s.start..s.end)
                .is_some_and(|t| t.split_whitespace().collect::<String>() == "return;"),
            OutlineKind::Call { callee } => {
                self.dealloc_call(&func.id, callee, set)
                    || (self.resolve(&func.id, callee).is_none()
                        && self.is_release_callback(func, callee))
            }
            OutlineKind::Callback { via } => self.is_release_callback(func, via),
            OutlineKind::Guard => s.children.iter().all(|c| self.pass(func, c, set)),
            OutlineKind::Other => false,
        }
    }

    fn calls_deallocator(&self, func: &CodeUnit, s: &OutlineStmt, reach: &BTreeSet<String>) -> bool {
        match &s.kind {
            OutlineKind::Call { callee } => match self.resolve(&func.id, callee) {
                Some(t) => reach.contains(t),
                None => self.cfg.is_deallocator(callee),
            },
            _ => s.children.iter().any(|c| self.calls_deallocator(func, c, reach)),
        }
    }

    /// Removable from a retained function given the final dropped set.
    fn removable(&self, func: &CodeUnit, s: &OutlineStmt, dropped: &BTreeSet<String>) -> bool {
        match &s.kind {
            OutlineKind::Call { callee } => self.dealloc_call(&func.id, callee, dropped),
            OutlineKind::Guard => {
                s.children.iter().any(|c| self.removable(func, c, dropped))
                    && s
                        .children
                        .iter()
                        .all(|c| trivial(c) || self.removable(func, c, dropped))
            }
            _ => false,
        }
    }

    fn collect_removals(
        &self,
        func: &CodeUnit,
        s: &OutlineStmt,
        in_block: bool,
        dropped: &BTreeSet<String>,
        out: &mut Vec<(usize, usize, bool)>,
    ) {
        if self.removable(func, s, dropped) {
            out.push((s.start, s.end, in_block));
            return;
        }
        let block = func.source_text.get(s.start..).is_some_and(|t| t.starts_with('{'));
        for c in &s.children {
            self.collect_removals(func, c, block, dropped, out);
        }
    }
}

fn trivial(s: &OutlineStmt) -> bool {
    s.kind == OutlineKind::Guard && s.children.iter().all(trivial)
}

fn funcs(graph: &DependencyGraph) -> impl Iterator<Item = &CodeUnit> {
    graph
        .units
        .values()
        .filter(|u| u.kind == UnitKind::Func && matches!(u.decl, UnitDecl::Func { parsed: true, .. }))
}

/// Deletes `[start, end)` spans; block-level statements vanish along with a line they
/// leave blank, statements that are the direct body of a control header become `;`.
fn apply_removals(text: &str, mut spans: Vec<(usize, usize, bool)>) -> String {
    spans.sort_by_key(|s| std::cmp::Reverse(s.0));
    let mut s = text.to_string();
    for (start, end, in_block) in spans {
        if end > s.len() || start > end {
            continue;
        }
        if !in_block {
            s.replace_range(start..end, ";");
            continue;
        }
        let line_start = s[..start].rfind('\n').map_or(0, |i| i + 1);
        let line_end = s[end..].find('\n').map_or(s.len(), |i| end + i);
        let blank = s[line_start..start].trim().is_empty() && s[end..line_end].trim().is_empty();
        if blank && line_end < s.len() {
            s.replace_range(line_start..line_end + 1, "");
        } else {
            s.replace_range(start..end, "");
        }
    }
    s
}

fn identifiers(text: &str) -> BTreeSet<&str> {
    let mut out = BTreeSet::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'"' || c == b'\'' {
            i += 1;
            while i < bytes.len() && bytes[i] != c {
                i += if bytes[i] == b'\\' { 2 } else { 1 };
            }
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let s = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.insert(&text[s..i]);
        } else {
            i += 1;
        }
    }
    out
}

pub fn strip_deallocations(graph: &DependencyGraph, cfg: &AnalysisConfig) -> Stripped {
    let ctx = Ctx { graph, cfg };
    // Functions still referenced by retained code after stripping cannot be dropped.
    let mut pinned: BTreeSet<String> = BTreeSet::new();
    loop {
        let mut cand: BTreeSet<String> = funcs(graph)
            .filter(|u| u.name != "main" && !pinned.contains(&u.id))
            .map(|u| u.id.clone())
            .collect();
        loop {
            let next: BTreeSet<String> = cand
                .iter()
                .filter(|id| {
                    let u = &graph.units[*id];
                    u.outline().iter().all(|s| ctx.pass(u, s, &cand))
                })
                .cloned()
                .collect();
            if next == cand {
                break;
            }
            cand = next;
        }
        let mut reach: BTreeSet<String> = BTreeSet::new();
        loop {
            let grown: BTreeSet<String> = cand
                .iter()
                .filter(|id| {
                    let u = &graph.units[*id];
                    u.outline().iter().any(|s| ctx.calls_deallocator(u, s, &reach))
                })
                .cloned()
                .collect();
            if grown == reach {
                break;
            }
            reach = grown;
        }
        let dropped = reach;

        let mut units = Vec::new();
        let mut removed = BTreeMap::new();
        let mut still_used = BTreeSet::new();
        for u in graph.units.values() {
            if dropped.contains(&u.id) {
                continue;
            }
            let mut u = u.clone();
            if u.kind == UnitKind::Func {
                let mut spans = Vec::new();
                for s in u.outline() {
                    ctx.collect_removals(&u, s, true, &dropped, &mut spans);
                }
                if !spans.is_empty() {
                    removed.insert(u.id.clone(), spans.len());
                    u.source_text = apply_removals(&u.source_text, spans);
                    if let UnitDecl::Func { outline, .. } = &mut u.decl {
                        // Offsets described the original text.
                        outline.clear();
                    }
                }
                let idents = identifiers(&u.source_text);
                for e in graph.successors(&u.id) {
                    if dropped.contains(&e.to) {
                        if let Some(UnitDecl::Func { c_name, .. }) = graph.units.get(&e.to).map(|t| &t.decl) {
                            if idents.contains(c_name.as_str()) {
                                still_used.insert(e.to.clone());
                            }
                        }
                    }
                }
            } else {
                let idents = identifiers(&u.source_text);
                for d in &dropped {
                    if let Some(UnitDecl::Func { c_name, .. }) = graph.units.get(d).map(|t| &t.decl) {
                        if graph.successors(&u.id).any(|e| &e.to == d) && idents.contains(c_name.as_str()) {
                            still_used.insert(d.clone());
                        }
                    }
                }
            }
            units.push(u);
        }
        if !still_used.is_empty() {
            pinned.extend(still_used);
            continue;
        }
        let edges = graph
            .edges
            .iter()
            .filter(|e| !dropped.contains(&e.from) && !dropped.contains(&e.to))
            .cloned()
            .collect();
        let dropped = dropped
            .into_iter()
            .map(|id| DroppedUnit {
                id,
                reason: "body consists solely of deallocation logic".into(),
            })
            .collect();
        return Stripped {
            graph: DependencyGraph::new(units, edges),
            dropped,
            removed,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removal_keeps_control_bodies_valid() {
        let text = "void f(int *p) {\n  g();\n  free(p);\n  if (h()) free(p);\n}\n";
        let a = text.find("free(p);").unwrap();
        let b = text.rfind("free(p);").unwrap();
        let out = apply_removals(text, vec![(a, a + 8, true), (b, b + 8, false)]);
        assert_eq!(out, "void f(int *p) {\n  g();\n  if (h()) ;\n}\n");
    }

    #[test]
    fn identifiers_skip_literals() {
        let ids = identifiers("x = \"free_all\"; y_1(z);");
        assert!(ids.contains("y_1") && !ids.contains("free_all"));
    }
}
