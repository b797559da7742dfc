//! Member access sets and derives-from links between parameters.

use std::collections::{BTreeMap, BTreeSet};

use super::program::{same_expr, FnInfo, Program};
use super::{PointerSite, SiteKind};
use crate::depgraph::CodeUnit;
use crate::frontend::ast::*;

/// Locals that receive a param's value: `(direct copies, copies made through a cast)`.
pub(crate) fn aliases_of(f: &FnInfo<'_>, seed: &str) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut direct: BTreeSet<String> = [seed.to_string()].into();
    let mut cast: BTreeSet<String> = BTreeSet::new();
    let mut copies: Vec<(&str, &Expr)> = Vec::new();
    for s in f.body {
        s.walk(&mut |st| {
            if let StmtKind::Decl(ds) = &st.kind {
                for d in ds {
                    if let Some(init) = &d.init {
                        copies.push((&d.name, init));
                    }
                }
            }
        });
        s.walk_exprs(&mut |e| {
            if let ExprKind::Assign { op: None, lhs, rhs } = &e.kind {
                if let ExprKind::Ident(n) = &lhs.kind {
                    copies.push((n, rhs));
                }
            }
        });
    }
    loop {
        let mut changed = false;
        for (to, from) in &copies {
            if *to == seed || f.param_index(to).is_some() {
                continue;
            }
            let src = from.strip_casts();
            let ExprKind::Ident(n) = &src.kind else { continue };
            let via_cast = !std::ptr::eq(src, *from);
            if direct.contains(n) && !via_cast {
                changed |= direct.insert(to.to_string());
            } else if (direct.contains(n) || cast.contains(n)) && !direct.contains(*to) {
                changed |= cast.insert(to.to_string());
            }
        }
        if !changed {
            return (direct, cast);
        }
    }
}

fn is_var(e: &Expr, names: &BTreeSet<String>) -> bool {
    matches!(&e.strip_casts().kind, ExprKind::Ident(n) if names.contains(n))
}

/// Members touched through a param (or a direct alias) in its own body.
fn local_access(prog: &Program<'_>, f: &FnInfo<'_>, param: &str) -> BTreeSet<(String, String)> {
    let (direct, _) = aliases_of(f, param);
    let mut out = BTreeSet::new();
    for s in f.body {
        s.walk_exprs(&mut |e| {
            let ExprKind::Member { base, field, arrow } = &e.kind else {
                return;
            };
            let through = if *arrow {
                is_var(base, &direct)
            } else {
                match &base.kind {
                    ExprKind::Unary {
                        op: UnaryOp::Deref,
                        expr,
                    } => is_var(expr, &direct),
                    ExprKind::Index { base: b, .. } => is_var(b, &direct),
                    _ => false,
                }
            };
            if through {
                if let Some(rec) = prog.member_record(f, base, *arrow) {
                    out.insert((prog.model.record_unit_name(&rec.tag), field.clone()));
                }
            }
        });
    }
    out
}

/// Access sets for every param site whose pointee is a record, closed over callees.
pub(crate) fn access_sets(
    prog: &Program<'_>,
    sites: &BTreeMap<String, PointerSite>,
) -> BTreeMap<String, BTreeSet<(String, String)>> {
    let model = prog.model;
    // (function key, param index) -> site id for record-pointee params.
    let mut tracked: BTreeMap<(String, usize), String> = BTreeMap::new();
    for s in sites.values() {
        let SiteKind::Param { index, .. } = s.site_kind else { continue };
        let key = s.owner_name().to_string();
        let Some(f) = prog.funcs.get(&key) else { continue };
        let Some(p) = f.def.params.get(index) else { continue };
        if model.pointee_record(&p.ty).is_some() {
            tracked.insert((key, index), s.id.clone());
        }
    }
    let mut acc: BTreeMap<String, BTreeSet<(String, String)>> = BTreeMap::new();
    // Callee edges: site -> [callee site]
    let mut flows: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for ((key, index), id) in &tracked {
        let f = &prog.funcs[key];
        let name = &f.param_names[*index];
        acc.insert(id.clone(), local_access(prog, f, name));
        let (direct, cast) = aliases_of(f, name);
        let all: BTreeSet<String> = direct.union(&cast).cloned().collect();
        for c in prog.calls_in(key) {
            let Some(callee) = &c.callee else { continue };
            for (k, a) in c.args.iter().enumerate() {
                if is_var(a, &all) {
                    if let Some(target) = tracked.get(&(callee.clone(), k)) {
                        flows.entry(id.clone()).or_default().push(target.clone());
                    }
                }
            }
        }
    }
    loop {
        let mut changed = false;
        for (from, targets) in &flows {
            let mut add = BTreeSet::new();
            for t in targets {
                add.extend(acc[t].iter().cloned());
            }
            let set = acc.get_mut(from).expect("tracked site");
            let before = set.len();
            set.extend(add);
            changed |= set.len() != before;
        }
        if !changed {
            return acc;
        }
    }
}

/// Root of a member path (`X->f…`, `X.f…`, possibly under `&`) and whether the
/// innermost hop off the root is `->`.
fn member_root(e: &Expr) -> Option<(&Expr, bool)> {
    let mut cur = e.strip_casts();
    if let ExprKind::Unary {
        op: UnaryOp::AddrOf,
        expr,
    } = &cur.kind
    {
        cur = expr.strip_casts();
    }
    let mut hop = None;
    loop {
        match &cur.kind {
            ExprKind::Member { base, arrow, .. } => {
                hop = Some(*arrow);
                cur = base.strip_casts();
            }
            ExprKind::Index { base, .. } if hop.is_some() => cur = base.strip_casts(),
            _ => break,
        }
    }
    hop.map(|a| (cur, a))
}

/// Is actual `derived` a member path rooted at actual `base`?
pub(crate) fn is_derived_arg(derived: &Expr, base: &Expr) -> bool {
    let Some((root, arrow)) = member_root(derived) else {
        return false;
    };
    if arrow {
        same_expr(root, base)
    } else {
        match &base.strip_casts().kind {
            ExprKind::Unary {
                op: UnaryOp::AddrOf,
                expr,
            } => same_expr(root, expr),
            _ => false,
        }
    }
}

pub(crate) fn derives_from(
    prog: &Program<'_>,
    sites: &BTreeMap<String, PointerSite>,
    unit: &CodeUnit,
) -> BTreeSet<(String, String)> {
    let params: BTreeMap<usize, &PointerSite> = sites
        .values()
        .filter(|s| s.owner_unit == unit.id)
        .filter_map(|s| match s.site_kind {
            SiteKind::Param { index, .. } => Some((index, s)),
            _ => None,
        })
        .collect();
    let mut out = BTreeSet::new();
    for c in prog.calls_to(&unit.name) {
        for (&i, si) in &params {
            for (&j, sj) in &params {
                if i == j {
                    continue;
                }
                if let (Some(ai), Some(aj)) = (c.args.get(i), c.args.get(j)) {
                    if is_derived_arg(ai, aj) {
                        out.insert((si.id.clone(), sj.id.clone()));
                    }
                }
            }
        }
    }
    out
}
