//! Usage events, usage paths, member snippets and value origins.

use std::collections::{BTreeMap, BTreeSet};

use super::program::{is_null, Consumer, FnInfo, Program};
use super::relations::aliases_of;
use super::{
    normalize_path, EventKind, EventScope, Origin, PointerSite, SiteKind, Snippet, UsageEvent,
};
use crate::cli::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::frontend::ast::*;
use crate::frontend::ProjectSource;

type Paths = BTreeMap<String, Vec<UsageEvent>>;

/// What is being followed through a function body: a set of variables, or one record member.
struct Tracker<'a> {
    direct: BTreeSet<String>,
    cast: BTreeSet<String>,
    member: Option<(&'a str, &'a str)>,
}

struct Scan<'a, 'm> {
    prog: &'a Program<'m>,
    cfg: &'a AnalysisConfig,
    sites: &'a BTreeMap<String, PointerSite>,
    paths: &'a Paths,
    f: &'a FnInfo<'m>,
    t: Tracker<'a>,
    /// `Rec.field` of a member tracker.
    self_target: String,
    out: Vec<UsageEvent>,
}

pub(crate) fn param_site_id(prog: &Program<'_>, func: &str, index: usize) -> Option<String> {
    let f = prog.funcs.get(func)?;
    Some(PointerSite::param_id(
        &format!("Func:{func}"),
        index,
        f.param_names.get(index)?,
    ))
}

fn imported(paths: &Paths, site: &str, scope: EventScope) -> Vec<UsageEvent> {
    paths
        .get(site)
        .map(|p| {
            p.iter()
                .filter(|e| e.scope != EventScope::Caller)
                .map(|e| UsageEvent {
                    scope,
                    ..e.clone()
                })
                .collect()
        })
        .unwrap_or_default()
}

impl<'a, 'm> Scan<'a, 'm> {
    fn push(&mut self, kind: EventKind, loc: &Loc) {
        self.out.push(UsageEvent {
            kind,
            file: loc.file.clone(),
            line: loc.line,
            scope: EventScope::Local,
            unit: self.f.key.clone(),
        });
    }

    /// `Some(via_cast)` when `e` denotes the tracked pointer value.
    fn matches(&self, e: &Expr) -> Option<bool> {
        let s = e.strip_casts();
        let casted = !std::ptr::eq(s, e);
        match &s.kind {
            ExprKind::Ident(n) if self.t.direct.contains(n) => Some(casted),
            ExprKind::Ident(n) if self.t.cast.contains(n) => Some(true),
            ExprKind::Member { base, field, arrow } => {
                let (tag, fname) = self.t.member?;
                if field != fname {
                    return None;
                }
                let rec = self.prog.member_record(self.f, base, *arrow)?;
                (rec.tag == tag).then_some(casted)
            }
            _ => None,
        }
    }

    /// Pointer arithmetic on the tracked value (`p + n`).
    fn arith(&self, e: &Expr) -> Option<bool> {
        match &e.strip_casts().kind {
            ExprKind::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                lhs,
                rhs,
            } => self
                .matches(lhs)
                .or_else(|| self.arith(lhs))
                .or_else(|| self.matches(rhs)),
            _ => None,
        }
    }

    /// Is lvalue `lv` memory reached through the tracked pointer?
    fn through(&self, lv: &Expr) -> Option<bool> {
        match &lv.kind {
            ExprKind::Member {
                base, arrow: true, ..
            } => self.matches(base).or_else(|| self.through(base)),
            ExprKind::Member {
                base, arrow: false, ..
            } => self.through(base),
            ExprKind::Index { base, .. }
            | ExprKind::Unary {
                op: UnaryOp::Deref,
                expr: base,
            } => self
                .matches(base)
                .or_else(|| self.arith(base))
                .or_else(|| self.through(base)),
            ExprKind::Cast { expr, .. } => self.through(expr),
            _ => None,
        }
    }

    /// Destination argument of a std writer reached through the tracked pointer.
    fn write_dest(&self, a: &Expr) -> Option<bool> {
        let s = a.strip_casts();
        match &s.kind {
            ExprKind::Unary {
                op: UnaryOp::AddrOf,
                expr,
            } => self.through(expr),
            ExprKind::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                lhs,
                ..
            } => self.write_dest(lhs),
            _ => self.through(s),
        }
    }

    /// The allocator (or allocating function) behind `rhs`, if it hands out fresh memory.
    fn alloc_via(&self, rhs: &Expr, depth: u8) -> Option<String> {
        let s = rhs.strip_casts();
        match &s.kind {
            ExprKind::Call { .. } => {
                let name = s.direct_callee()?;
                if self.f.env.contains_key(name) {
                    return None;
                }
                if let Some(k) = self.prog.model.resolve_function(self.f.file(), name) {
                    let ret = PointerSite::return_id(&format!("Func:{k}"));
                    let allocates = self.paths.get(&ret).is_some_and(|p| {
                        p.iter().any(|e| {
                            e.scope != EventScope::Caller
                                && matches!(e.kind, EventKind::Alloc { .. })
                        })
                    });
                    return allocates.then(|| name.to_string());
                }
                self.cfg.is_allocator(name).then(|| name.to_string())
            }
            ExprKind::Ident(x) if depth > 0 && self.t.member.is_some() => {
                let mut found = None;
                for st in self.f.body {
                    st.walk(&mut |st| {
                        if let StmtKind::Decl(ds) = &st.kind {
                            for d in ds.iter().filter(|d| &d.name == x) {
                                if let Some(i) = &d.init {
                                    found = found.take().or_else(|| self.alloc_via(i, depth - 1));
                                }
                            }
                        }
                    });
                    st.walk_exprs(&mut |e| {
                        if let ExprKind::Assign { op: None, lhs, rhs } = &e.kind {
                            if lhs.as_ident() == Some(x) {
                                found = found.take().or_else(|| self.alloc_via(rhs, depth - 1));
                            }
                        }
                    });
                }
                found
            }
            _ => None,
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Expr(e) => self.expr(e, false),
            StmtKind::Decl(ds) => {
                for d in ds {
                    let Some(init) = &d.init else { continue };
                    if self.t.member.is_none() && self.t.direct.contains(&d.name) {
                        if let Some(v) = self.alloc_via(init, 1) {
                            self.push(EventKind::Alloc { via: v }, &d.loc);
                        }
                    }
                    self.expr(init, false);
                }
            }
            StmtKind::Block(items) => items.iter().for_each(|s| self.stmt(s)),
            StmtKind::If { cond, then, els } => {
                self.cond(cond);
                self.stmt(then);
                if let Some(e) = els {
                    self.stmt(e);
                }
            }
            StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
                self.cond(cond);
                self.stmt(body);
            }
            StmtKind::For {
                init,
                cond,
                step,
                body,
            } => {
                if let Some(i) = init {
                    self.stmt(i);
                }
                if let Some(c) = cond {
                    self.cond(c);
                }
                if let Some(st) = step {
                    self.expr(st, false);
                }
                self.stmt(body);
            }
            StmtKind::Switch { cond, body } => {
                self.expr(cond, false);
                self.stmt(body);
            }
            StmtKind::Case { value, body } => {
                self.expr(value, false);
                self.stmt(body);
            }
            StmtKind::Default(body) | StmtKind::Label { body, .. } => self.stmt(body),
            StmtKind::Return(Some(e)) => {
                if self.matches(e).is_some() {
                    self.push(EventKind::ReturnOut, &s.loc);
                } else {
                    self.expr(e, false);
                }
            }
            StmtKind::Return(None)
            | StmtKind::Goto(_)
            | StmtKind::Break
            | StmtKind::Continue
            | StmtKind::Empty => {}
        }
    }

    fn cond(&mut self, c: &Expr) {
        if self.matches(c).is_some() {
            self.push(EventKind::NullCheck, &c.loc);
        } else {
            self.expr(c, false);
        }
    }

    /// Sub-expressions of an assignment target, without counting the target as a read.
    fn lvalue(&mut self, lv: &Expr) {
        match &lv.kind {
            ExprKind::Member { base, .. } => self.expr(base, true),
            ExprKind::Index { base, index } => {
                self.expr(base, true);
                self.expr(index, false);
            }
            ExprKind::Unary { expr, .. } => self.expr(expr, true),
            ExprKind::Cast { expr, .. } => self.lvalue(expr),
            _ => {}
        }
    }

    fn expr(&mut self, e: &Expr, consumed: bool) {
        match &e.kind {
            ExprKind::Assign { op, lhs, rhs } => {
                let mut rhs_consumed = false;
                if let Some(c) = self.through(lhs) {
                    let k = if c {
                        EventKind::CastAliasWrite
                    } else {
                        EventKind::Write
                    };
                    self.push(k, &e.loc);
                } else if self.matches(lhs).is_some() && op.is_none() {
                    if self.t.member.is_some() {
                        let slot = matches!(lhs.strip_casts().kind, ExprKind::Member { .. });
                        if slot && !is_null(rhs) {
                            match self.alloc_via(rhs, 1) {
                                Some(v) => self.push(EventKind::Alloc { via: v }, &e.loc),
                                None => {
                                    let target = self.self_target.clone();
                                    self.push(EventKind::StoreIntoStructure { target }, &e.loc)
                                }
                            }
                        }
                    } else if let Some(v) = self.alloc_via(rhs, 1) {
                        self.push(EventKind::Alloc { via: v }, &e.loc);
                    }
                }
                if op.is_none() && self.matches(rhs).is_some() {
                    rhs_consumed = true;
                    if let Some(t) = self.prog.store_target(self.f, lhs) {
                        self.push(EventKind::StoreIntoStructure { target: t }, &e.loc);
                    } else if let Some(g) = lhs
                        .as_ident()
                        .filter(|g| !self.f.env.contains_key(*g))
                        .filter(|g| self.prog.model.globals.contains_key(*g))
                    {
                        let target = g.to_string();
                        self.push(EventKind::StoreIntoStructure { target }, &e.loc);
                    } else if self.t.member.is_some() {
                        self.push(EventKind::Read, &e.loc);
                    }
                }
                self.lvalue(lhs);
                if !rhs_consumed {
                    self.expr(rhs, false);
                }
            }
            ExprKind::Unary { op, expr } if op.is_mutation() => {
                if let Some(c) = self.through(expr) {
                    let k = if c {
                        EventKind::CastAliasWrite
                    } else {
                        EventKind::Write
                    };
                    self.push(k, &e.loc);
                }
                self.lvalue(expr);
            }
            ExprKind::Unary {
                op: UnaryOp::Not,
                expr,
            } => self.cond(expr),
            ExprKind::Unary {
                op: UnaryOp::Deref,
                expr,
            } => {
                if self.matches(expr).is_some() || self.arith(expr).is_some() {
                    self.push(EventKind::Read, &e.loc);
                }
                self.expr(expr, true);
            }
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinaryOp::Eq | BinaryOp::Ne => {
                    let l = self.matches(lhs).is_some();
                    let r = self.matches(rhs).is_some();
                    if (l && is_null(rhs)) || (r && is_null(lhs)) {
                        self.push(EventKind::NullCheck, &e.loc);
                    } else if (l || r) && self.t.member.is_some() {
                        self.push(EventKind::Read, &e.loc);
                    }
                    self.expr(lhs, l);
                    self.expr(rhs, r);
                }
                BinaryOp::And | BinaryOp::Or => {
                    self.cond(lhs);
                    self.cond(rhs);
                }
                _ => {
                    self.expr(lhs, consumed);
                    self.expr(rhs, consumed);
                }
            },
            ExprKind::Cond { cond, then, els } => {
                self.cond(cond);
                self.expr(then, consumed);
                self.expr(els, consumed);
            }
            ExprKind::Call { callee, args } => self.call(e, callee, args),
            ExprKind::Member { base, arrow, .. } => {
                if self.matches(e).is_some() {
                    if !consumed {
                        self.push(EventKind::Read, &e.loc);
                    }
                } else if *arrow && self.matches(base).is_some() {
                    self.push(EventKind::Read, &e.loc);
                } else if !*arrow {
                    let inner = match &base.kind {
                        ExprKind::Unary {
                            op: UnaryOp::Deref,
                            expr,
                        } => Some(&**expr),
                        ExprKind::Index { base, .. } => Some(&**base),
                        _ => None,
                    };
                    if inner.is_some_and(|b| self.matches(b).is_some()) {
                        self.push(EventKind::Read, &e.loc);
                    }
                }
                self.expr(base, true);
            }
            ExprKind::Index { base, index } => {
                if self.matches(base).is_some() || self.arith(base).is_some() {
                    self.push(EventKind::Read, &e.loc);
                }
                self.expr(base, true);
                self.expr(index, false);
            }
            ExprKind::Cast { expr, .. } => self.expr(expr, consumed),
            ExprKind::Unary { expr, .. } => self.expr(expr, consumed),
            ExprKind::Comma(items) | ExprKind::InitList(items) => {
                items.iter().for_each(|x| self.expr(x, false))
            }
            ExprKind::BuiltinTyped { args, .. } => args.iter().for_each(|x| self.expr(x, false)),
            ExprKind::StmtExpr(stmts) => stmts.iter().for_each(|s| self.stmt(s)),
            ExprKind::Ident(_)
            | ExprKind::IntLit(_)
            | ExprKind::FloatLit(_)
            | ExprKind::CharLit(_)
            | ExprKind::StrLit(_)
            | ExprKind::SizeofType(_)
            | ExprKind::SizeofExpr(_) => {}
        }
    }

    fn call(&mut self, e: &Expr, callee: &Expr, args: &[Expr]) {
        let name = e.direct_callee().filter(|n| !self.f.env.contains_key(*n));
        let project = name.and_then(|n| self.prog.model.resolve_function(self.f.file(), n));
        let is_dealloc = name.is_some_and(|n| project.is_none() && self.cfg.is_deallocator(n));
        let is_writer = name.is_some_and(|n| project.is_none() && self.cfg.is_std_writer(n));
        for (k, a) in args.iter().enumerate() {
            let m = self.matches(a).or_else(|| self.arith(a));
            if m.is_some() {
                let loc = &a.loc;
                if is_dealloc {
                    let via = name.unwrap_or_default().to_string();
                    self.push(EventKind::Free { via }, loc);
                } else if is_writer && k == 0 {
                    let function = name.unwrap_or_default().to_string();
                    self.push(EventKind::StdFnWrite { function }, loc);
                } else if let Some(g) = project {
                    let site = param_site_id(self.prog, g, k);
                    let imports = site
                        .filter(|s| self.sites.contains_key(s))
                        .map(|s| imported(self.paths, &s, EventScope::Callee))
                        .unwrap_or_default();
                    if self.t.member.is_some()
                        && imports
                            .iter()
                            .any(|ev| matches!(ev.kind, EventKind::Free { .. }))
                    {
                        self.push(EventKind::Free { via: g.to_string() }, loc);
                    }
                    self.push(
                        EventKind::PassAsArg {
                            callee: g.to_string(),
                            index: k,
                        },
                        loc,
                    );
                    self.out.extend(imports);
                } else {
                    let callee = name.unwrap_or("<indirect>").to_string();
                    self.push(EventKind::PassAsArg { callee, index: k }, loc);
                }
            } else if is_writer && k == 0 {
                if let Some(c) = self.write_dest(a) {
                    let kind = if c {
                        EventKind::CastAliasWrite
                    } else {
                        EventKind::StdFnWrite {
                            function: name.unwrap_or_default().to_string(),
                        }
                    };
                    self.push(kind, &a.loc);
                }
            }
            self.expr(a, m.is_some());
        }
        if name.is_none() {
            if self.matches(callee).is_some() {
                self.push(EventKind::Read, &callee.loc);
            }
            self.expr(callee, true);
        }
    }
}

fn var_tracker<'a>(f: &FnInfo<'_>, var: &str) -> Tracker<'a> {
    let (direct, cast) = aliases_of(f, var);
    Tracker {
        direct,
        cast,
        member: None,
    }
}

#[allow(clippy::too_many_arguments)]
fn scan<'a, 'm>(
    prog: &'a Program<'m>,
    cfg: &'a AnalysisConfig,
    sites: &'a BTreeMap<String, PointerSite>,
    paths: &'a Paths,
    f: &'a FnInfo<'m>,
    t: Tracker<'a>,
    self_target: String,
) -> Vec<UsageEvent> {
    let mut s = Scan {
        prog,
        cfg,
        sites,
        paths,
        f,
        t,
        self_target,
        out: Vec::new(),
    };
    for st in f.body {
        s.stmt(st);
    }
    s.out
}

fn rescope(events: Vec<UsageEvent>, scope: EventScope) -> impl Iterator<Item = UsageEvent> {
    events.into_iter().map(move |e| UsageEvent { scope, ..e })
}

/// Builds one site's path from the current paths of the others.
pub(crate) fn path_for(
    prog: &Program<'_>,
    cfg: &AnalysisConfig,
    sites: &BTreeMap<String, PointerSite>,
    paths: &Paths,
    site: &PointerSite,
) -> Vec<UsageEvent> {
    let key = site.owner_name();
    let mut ev = Vec::new();
    match &site.site_kind {
        SiteKind::Param { index, name } => {
            let Some(f) = prog.funcs.get(key) else {
                return ev;
            };
            ev.extend(scan(prog, cfg, sites, paths, f, var_tracker(f, name), String::new()));
            for c in prog.calls_to(key) {
                let Some(arg) = c.args.get(*index) else { continue };
                let caller = &prog.funcs[&c.caller];
                if let Some(x) = arg.as_ident().filter(|x| caller.env.contains_key(*x)) {
                    let t = var_tracker(caller, x);
                    let found = scan(prog, cfg, sites, paths, caller, t, String::new());
                    ev.extend(rescope(found, EventScope::Caller));
                }
            }
        }
        SiteKind::ReturnValue => {
            let Some(f) = prog.funcs.get(key) else {
                return ev;
            };
            let mut returns = Vec::new();
            for s in f.body {
                s.walk(&mut |st| {
                    if let StmtKind::Return(Some(e)) = &st.kind {
                        returns.push((e, st.loc.clone()));
                    }
                });
            }
            for (e, loc) in returns {
                let s = e.strip_casts();
                let local_event = |kind| UsageEvent {
                    kind,
                    file: loc.file.clone(),
                    line: loc.line,
                    scope: EventScope::Local,
                    unit: f.key.clone(),
                };
                if let Some(name) = s.direct_callee().filter(|n| !f.env.contains_key(*n)) {
                    if let Some(g) = prog.model.resolve_function(f.file(), name) {
                        let ret = PointerSite::return_id(&format!("Func:{g}"));
                        ev.extend(imported(paths, &ret, EventScope::Callee));
                    } else if cfg.is_allocator(name) {
                        ev.push(local_event(EventKind::Alloc {
                            via: name.to_string(),
                        }));
                    }
                } else if let Some(x) = s.as_ident() {
                    if f.env.contains_key(x) && f.param_index(x).is_none() {
                        let t = var_tracker(f, x);
                        ev.extend(scan(prog, cfg, sites, paths, f, t, String::new()));
                    }
                }
                ev.push(local_event(EventKind::ReturnOut));
            }
            for c in prog.calls_to(key) {
                let caller = &prog.funcs[&c.caller];
                let at = |kind| UsageEvent {
                    kind,
                    file: c.loc.file.clone(),
                    line: c.loc.line,
                    scope: EventScope::Caller,
                    unit: c.caller.clone(),
                };
                match &c.consumer {
                    Consumer::AssignedTo(x) if caller.env.contains_key(x) => {
                        let t = var_tracker(caller, x);
                        let found = scan(prog, cfg, sites, paths, caller, t, String::new());
                        ev.extend(rescope(found, EventScope::Caller));
                    }
                    Consumer::AssignedTo(g) => ev.push(at(EventKind::StoreIntoStructure {
                        target: g.clone(),
                    })),
                    Consumer::StoredInto(t) => ev.push(at(EventKind::StoreIntoStructure {
                        target: t.clone(),
                    })),
                    Consumer::Returned => ev.push(at(EventKind::ReturnOut)),
                    Consumer::PassedTo {
                        callee,
                        name,
                        index,
                    } => match callee {
                        Some(g) => {
                            ev.push(at(EventKind::PassAsArg {
                                callee: g.clone(),
                                index: *index,
                            }));
                            if let Some(s) = param_site_id(prog, g, *index) {
                                ev.extend(imported(paths, &s, EventScope::Caller));
                            }
                        }
                        None if cfg.is_deallocator(name) => {
                            ev.push(at(EventKind::Free { via: name.clone() }))
                        }
                        None if cfg.is_std_writer(name) && *index == 0 => {
                            ev.push(at(EventKind::StdFnWrite {
                                function: name.clone(),
                            }))
                        }
                        None => ev.push(at(EventKind::PassAsArg {
                            callee: if name.is_empty() {
                                "<indirect>".into()
                            } else {
                                name.clone()
                            },
                            index: *index,
                        })),
                    },
                    Consumer::Other => {}
                }
            }
        }
        SiteKind::Member { name } => {
            let Some(tag) = member_tag(prog, site) else {
                return ev;
            };
            let target = format!("{}.{name}", prog.model.record_unit_name(&tag));
            for f in prog.funcs.values() {
                let mut t = Tracker {
                    direct: BTreeSet::new(),
                    cast: BTreeSet::new(),
                    member: Some((&tag, name)),
                };
                t.direct = member_aliases(prog, f, &tag, name);
                ev.extend(scan(prog, cfg, sites, paths, f, t, target.clone()));
            }
        }
    }
    normalize_path(ev)
}

fn member_tag(prog: &Program<'_>, site: &PointerSite) -> Option<String> {
    let owner = site.owner_name();
    let model = prog.model;
    model
        .records
        .values()
        .find(|r| model.record_unit_name(&r.tag) == owner)
        .map(|r| r.tag.clone())
}

/// Locals that hold a copy of `X->field` in `f`.
fn member_aliases(prog: &Program<'_>, f: &FnInfo<'_>, tag: &str, field: &str) -> BTreeSet<String> {
    let is_member = |e: &Expr| match &e.strip_casts().kind {
        ExprKind::Member {
            base,
            field: fl,
            arrow,
        } => fl == field && prog.member_record(f, base, *arrow).is_some_and(|r| r.tag == tag),
        _ => false,
    };
    let mut out = BTreeSet::new();
    for s in f.body {
        s.walk(&mut |st| {
            if let StmtKind::Decl(ds) = &st.kind {
                for d in ds {
                    if d.init.as_ref().is_some_and(is_member) {
                        out.insert(d.name.clone());
                    }
                }
            }
        });
        s.walk_exprs(&mut |e| {
            if let ExprKind::Assign { op: None, lhs, rhs } = &e.kind {
                if let (Some(x), true) = (lhs.as_ident(), is_member(rhs)) {
                    if f.env.contains_key(x) {
                        out.insert(x.to_string());
                    }
                }
            }
        });
    }
    out
}

/// Paths for every site, iterated until callee/caller imports stop changing.
pub(crate) fn usage_paths(
    prog: &Program<'_>,
    sites: &BTreeMap<String, PointerSite>,
    cfg: &AnalysisConfig,
    cap: usize,
) -> Result<Paths> {
    let mut paths = Paths::new();
    for round in 0.. {
        let next: Paths = sites
            .values()
            .map(|s| (s.id.clone(), path_for(prog, cfg, sites, &paths, s)))
            .collect();
        if next == paths {
            return Ok(paths);
        }
        if round >= cap {
            return Err(Error::Unstable(format!(
                "usage paths still changing after {cap} rounds"
            )));
        }
        paths = next;
    }
    unreachable!()
}

/// Every project line that operates on `tag.field`, with its original text.
pub(crate) fn member_snippets(
    prog: &Program<'_>,
    tag: &str,
    field: &str,
    source: Option<&ProjectSource>,
) -> Vec<Snippet> {
    let mut lines: BTreeSet<(String, u32)> = BTreeSet::new();
    for f in prog.funcs.values() {
        for s in f.body {
            s.walk_exprs(&mut |e| {
                if let ExprKind::Member {
                    base,
                    field: fl,
                    arrow,
                } = &e.kind
                {
                    if fl == field
                        && prog
                            .member_record(f, base, *arrow)
                            .is_some_and(|r| r.tag == tag)
                    {
                        lines.insert((e.loc.file.clone(), e.loc.line));
                    }
                }
            });
        }
    }
    lines
        .into_iter()
        .map(|(file, line)| {
            let text = source
                .and_then(|s| s.get(&file))
                .and_then(|sf| sf.line(line))
                .map(|t| t.trim().to_string())
                .unwrap_or_default();
            Snippet { file, line, text }
        })
        .collect()
}

struct OriginCtx<'a, 'm> {
    prog: &'a Program<'m>,
    cfg: &'a AnalysisConfig,
    returns: &'a BTreeMap<String, BTreeSet<Origin>>,
}

impl OriginCtx<'_, '_> {
    fn of(&self, f: &FnInfo<'_>, e: &Expr, seen: &mut BTreeSet<String>) -> BTreeSet<Origin> {
        let one = |o: Origin| -> BTreeSet<Origin> { [o].into() };
        if is_null(e) {
            return BTreeSet::new();
        }
        let s = e.strip_casts();
        let model = self.prog.model;
        match &s.kind {
            ExprKind::StrLit(_) => one(Origin::Literal),
            ExprKind::Ident(n) => {
                if let Some(i) = f.param_index(n) {
                    one(Origin::Param { index: i })
                } else if f.env.contains_key(n) {
                    if self.prog.is_array(&f.env[n]) || !seen.insert(n.clone()) {
                        return if self.prog.is_array(&f.env[n]) {
                            one(Origin::Local)
                        } else {
                            BTreeSet::new()
                        };
                    }
                    let mut out = BTreeSet::new();
                    let mut any = false;
                    for v in assigned_values(f, n) {
                        any = true;
                        out.extend(self.of(f, v, seen));
                    }
                    if !any {
                        out.insert(Origin::Local);
                    }
                    out
                } else if model.globals.contains_key(n)
                    || model.functions.iter().any(|fe| fe.def.name == *n)
                {
                    one(Origin::Global { name: n.clone() })
                } else {
                    one(Origin::Unknown)
                }
            }
            ExprKind::Unary {
                op: UnaryOp::AddrOf,
                expr,
            } => self.root_origin(f, expr, seen),
            ExprKind::Member { .. } | ExprKind::Index { .. } => self.root_origin(f, s, seen),
            ExprKind::Call { args, .. } => {
                let Some(name) = s.direct_callee().filter(|n| !f.env.contains_key(*n)) else {
                    return one(Origin::Unknown);
                };
                if let Some(g) = model.resolve_function(f.file(), name) {
                    let mut out = BTreeSet::new();
                    for o in self.returns.get(g).cloned().unwrap_or_default() {
                        match o {
                            Origin::Param { index } => {
                                if let Some(a) = args.get(index) {
                                    out.extend(self.of(f, a, seen));
                                }
                            }
                            other => {
                                out.insert(other);
                            }
                        }
                    }
                    out
                } else if self.cfg.is_allocator(name) {
                    one(Origin::Heap)
                } else {
                    one(Origin::Unknown)
                }
            }
            ExprKind::Cond { then, els, .. } => {
                let mut out = self.of(f, then, seen);
                out.extend(self.of(f, els, seen));
                out
            }
            ExprKind::Binary {
                op: BinaryOp::Add | BinaryOp::Sub,
                lhs,
                rhs,
            } => {
                let lp = self
                    .prog
                    .type_of(f, lhs)
                    .is_some_and(|t| self.prog.is_pointerish(&t));
                if lp {
                    self.of(f, lhs, seen)
                } else {
                    self.of(f, rhs, seen)
                }
            }
            ExprKind::Comma(items) => items
                .last()
                .map(|x| self.of(f, x, seen))
                .unwrap_or_default(),
            ExprKind::Assign { rhs, .. } => self.of(f, rhs, seen),
            _ => one(Origin::Unknown),
        }
    }

    /// Origin of storage reached by a member/index/deref path: that of its root.
    fn root_origin(&self, f: &FnInfo<'_>, lv: &Expr, seen: &mut BTreeSet<String>) -> BTreeSet<Origin> {
        let mut cur = lv.strip_casts();
        let mut indirect = false;
        loop {
            match &cur.kind {
                ExprKind::Member { base, arrow, .. } => {
                    indirect |= *arrow;
                    cur = base.strip_casts();
                }
                ExprKind::Index { base, .. } => {
                    let arr = self
                        .prog
                        .type_of(f, base)
                        .is_some_and(|t| self.prog.is_array(&t));
                    indirect |= !arr;
                    cur = base.strip_casts();
                }
                ExprKind::Unary {
                    op: UnaryOp::Deref,
                    expr,
                } => {
                    indirect = true;
                    cur = expr.strip_casts();
                }
                _ => break,
            }
        }
        match &cur.kind {
            ExprKind::Ident(n) if !indirect && f.env.contains_key(n) => [Origin::Local].into(),
            ExprKind::Ident(n) if !indirect && self.prog.model.globals.contains_key(n) => {
                [Origin::Global { name: n.clone() }].into()
            }
            _ if indirect => self.of(f, cur, seen),
            _ => [Origin::Unknown].into(),
        }
    }
}

/// Right-hand sides assigned to local `name` (initializer and plain assignments).
fn assigned_values<'e>(f: &FnInfo<'e>, name: &str) -> Vec<&'e Expr> {
    let mut out = Vec::new();
    for s in f.body {
        s.walk(&mut |st| {
            if let StmtKind::Decl(ds) = &st.kind {
                for d in ds.iter().filter(|d| d.name == name) {
                    if let Some(i) = &d.init {
                        out.push(i);
                    }
                }
            }
        });
        s.walk_exprs(&mut |e| {
            if let ExprKind::Assign { op: None, lhs, rhs } = &e.kind {
                if matches!(&lhs.kind, ExprKind::Ident(n) if n == name) {
                    out.push(&**rhs);
                }
            }
        });
    }
    out
}

/// Origins of returned pointers and of the values stored into pointer members.
pub(crate) fn origins(
    prog: &Program<'_>,
    sites: &BTreeMap<String, PointerSite>,
    cfg: &AnalysisConfig,
) -> BTreeMap<String, BTreeSet<Origin>> {
    let mut returns: BTreeMap<String, BTreeSet<Origin>> = BTreeMap::new();
    loop {
        let ctx = OriginCtx {
            prog,
            cfg,
            returns: &returns,
        };
        let mut next = BTreeMap::new();
        for f in prog.funcs.values() {
            let mut set = BTreeSet::new();
            for s in f.body {
                s.walk(&mut |st| {
                    if let StmtKind::Return(Some(e)) = &st.kind {
                        set.extend(ctx.of(f, e, &mut BTreeSet::new()));
                    }
                });
            }
            next.insert(f.key.clone(), set);
        }
        if next == returns {
            break;
        }
        returns = next;
    }
    let ctx = OriginCtx {
        prog,
        cfg,
        returns: &returns,
    };
    let mut out = BTreeMap::new();
    for site in sites.values() {
        match &site.site_kind {
            SiteKind::ReturnValue => {
                let set = returns.get(site.owner_name()).cloned().unwrap_or_default();
                out.insert(site.id.clone(), set);
            }
            SiteKind::Member { name } => {
                let Some(tag) = member_tag(prog, site) else { continue };
                let mut set = BTreeSet::new();
                for f in prog.funcs.values() {
                    for s in f.body {
                        s.walk_exprs(&mut |e| {
                            let ExprKind::Assign { op: None, lhs, rhs } = &e.kind else {
                                return;
                            };
                            if let ExprKind::Member { base, field, arrow } = &lhs.strip_casts().kind {
                                if field == name
                                    && prog
                                        .member_record(f, base, *arrow)
                                        .is_some_and(|r| r.tag == tag)
                                {
                                    set.extend(ctx.of(f, rhs, &mut BTreeSet::new()));
                                }
                            }
                        });
                    }
                }
                set.extend(initializer_origins(prog, &tag, name));
                out.insert(site.id.clone(), set);
            }
            SiteKind::Param { .. } => {}
        }
    }
    out
}

/// Origins contributed by brace initializers of `struct tag` objects (globals and locals).
fn initializer_origins(prog: &Program<'_>, tag: &str, field: &str) -> BTreeSet<Origin> {
    let model = prog.model;
    let Some(rec) = model.records.get(tag) else {
        return BTreeSet::new();
    };
    let Some(pos) = rec.fields.iter().position(|f| f.name == field) else {
        return BTreeSet::new();
    };
    let mut out = BTreeSet::new();
    let mut visit = |ty: &CType, init: &Expr| {
        let lists: Vec<&Expr> = match (model.resolve_type(ty), &init.kind) {
            (CType::Array { elem, .. }, ExprKind::InitList(items))
                if model.record_of(elem).is_some_and(|r| r.tag == tag) =>
            {
                items.iter().collect()
            }
            (t, ExprKind::InitList(_)) if model.record_of(t).is_some_and(|r| r.tag == tag) => {
                vec![init]
            }
            _ => vec![],
        };
        for l in lists {
            if let ExprKind::InitList(vals) = &l.kind {
                if let Some(v) = vals.get(pos) {
                    match &v.strip_casts().kind {
                        _ if is_null(v) => {}
                        ExprKind::StrLit(_) => {
                            out.insert(Origin::Literal);
                        }
                        ExprKind::Ident(n) if model.globals.contains_key(n) => {
                            out.insert(Origin::Global { name: n.clone() });
                        }
                        ExprKind::Ident(n) if model.functions.iter().any(|f| f.def.name == *n) => {
                            out.insert(Origin::Global { name: n.clone() });
                        }
                        ExprKind::Unary {
                            op: UnaryOp::AddrOf,
                            expr,
                        } if expr
                            .as_ident()
                            .is_some_and(|n| model.globals.contains_key(n)) =>
                        {
                            out.insert(Origin::Global {
                                name: expr.as_ident().unwrap_or_default().to_string(),
                            });
                        }
                        _ => {
                            out.insert(Origin::Unknown);
                        }
                    }
                }
            }
        }
    };
    for g in model.globals.values() {
        if let Some(i) = &g.init {
            visit(&g.ty, i);
        }
    }
    for f in prog.funcs.values() {
        for s in f.body {
            s.walk(&mut |st| {
                if let StmtKind::Decl(ds) = &st.kind {
                    for d in ds {
                        if let Some(i) = &d.init {
                            visit(&d.ty, i);
                        }
                    }
                }
            });
        }
    }
    out
}
