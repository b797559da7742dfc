//! Flow-insensitive, field-based inclusion solver over abstract pointer variables.
//!
//! Constraints are re-evaluated in global rounds until nothing grows; context is the
//! union over direct call sites.

use std::collections::{BTreeMap, BTreeSet};

use super::program::{is_null, FnInfo, Program};
use super::{MemoryObject, ObjectKind};
use crate::cli::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::frontend::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Var {
    Local(String, String),
    Global(String),
    /// Field of a record, shared by every instance (record tag, field).
    Field(String, String),
    Ret(String),
}

pub(crate) type ObjSet = BTreeSet<usize>;

enum Constraint<'m> {
    /// `var ⊇ eval(expr)` evaluated in function `func` (None for global initializers).
    Flow {
        var: Var,
        func: Option<String>,
        expr: &'m Expr,
    },
}

pub(crate) struct Solver<'p, 'm> {
    pub prog: &'p Program<'m>,
    cfg: &'p AnalysisConfig,
    pub objects: Vec<MemoryObject>,
    obj_index: BTreeMap<String, usize>,
    /// Allocation objects keyed by the address of their call expression.
    heap_sites: BTreeMap<usize, usize>,
    strings: BTreeMap<usize, usize>,
    pub pts: BTreeMap<Var, ObjSet>,
    constraints: Vec<Constraint<'m>>,
    pub rounds: usize,
}

const UNKNOWN: usize = 0;

impl<'p, 'm> Solver<'p, 'm> {
    pub fn new(prog: &'p Program<'m>, cfg: &'p AnalysisConfig) -> Self {
        let mut s = Solver {
            prog,
            cfg,
            objects: Vec::new(),
            obj_index: BTreeMap::new(),
            heap_sites: BTreeMap::new(),
            strings: BTreeMap::new(),
            pts: BTreeMap::new(),
            constraints: Vec::new(),
            rounds: 0,
        };
        s.intern(MemoryObject {
            id: "unknown".into(),
            kind: ObjectKind::Unknown,
            element_type: "unknown".into(),
        });
        s
    }

    fn intern(&mut self, o: MemoryObject) -> usize {
        if let Some(&i) = self.obj_index.get(&o.id) {
            return i;
        }
        let i = self.objects.len();
        self.obj_index.insert(o.id.clone(), i);
        self.objects.push(o);
        i
    }

    /// Generates constraints and iterates to a fixed point (at most `cap` rounds, raised
    /// to the number of abstract variables when that is larger).
    pub fn solve(&mut self, cap: usize) -> Result<()> {
        let prog = self.prog;
        for g in prog.model.globals.values() {
            self.global_object(&g.name);
            if let Some(init) = &g.init {
                self.register_objects(None, init, Some(&g.ty));
                self.constraints.push(Constraint::Flow {
                    var: Var::Global(g.name.clone()),
                    func: None,
                    expr: init,
                });
            }
        }
        for f in prog.funcs.values() {
            for s in f.body {
                self.gen_stmt(f, s);
            }
        }
        for c in prog.calls.iter() {
            let Some(callee) = &c.callee else { continue };
            let Some(target) = prog.funcs.get(callee) else {
                continue;
            };
            for (i, a) in c.args.iter().enumerate() {
                if let Some(p) = target.param_names.get(i) {
                    self.constraints.push(Constraint::Flow {
                        var: Var::Local(callee.clone(), p.clone()),
                        func: Some(c.caller.clone()),
                        expr: a,
                    });
                }
            }
        }

        // A chain of copies through n variables can need n rounds to settle.
        let cap = cap.max(self.variable_count() + 2);
        loop {
            self.rounds += 1;
            let mut changed = false;
            for i in 0..self.constraints.len() {
                let Constraint::Flow { var, func, expr } = &self.constraints[i];
                let (var, func, expr) = (var.clone(), func.clone(), *expr);
                let f = func.as_ref().and_then(|k| prog.funcs.get(k));
                let add = self.eval(f, expr);
                if add.is_empty() {
                    continue;
                }
                let entry = self.pts.entry(var).or_default();
                let before = entry.len();
                entry.extend(add);
                changed |= entry.len() != before;
            }
            if !changed {
                return Ok(());
            }
            if self.rounds >= cap {
                return Err(Error::Unstable(format!(
                    "points-to sets still growing after {cap} rounds"
                )));
            }
        }
    }

    fn gen_stmt(&mut self, f: &FnInfo<'m>, s: &'m Stmt) {
        s.walk(&mut |st| {
            if let StmtKind::Decl(ds) = &st.kind {
                for d in ds {
                    if let Some(init) = &d.init {
                        self.register_objects(Some(f), init, Some(&d.ty));
                        self.constraints.push(Constraint::Flow {
                            var: Var::Local(f.key.clone(), d.name.clone()),
                            func: Some(f.key.clone()),
                            expr: init,
                        });
                    }
                }
            }
            if let StmtKind::Return(Some(e)) = &st.kind {
                self.constraints.push(Constraint::Flow {
                    var: Var::Ret(f.key.clone()),
                    func: Some(f.key.clone()),
                    expr: e,
                });
            }
            for e in st.own_exprs() {
                self.register_objects(Some(f), e, None);
                e.walk(&mut |x| {
                    if let ExprKind::Assign { op: None, lhs, rhs } = &x.kind {
                        if let Some(var) = self.lvalue_var(f, lhs) {
                            self.constraints.push(Constraint::Flow {
                                var,
                                func: Some(f.key.clone()),
                                expr: rhs,
                            });
                        }
                    }
                    if let ExprKind::StmtExpr(stmts) = &x.kind {
                        for s in stmts {
                            if let StmtKind::Decl(ds) = &s.kind {
                                for d in ds {
                                    if let Some(init) = &d.init {
                                        self.constraints.push(Constraint::Flow {
                                            var: Var::Local(f.key.clone(), d.name.clone()),
                                            func: Some(f.key.clone()),
                                            expr: init,
                                        });
                                    }
                                }
                            }
                        }
                    }
                });
            }
        });
    }

    /// Creates heap and string-literal objects for every allocation call / literal in `e`.
    fn register_objects(&mut self, f: Option<&FnInfo<'m>>, e: &'m Expr, dest: Option<&CType>) {
        let mut hints: Vec<(&'m Expr, Option<CType>)> = vec![(e, dest.cloned())];
        e.walk(&mut |x| {
            if let ExprKind::Assign { op: None, lhs, rhs } = &x.kind {
                let t = f.and_then(|f| self.prog.type_of(f, lhs));
                hints.push((rhs, t));
            }
        });
        let mut dest_of: BTreeMap<usize, Option<CType>> = BTreeMap::new();
        for (h, t) in hints {
            dest_of.insert(h.strip_casts() as *const Expr as usize, t);
        }
        let owner = f.map(|f| f.key.clone()).unwrap_or_else(|| "<global>".into());
        let mut ordinal: BTreeMap<(String, u32), usize> = BTreeMap::new();
        e.walk(&mut |x| match &x.kind {
            ExprKind::Call { args, .. } => {
                let Some(name) = x.direct_callee() else { return };
                if f.is_some_and(|f| f.env.contains_key(name)) || !self.cfg.is_allocator(name) {
                    return;
                }
                let addr = x as *const Expr as usize;
                if self.heap_sites.contains_key(&addr) {
                    return;
                }
                let n = ordinal
                    .entry((x.loc.file.clone(), x.loc.line))
                    .and_modify(|n| *n += 1)
                    .or_insert(0);
                let elem = self.alloc_element_type(f, name, args, dest_of.get(&addr).cloned().flatten());
                let id = if *n == 0 {
                    format!("heap:{owner}@{}", x.loc)
                } else {
                    format!("heap:{owner}@{}#{n}", x.loc)
                };
                let idx = self.intern(MemoryObject {
                    id: id.clone(),
                    kind: ObjectKind::HeapAlloc { site: id },
                    element_type: elem,
                });
                self.heap_sites.insert(addr, idx);
            }
            ExprKind::StrLit(_) => {
                let addr = x as *const Expr as usize;
                let id = format!("str:{}", x.loc);
                let idx = self.intern(MemoryObject {
                    id,
                    kind: ObjectKind::StringLiteral,
                    element_type: "char".into(),
                });
                self.strings.insert(addr, idx);
            }
            _ => {}
        });
    }

    fn alloc_element_type(
        &self,
        f: Option<&FnInfo<'m>>,
        name: &str,
        args: &[Expr],
        dest: Option<CType>,
    ) -> String {
        let model = self.prog.model;
        if name == "strdup" || name == "strndup" {
            return "char".into();
        }
        let mut found: Option<String> = None;
        for a in args {
            a.walk(&mut |x| {
                if found.is_some() {
                    return;
                }
                match &x.kind {
                    ExprKind::SizeofType(t) => found = Some(model.display_type(t)),
                    ExprKind::SizeofExpr(inner) => {
                        if let Some(t) = f.and_then(|f| self.prog.type_of(f, inner)) {
                            found = Some(model.display_type(&t));
                        }
                    }
                    _ => {}
                }
            });
        }
        if let Some(t) = found {
            return t;
        }
        match dest.as_ref().map(|d| model.resolve_type(d)).and_then(CType::pointee) {
            Some(p) => model.display_type(p),
            None => "void".into(),
        }
    }

    fn global_object(&mut self, name: &str) -> usize {
        let model = self.prog.model;
        let elem = match model.globals.get(name) {
            Some(g) => match model.resolve_type(&g.ty) {
                CType::Array { elem, .. } => model.display_type(elem),
                _ => model.display_type(&g.ty),
            },
            None => "fn".into(),
        };
        self.intern(MemoryObject {
            id: format!("global:{name}"),
            kind: ObjectKind::Global {
                name: name.to_string(),
            },
            element_type: elem,
        })
    }

    fn local_object(&mut self, f: &FnInfo<'m>, var: &str) -> usize {
        let model = self.prog.model;
        let elem = match f.env.get(var).map(|t| model.resolve_type(t)) {
            Some(CType::Array { elem, .. }) => model.display_type(elem),
            Some(t) => model.display_type(t),
            None => "unknown".into(),
        };
        self.intern(MemoryObject {
            id: format!("local:{}.{var}", f.key),
            kind: ObjectKind::Local {
                func: f.key.clone(),
                var: var.to_string(),
            },
            element_type: elem,
        })
    }

    /// The abstract variable an assignment target stores into.
    fn lvalue_var(&self, f: &FnInfo<'m>, lhs: &Expr) -> Option<Var> {
        let prog = self.prog;
        match &lhs.strip_casts().kind {
            ExprKind::Ident(n) => {
                if f.env.contains_key(n) {
                    Some(Var::Local(f.key.clone(), n.clone()))
                } else if prog.model.globals.contains_key(n) {
                    Some(Var::Global(n.clone()))
                } else {
                    None
                }
            }
            ExprKind::Member { base, field, arrow } => {
                let rec = prog.member_record(f, base, *arrow)?;
                Some(Var::Field(rec.tag.clone(), field.clone()))
            }
            ExprKind::Index { base, .. } => {
                let bt = prog.type_of(f, base)?;
                if prog.is_array(&bt) {
                    self.lvalue_var(f, base)
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn var_pts(&self, v: &Var) -> ObjSet {
        self.pts.get(v).cloned().unwrap_or_default()
    }

    /// Objects `e` may point to, given the current solution.
    pub fn eval(&mut self, f: Option<&FnInfo<'m>>, e: &Expr) -> ObjSet {
        let prog = self.prog;
        let model = prog.model;
        let one = |i: usize| -> ObjSet { [i].into_iter().collect() };
        match &e.kind {
            ExprKind::Ident(n) => {
                if let Some(f) = f.filter(|f| f.env.contains_key(n)) {
                    if prog.is_array(&f.env[n]) {
                        return one(self.local_object(f, n));
                    }
                    return self.var_pts(&Var::Local(f.key.clone(), n.clone()));
                }
                if let Some(g) = model.globals.get(n) {
                    let ty = g.ty.clone();
                    if prog.is_array(&ty)
                        || matches!(model.resolve_type(&ty), CType::Function { .. })
                    {
                        return one(self.global_object(n));
                    }
                    return self.var_pts(&Var::Global(n.clone()));
                }
                let file = f.map(|f| f.file().to_string()).unwrap_or_default();
                if model.resolve_function(&file, n).is_some()
                    || model.functions.iter().any(|fe| fe.def.name == *n)
                {
                    return one(self.global_object(n));
                }
                if model.enumerators.contains_key(n) {
                    return ObjSet::new();
                }
                one(UNKNOWN)
            }
            ExprKind::IntLit(_) | ExprKind::FloatLit(_) | ExprKind::CharLit(_) => ObjSet::new(),
            ExprKind::StrLit(_) => {
                let addr = e as *const Expr as usize;
                match self.strings.get(&addr) {
                    Some(&i) => one(i),
                    None => {
                        let i = self.intern(MemoryObject {
                            id: format!("str:{}", e.loc),
                            kind: ObjectKind::StringLiteral,
                            element_type: "char".into(),
                        });
                        one(i)
                    }
                }
            }
            ExprKind::Unary { op, expr } => match op {
                UnaryOp::AddrOf => self.address_of(f, expr),
                UnaryOp::Deref => self.load(f, e),
                UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec => {
                    self.eval(f, expr)
                }
                _ => ObjSet::new(),
            },
            ExprKind::Index { .. } => self.load(f, e),
            ExprKind::Member { base, field, arrow } => {
                let Some(fi) = f else { return one(UNKNOWN) };
                let ty = prog.type_of(fi, e);
                if ty.as_ref().is_some_and(|t| prog.is_array(t)) {
                    return if *arrow {
                        self.eval(f, base)
                    } else {
                        self.address_of(f, base)
                    };
                }
                if ty.as_ref().is_some_and(|t| !prog.is_pointerish(t)) {
                    return ObjSet::new();
                }
                match prog.member_record(fi, base, *arrow) {
                    Some(rec) => self.var_pts(&Var::Field(rec.tag.clone(), field.clone())),
                    None => one(UNKNOWN),
                }
            }
            ExprKind::Call { args, .. } => {
                let addr = e as *const Expr as usize;
                if let Some(&i) = self.heap_sites.get(&addr) {
                    return one(i);
                }
                let Some(name) = e.direct_callee() else {
                    return one(UNKNOWN);
                };
                if f.is_some_and(|f| f.env.contains_key(name)) {
                    return one(UNKNOWN);
                }
                let file = f.map(|f| f.file().to_string()).unwrap_or_default();
                if let Some(k) = model.resolve_function(&file, name) {
                    if prog.funcs.contains_key(k) {
                        return self.var_pts(&Var::Ret(k.to_string()));
                    }
                    // Defined but unanalysable body.
                    return one(UNKNOWN);
                }
                if self.cfg.is_deallocator(name) {
                    return ObjSet::new();
                }
                if self.cfg.is_std_writer(name) {
                    // memcpy & co. return their destination.
                    return args.first().map(|a| self.eval(f, a)).unwrap_or_default();
                }
                one(UNKNOWN)
            }
            ExprKind::Cast { expr, .. } => {
                if is_null(expr) {
                    ObjSet::new()
                } else {
                    self.eval(f, expr)
                }
            }
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinaryOp::Add | BinaryOp::Sub => {
                    let mut s = self.eval(f, lhs);
                    if *op == BinaryOp::Add {
                        s.extend(self.eval(f, rhs));
                    }
                    s
                }
                _ => ObjSet::new(),
            },
            ExprKind::Assign { op, lhs, rhs } => match op {
                None => self.eval(f, rhs),
                Some(_) => self.eval(f, lhs),
            },
            ExprKind::Cond { then, els, .. } => {
                let mut s = self.eval(f, then);
                s.extend(self.eval(f, els));
                s
            }
            ExprKind::Comma(items) => items.last().map(|x| self.eval(f, x)).unwrap_or_default(),
            ExprKind::InitList(items) => {
                let mut s = ObjSet::new();
                for x in items {
                    s.extend(self.eval(f, x));
                }
                s
            }
            ExprKind::SizeofType(_) | ExprKind::SizeofExpr(_) => ObjSet::new(),
            ExprKind::BuiltinTyped { name, .. } if name.contains("offsetof") => ObjSet::new(),
            ExprKind::BuiltinTyped { .. } | ExprKind::StmtExpr(_) => one(UNKNOWN),
        }
    }

    /// `*p` / `p[i]`: element loads through arrays stay precise, other loads of pointers are Unknown.
    fn load(&mut self, f: Option<&FnInfo<'m>>, e: &Expr) -> ObjSet {
        let prog = self.prog;
        let Some(fi) = f else {
            return [UNKNOWN].into_iter().collect();
        };
        let ty = prog.type_of(fi, e);
        if ty.as_ref().is_some_and(|t| !prog.is_pointerish(t)) {
            return ObjSet::new();
        }
        let base = match &e.kind {
            ExprKind::Index { base, .. } => Some(&**base),
            ExprKind::Unary { expr, .. } => Some(&**expr),
            _ => None,
        };
        if let Some(b) = base {
            let bt = prog.type_of(fi, b);
            if bt.as_ref().is_some_and(|t| prog.is_array(t)) {
                if let Some(v) = self.lvalue_var(fi, b) {
                    return self.var_pts(&v);
                }
            }
        }
        [UNKNOWN].into_iter().collect()
    }

    /// Objects denoted by the address of lvalue `x`.
    pub fn address_of(&mut self, f: Option<&FnInfo<'m>>, x: &Expr) -> ObjSet {
        let prog = self.prog;
        let one = |i: usize| -> ObjSet { [i].into_iter().collect() };
        match &x.kind {
            ExprKind::Ident(n) => {
                if let Some(fi) = f.filter(|fi| fi.env.contains_key(n)) {
                    return one(self.local_object(fi, n));
                }
                if prog.model.globals.contains_key(n)
                    || prog.model.functions.iter().any(|fe| fe.def.name == *n)
                {
                    return one(self.global_object(n));
                }
                one(UNKNOWN)
            }
            ExprKind::Member { base, arrow, .. } => {
                if *arrow {
                    self.eval(f, base)
                } else {
                    self.address_of(f, base)
                }
            }
            ExprKind::Index { base, .. } => {
                let is_arr = f
                    .and_then(|fi| prog.type_of(fi, base))
                    .is_some_and(|t| prog.is_array(&t));
                if is_arr {
                    self.address_of(f, base)
                } else {
                    self.eval(f, base)
                }
            }
            ExprKind::Unary {
                op: UnaryOp::Deref,
                expr,
            } => self.eval(f, expr),
            ExprKind::Cast { expr, .. } => self.address_of(f, expr),
            ExprKind::InitList(_) => ObjSet::new(),
            _ => one(UNKNOWN),
        }
    }

    pub fn object_set(&self, s: &ObjSet) -> BTreeSet<MemoryObject> {
        s.iter().map(|&i| self.objects[i].clone()).collect()
    }

    pub fn variable_count(&self) -> usize {
        let mut vars: BTreeSet<&Var> = BTreeSet::new();
        for Constraint::Flow { var, .. } in &self.constraints {
            vars.insert(var);
        }
        vars.len()
    }

}
