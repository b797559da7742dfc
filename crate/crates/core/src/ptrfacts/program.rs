//! Per-function environments, a small expression typer and the project call-site index.

use std::collections::BTreeMap;

use crate::frontend::ast::*;
use crate::frontend::{FunctionEntry, SourceModel};

/// How the value of a call expression is consumed at its site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Consumer {
    AssignedTo(String),
    StoredInto(String),
    Returned,
    PassedTo { callee: Option<String>, name: String, index: usize },
    Other,
}

#[derive(Debug, Clone)]
pub(crate) struct CallSite<'m> {
    pub caller: String,
    /// Resolved project function key, when the callee is a project function.
    pub callee: Option<String>,
    pub args: Vec<&'m Expr>,
    pub loc: Loc,
    pub consumer: Consumer,
}

pub(crate) struct FnInfo<'m> {
    pub key: String,
    pub def: &'m FunctionDef,
    pub body: &'m [Stmt],
    pub env: BTreeMap<String, CType>,
    pub param_names: Vec<String>,
}

impl FnInfo<'_> {
    pub fn file(&self) -> &str {
        &self.def.loc.file
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|p| p == name)
    }
}

pub(crate) struct Program<'m> {
    pub model: &'m SourceModel,
    pub funcs: BTreeMap<String, FnInfo<'m>>,
    pub calls: Vec<CallSite<'m>>,
}

impl<'m> Program<'m> {
    pub fn new(model: &'m SourceModel) -> Self {
        let mut funcs = BTreeMap::new();
        for FunctionEntry { key, def } in &model.functions {
            let Some(body) = &def.body else { continue };
            let mut env = BTreeMap::new();
            let param_names: Vec<String> = def
                .params
                .iter()
                .enumerate()
                .map(|(i, p)| p.name.clone().unwrap_or_else(|| format!("arg{i}")))
                .collect();
            for (p, n) in def.params.iter().zip(&param_names) {
                env.insert(n.clone(), p.ty.clone());
            }
            for s in body {
                collect_decls(s, &mut env);
            }
            funcs.insert(
                key.clone(),
                FnInfo {
                    key: key.clone(),
                    def,
                    body,
                    env,
                    param_names,
                },
            );
        }
        let mut p = Program {
            model,
            funcs,
            calls: Vec::new(),
        };
        let mut calls = Vec::new();
        for f in p.funcs.values() {
            for s in f.body {
                p.index_calls_stmt(f, s, &mut calls);
            }
        }
        p.calls = calls;
        p
    }

    fn index_calls_stmt(&self, f: &FnInfo<'m>, s: &'m Stmt, out: &mut Vec<CallSite<'m>>) {
        s.walk(&mut |st| match &st.kind {
            StmtKind::Decl(ds) => {
                for d in ds {
                    if let Some(init) = &d.init {
                        self.index_calls_expr(f, init, Consumer::AssignedTo(d.name.clone()), out);
                    }
                }
            }
            StmtKind::Return(Some(e)) => self.index_calls_expr(f, e, Consumer::Returned, out),
            _ => {
                for e in st.own_exprs() {
                    self.index_calls_expr(f, e, Consumer::Other, out);
                }
            }
        });
    }

    /// Records every call inside `e`; `consumer` describes how `e`'s own value is used.
    fn index_calls_expr(
        &self,
        f: &FnInfo<'m>,
        e: &'m Expr,
        consumer: Consumer,
        out: &mut Vec<CallSite<'m>>,
    ) {
        match &e.kind {
            ExprKind::Cast { expr, .. } => self.index_calls_expr(f, expr, consumer, out),
            ExprKind::Call { callee, args } => {
                let callee_name = match &callee.strip_casts().kind {
                    ExprKind::Ident(n) if !f.env.contains_key(n) => Some(n.clone()),
                    _ => None,
                };
                let resolved = callee_name
                    .as_deref()
                    .and_then(|n| self.model.resolve_function(f.file(), n))
                    .map(str::to_string);
                out.push(CallSite {
                    caller: f.key.clone(),
                    callee: resolved.clone(),
                    args: args.iter().collect(),
                    loc: e.loc.clone(),
                    consumer,
                });
                if callee_name.is_none() {
                    self.index_calls_expr(f, callee, Consumer::Other, out);
                }
                for (i, a) in args.iter().enumerate() {
                    let c = Consumer::PassedTo {
                        callee: resolved.clone(),
                        name: callee_name.clone().unwrap_or_default(),
                        index: i,
                    };
                    self.index_calls_expr(f, a, c, out);
                }
            }
            ExprKind::Assign { op: None, lhs, rhs } => {
                let c = match &lhs.strip_casts().kind {
                    ExprKind::Ident(n) => Consumer::AssignedTo(n.clone()),
                    ExprKind::Member { .. } | ExprKind::Index { .. } => {
                        match self.store_target(f, lhs) {
                            Some(t) => Consumer::StoredInto(t),
                            None => Consumer::Other,
                        }
                    }
                    _ => Consumer::Other,
                };
                self.index_calls_expr(f, lhs, Consumer::Other, out);
                self.index_calls_expr(f, rhs, c, out);
            }
            ExprKind::Comma(items) => {
                for (i, x) in items.iter().enumerate() {
                    let c = if i + 1 == items.len() {
                        consumer.clone()
                    } else {
                        Consumer::Other
                    };
                    self.index_calls_expr(f, x, c, out);
                }
            }
            ExprKind::Cond { cond, then, els } => {
                self.index_calls_expr(f, cond, Consumer::Other, out);
                self.index_calls_expr(f, then, consumer.clone(), out);
                self.index_calls_expr(f, els, consumer, out);
            }
            ExprKind::StmtExpr(stmts) => {
                for s in stmts {
                    self.index_calls_stmt(f, s, out);
                }
            }
            _ => {
                for child in children(e) {
                    self.index_calls_expr(f, child, Consumer::Other, out);
                }
            }
        }
    }

    /// `Rec.field` when `lhs` stores into a member (directly or through an index of it).
    pub fn store_target(&self, f: &FnInfo<'m>, lhs: &Expr) -> Option<String> {
        match &lhs.strip_casts().kind {
            ExprKind::Member { base, field, arrow } => {
                let rec = self.member_record(f, base, *arrow)?;
                Some(format!("{}.{}", self.model.record_unit_name(&rec.tag), field))
            }
            ExprKind::Index { base, .. } => self.store_target(f, base),
            _ => None,
        }
    }

    /// The record a member access `base.f` / `base->f` selects from.
    pub fn member_record(&self, f: &FnInfo<'m>, base: &Expr, arrow: bool) -> Option<&'m RecordDef> {
        let bt = self.type_of(f, base)?;
        let model = self.model;
        if arrow {
            let resolved = model.resolve_type(&bt).clone();
            let pointee = resolved.pointee()?.clone();
            model.record_of(&pointee).map(|r| self.lookup_record(&r.tag))
        } else {
            model.record_of(&bt).map(|r| self.lookup_record(&r.tag))
        }
    }

    fn lookup_record(&self, tag: &str) -> &'m RecordDef {
        &self.model.records[tag]
    }

    /// Static type of an expression, when the subset typer can tell.
    pub fn type_of(&self, f: &FnInfo<'m>, e: &Expr) -> Option<CType> {
        let model = self.model;
        Some(match &e.kind {
            ExprKind::Ident(n) => {
                if let Some(t) = f.env.get(n) {
                    t.clone()
                } else if let Some(g) = model.globals.get(n) {
                    g.ty.clone()
                } else if let Some(k) = model.resolve_function(f.file(), n) {
                    let d = &model.function(k)?.def;
                    CType::Function {
                        ret: Box::new(d.ret.clone()),
                        params: d.params.iter().map(|p| p.ty.clone()).collect(),
                        variadic: d.variadic,
                    }
                } else if model.enumerators.contains_key(n) {
                    CType::Builtin("int".into())
                } else {
                    return None;
                }
            }
            ExprKind::IntLit(_) | ExprKind::CharLit(_) => CType::Builtin("int".into()),
            ExprKind::FloatLit(_) => CType::Builtin("double".into()),
            ExprKind::StrLit(_) => CType::pointer_to(CType::Builtin("char".into())),
            ExprKind::Member { base, field, arrow } => {
                let rec = self.member_record(f, base, *arrow)?;
                model.field_type(rec, field)?.clone()
            }
            ExprKind::Index { base, .. } => {
                let bt = self.type_of(f, base)?;
                model.resolve_type(&bt).pointee()?.clone()
            }
            ExprKind::Unary { op, expr } => match op {
                UnaryOp::Deref => {
                    let t = self.type_of(f, expr)?;
                    model.resolve_type(&t).pointee()?.clone()
                }
                UnaryOp::AddrOf => CType::pointer_to(self.type_of(f, expr)?),
                UnaryOp::Not => CType::Builtin("int".into()),
                _ => self.type_of(f, expr)?,
            },
            ExprKind::Binary { op, lhs, rhs } => match op {
                BinaryOp::Add | BinaryOp::Sub => {
                    let l = self.type_of(f, lhs);
                    let r = self.type_of(f, rhs);
                    let lp = l.as_ref().is_some_and(|t| self.is_pointerish(t));
                    let rp = r.as_ref().is_some_and(|t| self.is_pointerish(t));
                    match (lp, rp) {
                        (true, true) => CType::Builtin("long".into()),
                        (true, false) => decay(model, l?),
                        (false, true) => decay(model, r?),
                        _ => l.or(r)?,
                    }
                }
                BinaryOp::Mul
                | BinaryOp::Div
                | BinaryOp::Rem
                | BinaryOp::Shl
                | BinaryOp::Shr
                | BinaryOp::BitAnd
                | BinaryOp::BitOr
                | BinaryOp::BitXor => self.type_of(f, lhs)?,
                _ => CType::Builtin("int".into()),
            },
            ExprKind::Assign { lhs, .. } => self.type_of(f, lhs)?,
            ExprKind::Cond { then, els, .. } => {
                self.type_of(f, then).or_else(|| self.type_of(f, els))?
            }
            ExprKind::Cast { ty, .. } => ty.clone(),
            ExprKind::Call { callee, .. } => {
                let ct = self.type_of(f, callee)?;
                let ct = model.resolve_type(&ct).clone();
                let ft = match &ct {
                    CType::Function { .. } => ct.clone(),
                    CType::Pointer { pointee, .. } => model.resolve_type(pointee).clone(),
                    _ => return None,
                };
                match ft {
                    CType::Function { ret, .. } => *ret,
                    _ => return None,
                }
            }
            ExprKind::SizeofType(_) | ExprKind::SizeofExpr(_) => {
                CType::Builtin("unsigned long".into())
            }
            ExprKind::Comma(items) => self.type_of(f, items.last()?)?,
            ExprKind::BuiltinTyped { name, ty, .. } if name == "__builtin_va_arg" => ty.clone(),
            _ => return None,
        })
    }

    pub fn is_pointerish(&self, t: &CType) -> bool {
        matches!(
            self.model.resolve_type(t),
            CType::Pointer { .. } | CType::Array { .. }
        )
    }

    pub fn is_array(&self, t: &CType) -> bool {
        matches!(self.model.resolve_type(t), CType::Array { .. })
    }

    pub fn calls_to<'a>(&'a self, callee: &'a str) -> impl Iterator<Item = &'a CallSite<'m>> + 'a {
        self.calls
            .iter()
            .filter(move |c| c.callee.as_deref() == Some(callee))
    }

    pub fn calls_in<'a>(&'a self, caller: &'a str) -> impl Iterator<Item = &'a CallSite<'m>> + 'a {
        self.calls.iter().filter(move |c| c.caller == caller)
    }
}

fn decay(model: &SourceModel, t: CType) -> CType {
    match model.resolve_type(&t) {
        CType::Array { elem, .. } => CType::pointer_to((**elem).clone()),
        _ => t,
    }
}

fn collect_decls(s: &Stmt, env: &mut BTreeMap<String, CType>) {
    s.walk(&mut |s| {
        if let StmtKind::Decl(ds) = &s.kind {
            for d in ds {
                env.insert(d.name.clone(), d.ty.clone());
            }
        }
    });
    s.walk_exprs(&mut |e| {
        if let ExprKind::StmtExpr(stmts) = &e.kind {
            for s in stmts {
                s.walk(&mut |s| {
                    if let StmtKind::Decl(ds) = &s.kind {
                        for d in ds {
                            env.insert(d.name.clone(), d.ty.clone());
                        }
                    }
                });
            }
        }
    });
}

/// Direct sub-expressions (statement expressions excluded).
pub(crate) fn children(e: &Expr) -> Vec<&Expr> {
    match &e.kind {
        ExprKind::Call { callee, args } => {
            let mut v = vec![&**callee];
            v.extend(args.iter());
            v
        }
        ExprKind::Member { base, .. } => vec![base],
        ExprKind::Index { base, index } => vec![base, index],
        ExprKind::Unary { expr, .. } | ExprKind::Cast { expr, .. } | ExprKind::SizeofExpr(expr) => {
            vec![expr]
        }
        ExprKind::Binary { lhs, rhs, .. } | ExprKind::Assign { lhs, rhs, .. } => vec![lhs, rhs],
        ExprKind::Cond { cond, then, els } => vec![cond, then, els],
        ExprKind::Comma(items) | ExprKind::InitList(items) => items.iter().collect(),
        ExprKind::BuiltinTyped { args, .. } => args.iter().collect(),
        _ => vec![],
    }
}

/// Structural equality ignoring locations and casts.
pub(crate) fn same_expr(a: &Expr, b: &Expr) -> bool {
    let (a, b) = (a.strip_casts(), b.strip_casts());
    match (&a.kind, &b.kind) {
        (ExprKind::Ident(x), ExprKind::Ident(y)) => x == y,
        (ExprKind::IntLit(x), ExprKind::IntLit(y)) => x == y,
        (
            ExprKind::Member {
                base: b1,
                field: f1,
                arrow: a1,
            },
            ExprKind::Member {
                base: b2,
                field: f2,
                arrow: a2,
            },
        ) => f1 == f2 && a1 == a2 && same_expr(b1, b2),
        (
            ExprKind::Index {
                base: b1,
                index: i1,
            },
            ExprKind::Index {
                base: b2,
                index: i2,
            },
        ) => same_expr(b1, b2) && same_expr(i1, i2),
        (ExprKind::Unary { op: o1, expr: e1 }, ExprKind::Unary { op: o2, expr: e2 }) => {
            o1 == o2 && same_expr(e1, e2)
        }
        _ => false,
    }
}

/// Is `e` a null pointer constant (`0`, `(void *)0`, `'\0'` is not accepted)?
pub(crate) fn is_null(e: &Expr) -> bool {
    matches!(&e.strip_casts().kind, ExprKind::IntLit(s) if s.trim_end_matches(['u', 'U', 'l', 'L']) == "0")
}
