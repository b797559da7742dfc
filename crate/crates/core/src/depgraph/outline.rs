//! A coarse statement outline of function bodies, kept in the KG so that deallocation
//! stripping can run from the exported graph alone.

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{Expr, ExprKind, FunctionDef, Stmt, StmtKind, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutlineKind {
    /// An expression statement that is a single direct call (result discarded).
    Call { callee: String },
    /// A discarded call through a function pointer; `via` is the variable or field holding it.
    Callback { via: String },
    /// Control flow whose header has no side effects; removable when its children are.
    Guard,
    /// A local declaration without side-effecting initializers.
    PureDecl,
    /// `return;` or a return of a side-effect-free expression.
    Return,
    Other,
}

/// One statement; `start..end` is a byte range into the unit's source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineStmt {
    #[serde(flatten)]
    pub kind: OutlineKind,
    pub start: usize,
    pub end: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<OutlineStmt>,
}

pub fn outline_function(f: &FunctionDef) -> Vec<OutlineStmt> {
    let base = f.span.start;
    f.body
        .as_ref()
        .map(|b| b.iter().map(|s| outline_stmt(s, base)).collect())
        .unwrap_or_default()
}

fn outline_stmt(s: &Stmt, base: usize) -> OutlineStmt {
    let start = s.span.start.saturating_sub(base);
    let end = s.span.end.saturating_sub(base);
    let node = |kind, children| OutlineStmt {
        kind,
        start,
        end,
        children,
    };
    match &s.kind {
        StmtKind::Expr(e) => match (discarded_call(e), callback(e)) {
            (Some(callee), _) => node(OutlineKind::Call { callee }, vec![]),
            (None, Some(via)) => node(OutlineKind::Callback { via }, vec![]),
            _ => node(OutlineKind::Other, vec![]),
        },
        StmtKind::Empty => node(OutlineKind::Guard, vec![]),
        StmtKind::Block(items) => node(
            OutlineKind::Guard,
            items.iter().map(|s| outline_stmt(s, base)).collect(),
        ),
        StmtKind::If { cond, then, els } if is_pure(cond) => {
            let mut children = vec![outline_stmt(then, base)];
            if let Some(e) = els {
                children.push(outline_stmt(e, base));
            }
            node(OutlineKind::Guard, children)
        }
        StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } if is_pure(cond) => {
            node(OutlineKind::Guard, vec![outline_stmt(body, base)])
        }
        StmtKind::For {
            init,
            cond,
            step,
            body,
        } if cond.as_ref().is_none_or(is_pure)
            && step.as_ref().is_none_or(is_local_update)
            && init.as_ref().is_none_or(|i| is_pure_init(i)) =>
        {
            node(OutlineKind::Guard, vec![outline_stmt(body, base)])
        }
        StmtKind::Decl(decls) if decls.iter().all(|d| d.init.as_ref().is_none_or(is_pure)) => {
            node(OutlineKind::PureDecl, vec![])
        }
        StmtKind::Return(e) if e.as_ref().is_none_or(is_pure) => node(OutlineKind::Return, vec![]),
        // Impure headers: not removable themselves, but their bodies may still hold calls.
        StmtKind::If { then, els, .. } => {
            let mut children = vec![outline_stmt(then, base)];
            if let Some(e) = els {
                children.push(outline_stmt(e, base));
            }
            node(OutlineKind::Other, children)
        }
        StmtKind::While { body, .. }
        | StmtKind::DoWhile { body, .. }
        | StmtKind::For { body, .. }
        | StmtKind::Switch { body, .. }
        | StmtKind::Case { body, .. }
        | StmtKind::Default(body)
        | StmtKind::Label { body, .. } => node(OutlineKind::Other, vec![outline_stmt(body, base)]),
        _ => node(OutlineKind::Other, vec![]),
    }
}

/// `f(...)` or `(void) f(...)`.
fn discarded_call(e: &Expr) -> Option<String> {
    let e = e.strip_casts();
    e.direct_callee().map(str::to_string)
}

/// `(*fp)(...)` or `(*s->fp)(...)` with side-effect-free arguments.
fn callback(e: &Expr) -> Option<String> {
    let ExprKind::Call { callee, args } = &e.strip_casts().kind else {
        return None;
    };
    if !args.iter().all(is_pure) {
        return None;
    }
    let mut c = callee.strip_casts();
    while let ExprKind::Unary {
        op: UnaryOp::Deref,
        expr,
    } = &c.kind
    {
        c = expr.strip_casts();
    }
    match &c.kind {
        ExprKind::Ident(n) => Some(n.clone()),
        ExprKind::Member { base, field, .. } if is_pure(base) => Some(field.clone()),
        _ => None,
    }
}

fn is_pure(e: &Expr) -> bool {
    let mut pure = true;
    e.walk(&mut |x| match &x.kind {
        ExprKind::Call { .. } | ExprKind::Assign { .. } | ExprKind::StmtExpr(_) => pure = false,
        ExprKind::Unary { op, .. } if op.is_mutation() => pure = false,
        _ => {}
    });
    pure
}

/// Loop steps such as `i++` or `p = p->next` that only update a plain variable.
fn is_local_update(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Comma(items) => items.iter().all(is_local_update),
        ExprKind::Unary { op, expr } if op.is_mutation() => expr.as_ident().is_some(),
        ExprKind::Assign { lhs, rhs, .. } => lhs.as_ident().is_some() && is_pure(rhs),
        _ => is_pure(e),
    }
}

fn is_pure_init(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Expr(e) => is_local_update(e),
        StmtKind::Decl(ds) => ds.iter().all(|d| d.init.as_ref().is_none_or(is_pure)),
        StmtKind::Empty => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse_file;
    use crate::frontend::preprocess::{ExpandedFile, LineOrigin};

    fn outline(src: &str) -> Vec<OutlineStmt> {
        let f = ExpandedFile {
            rel_path: "t.c".into(),
            text: src.into(),
            line_origins: src
                .lines()
                .enumerate()
                .map(|(i, _)| LineOrigin {
                    file: "t.c".into(),
                    line: i as u32 + 1,
                    system: false,
                })
                .collect(),
        };
        let p = parse_file(&f).unwrap();
        outline_function(&p.functions[0])
    }

    #[test]
    fn guards_and_calls() {
        let src = "void f(int *p, int *q) {\n  if (p != 0) free(p);\n  for (int i = 0; i < 3; i++) { free(q); }\n  return;\n}\n";
        let o = outline(src);
        assert_eq!(o.len(), 3);
        assert_eq!(o[0].kind, OutlineKind::Guard);
        assert_eq!(
            o[0].children[0].kind,
            OutlineKind::Call {
                callee: "free".into()
            }
        );
        assert_eq!(&src[o[0].children[0].start..o[0].children[0].end], "free(p);");
        assert_eq!(o[1].kind, OutlineKind::Guard);
        assert_eq!(o[2].kind, OutlineKind::Return);
    }

    #[test]
    fn side_effects_are_other() {
        let o = outline("int g(int *p) { if (h(p)) free(p); *p = 1; return h(p); }\n");
        assert!(o.iter().all(|s| s.kind == OutlineKind::Other));
        assert_eq!(
            o[0].children[0].kind,
            OutlineKind::Call {
                callee: "free".into()
            }
        );
    }
}
