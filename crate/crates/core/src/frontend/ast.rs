//! Syntax tree for the supported C subset.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Original source position of a construct (before macro expansion).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Loc {
    pub file: String,
    pub line: u32,
}

impl Loc {
    pub fn new(file: impl Into<String>, line: u32) -> Self {
        Loc {
            file: file.into(),
            line,
        }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

/// Byte range into the expanded text of the translation file that holds a construct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RecordKind {
    Struct,
    Union,
}

/// A C type. `Const` wraps the qualified type; pointer constness is carried on the pointer.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CType {
    Void,
    /// Arithmetic builtin with a normalized spelling ("unsigned int", "double", "char").
    Builtin(String),
    /// Reference to a typedef name.
    Named(String),
    /// `struct tag` / `union tag` (tag may be synthesized for anonymous records).
    Record(RecordKind, String),
    Enum(String),
    Pointer {
        pointee: Box<CType>,
        is_const: bool,
    },
    Array {
        elem: Box<CType>,
        len: Option<String>,
    },
    Function {
        ret: Box<CType>,
        params: Vec<CType>,
        variadic: bool,
    },
    Const(Box<CType>),
}

impl CType {
    pub fn pointer_to(pointee: CType) -> CType {
        CType::Pointer {
            pointee: Box::new(pointee),
            is_const: false,
        }
    }

    /// Strips top-level `const` qualifiers.
    pub fn unqualified(&self) -> &CType {
        let mut t = self;
        while let CType::Const(inner) = t {
            t = inner;
        }
        t
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self.unqualified(), CType::Pointer { .. })
    }

    pub fn pointee(&self) -> Option<&CType> {
        match self.unqualified() {
            CType::Pointer { pointee, .. } => Some(pointee),
            CType::Array { elem, .. } => Some(elem),
            _ => None,
        }
    }

    pub fn is_function_pointer(&self) -> bool {
        matches!(self.pointee().map(CType::unqualified), Some(CType::Function { .. }))
    }

    /// Number of pointer levels (`int **` → 2).
    pub fn pointer_depth(&self) -> usize {
        let mut depth = 0;
        let mut t = self.unqualified();
        while let CType::Pointer { pointee, .. } = t {
            depth += 1;
            t = pointee.unqualified();
        }
        depth
    }

    /// Renders the type as a C declaration of `name` (or an abstract declarator when empty).
    pub fn declare(&self, name: &str) -> String {
        let (base, decl) = self.split_declarator(name.to_string());
        if decl.is_empty() {
            base
        } else {
            format!("{base} {decl}")
        }
    }

    fn split_declarator(&self, inner: String) -> (String, String) {
        match self {
            CType::Pointer { pointee, is_const } => {
                let star = if *is_const {
                    format!("*const {inner}").trim_end().to_string()
                } else {
                    format!("*{inner}")
                };
                let needs_parens = matches!(
                    pointee.unqualified(),
                    CType::Array { .. } | CType::Function { .. }
                );
                let wrapped = if needs_parens {
                    format!("({star})")
                } else {
                    star
                };
                pointee.split_declarator(wrapped)
            }
            CType::Array { elem, len } => {
                let d = format!("{inner}[{}]", len.as_deref().unwrap_or(""));
                elem.split_declarator(d)
            }
            CType::Function {
                ret,
                params,
                variadic,
            } => {
                let mut ps: Vec<String> = params.iter().map(|p| p.declare("")).collect();
                if *variadic {
                    ps.push("...".into());
                }
                if ps.is_empty() {
                    ps.push("void".into());
                }
                let d = format!("{inner}({})", ps.join(", "));
                ret.split_declarator(d)
            }
            CType::Const(t) => {
                let (b, d) = t.split_declarator(inner);
                (format!("const {b}"), d)
            }
            other => (other.base_spelling(), inner),
        }
    }

    fn base_spelling(&self) -> String {
        match self {
            CType::Void => "void".into(),
            CType::Builtin(s) | CType::Named(s) => s.clone(),
            CType::Record(RecordKind::Struct, t) => format!("struct {t}"),
            CType::Record(RecordKind::Union, t) => format!("union {t}"),
            CType::Enum(t) => format!("enum {t}"),
            _ => unreachable!("derived types are rendered through split_declarator"),
        }
    }

    /// Visits every type nested in this one, including itself.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a CType)) {
        f(self);
        match self {
            CType::Pointer { pointee, .. } => pointee.walk(f),
            CType::Array { elem, .. } => elem.walk(f),
            CType::Function { ret, params, .. } => {
                ret.walk(f);
                for p in params {
                    p.walk(f);
                }
            }
            CType::Const(t) => t.walk(f),
            _ => {}
        }
    }
}

impl fmt::Display for CType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.declare(""))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Option<String>,
    pub ty: CType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Deref,
    AddrOf,
    Neg,
    Plus,
    Not,
    BitNot,
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

impl UnaryOp {
    pub fn is_mutation(self) -> bool {
        matches!(
            self,
            UnaryOp::PreInc | UnaryOp::PreDec | UnaryOp::PostInc | UnaryOp::PostDec
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Ident(String),
    IntLit(String),
    FloatLit(String),
    CharLit(String),
    StrLit(String),
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
    },
    Member {
        base: Box<Expr>,
        field: String,
        arrow: bool,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Unary {
        op: UnaryOp,
        expr: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    /// Plain (`op == None`) or compound assignment.
    Assign {
        op: Option<BinaryOp>,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Cond {
        cond: Box<Expr>,
        then: Box<Expr>,
        els: Box<Expr>,
    },
    Cast {
        ty: CType,
        expr: Box<Expr>,
    },
    SizeofType(CType),
    SizeofExpr(Box<Expr>),
    Comma(Vec<Expr>),
    InitList(Vec<Expr>),
    /// `__builtin_*` forms taking type operands (`va_arg`, `offsetof`).
    BuiltinTyped {
        name: String,
        ty: CType,
        args: Vec<Expr>,
    },
    /// GNU statement expression `({ ... })`.
    StmtExpr(Vec<Stmt>),
}

impl Expr {
    /// Visits this expression and every sub-expression (pre-order), descending into statement expressions.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Call { callee, args } => {
                callee.walk(f);
                args.iter().for_each(|a| a.walk(f));
            }
            ExprKind::Member { base, .. } => base.walk(f),
            ExprKind::Index { base, index } => {
                base.walk(f);
                index.walk(f);
            }
            ExprKind::Unary { expr, .. }
            | ExprKind::Cast { expr, .. }
            | ExprKind::SizeofExpr(expr) => expr.walk(f),
            ExprKind::Binary { lhs, rhs, .. } | ExprKind::Assign { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            ExprKind::Cond { cond, then, els } => {
                cond.walk(f);
                then.walk(f);
                els.walk(f);
            }
            ExprKind::Comma(items) | ExprKind::InitList(items) => {
                items.iter().for_each(|e| e.walk(f))
            }
            ExprKind::BuiltinTyped { args, .. } => args.iter().for_each(|a| a.walk(f)),
            ExprKind::StmtExpr(stmts) => {
                for s in stmts {
                    s.walk_exprs(f);
                }
            }
            _ => {}
        }
    }

    /// Strips casts and parentheses-equivalent wrappers.
    pub fn strip_casts(&self) -> &Expr {
        let mut e = self;
        while let ExprKind::Cast { expr, .. } = &e.kind {
            e = expr;
        }
        e
    }

    pub fn as_ident(&self) -> Option<&str> {
        match &self.strip_casts().kind {
            ExprKind::Ident(n) => Some(n),
            _ => None,
        }
    }

    /// The called function's name for direct calls.
    pub fn direct_callee(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Call { callee, .. } => match &callee.kind {
                ExprKind::Ident(n) => Some(n),
                _ => None,
            },
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalDecl {
    pub name: String,
    pub ty: CType,
    pub init: Option<Expr>,
    pub is_static: bool,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: Loc,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Expr(Expr),
    Decl(Vec<LocalDecl>),
    Block(Vec<Stmt>),
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
    },
    Switch {
        cond: Expr,
        body: Box<Stmt>,
    },
    Case {
        value: Expr,
        body: Box<Stmt>,
    },
    Default(Box<Stmt>),
    Label {
        name: String,
        body: Box<Stmt>,
    },
    Goto(String),
    Return(Option<Expr>),
    Break,
    Continue,
    Empty,
}

impl Stmt {
    /// Visits every statement nested in this one, including itself (pre-order).
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Block(items) => items.iter().for_each(|s| s.walk(f)),
            StmtKind::If { then, els, .. } => {
                then.walk(f);
                if let Some(e) = els {
                    e.walk(f);
                }
            }
            StmtKind::While { body, .. }
            | StmtKind::DoWhile { body, .. }
            | StmtKind::Switch { body, .. }
            | StmtKind::Case { body, .. }
            | StmtKind::Default(body)
            | StmtKind::Label { body, .. } => body.walk(f),
            StmtKind::For { init, body, .. } => {
                if let Some(i) = init {
                    i.walk(f);
                }
                body.walk(f);
            }
            _ => {}
        }
    }

    /// Expressions held directly by this statement (not by nested statements).
    pub fn own_exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Expr(e) => vec![e],
            StmtKind::Decl(decls) => decls.iter().filter_map(|d| d.init.as_ref()).collect(),
            StmtKind::If { cond, .. }
            | StmtKind::While { cond, .. }
            | StmtKind::DoWhile { cond, .. }
            | StmtKind::Switch { cond, .. } => vec![cond],
            StmtKind::Case { value, .. } => vec![value],
            StmtKind::For { cond, step, .. } => cond.iter().chain(step.iter()).collect(),
            StmtKind::Return(Some(e)) => vec![e],
            _ => vec![],
        }
    }

    /// Visits every expression reachable from this statement.
    pub fn walk_exprs<'a>(&'a self, f: &mut dyn FnMut(&'a Expr)) {
        self.walk(&mut |s| {
            for e in s.own_exprs() {
                e.walk(f);
            }
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: CType,
    pub bit_width: Option<String>,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordDef {
    pub kind: RecordKind,
    /// Tag, or a synthesized name for anonymous records.
    pub tag: String,
    pub anonymous: bool,
    pub fields: Vec<FieldDecl>,
    pub loc: Loc,
    pub span: Span,
    /// Expanded source text of the whole declaration.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumerator {
    pub name: String,
    pub value: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnumDef {
    pub tag: String,
    pub anonymous: bool,
    pub variants: Vec<Enumerator>,
    pub loc: Loc,
    pub span: Span,
    /// Expanded source text of the whole declaration.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypedefDecl {
    pub name: String,
    pub ty: CType,
    pub loc: Loc,
    pub span: Span,
    /// Expanded source text of the whole declaration.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlobalDecl {
    pub name: String,
    pub ty: CType,
    pub init: Option<Expr>,
    pub is_extern: bool,
    pub is_static: bool,
    pub loc: Loc,
    pub span: Span,
    /// Expanded source text of the whole declaration.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub ret: CType,
    pub params: Vec<Param>,
    pub variadic: bool,
    pub is_static: bool,
    /// `None` when the body uses constructs outside the supported subset.
    pub body: Option<Vec<Stmt>>,
    pub loc: Loc,
    pub span: Span,
    /// Expanded source text of the whole declaration.
    pub text: String,
    /// Byte range of the body braces (inclusive of `{`/`}`).
    pub body_span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    pub name: String,
    pub ret: CType,
    pub params: Vec<Param>,
    pub variadic: bool,
    pub loc: Loc,
}
