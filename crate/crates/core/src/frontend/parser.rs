//! Recursive-descent parser for the supported C subset.
//!
//! System-origin regions are only skimmed for typedef names. Project-origin declarations are
//! parsed fully; constructs outside the subset (computed goto, inline assembly, K&R
//! definitions, setjmp) degrade to raw-text registration with an [`UnsupportedConstruct`].

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::lexer::{tokenize, TokKind, Token};
use super::preprocess::ExpandedFile;
use crate::error::{Error, Result};

/// A construct outside the supported subset, attached to the enclosing declaration.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UnsupportedConstruct {
    pub file: String,
    pub line: u32,
    pub unit: Option<String>,
    pub construct: String,
}

/// Everything declared by project-origin code in one expanded file.
#[derive(Debug, Clone, Default)]
pub struct ParsedFile {
    pub rel_path: String,
    pub records: Vec<RecordDef>,
    pub enums: Vec<EnumDef>,
    pub typedefs: Vec<TypedefDecl>,
    pub globals: Vec<GlobalDecl>,
    pub functions: Vec<FunctionDef>,
    pub prototypes: Vec<Prototype>,
    pub notices: Vec<UnsupportedConstruct>,
    /// Identifiers mentioned by functions registered as raw text (for dependency recovery).
    pub raw_idents: Vec<(String, Vec<String>)>,
}

#[derive(Debug)]
enum PErr {
    Syntax { pos: usize, message: String },
    Unsupported { pos: usize, what: String },
}

type PResult<T> = std::result::Result<T, PErr>;

const TYPE_WORDS: &[&str] = &[
    "void", "char", "short", "int", "long", "float", "double", "signed", "unsigned", "_Bool",
    "_Complex", "__int128", "__signed__", "__signed", "__unsigned", "_Float128", "__float128",
    "_Float64", "_Float32", "_Float64x", "_Float32x",
];
const QUALIFIERS: &[&str] = &[
    "const", "volatile", "restrict", "__restrict", "__restrict__", "__const", "__volatile__",
    "__volatile", "_Atomic", "_Nonnull", "_Nullable", "__nonnull",
];
const STORAGE: &[&str] = &[
    "typedef", "extern", "static", "auto", "register", "inline", "__inline", "__inline__",
    "_Noreturn", "_Thread_local", "__thread",
];
const ATTRIBUTE_LIKE: &[&str] = &[
    "__attribute__", "__attribute", "__declspec", "_Alignas", "__asm__", "__asm", "asm",
];
const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Bool", "_Complex", "__extension__",
];
const SETJMP_FAMILY: &[&str] = &[
    "setjmp", "_setjmp", "__sigsetjmp", "sigsetjmp", "longjmp", "_longjmp", "siglongjmp",
];

struct Ctx<'f> {
    file: &'f ExpandedFile,
    toks: Vec<Token>,
    matching: Vec<Option<usize>>,
    pos: usize,
    typedefs: HashSet<String>,
    out: ParsedFile,
    anon: usize,
    in_function: bool,
}

/// Parses one expanded file. `known_typedefs` seeds the typedef-name set.
pub fn parse_file(file: &ExpandedFile) -> Result<ParsedFile> {
    let toks = tokenize(&file.text).map_err(|e| {
        let o = file.origin(e.line);
        Error::ParseFailure {
            file: o.file.clone(),
            line: o.line,
            message: e.message,
        }
    })?;
    let matching = match_brackets(&toks);
    let mut ctx = Ctx {
        file,
        toks,
        matching,
        pos: 0,
        typedefs: ["__builtin_va_list".to_string()].into_iter().collect(),
        out: ParsedFile {
            rel_path: file.rel_path.clone(),
            ..Default::default()
        },
        anon: 0,
        in_function: false,
    };
    ctx.run()?;
    Ok(ctx.out)
}

fn match_brackets(toks: &[Token]) -> Vec<Option<usize>> {
    let mut matching = vec![None; toks.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if t.kind != TokKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "(" | "[" | "{" => stack.push(i),
            ")" | "]" | "}" => {
                let want = match t.text.as_str() {
                    ")" => "(",
                    "]" => "[",
                    _ => "{",
                };
                if let Some(&open) = stack.last() {
                    if toks[open].text == want {
                        stack.pop();
                        matching[open] = Some(i);
                        matching[i] = Some(open);
                    }
                }
            }
            _ => {}
        }
    }
    matching
}

impl<'f> Ctx<'f> {
    fn run(&mut self) -> Result<()> {
        while self.pos < self.toks.len() {
            let start = self.pos;
            if self.is_system(start) {
                let end = self.skim_end(start);
                self.collect_skimmed_typedefs(start, end);
                self.pos = end;
                continue;
            }
            match self.external_decl() {
                Ok(()) => {}
                Err(PErr::Unsupported { pos, what }) => {
                    // top-level unsupported constructs outside function bodies
                    let loc = self.loc(pos.min(self.toks.len() - 1));
                    self.out.notices.push(UnsupportedConstruct {
                        file: loc.file,
                        line: loc.line,
                        unit: None,
                        construct: what,
                    });
                    self.pos = self.skim_end(start).max(start + 1);
                }
                Err(PErr::Syntax { pos, message }) => {
                    let loc = self.loc(pos.min(self.toks.len().saturating_sub(1)));
                    return Err(Error::ParseFailure {
                        file: loc.file,
                        line: loc.line,
                        message,
                    });
                }
            }
        }
        for f in &mut self.out.functions {
            let Some(body) = &f.body else { continue };
            let mut hit = None;
            for s in body {
                s.walk_exprs(&mut |e| {
                    if hit.is_none() {
                        if let Some(c) = e.direct_callee() {
                            if SETJMP_FAMILY.contains(&c) {
                                hit = Some((c.to_string(), e.loc.clone()));
                            }
                        }
                    }
                });
            }
            if let Some((callee, loc)) = hit {
                self.out.notices.push(UnsupportedConstruct {
                    file: loc.file,
                    line: loc.line,
                    unit: Some(f.name.clone()),
                    construct: format!("non-local jump ({callee})"),
                });
                let idents = raw_identifiers(&f.text);
                self.out.raw_idents.push((f.name.clone(), idents));
                f.body = None;
            }
        }
        Ok(())
    }

    // ---- token helpers -------------------------------------------------------------------

    fn is_system(&self, i: usize) -> bool {
        self.file.origin(self.toks[i].line).system
    }

    fn loc(&self, i: usize) -> Loc {
        let o = self.file.origin(self.toks[i.min(self.toks.len().saturating_sub(1))].line);
        Loc::new(o.file.clone(), o.line)
    }

    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, off: usize) -> Option<&Token> {
        self.toks.get(self.pos + off)
    }

    fn at(&self, s: &str) -> bool {
        self.peek().is_some_and(|t| t.is(s))
    }

    fn at_ident(&self) -> bool {
        self.peek().is_some_and(|t| t.kind == TokKind::Ident)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.at(s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.syntax(format!(
                "expected `{s}`, found `{}`",
                self.peek().map(|t| t.text.as_str()).unwrap_or("<eof>")
            )))
        }
    }

    fn syntax(&self, message: String) -> PErr {
        PErr::Syntax {
            pos: self.pos,
            message,
        }
    }

    fn unsupported(&self, what: &str) -> PErr {
        PErr::Unsupported {
            pos: self.pos,
            what: what.to_string(),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(t) if t.kind == TokKind::Ident => {
                let s = t.text.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.syntax(format!(
                "expected identifier, found `{}`",
                self.peek().map(|t| t.text.as_str()).unwrap_or("<eof>")
            ))),
        }
    }

    fn text_between(&self, first: usize, last: usize) -> String {
        let start = self.toks[first].start;
        let end = self.toks[last].end;
        blank_directives(&self.file.text[start..end])
    }

    fn span_between(&self, first: usize, last: usize) -> Span {
        Span {
            start: self.toks[first].start,
            end: self.toks[last].end,
        }
    }

    /// Skips a balanced group starting at the current `(`.
    fn skip_group(&mut self) -> PResult<()> {
        match self.matching.get(self.pos).copied().flatten() {
            Some(close) if self.toks[self.pos].is("(") => {
                self.pos = close + 1;
                Ok(())
            }
            _ => Err(self.syntax("unbalanced parentheses".into())),
        }
    }

    fn skip_attributes(&mut self) -> PResult<()> {
        loop {
            if self.at("__extension__") {
                self.pos += 1;
                continue;
            }
            let Some(t) = self.peek() else { return Ok(()) };
            if t.kind == TokKind::Ident && ATTRIBUTE_LIKE.contains(&t.text.as_str()) {
                self.pos += 1;
                if self.at("(") {
                    self.skip_group()?;
                }
                continue;
            }
            return Ok(());
        }
    }

    // ---- system-region skimming ------------------------------------------------------------

    /// End (exclusive) of the top-level declaration starting at `start`.
    fn skim_end(&self, start: usize) -> usize {
        let mut i = start;
        while i < self.toks.len() {
            let t = &self.toks[i];
            if t.is(";") {
                return i + 1;
            }
            if t.is("{") {
                let close = self.matching[i].unwrap_or(self.toks.len() - 1);
                let is_body = i > start && self.toks[i - 1].is(")");
                if is_body {
                    return close + 1;
                }
                i = close + 1;
                continue;
            }
            if t.is("(") || t.is("[") {
                i = self.matching[i].map(|c| c + 1).unwrap_or(i + 1);
                continue;
            }
            i += 1;
        }
        self.toks.len()
    }

    fn collect_skimmed_typedefs(&mut self, start: usize, end: usize) {
        let is_typedef = self.toks[start..end].iter().any(|t| t.is("typedef"));
        if !is_typedef {
            return;
        }
        let mut i = start;
        let mut paren = 0i32;
        let mut first_paren_group = true;
        while i < end {
            let t = &self.toks[i];
            if t.kind == TokKind::Ident && ATTRIBUTE_LIKE.contains(&t.text.as_str()) {
                if i + 1 < end && self.toks[i + 1].is("(") {
                    i = self.matching[i + 1].map(|c| c + 1).unwrap_or(i + 2);
                } else {
                    i += 1;
                }
                continue;
            }
            if t.is("{") {
                i = self.matching[i].map(|c| c + 1).unwrap_or(i + 1);
                continue;
            }
            if t.is("(") {
                paren += 1;
            } else if t.is(")") {
                paren -= 1;
                if paren == 0 {
                    first_paren_group = false;
                }
            } else if t.kind == TokKind::Ident && !is_reserved_word(&t.text) {
                let next = self.toks.get(i + 1).map(|n| n.text.as_str()).unwrap_or(";");
                let prev = if i > start { self.toks[i - 1].text.as_str() } else { "" };
                let top = paren == 0 && matches!(next, ";" | "," | "[" | "(");
                let fnptr = paren == 1
                    && first_paren_group
                    && prev == "*"
                    && matches!(next, ")" | "[");
                if top || fnptr {
                    self.typedefs.insert(t.text.clone());
                }
            }
            i += 1;
        }
    }

    // ---- declarations -----------------------------------------------------------------------

    fn is_type_start(&self, t: &Token) -> bool {
        if t.kind != TokKind::Ident {
            return false;
        }
        let s = t.text.as_str();
        TYPE_WORDS.contains(&s)
            || QUALIFIERS.contains(&s)
            || STORAGE.contains(&s)
            || matches!(
                s,
                "struct" | "union" | "enum" | "__extension__" | "__typeof__" | "typeof" | "__typeof"
            )
            || ATTRIBUTE_LIKE.contains(&s) && s != "asm" && s != "__asm__" && s != "__asm"
            || self.typedefs.contains(s)
    }

    fn external_decl(&mut self) -> PResult<()> {
        let start = self.pos;
        self.skip_attributes()?;
        if self.eat(";") {
            return Ok(());
        }
        let specs = self.decl_specs()?;
        let Some(base) = specs.base.clone() else {
            return Err(self.syntax(format!(
                "expected declaration, found `{}`",
                self.peek().map(|t| t.text.as_str()).unwrap_or("<eof>")
            )));
        };
        if self.eat(";") {
            return Ok(());
        }
        let mut first = true;
        loop {
            let decl = self.declarator(false)?;
            self.skip_attributes()?;
            let name = decl.name().ok_or_else(|| self.syntax("declarator has no name".into()))?;
            let ty = decl.apply(base.clone());
            let decl_loc = decl.loc.clone().unwrap_or_else(|| self.loc(start));
            if specs.is_typedef {
                self.typedefs.insert(name.clone());
                let end = self.decl_end_index(start);
                self.out.typedefs.push(TypedefDecl {
                    name,
                    ty,
                    loc: decl_loc,
                    span: self.span_between(start, end),
                    text: self.text_between(start, end),
                });
            } else if let CType::Function {
                ret,
                params: _,
                variadic,
            } = &ty
            {
                let params = decl.function_params().unwrap_or_default();
                if decl.knr {
                    return self.knr_function(start, &name, decl_loc);
                }
                if first && self.at("{") {
                    return self.function_body(
                        start,
                        name,
                        (**ret).clone(),
                        params,
                        *variadic,
                        specs.is_static,
                        decl_loc,
                    );
                }
                self.out.prototypes.push(Prototype {
                    name,
                    ret: (**ret).clone(),
                    params,
                    variadic: *variadic,
                    loc: decl_loc,
                });
            } else {
                let init = if self.eat("=") {
                    Some(self.initializer()?)
                } else {
                    None
                };
                let end = self.decl_end_index(start);
                self.out.globals.push(GlobalDecl {
                    name,
                    ty,
                    init,
                    is_extern: specs.is_extern,
                    is_static: specs.is_static,
                    loc: decl_loc,
                    span: self.span_between(start, end),
                    text: self.text_between(start, end),
                });
            }
            first = false;
            if self.eat(",") {
                continue;
            }
            self.expect(";")?;
            // re-anchor the text of every declaration in this statement to include the `;`
            let last = self.pos - 1;
            let text = self.text_between(start, last);
            let span = self.span_between(start, last);
            if specs.is_typedef {
                for td in self.out.typedefs.iter_mut().rev() {
                    if td.span.start != span.start {
                        break;
                    }
                    td.text = text.clone();
                    td.span = span;
                }
            } else {
                for g in self.out.globals.iter_mut().rev() {
                    if g.span.start != span.start {
                        break;
                    }
                    g.text = text.clone();
                    g.span = span;
                }
            }
            return Ok(());
        }
    }

    /// Index of the last token consumed so far (the declaration is still open).
    fn decl_end_index(&self, start: usize) -> usize {
        self.pos.saturating_sub(1).max(start)
    }

    fn knr_function(&mut self, start: usize, name: &str, loc: Loc) -> PResult<()> {
        // skip the parameter declarations up to the body
        let mut i = self.pos;
        while i < self.toks.len() && !self.toks[i].is("{") {
            i += 1;
        }
        let close = self.matching.get(i).copied().flatten().ok_or_else(|| PErr::Syntax {
            pos: i,
            message: "unterminated function body".into(),
        })?;
        self.pos = close + 1;
        let text = self.text_between(start, close);
        self.out.notices.push(UnsupportedConstruct {
            file: loc.file.clone(),
            line: loc.line,
            unit: Some(name.to_string()),
            construct: "K&R-style function definition".into(),
        });
        self.out
            .raw_idents
            .push((name.to_string(), raw_identifiers(&text)));
        self.out.functions.push(FunctionDef {
            name: name.to_string(),
            ret: CType::Builtin("int".into()),
            params: Vec::new(),
            variadic: false,
            is_static: false,
            body: None,
            loc,
            span: self.span_between(start, close),
            body_span: self.span_between(i, close),
            text,
        });
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn function_body(
        &mut self,
        start: usize,
        name: String,
        ret: CType,
        params: Vec<Param>,
        variadic: bool,
        is_static: bool,
        loc: Loc,
    ) -> PResult<()> {
        let open = self.pos;
        let close = self.matching[open].ok_or_else(|| self.syntax("unterminated function body".into()))?;
        // parameter names are typedef-shadowing candidates inside the body
        let shadowed: Vec<String> = params
            .iter()
            .filter_map(|p| p.name.clone())
            .filter(|n| self.typedefs.remove(n))
            .collect();
        self.in_function = true;
        let body = self.block_items();
        self.in_function = false;
        self.typedefs.extend(shadowed);
        let text = self.text_between(start, close);
        let body = match body {
            Ok(stmts) => {
                if self.pos != close + 1 {
                    return Err(PErr::Syntax {
                        pos: self.pos,
                        message: "function body not fully consumed".into(),
                    });
                }
                Some(stmts)
            }
            Err(PErr::Unsupported { pos, what }) => {
                let l = self.loc(pos);
                self.out.notices.push(UnsupportedConstruct {
                    file: l.file,
                    line: l.line,
                    unit: Some(name.clone()),
                    construct: what,
                });
                self.out.raw_idents.push((name.clone(), raw_identifiers(&text)));
                self.pos = close + 1;
                None
            }
            Err(e) => return Err(e),
        };
        self.out.functions.push(FunctionDef {
            name,
            ret,
            params,
            variadic,
            is_static,
            body,
            loc,
            span: self.span_between(start, close),
            body_span: self.span_between(open, close),
            text,
        });
        Ok(())
    }

    fn decl_specs(&mut self) -> PResult<DeclSpecs> {
        let mut specs = DeclSpecs::default();
        let mut words: Vec<String> = Vec::new();
        let mut is_const = false;
        while let Some(t) = self.peek() {
            if t.kind != TokKind::Ident {
                break;
            }
            let s = t.text.clone();
            match s.as_str() {
                "typedef" => specs.is_typedef = true,
                "extern" => specs.is_extern = true,
                "static" => specs.is_static = true,
                _ if STORAGE.contains(&s.as_str()) => {}
                _ if QUALIFIERS.contains(&s.as_str()) => {
                    if s.contains("const") {
                        is_const = true;
                    }
                    if s == "_Atomic" && self.peek_at(1).is_some_and(|t| t.is("(")) {
                        return Err(self.unsupported("_Atomic type specifier"));
                    }
                }
                "__extension__" => {}
                _ if ATTRIBUTE_LIKE.contains(&s.as_str()) && !matches!(s.as_str(), "asm" | "__asm__" | "__asm") => {
                    self.pos += 1;
                    if self.at("(") {
                        self.skip_group()?;
                    }
                    continue;
                }
                "__typeof__" | "typeof" | "__typeof" => {
                    return Err(self.unsupported("typeof"));
                }
                "struct" | "union" => {
                    if specs.base.is_some() || !words.is_empty() {
                        break;
                    }
                    self.pos += 1;
                    let kind = if s == "struct" {
                        RecordKind::Struct
                    } else {
                        RecordKind::Union
                    };
                    let tag = self.record_spec(kind)?;
                    specs.base = Some(CType::Record(kind, tag));
                    continue;
                }
                "enum" => {
                    if specs.base.is_some() || !words.is_empty() {
                        break;
                    }
                    self.pos += 1;
                    let tag = self.enum_spec()?;
                    specs.base = Some(CType::Enum(tag));
                    continue;
                }
                _ if TYPE_WORDS.contains(&s.as_str()) => words.push(s),
                _ if self.typedefs.contains(&s) && specs.base.is_none() && words.is_empty() => {
                    specs.base = Some(CType::Named(s));
                }
                _ => break,
            }
            self.pos += 1;
        }
        if !words.is_empty() {
            specs.base = Some(normalize_builtin(&words));
        }
        if is_const {
            specs.base = specs.base.map(|b| CType::Const(Box::new(b)));
        }
        Ok(specs)
    }

    fn fresh_anon(&mut self, what: &str) -> String {
        self.anon += 1;
        let stem = self
            .file
            .rel_path
            .rsplit('/')
            .next()
            .unwrap_or("")
            .trim_end_matches(".c")
            .replace(|c: char| !c.is_ascii_alphanumeric(), "_");
        format!("__anon_{what}_{stem}_{}", self.anon)
    }

    /// After `struct`/`union`: optional tag and optional body. Returns the (possibly synthesized) tag.
    fn record_spec(&mut self, kind: RecordKind) -> PResult<String> {
        let kw = self.pos - 1;
        self.skip_attributes()?;
        let tag = if self.at_ident() && !self.at("{") {
            Some(self.ident()?)
        } else {
            None
        };
        self.skip_attributes()?;
        if !self.at("{") {
            return tag.ok_or_else(|| self.syntax("expected struct tag or body".into()));
        }
        let open = self.pos;
        let close = self.matching[open].ok_or_else(|| self.syntax("unterminated struct body".into()))?;
        self.pos += 1;
        let anonymous = tag.is_none();
        let tag = match tag {
            Some(t) => t,
            None => self.fresh_anon(if kind == RecordKind::Struct { "struct" } else { "union" }),
        };
        let mut fields = Vec::new();
        while !self.at("}") {
            if self.peek().is_none() {
                return Err(self.syntax("unterminated struct body".into()));
            }
            self.skip_attributes()?;
            if self.eat(";") {
                continue;
            }
            let fstart = self.pos;
            let specs = self.decl_specs()?;
            let base = specs
                .base
                .clone()
                .ok_or_else(|| self.syntax("expected member type".into()))?;
            if self.eat(";") {
                // anonymous struct/union member
                fields.push(FieldDecl {
                    name: String::new(),
                    ty: base,
                    bit_width: None,
                    loc: self.loc(fstart),
                });
                continue;
            }
            loop {
                let floc = self.loc(self.pos);
                let (name, ty) = if self.at(":") {
                    (String::new(), base.clone())
                } else {
                    let d = self.declarator(false)?;
                    (d.name().unwrap_or_default(), d.apply(base.clone()))
                };
                let bit_width = if self.eat(":") {
                    let e = self.conditional()?;
                    Some(expr_text(&e))
                } else {
                    None
                };
                self.skip_attributes()?;
                fields.push(FieldDecl {
                    name,
                    ty,
                    bit_width,
                    loc: floc,
                });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(";")?;
        }
        self.pos = close + 1;
        self.skip_attributes()?;
        if !self.in_function {
            let def = RecordDef {
                kind,
                tag: tag.clone(),
                anonymous,
                fields,
                loc: self.loc(kw),
                span: self.span_between(kw, close),
                text: self.text_between(kw, close),
            };
            self.out.records.push(def);
        }
        Ok(tag)
    }

    fn enum_spec(&mut self) -> PResult<String> {
        let kw = self.pos - 1;
        self.skip_attributes()?;
        let tag = if self.at_ident() {
            Some(self.ident()?)
        } else {
            None
        };
        self.skip_attributes()?;
        if !self.at("{") {
            return tag.ok_or_else(|| self.syntax("expected enum tag or body".into()));
        }
        let close = self.matching[self.pos].ok_or_else(|| self.syntax("unterminated enum".into()))?;
        self.pos += 1;
        let anonymous = tag.is_none();
        let tag = match tag {
            Some(t) => t,
            None => self.fresh_anon("enum"),
        };
        let mut variants = Vec::new();
        while !self.at("}") {
            let name = self.ident()?;
            self.skip_attributes()?;
            let value = if self.eat("=") {
                Some(self.conditional()?)
            } else {
                None
            };
            variants.push(Enumerator { name, value });
            if !self.eat(",") {
                break;
            }
        }
        self.expect("}")?;
        debug_assert_eq!(self.pos, close + 1);
        if !self.in_function {
            self.out.enums.push(EnumDef {
                tag: tag.clone(),
                anonymous,
                variants,
                loc: self.loc(kw),
                span: self.span_between(kw, close),
                text: self.text_between(kw, close),
            });
        }
        Ok(tag)
    }

    /// Parses a (possibly abstract) declarator.
    fn declarator(&mut self, abstract_ok: bool) -> PResult<Declarator> {
        let mut stars = Vec::new();
        while self.eat("*") {
            let mut is_const = false;
            while let Some(t) = self.peek() {
                if t.kind == TokKind::Ident && QUALIFIERS.contains(&t.text.as_str()) {
                    is_const |= t.text.contains("const");
                    self.pos += 1;
                } else if t.kind == TokKind::Ident && ATTRIBUTE_LIKE.contains(&t.text.as_str()) {
                    self.skip_attributes()?;
                } else {
                    break;
                }
            }
            stars.push(is_const);
        }
        self.skip_attributes()?;
        let mut node;
        let mut loc = None;
        let mut knr = false;
        if self.at("(") && self.paren_is_nested_declarator() {
            self.pos += 1;
            let inner = self.declarator(abstract_ok)?;
            self.expect(")")?;
            loc = inner.loc.clone();
            knr = inner.knr;
            node = inner.node;
        } else if self.at_ident() && !self.is_type_start(self.peek().expect("ident")) {
            loc = Some(self.loc(self.pos));
            node = DeclNode::Name(Some(self.ident()?));
        } else if abstract_ok {
            node = DeclNode::Name(None);
        } else {
            return Err(self.syntax(format!(
                "expected declarator, found `{}`",
                self.peek().map(|t| t.text.as_str()).unwrap_or("<eof>")
            )));
        }
        loop {
            if self.eat("[") {
                let len = if self.at("]") {
                    None
                } else {
                    // qualifiers / static inside array parameter brackets
                    while self.peek().is_some_and(|t| {
                        t.kind == TokKind::Ident
                            && (QUALIFIERS.contains(&t.text.as_str()) || t.text == "static")
                    }) {
                        self.pos += 1;
                    }
                    if self.at("]") {
                        None
                    } else {
                        let e = self.assignment()?;
                        Some(expr_text(&e))
                    }
                };
                self.expect("]")?;
                node = DeclNode::Array(Box::new(node), len);
            } else if self.at("(") {
                self.pos += 1;
                let (params, variadic, is_knr) = self.param_list()?;
                knr |= is_knr;
                node = DeclNode::Function(Box::new(node), params, variadic);
            } else {
                break;
            }
        }
        for is_const in stars.into_iter().rev() {
            node = DeclNode::Pointer(Box::new(node), is_const);
        }
        Ok(Declarator { node, loc, knr })
    }

    fn paren_is_nested_declarator(&self) -> bool {
        match self.peek_at(1) {
            Some(t) if t.is("*") || t.is("(") || t.is("[") || t.is("^") => true,
            Some(t) if t.kind == TokKind::Ident => {
                !self.is_type_start(t) || ATTRIBUTE_LIKE.contains(&t.text.as_str())
            }
            _ => false,
        }
    }

    /// After `(`: parameter list through `)`. Returns (params, variadic, is_knr_identifier_list).
    fn param_list(&mut self) -> PResult<(Vec<Param>, bool, bool)> {
        let mut params = Vec::new();
        if self.eat(")") {
            return Ok((params, false, false));
        }
        // `(void)`
        if self.at("void") && self.peek_at(1).is_some_and(|t| t.is(")")) {
            self.pos += 2;
            return Ok((params, false, false));
        }
        // K&R identifier list
        if self.at_ident()
            && !self.is_type_start(self.peek().expect("ident"))
            && self
                .peek_at(1)
                .is_some_and(|t| t.is(",") || t.is(")"))
        {
            while !self.at(")") {
                let name = self.ident()?;
                params.push(Param {
                    name: Some(name),
                    ty: CType::Builtin("int".into()),
                });
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
            return Ok((params, false, true));
        }
        let mut variadic = false;
        loop {
            if self.eat("...") {
                variadic = true;
                break;
            }
            let specs = self.decl_specs()?;
            let base = specs
                .base
                .ok_or_else(|| self.syntax("expected parameter type".into()))?;
            let d = self.declarator(true)?;
            self.skip_attributes()?;
            let mut ty = d.apply(base);
            // parameter adjustments: arrays and functions decay to pointers
            ty = match ty {
                CType::Array { elem, .. } => CType::Pointer {
                    pointee: elem,
                    is_const: false,
                },
                f @ CType::Function { .. } => CType::pointer_to(f),
                other => other,
            };
            params.push(Param { name: d.name(), ty });
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")?;
        Ok((params, variadic, false))
    }

    fn type_name(&mut self) -> PResult<CType> {
        let specs = self.decl_specs()?;
        let base = specs
            .base
            .ok_or_else(|| self.syntax("expected type name".into()))?;
        let d = self.declarator(true)?;
        Ok(d.apply(base))
    }

    fn initializer(&mut self) -> PResult<Expr> {
        if self.at("{") {
            let loc = self.loc(self.pos);
            self.pos += 1;
            let mut items = Vec::new();
            while !self.at("}") {
                // designators
                loop {
                    if self.eat(".") {
                        self.ident()?;
                    } else if self.at("[") {
                        self.pos += 1;
                        self.conditional()?;
                        self.expect("]")?;
                    } else {
                        break;
                    }
                }
                self.eat("=");
                items.push(self.initializer()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("}")?;
            Ok(Expr {
                kind: ExprKind::InitList(items),
                loc,
            })
        } else {
            self.assignment()
        }
    }

    // ---- statements ---------------------------------------------------------------------------

    /// After an opening `{` at `self.pos`: items through the matching `}`.
    fn block_items(&mut self) -> PResult<Vec<Stmt>> {
        self.expect("{")?;
        let mut items = Vec::new();
        while !self.at("}") {
            if self.peek().is_none() {
                return Err(self.syntax("unterminated block".into()));
            }
            items.push(self.statement()?);
        }
        self.pos += 1;
        Ok(items)
    }

    fn is_decl_start(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        if !self.is_type_start(t) {
            return false;
        }
        // `name:` is a label even when `name` is a typedef
        !self.peek_at(1).is_some_and(|n| n.is(":"))
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.pos;
        let loc = self.loc(start);
        let kind = self.statement_kind()?;
        let last = self.pos.saturating_sub(1).max(start);
        Ok(Stmt {
            kind,
            loc,
            span: self.span_between(start, last),
        })
    }

    fn statement_kind(&mut self) -> PResult<StmtKind> {
        while self.at("__extension__") {
            self.pos += 1;
        }
        let Some(t) = self.peek() else {
            return Err(self.syntax("unexpected end of input".into()));
        };
        let word = if t.kind == TokKind::Ident {
            t.text.clone()
        } else {
            String::new()
        };
        if t.is("{") {
            return Ok(StmtKind::Block(self.block_items()?));
        }
        if t.is(";") {
            self.pos += 1;
            return Ok(StmtKind::Empty);
        }
        match word.as_str() {
            "if" => {
                self.pos += 1;
                self.expect("(")?;
                let cond = self.expression()?;
                self.expect(")")?;
                let then = Box::new(self.statement()?);
                let els = if self.eat("else") {
                    Some(Box::new(self.statement()?))
                } else {
                    None
                };
                return Ok(StmtKind::If { cond, then, els });
            }
            "while" => {
                self.pos += 1;
                self.expect("(")?;
                let cond = self.expression()?;
                self.expect(")")?;
                let body = Box::new(self.statement()?);
                return Ok(StmtKind::While { cond, body });
            }
            "do" => {
                self.pos += 1;
                let body = Box::new(self.statement()?);
                if !self.eat("while") {
                    return Err(self.syntax("expected `while` after do-body".into()));
                }
                self.expect("(")?;
                let cond = self.expression()?;
                self.expect(")")?;
                self.expect(";")?;
                return Ok(StmtKind::DoWhile { body, cond });
            }
            "for" => {
                self.pos += 1;
                self.expect("(")?;
                let init = if self.eat(";") {
                    None
                } else {
                    let s = self.statement()?;
                    Some(Box::new(s))
                };
                let cond = if self.at(";") {
                    None
                } else {
                    Some(self.expression()?)
                };
                self.expect(";")?;
                let step = if self.at(")") {
                    None
                } else {
                    Some(self.expression()?)
                };
                self.expect(")")?;
                let body = Box::new(self.statement()?);
                return Ok(StmtKind::For {
                    init,
                    cond,
                    step,
                    body,
                });
            }
            "switch" => {
                self.pos += 1;
                self.expect("(")?;
                let cond = self.expression()?;
                self.expect(")")?;
                let body = Box::new(self.statement()?);
                return Ok(StmtKind::Switch { cond, body });
            }
            "case" => {
                self.pos += 1;
                let value = self.conditional()?;
                if self.eat("...") {
                    self.conditional()?;
                }
                self.expect(":")?;
                let body = Box::new(self.case_body()?);
                return Ok(StmtKind::Case { value, body });
            }
            "default" => {
                self.pos += 1;
                self.expect(":")?;
                let body = Box::new(self.case_body()?);
                return Ok(StmtKind::Default(body));
            }
            "break" => {
                self.pos += 1;
                self.expect(";")?;
                return Ok(StmtKind::Break);
            }
            "continue" => {
                self.pos += 1;
                self.expect(";")?;
                return Ok(StmtKind::Continue);
            }
            "return" => {
                self.pos += 1;
                let e = if self.at(";") {
                    None
                } else {
                    Some(self.expression()?)
                };
                self.expect(";")?;
                return Ok(StmtKind::Return(e));
            }
            "goto" => {
                self.pos += 1;
                if self.at("*") {
                    return Err(self.unsupported("computed goto"));
                }
                let label = self.ident()?;
                self.expect(";")?;
                return Ok(StmtKind::Goto(label));
            }
            "asm" | "__asm__" | "__asm" => return Err(self.unsupported("inline assembly")),
            _ => {}
        }
        if t.kind == TokKind::Ident
            && self.peek_at(1).is_some_and(|n| n.is(":"))
            && !is_reserved_word(&word)
        {
            self.pos += 2;
            let body = if self.at("}") {
                Stmt {
                    kind: StmtKind::Empty,
                    loc: self.loc(self.pos),
                    span: Span::default(),
                }
            } else {
                self.statement()?
            };
            return Ok(StmtKind::Label {
                name: word,
                body: Box::new(body),
            });
        }
        if self.is_decl_start() {
            return self.local_declaration();
        }
        let e = self.expression()?;
        self.expect(";")?;
        Ok(StmtKind::Expr(e))
    }

    /// Body of a `case`/`default` label; an immediately closing brace yields an empty statement.
    fn case_body(&mut self) -> PResult<Stmt> {
        if self.at("}") {
            return Ok(Stmt {
                kind: StmtKind::Empty,
                loc: self.loc(self.pos),
                span: Span::default(),
            });
        }
        self.statement()
    }

    fn local_declaration(&mut self) -> PResult<StmtKind> {
        let specs = self.decl_specs()?;
        let base = specs
            .base
            .clone()
            .ok_or_else(|| self.syntax("expected declaration type".into()))?;
        let mut decls = Vec::new();
        if self.eat(";") {
            return Ok(StmtKind::Decl(decls));
        }
        loop {
            let d = self.declarator(false)?;
            self.skip_attributes()?;
            let name = d.name().ok_or_else(|| self.syntax("declarator has no name".into()))?;
            let loc = d.loc.clone().unwrap_or_else(|| self.loc(self.pos));
            let ty = d.apply(base.clone());
            if specs.is_typedef {
                self.typedefs.insert(name);
            } else {
                let init = if self.eat("=") {
                    Some(self.initializer()?)
                } else {
                    None
                };
                decls.push(LocalDecl {
                    name,
                    ty,
                    init,
                    is_static: specs.is_static,
                    loc,
                });
            }
            if !self.eat(",") {
                break;
            }
        }
        self.expect(";")?;
        Ok(StmtKind::Decl(decls))
    }

    // ---- expressions --------------------------------------------------------------------------

    fn expression(&mut self) -> PResult<Expr> {
        let first = self.assignment()?;
        if !self.at(",") {
            return Ok(first);
        }
        let loc = first.loc.clone();
        let mut items = vec![first];
        while self.eat(",") {
            items.push(self.assignment()?);
        }
        Ok(Expr {
            kind: ExprKind::Comma(items),
            loc,
        })
    }

    fn assignment(&mut self) -> PResult<Expr> {
        let lhs = self.conditional()?;
        let op = match self.peek().map(|t| t.text.as_str()) {
            Some("=") => Some(None),
            Some("+=") => Some(Some(BinaryOp::Add)),
            Some("-=") => Some(Some(BinaryOp::Sub)),
            Some("*=") => Some(Some(BinaryOp::Mul)),
            Some("/=") => Some(Some(BinaryOp::Div)),
            Some("%=") => Some(Some(BinaryOp::Rem)),
            Some("<<=") => Some(Some(BinaryOp::Shl)),
            Some(">>=") => Some(Some(BinaryOp::Shr)),
            Some("&=") => Some(Some(BinaryOp::BitAnd)),
            Some("^=") => Some(Some(BinaryOp::BitXor)),
            Some("|=") => Some(Some(BinaryOp::BitOr)),
            _ => None,
        };
        let Some(op) = op else { return Ok(lhs) };
        if self.peek().is_some_and(|t| t.kind != TokKind::Punct) {
            return Ok(lhs);
        }
        self.pos += 1;
        let rhs = self.assignment()?;
        let loc = lhs.loc.clone();
        Ok(Expr {
            kind: ExprKind::Assign {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            loc,
        })
    }

    fn conditional(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if !self.eat("?") {
            return Ok(cond);
        }
        // GNU `a ?: b`
        let then = if self.at(":") {
            cond.clone()
        } else {
            self.expression()?
        };
        self.expect(":")?;
        let els = self.conditional()?;
        let loc = cond.loc.clone();
        Ok(Expr {
            kind: ExprKind::Cond {
                cond: Box::new(cond),
                then: Box::new(then),
                els: Box::new(els),
            },
            loc,
        })
    }

    fn binary_op(&self) -> Option<(BinaryOp, u8)> {
        let t = self.peek()?;
        if t.kind != TokKind::Punct {
            return None;
        }
        Some(match t.text.as_str() {
            "||" => (BinaryOp::Or, 1),
            "&&" => (BinaryOp::And, 2),
            "|" => (BinaryOp::BitOr, 3),
            "^" => (BinaryOp::BitXor, 4),
            "&" => (BinaryOp::BitAnd, 5),
            "==" => (BinaryOp::Eq, 6),
            "!=" => (BinaryOp::Ne, 6),
            "<" => (BinaryOp::Lt, 7),
            ">" => (BinaryOp::Gt, 7),
            "<=" => (BinaryOp::Le, 7),
            ">=" => (BinaryOp::Ge, 7),
            "<<" => (BinaryOp::Shl, 8),
            ">>" => (BinaryOp::Shr, 8),
            "+" => (BinaryOp::Add, 9),
            "-" => (BinaryOp::Sub, 9),
            "*" => (BinaryOp::Mul, 10),
            "/" => (BinaryOp::Div, 10),
            "%" => (BinaryOp::Rem, 10),
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.cast()?;
        while let Some((op, prec)) = self.binary_op() {
            if prec <= min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.binary(prec)?;
            let loc = lhs.loc.clone();
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                loc,
            };
        }
        Ok(lhs)
    }

    fn paren_starts_type(&self) -> bool {
        self.at("(") && self.peek_at(1).is_some_and(|t| self.is_type_start(t))
    }

    fn cast(&mut self) -> PResult<Expr> {
        if self.paren_starts_type() {
            let loc = self.loc(self.pos);
            self.pos += 1;
            let ty = self.type_name()?;
            self.expect(")")?;
            if self.at("{") {
                // compound literal
                let init = self.initializer()?;
                let lit = Expr {
                    kind: ExprKind::Cast {
                        ty,
                        expr: Box::new(init),
                    },
                    loc,
                };
                return self.postfix_tail(lit);
            }
            let expr = self.cast()?;
            return Ok(Expr {
                kind: ExprKind::Cast {
                    ty,
                    expr: Box::new(expr),
                },
                loc,
            });
        }
        self.unary()
    }

    fn unary(&mut self) -> PResult<Expr> {
        let loc = self.loc(self.pos);
        let Some(t) = self.peek() else {
            return Err(self.syntax("unexpected end of input in expression".into()));
        };
        let text = t.text.clone();
        let op = if t.kind == TokKind::Punct {
            match text.as_str() {
                "++" => Some(UnaryOp::PreInc),
                "--" => Some(UnaryOp::PreDec),
                "&" => Some(UnaryOp::AddrOf),
                "*" => Some(UnaryOp::Deref),
                "+" => Some(UnaryOp::Plus),
                "-" => Some(UnaryOp::Neg),
                "~" => Some(UnaryOp::BitNot),
                "!" => Some(UnaryOp::Not),
                "&&" => return Err(self.unsupported("address of label")),
                _ => None,
            }
        } else {
            None
        };
        if let Some(op) = op {
            self.pos += 1;
            let expr = if matches!(op, UnaryOp::PreInc | UnaryOp::PreDec) {
                self.unary()?
            } else {
                self.cast()?
            };
            return Ok(Expr {
                kind: ExprKind::Unary {
                    op,
                    expr: Box::new(expr),
                },
                loc,
            });
        }
        if t.kind == TokKind::Ident {
            match text.as_str() {
                "sizeof" | "_Alignof" | "__alignof__" | "__alignof" => {
                    self.pos += 1;
                    if self.paren_starts_type() {
                        self.pos += 1;
                        let ty = self.type_name()?;
                        self.expect(")")?;
                        return Ok(Expr {
                            kind: ExprKind::SizeofType(ty),
                            loc,
                        });
                    }
                    let e = self.unary()?;
                    return Ok(Expr {
                        kind: ExprKind::SizeofExpr(Box::new(e)),
                        loc,
                    });
                }
                "__extension__" => {
                    self.pos += 1;
                    return self.cast();
                }
                "_Generic" => return Err(self.unsupported("_Generic selection")),
                _ => {}
            }
        }
        let primary = self.primary()?;
        self.postfix_tail(primary)
    }

    fn postfix_tail(&mut self, mut e: Expr) -> PResult<Expr> {
        loop {
            let loc = e.loc.clone();
            if self.eat("[") {
                let index = self.expression()?;
                self.expect("]")?;
                e = Expr {
                    kind: ExprKind::Index {
                        base: Box::new(e),
                        index: Box::new(index),
                    },
                    loc,
                };
            } else if self.at("(") {
                self.pos += 1;
                let mut args = Vec::new();
                if !self.at(")") {
                    loop {
                        args.push(self.assignment()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                self.expect(")")?;
                e = Expr {
                    kind: ExprKind::Call {
                        callee: Box::new(e),
                        args,
                    },
                    loc,
                };
            } else if self.at(".") || self.at("->") {
                let arrow = self.at("->");
                self.pos += 1;
                let field = self.ident()?;
                e = Expr {
                    kind: ExprKind::Member {
                        base: Box::new(e),
                        field,
                        arrow,
                    },
                    loc,
                };
            } else if self.at("++") || self.at("--") {
                let op = if self.at("++") {
                    UnaryOp::PostInc
                } else {
                    UnaryOp::PostDec
                };
                self.pos += 1;
                e = Expr {
                    kind: ExprKind::Unary {
                        op,
                        expr: Box::new(e),
                    },
                    loc,
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.loc(self.pos);
        let Some(t) = self.peek().cloned() else {
            return Err(self.syntax("unexpected end of input in expression".into()));
        };
        match t.kind {
            TokKind::Ident => {
                if is_reserved_word(&t.text) && !matches!(t.text.as_str(), "__extension__") {
                    return Err(self.syntax(format!("unexpected keyword `{}`", t.text)));
                }
                self.pos += 1;
                if matches!(
                    t.text.as_str(),
                    "__builtin_va_arg" | "__builtin_offsetof" | "__builtin_types_compatible_p"
                ) && self.at("(")
                {
                    return self.builtin_typed(t.text.clone(), loc);
                }
                Ok(Expr {
                    kind: ExprKind::Ident(t.text),
                    loc,
                })
            }
            TokKind::Number => {
                self.pos += 1;
                let lower = t.text.to_ascii_lowercase();
                let is_hex = lower.starts_with("0x");
                let is_float = lower.contains('.')
                    || (!is_hex && lower.contains('e'))
                    || (is_hex && lower.contains('p'));
                let kind = if is_float {
                    ExprKind::FloatLit(t.text)
                } else {
                    ExprKind::IntLit(t.text)
                };
                Ok(Expr { kind, loc })
            }
            TokKind::Char => {
                self.pos += 1;
                Ok(Expr {
                    kind: ExprKind::CharLit(t.text),
                    loc,
                })
            }
            TokKind::Str => {
                let mut s = String::new();
                while let Some(t) = self.peek() {
                    if t.kind != TokKind::Str {
                        break;
                    }
                    s.push_str(&t.text);
                    self.pos += 1;
                }
                Ok(Expr {
                    kind: ExprKind::StrLit(s),
                    loc,
                })
            }
            TokKind::Punct if t.text == "(" => {
                if self.peek_at(1).is_some_and(|n| n.is("{")) {
                    self.pos += 1;
                    let stmts = self.block_items()?;
                    self.expect(")")?;
                    return Ok(Expr {
                        kind: ExprKind::StmtExpr(stmts),
                        loc,
                    });
                }
                self.pos += 1;
                let e = self.expression()?;
                self.expect(")")?;
                Ok(e)
            }
            _ => Err(self.syntax(format!("unexpected token `{}` in expression", t.text))),
        }
    }

    fn builtin_typed(&mut self, name: String, loc: Loc) -> PResult<Expr> {
        self.expect("(")?;
        let (ty, args) = match name.as_str() {
            "__builtin_va_arg" => {
                let ap = self.assignment()?;
                self.expect(",")?;
                (self.type_name()?, vec![ap])
            }
            "__builtin_offsetof" => {
                let ty = self.type_name()?;
                self.expect(",")?;
                // member designator: ident ( . ident | [expr] )*
                self.ident()?;
                loop {
                    if self.eat(".") {
                        self.ident()?;
                    } else if self.eat("[") {
                        self.expression()?;
                        self.expect("]")?;
                    } else {
                        break;
                    }
                }
                (ty, vec![])
            }
            _ => {
                let a = self.type_name()?;
                self.expect(",")?;
                let _b = self.type_name()?;
                (a, vec![])
            }
        };
        self.expect(")")?;
        Ok(Expr {
            kind: ExprKind::BuiltinTyped { name, ty, args },
            loc,
        })
    }
}

#[derive(Debug, Default, Clone)]
struct DeclSpecs {
    base: Option<CType>,
    is_typedef: bool,
    is_extern: bool,
    is_static: bool,
}

#[derive(Debug, Clone)]
enum DeclNode {
    Name(Option<String>),
    Pointer(Box<DeclNode>, bool),
    Array(Box<DeclNode>, Option<String>),
    Function(Box<DeclNode>, Vec<Param>, bool),
}

#[derive(Debug, Clone)]
struct Declarator {
    node: DeclNode,
    loc: Option<Loc>,
    knr: bool,
}

impl Declarator {
    fn name(&self) -> Option<String> {
        let mut n = &self.node;
        loop {
            match n {
                DeclNode::Name(name) => return name.clone(),
                DeclNode::Pointer(i, _) | DeclNode::Array(i, _) | DeclNode::Function(i, _, _) => {
                    n = i
                }
            }
        }
    }

    /// Parameters of the outermost function derivation applied to the name.
    fn function_params(&self) -> Option<Vec<Param>> {
        let mut n = &self.node;
        let mut last = None;
        loop {
            match n {
                DeclNode::Name(_) => return last,
                DeclNode::Function(i, ps, _) => {
                    last = Some(ps.clone());
                    n = i;
                }
                DeclNode::Pointer(i, _) | DeclNode::Array(i, _) => {
                    last = None;
                    n = i;
                }
            }
        }
    }

    fn apply(&self, base: CType) -> CType {
        fn go(node: &DeclNode, ty: CType) -> CType {
            match node {
                DeclNode::Name(_) => ty,
                DeclNode::Pointer(inner, is_const) => go(
                    inner,
                    CType::Pointer {
                        pointee: Box::new(ty),
                        is_const: *is_const,
                    },
                ),
                DeclNode::Array(inner, len) => go(
                    inner,
                    CType::Array {
                        elem: Box::new(ty),
                        len: len.clone(),
                    },
                ),
                DeclNode::Function(inner, params, variadic) => go(
                    inner,
                    CType::Function {
                        ret: Box::new(ty),
                        params: params.iter().map(|p| p.ty.clone()).collect(),
                        variadic: *variadic,
                    },
                ),
            }
        }
        go(&self.node, base)
    }
}

fn is_reserved_word(s: &str) -> bool {
    KEYWORDS.contains(&s)
        || TYPE_WORDS.contains(&s)
        || QUALIFIERS.contains(&s)
        || STORAGE.contains(&s)
        || ATTRIBUTE_LIKE.contains(&s)
}

fn normalize_builtin(words: &[String]) -> CType {
    let has = |w: &str| words.iter().any(|x| x == w);
    let longs = words.iter().filter(|w| *w == "long").count();
    let unsigned = has("unsigned") || has("__unsigned");
    let signed = has("signed") || has("__signed__") || has("__signed");
    if has("void") {
        return CType::Void;
    }
    if has("_Bool") {
        return CType::Builtin("_Bool".into());
    }
    if has("float") || words.iter().any(|w| w.starts_with("_Float") || w == "__float128") {
        return CType::Builtin(if has("_Complex") { "float _Complex" } else { "float" }.into());
    }
    if has("double") {
        return CType::Builtin(if longs > 0 { "long double" } else { "double" }.into());
    }
    if has("char") {
        return CType::Builtin(
            if unsigned {
                "unsigned char"
            } else if signed {
                "signed char"
            } else {
                "char"
            }
            .into(),
        );
    }
    if has("__int128") {
        return CType::Builtin(if unsigned { "unsigned __int128" } else { "__int128" }.into());
    }
    let core = if has("short") {
        "short"
    } else if longs >= 2 {
        "long long"
    } else if longs == 1 {
        "long"
    } else {
        "int"
    };
    if unsigned {
        CType::Builtin(format!("unsigned {core}"))
    } else {
        CType::Builtin(core.to_string())
    }
}

/// Replaces directive lines (line markers left inside a declaration) with blanks of equal length.
fn blank_directives(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        if line.trim_start().starts_with('#') {
            out.extend(std::iter::repeat_n(' ', line.len()));
        } else {
            out.push_str(line);
        }
    }
    out
}

fn raw_identifiers(text: &str) -> Vec<String> {
    let mut ids: Vec<String> = tokenize(text)
        .map(|toks| {
            toks.into_iter()
                .filter(|t| t.kind == TokKind::Ident && !is_reserved_word(&t.text))
                .map(|t| t.text)
                .collect()
        })
        .unwrap_or_default();
    ids.sort();
    ids.dedup();
    ids
}

/// Compact C spelling of an expression (used for array lengths and bit widths).
pub fn expr_text(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Ident(s)
        | ExprKind::IntLit(s)
        | ExprKind::FloatLit(s)
        | ExprKind::CharLit(s)
        | ExprKind::StrLit(s) => s.clone(),
        ExprKind::Binary { op, lhs, rhs } => {
            format!("{} {} {}", expr_text(lhs), binop_text(*op), expr_text(rhs))
        }
        ExprKind::Unary { op, expr } => {
            let o = match op {
                UnaryOp::Neg => "-",
                UnaryOp::Plus => "+",
                UnaryOp::Not => "!",
                UnaryOp::BitNot => "~",
                UnaryOp::Deref => "*",
                UnaryOp::AddrOf => "&",
                _ => "",
            };
            format!("{o}{}", expr_text(expr))
        }
        ExprKind::SizeofType(t) => format!("sizeof({t})"),
        ExprKind::SizeofExpr(x) => format!("sizeof({})", expr_text(x)),
        ExprKind::Cast { ty, expr } => format!("({ty}){}", expr_text(expr)),
        ExprKind::Member { base, field, arrow } => {
            format!("{}{}{}", expr_text(base), if *arrow { "->" } else { "." }, field)
        }
        _ => "?".into(),
    }
}

fn binop_text(op: BinaryOp) -> &'static str {
    match op {
        BinaryOp::Mul => "*",
        BinaryOp::Div => "/",
        BinaryOp::Rem => "%",
        BinaryOp::Add => "+",
        BinaryOp::Sub => "-",
        BinaryOp::Shl => "<<",
        BinaryOp::Shr => ">>",
        BinaryOp::Lt => "<",
        BinaryOp::Gt => ">",
        BinaryOp::Le => "<=",
        BinaryOp::Ge => ">=",
        BinaryOp::Eq => "==",
        BinaryOp::Ne => "!=",
        BinaryOp::BitAnd => "&",
        BinaryOp::BitXor => "^",
        BinaryOp::BitOr => "|",
        BinaryOp::And => "&&",
        BinaryOp::Or => "||",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::preprocess::LineOrigin;

    /// Wraps raw C text as an expanded project file (every line project-origin).
    pub(crate) fn expanded(name: &str, text: &str) -> ExpandedFile {
        let line_origins = text
            .lines()
            .enumerate()
            .map(|(i, _)| LineOrigin {
                file: name.to_string(),
                line: i as u32 + 1,
                system: false,
            })
            .collect();
        ExpandedFile {
            rel_path: name.to_string(),
            text: text.to_string(),
            line_origins,
        }
    }

    fn parse(text: &str) -> ParsedFile {
        parse_file(&expanded("t.c", text)).unwrap()
    }

    #[test]
    fn global_only() {
        let p = parse("int g;\n");
        assert_eq!(p.globals.len(), 1);
        assert_eq!(p.globals[0].name, "g");
        assert!(p.functions.is_empty());
    }

    #[test]
    fn declarator_shapes() {
        let p = parse("int *a[3];\nint (*fp)(int, char *);\nconst char *const s;\nvoid **pp;\n");
        let t: Vec<String> = p.globals.iter().map(|g| g.ty.declare(&g.name)).collect();
        assert_eq!(
            t,
            [
                "int *a[3]",
                "int (*fp)(int, char *)",
                "const char *const s",
                "void **pp"
            ]
        );
        assert!(p.globals[1].ty.is_function_pointer());
        assert_eq!(p.globals[3].ty.pointer_depth(), 2);
    }

    #[test]
    fn typedef_struct_and_function() {
        let src = r#"
typedef struct node { struct node *next; void (*key_free)(void *key); unsigned int len : 4; } node_t;
static int length(node_t *n) {
    int k = 0;
    while (n != ((void *)0)) { k++; n = n->next; }
    return k;
}
"#;
        let p = parse(src);
        assert_eq!(p.records.len(), 1);
        assert_eq!(p.records[0].tag, "node");
        assert_eq!(p.records[0].fields.len(), 3);
        assert!(p.records[0].fields[1].ty.is_function_pointer());
        assert_eq!(p.records[0].fields[2].bit_width.as_deref(), Some("4"));
        assert_eq!(p.typedefs[0].name, "node_t");
        assert!(p.typedefs[0].text.starts_with("typedef struct node"));
        assert!(p.typedefs[0].text.ends_with("node_t;"));
        let f = &p.functions[0];
        assert_eq!(f.name, "length");
        assert!(f.is_static);
        assert_eq!(f.params[0].name.as_deref(), Some("n"));
        assert_eq!(f.body.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn casts_versus_parenthesized_expressions() {
        let src = "typedef int T;\nint f(int a) { return (T)a + (a) * 2; }\n";
        let p = parse(src);
        let body = p.functions[0].body.as_ref().unwrap();
        let StmtKind::Return(Some(e)) = &body[0].kind else { panic!() };
        let ExprKind::Binary { lhs, .. } = &e.kind else { panic!("{e:?}") };
        assert!(matches!(lhs.kind, ExprKind::Cast { .. }));
    }

    #[test]
    fn computed_goto_is_unsupported_not_fatal() {
        let src = "void f(void) { void *l = &&done; goto *l; done: return; }\nint g(void) { return 1; }\n";
        let p = parse(src);
        assert_eq!(p.functions.len(), 2);
        assert!(p.functions[0].body.is_none());
        assert!(p.functions[1].body.is_some());
        assert_eq!(p.notices.len(), 1);
        assert_eq!(p.notices[0].unit.as_deref(), Some("f"));
    }

    #[test]
    fn knr_definition_is_unsupported() {
        let src = "int add(a, b) int a; int b; { return a + b; }\nint h;\n";
        let p = parse(src);
        assert_eq!(p.functions[0].name, "add");
        assert!(p.functions[0].body.is_none());
        assert!(p.notices[0].construct.contains("K&R"));
        assert_eq!(p.globals.len(), 1);
    }

    #[test]
    fn setjmp_is_unsupported() {
        let src = "typedef int jmp_buf[8];\njmp_buf env;\nint f(void) { if (setjmp(env)) return 1; return 0; }\n";
        let p = parse(src);
        assert!(p.functions[0].body.is_none());
        assert!(p.notices[0].construct.contains("setjmp"));
        assert!(p.raw_idents[0].1.contains(&"env".to_string()));
    }

    #[test]
    fn syntax_error_reports_location() {
        let err = parse_file(&expanded("bad.c", "int f(void) {\n  return 1 +;\n}\n")).unwrap_err();
        match err {
            Error::ParseFailure { file, line, .. } => {
                assert_eq!(file, "bad.c");
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn system_regions_are_skimmed_for_typedefs() {
        let text = "typedef unsigned long size_t;\ntypedef int (*cmp_t)(const void *, const void *);\nextern void *malloc (size_t __size) __attribute__ ((__nothrow__ , __leaf__));\nsize_t n(cmp_t c) { return 0; }\n";
        let mut f = expanded("t.c", text);
        for o in f.line_origins.iter_mut().take(3) {
            o.system = true;
            o.file = "/usr/include/stdlib.h".into();
        }
        let p = parse_file(&f).unwrap();
        assert_eq!(p.functions.len(), 1);
        assert!(p.prototypes.is_empty());
        assert_eq!(p.functions[0].params[0].ty, CType::Named("cmp_t".into()));
    }

    #[test]
    fn statement_expressions_and_designated_initializers() {
        let src = "struct P { int x, y; };\nstruct P o = { .x = 1, .y = 2 };\nint f(int a) { int b = ({ int t = a; t + 1; }); return b; }\n";
        let p = parse(src);
        assert!(matches!(p.globals[0].init.as_ref().unwrap().kind, ExprKind::InitList(ref v) if v.len() == 2));
        assert!(p.functions[0].body.is_some());
    }

    #[test]
    fn enums_and_switch() {
        let src = "enum color { RED, GREEN = 3, };\nint f(enum color c) { switch (c) { case RED: return 1; case GREEN: break; default: return 0; } return 2; }\n";
        let p = parse(src);
        assert_eq!(p.enums[0].variants.len(), 2);
        assert!(p.functions[0].body.is_some());
    }
}
