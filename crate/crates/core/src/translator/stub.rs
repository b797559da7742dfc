//! Deterministic stubs for units whose translation could not be repaired.
//!
//! Pointer types follow the unit's annotations: borrowed-immutable `T*` becomes
//! `Option<&T>`, borrowed-mutable `Option<&mut T>`, owning `Option<Box<T>>`; `char*` uses
//! `&str` / `&mut String` / `String` under the same split; function pointers become boxed
//! closures. Types without a mapping use the crate-level `Opaque` newtype.

use std::collections::{BTreeMap, BTreeSet};

use crate::annotator::{Lifetime, Mutability, Ownership, RustAnnotation};
use crate::depgraph::{CodeUnit, DependencyGraph, UnitDecl, UnitKind};
use crate::frontend::ast::{CType, RecordKind};
use crate::kgstore::{KnowledgeGraph, RustCopy};

use super::project::OPAQUE_TYPE;

/// Where a type is written; decides how lifetime-carrying types are spelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    /// Function signature: anonymous lifetimes are `'_` or elided.
    Signature,
    /// Struct field: lifetimes must be named; `'a` is declared on the struct.
    Field,
    /// Static item: only `'static`.
    Static,
}

pub struct StubBuilder<'a> {
    kg: &'a KnowledgeGraph,
    graph: &'a DependencyGraph,
    copy: &'a RustCopy,
    /// Every type maps to `Opaque` (second attempt after a stub failed to compile).
    pub opaque: bool,
    /// Names of units stubbed together with the current one (not yet in the Rust copy).
    pub pending: BTreeMap<String, String>,
}

/// Name and lifetime-parameter count of the first item a Rust text declares.
pub fn declared_item(text: &str) -> Option<(String, usize, bool)> {
    for line in text.lines() {
        let t = line.trim_start();
        let rest = ["pub struct ", "pub enum ", "pub union ", "pub type "]
            .iter()
            .find_map(|p| t.strip_prefix(p));
        let Some(rest) = rest else { continue };
        let name: String = rest
            .chars()
            .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
            .collect();
        if name.is_empty() {
            continue;
        }
        let after = &rest[name.len()..];
        let (lifetimes, has_type_params) = match after.strip_prefix('<') {
            Some(g) => {
                let inner = g.split('>').next().unwrap_or("");
                let params: Vec<&str> = inner.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
                let lts = params.iter().filter(|p| p.starts_with('\'')).count();
                (lts, lts != params.len())
            }
            None => (0, false),
        };
        return Some((name, lifetimes, has_type_params));
    }
    None
}

pub fn rust_ident(name: &str) -> String {
    const KW: &[&str] = &[
        "as", "async", "await", "break", "const", "continue", "dyn", "else", "enum", "extern",
        "false", "fn", "for", "if", "impl", "in", "let", "loop", "match", "mod", "move", "mut",
        "pub", "ref", "return", "static", "struct", "trait", "true", "type", "unsafe", "use",
        "where", "while", "abstract", "become", "box", "do", "final", "macro", "override",
        "priv", "typeof", "unsized", "virtual", "yield", "try", "gen",
    ];
    let mut s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() || s.starts_with(|c: char| c.is_ascii_digit()) {
        s.insert(0, '_');
    }
    match s.as_str() {
        "self" | "Self" | "super" | "crate" | "_" => format!("{s}_"),
        k if KW.contains(&k) => format!("r#{s}"),
        _ => s,
    }
}

fn builtin(name: &str) -> Option<&'static str> {
    Some(match name {
        "char" | "signed char" => "i8",
        "unsigned char" => "u8",
        "short" => "i16",
        "unsigned short" => "u16",
        "int" => "i32",
        "unsigned int" => "u32",
        "long" | "long long" => "i64",
        "unsigned long" | "unsigned long long" => "u64",
        "__int128" => "i128",
        "unsigned __int128" => "u128",
        "float" => "f32",
        "double" | "long double" => "f64",
        "_Bool" | "bool" => "bool",
        "size_t" | "uintptr_t" => "usize",
        "ssize_t" | "ptrdiff_t" | "intptr_t" => "isize",
        "int8_t" => "i8",
        "int16_t" => "i16",
        "int32_t" => "i32",
        "int64_t" => "i64",
        "uint8_t" => "u8",
        "uint16_t" => "u16",
        "uint32_t" => "u32",
        "uint64_t" => "u64",
        _ => return None,
    })
}

/// Pointer treatment for one pointer level.
#[derive(Debug, Clone)]
struct PtrClass {
    owning: bool,
    mutable: bool,
    lifetime: Option<String>,
}

impl PtrClass {
    fn from_annotation(a: Option<&RustAnnotation>) -> Self {
        let Some(a) = a else {
            return PtrClass {
                owning: false,
                mutable: false,
                lifetime: None,
            };
        };
        PtrClass {
            owning: a.ownership == Ownership::Owning,
            mutable: a.mutability == Mutability::Mutable,
            lifetime: match &a.lifetime {
                Lifetime::Generic(l) => Some(format!("'{}", l.trim_start_matches('\''))),
                Lifetime::Static => Some("'static".into()),
                _ => None,
            },
        }
    }
}

impl<'a> StubBuilder<'a> {
    pub fn new(kg: &'a KnowledgeGraph, graph: &'a DependencyGraph, copy: &'a RustCopy) -> Self {
        StubBuilder {
            kg,
            graph,
            copy,
            opaque: false,
            pending: BTreeMap::new(),
        }
    }

    fn site_annotation(&self, unit: &str, label: &str) -> Option<&'a RustAnnotation> {
        self.kg.annotation(unit, label)
    }

    /// Unit id declaring a named/record/enum C type.
    fn type_unit(&self, ty: &CType) -> Option<&'a CodeUnit> {
        let units = &self.graph.units;
        match ty.unqualified() {
            CType::Named(n) => [UnitKind::Typedef, UnitKind::Struct, UnitKind::Union, UnitKind::Enum]
                .iter()
                .find_map(|k| units.get(&k.unit_id(n))),
            CType::Record(kind, tag) => {
                let want = match kind {
                    RecordKind::Struct => UnitKind::Struct,
                    RecordKind::Union => UnitKind::Union,
                };
                units.values().find(|u| {
                    u.kind == want && matches!(&u.decl, UnitDecl::Record { tag: t, .. } if t == tag)
                })
            }
            CType::Enum(tag) => units.values().find(|u| {
                matches!(&u.decl, UnitDecl::Enum { tag: t, .. } if t == tag)
            }),
            _ => None,
        }
    }

    /// Rust spelling of a translated named type, with its lifetime arguments.
    fn named(&self, ty: &CType, pos: Position, lts: &mut BTreeSet<String>) -> String {
        if let CType::Named(n) = ty.unqualified() {
            if let Some(b) = builtin(n) {
                return b.into();
            }
        }
        let Some(unit) = self.type_unit(ty) else {
            return OPAQUE_TYPE.into();
        };
        if let Some(name) = self.pending.get(&unit.id) {
            return name.clone();
        }
        let Some((name, lifetimes, generic)) = self
            .copy
            .nodes
            .get(&unit.id)
            .and_then(|n| declared_item(&n.rust_text))
        else {
            return OPAQUE_TYPE.into();
        };
        if generic {
            return OPAQUE_TYPE.into();
        }
        if lifetimes == 0 {
            return name;
        }
        let lt = match pos {
            Position::Signature => "'_".to_string(),
            Position::Field => {
                lts.insert("'a".into());
                "'a".to_string()
            }
            Position::Static => "'static".to_string(),
        };
        format!("{name}<{}>", vec![lt; lifetimes].join(", "))
    }

    fn ref_lifetime(&self, class: &PtrClass, pos: Position, lts: &mut BTreeSet<String>) -> String {
        match pos {
            Position::Static => "'static ".into(),
            Position::Field => {
                let l = match &class.lifetime {
                    Some(l) => l.clone(),
                    None => "'a".into(),
                };
                if l != "'static" {
                    lts.insert(l.clone());
                }
                format!("{l} ")
            }
            Position::Signature => match &class.lifetime {
                Some(l) => {
                    if l != "'static" {
                        lts.insert(l.clone());
                    }
                    format!("{l} ")
                }
                None => String::new(),
            },
        }
    }

    /// Maps a C type; `class` applies to the outermost pointer level.
    fn map(&self, ty: &CType, class: &PtrClass, pos: Position, lts: &mut BTreeSet<String>) -> String {
        if self.opaque {
            return OPAQUE_TYPE.into();
        }
        match ty.unqualified() {
            CType::Void => "()".into(),
            CType::Builtin(b) => builtin(b).unwrap_or(OPAQUE_TYPE).into(),
            CType::Named(_) | CType::Record(..) | CType::Enum(_) => {
                if let Some(u) = self.type_unit(ty) {
                    if let UnitDecl::Typedef { ty: inner } = &u.decl {
                        if !self.copy.nodes.contains_key(&u.id) {
                            return self.map(inner, class, pos, lts);
                        }
                    }
                }
                self.named(ty, pos, lts)
            }
            CType::Array { elem, len } => {
                let inner = PtrClass {
                    owning: true,
                    mutable: true,
                    lifetime: None,
                };
                let e = self.map(elem, &inner, pos, lts);
                match len.as_deref().and_then(|l| l.trim().parse::<usize>().ok()) {
                    Some(n) => format!("[{e}; {n}]"),
                    None => format!("Vec<{e}>"),
                }
            }
            CType::Function { .. } => OPAQUE_TYPE.into(),
            CType::Pointer { pointee, .. } => {
                let target = self.resolve_alias(pointee);
                if let CType::Function { ret, params, .. } = target.unqualified() {
                    return format!("Option<Box<dyn Fn({}){}>>", self.fn_params(params), self.fn_ret(ret));
                }
                // An untyped pointer becomes a by-value handle, keeping lifetimes out of its holders.
                if matches!(target.unqualified(), CType::Void) {
                    return OPAQUE_TYPE.into();
                }
                let is_char = matches!(target.unqualified(), CType::Builtin(b) if b == "char");
                let inner_class = PtrClass {
                    owning: true,
                    mutable: true,
                    lifetime: None,
                };
                let inner = self.map(pointee, &inner_class, pos, lts);
                let r = if class.owning {
                    if is_char {
                        "String".to_string()
                    } else {
                        format!("Box<{inner}>")
                    }
                } else {
                    let lt = self.ref_lifetime(class, pos, lts);
                    match (is_char, class.mutable) {
                        (true, false) => format!("&{lt}str"),
                        (true, true) => format!("&{lt}mut String"),
                        (false, false) => format!("&{lt}{inner}"),
                        (false, true) => format!("&{lt}mut {inner}"),
                    }
                };
                format!("Option<{r}>")
            }
            CType::Const(inner) => self.map(inner, class, pos, lts),
        }
    }

    fn resolve_alias(&self, ty: &'a CType) -> CType {
        let mut t = ty.clone();
        for _ in 0..16 {
            let CType::Named(n) = t.unqualified() else { break };
            match self.graph.units.get(&UnitKind::Typedef.unit_id(n)).map(|u| &u.decl) {
                Some(UnitDecl::Typedef { ty }) => t = ty.clone(),
                _ => break,
            }
        }
        t
    }

    fn fn_params(&self, params: &[CType]) -> String {
        let plain = PtrClass {
            owning: false,
            mutable: false,
            lifetime: None,
        };
        let mut sink = BTreeSet::new();
        params
            .iter()
            .filter(|p| !matches!(p.unqualified(), CType::Void))
            .map(|p| self.map(p, &plain, Position::Signature, &mut sink))
            .collect::<Vec<_>>()
            .join(", ")
    }

    fn fn_ret(&self, ret: &CType) -> String {
        let owned = PtrClass {
            owning: true,
            mutable: true,
            lifetime: None,
        };
        let mut sink = BTreeSet::new();
        match ret.unqualified() {
            CType::Void => String::new(),
            _ => format!(" -> {}", self.map(ret, &owned, Position::Static, &mut sink)),
        }
    }

    /// `pub fn name(params) -> ret` for a function unit.
    pub fn fn_signature(&self, unit: &CodeUnit) -> String {
        let UnitDecl::Func {
            c_name,
            params,
            ret,
            ..
        } = &unit.decl
        else {
            return String::new();
        };
        let mut lts = BTreeSet::new();
        let mut used = BTreeSet::new();
        let ps: Vec<String> = params
            .iter()
            .filter(|p| !matches!(p.ty.unqualified(), CType::Void))
            .enumerate()
            .map(|(i, p)| {
                let class = PtrClass::from_annotation(self.site_annotation(&unit.id, &p.name));
                let ty = self.map(&p.ty, &class, Position::Signature, &mut lts);
                let mut name = rust_ident(&p.name);
                if !used.insert(name.clone()) {
                    name = format!("{name}_{i}");
                }
                format!("{name}: {ty}")
            })
            .collect();
        let ret_s = match ret.unqualified() {
            CType::Void => String::new(),
            _ => {
                let class = PtrClass::from_annotation(self.site_annotation(&unit.id, "return"));
                format!(" -> {}", self.map(ret, &class, Position::Signature, &mut lts))
            }
        };
        let generics = if lts.is_empty() || self.opaque {
            String::new()
        } else {
            format!("<{}>", lts.into_iter().collect::<Vec<_>>().join(", "))
        };
        format!("pub fn {}{generics}({}){ret_s}", rust_ident(c_name), ps.join(", "))
    }

    pub fn type_name(unit: &CodeUnit) -> String {
        rust_ident(&unit.name)
    }

    /// Complete stub item for `unit`.
    pub fn stub(&self, unit: &CodeUnit) -> String {
        match &unit.decl {
            UnitDecl::Func { .. } => format!(
                "#[allow(unused_variables)]\n{} {{\n    unimplemented!()\n}}\n",
                self.fn_signature(unit)
            ),
            UnitDecl::Record { fields, .. } => {
                let name = Self::type_name(unit);
                if self.opaque {
                    return format!("#[derive(Default)]\npub struct {name};\n");
                }
                let mut lts = BTreeSet::new();
                let body: Vec<String> = fields
                    .iter()
                    .map(|f| {
                        let class = PtrClass::from_annotation(self.site_annotation(&unit.id, &f.name));
                        let ty = self.map(&f.ty, &class, Position::Field, &mut lts);
                        format!("    pub {}: {ty},\n", rust_ident(&f.name))
                    })
                    .collect();
                let generics = if lts.is_empty() {
                    String::new()
                } else {
                    format!("<{}>", lts.into_iter().collect::<Vec<_>>().join(", "))
                };
                // Unions become structs: safe Rust unions need `Copy` fields and unsafe reads.
                format!("pub struct {name}{generics} {{\n{}}}\n", body.concat())
            }
            UnitDecl::Enum { variants, .. } => {
                let name = Self::type_name(unit);
                let mut seen = BTreeSet::new();
                let vs: String = variants
                    .iter()
                    .map(|v| rust_ident(v))
                    .filter(|v| seen.insert(v.clone()))
                    .map(|v| format!("    {v},\n"))
                    .collect();
                format!(
                    "#[allow(non_camel_case_types)]\n#[derive(Debug, Clone, Copy, PartialEq, Eq)]\npub enum {name} {{\n{vs}}}\n"
                )
            }
            UnitDecl::Typedef { ty } => {
                let class = PtrClass {
                    owning: true,
                    mutable: true,
                    lifetime: None,
                };
                let mut lts = BTreeSet::new();
                let t = self.map(ty, &class, Position::Static, &mut lts);
                format!("#[allow(non_camel_case_types)]\npub type {} = {t};\n", Self::type_name(unit))
            }
            UnitDecl::Global { ty, .. } => {
                let class = PtrClass {
                    owning: true,
                    mutable: true,
                    lifetime: None,
                };
                let mut lts = BTreeSet::new();
                let t = self.map(ty, &class, Position::Static, &mut lts);
                format!(
                    "#[allow(non_upper_case_globals)]\npub static {}: std::sync::Mutex<Option<{t}>> = std::sync::Mutex::new(None);\n",
                    Self::type_name(unit)
                )
            }
        }
    }
}

/// The signature line of function `name` in `text`, or the first declared item line.
pub fn signature_of(text: &str, name: &str) -> String {
    let needle = format!("fn {name}");
    let found = text.match_indices(&needle).find(|(i, _)| {
        let after = text[i + needle.len()..].chars().next();
        matches!(after, Some('(') | Some('<') | Some(' '))
    });
    let Some((at, _)) = found else {
        return text
            .lines()
            .find(|l| l.trim_start().starts_with("pub "))
            .unwrap_or("")
            .trim()
            .to_string();
    };
    let line_start = text[..at].rfind('\n').map_or(0, |i| i + 1);
    let mut depth = 0i32;
    let mut end = text.len();
    for (i, c) in text[at..].char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            '{' | ';' if depth == 0 => {
                end = at + i;
                break;
            }
            _ => {}
        }
    }
    text[line_start..end]
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signatures_are_cut_at_the_body() {
        let t = "/// doc\npub fn get<'a>(\n    root: &'a mut Node,\n) -> Option<&'a mut Node> {\n    None\n}\n";
        assert_eq!(
            signature_of(t, "get"),
            "pub fn get<'a>( root: &'a mut Node, ) -> Option<&'a mut Node>"
        );
        assert_eq!(signature_of("pub struct S { a: i32 }", "x"), "pub struct S { a: i32 }");
    }

    #[test]
    fn declared_items_report_lifetimes() {
        assert_eq!(
            declared_item("#[derive(Debug)]\npub struct Node<'a> { x: &'a i32 }"),
            Some(("Node".into(), 1, false))
        );
        assert_eq!(declared_item("pub enum E<T> { A(T) }"), Some(("E".into(), 0, true)));
        assert_eq!(declared_item("fn f() {}"), None);
    }

    #[test]
    fn identifiers_avoid_keywords() {
        assert_eq!(rust_ident("type"), "r#type");
        assert_eq!(rust_ident("self"), "self_");
        assert_eq!(rust_ident("9lives"), "_9lives");
    }
}
