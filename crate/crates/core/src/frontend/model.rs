//! Project-wide, symbol-resolved view of every parsed translation file.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::parser::{parse_file, UnsupportedConstruct};
use super::preprocess::{OriginKind, PreprocessedProject};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordOrEnum {
    Record(RecordKind),
    Enum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymbolKind {
    Function,
    Record,
    Enum,
    Typedef,
    Global,
    Enumerator,
}

/// Where a project-defined name is declared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symbol {
    pub kind: SymbolKind,
    pub loc: Loc,
}

/// A function definition together with the name it is known by project-wide.
///
/// `key` equals the C name except for `static` functions whose name collides across files;
/// those are qualified as `<file stem>.<name>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionEntry {
    pub key: String,
    pub def: FunctionDef,
}

#[derive(Debug, Clone, Default)]
pub struct SourceModel {
    /// Sorted by key.
    pub functions: Vec<FunctionEntry>,
    pub prototypes: Vec<Prototype>,
    /// Keyed by tag (synthesized for anonymous records).
    pub records: BTreeMap<String, RecordDef>,
    pub enums: BTreeMap<String, EnumDef>,
    pub typedefs: BTreeMap<String, TypedefDecl>,
    /// Defining declaration preferred over `extern` ones.
    pub globals: BTreeMap<String, GlobalDecl>,
    /// Enumerator name → enum tag.
    pub enumerators: BTreeMap<String, String>,
    pub symbols: BTreeMap<String, Symbol>,
    /// Names used by project code without a project declaration (library functions, macros
    /// from system headers that expanded to identifiers, ...).
    pub unresolved: BTreeSet<String>,
    pub notices: Vec<UnsupportedConstruct>,
    /// Identifiers mentioned by functions kept as raw text, by function key.
    pub raw_idents: BTreeMap<String, Vec<String>>,
}

/// Parses every expanded file and merges the per-file declarations.
pub fn parse_project(pre: &PreprocessedProject) -> Result<SourceModel> {
    let parsed = pre
        .files
        .iter()
        .map(parse_file)
        .collect::<Result<Vec<_>>>()?;
    let mut m = SourceModel::default();

    // Functions: one entry per definition site.
    let mut defs: BTreeMap<(String, Loc), FunctionDef> = BTreeMap::new();
    let mut raw: BTreeMap<(String, Loc), Vec<String>> = BTreeMap::new();
    for p in &parsed {
        for f in &p.functions {
            defs.entry((f.name.clone(), f.loc.clone()))
                .or_insert_with(|| f.clone());
        }
        for (name, ids) in &p.raw_idents {
            if let Some(f) = p.functions.iter().find(|f| &f.name == name) {
                raw.insert((name.clone(), f.loc.clone()), ids.clone());
            }
        }
    }
    let mut by_name: BTreeMap<String, usize> = BTreeMap::new();
    for (name, _) in defs.keys() {
        *by_name.entry(name.clone()).or_default() += 1;
    }
    for ((name, loc), def) in defs {
        let key = if by_name[&name] > 1 && def.is_static {
            format!("{}.{}", file_stem(&loc.file), name)
        } else {
            name.clone()
        };
        if let Some(ids) = raw.remove(&(name.clone(), loc.clone())) {
            m.raw_idents.insert(key.clone(), ids);
        }
        m.functions.push(FunctionEntry { key, def });
    }
    m.functions.sort_by(|a, b| a.key.cmp(&b.key));

    let mut seen_protos = BTreeSet::new();
    for p in &parsed {
        for r in &p.records {
            m.records.entry(r.tag.clone()).or_insert_with(|| r.clone());
        }
        for e in &p.enums {
            m.enums.entry(e.tag.clone()).or_insert_with(|| e.clone());
            for v in &e.variants {
                m.enumerators.insert(v.name.clone(), e.tag.clone());
            }
        }
        for t in &p.typedefs {
            m.typedefs.entry(t.name.clone()).or_insert_with(|| t.clone());
        }
        for g in &p.globals {
            match m.globals.get(&g.name) {
                Some(prev) if !prev.is_extern || g.is_extern => {}
                _ => {
                    m.globals.insert(g.name.clone(), g.clone());
                }
            }
        }
        for pr in &p.prototypes {
            if seen_protos.insert((pr.name.clone(), pr.loc.clone())) {
                m.prototypes.push(pr.clone());
            }
        }
        for n in &p.notices {
            if !m.notices.contains(n) {
                m.notices.push(n.clone());
            }
        }
    }
    m.notices.sort();
    m.build_symbols();
    m.collect_unresolved();
    Ok(m)
}

pub(crate) fn file_stem(path: &str) -> &str {
    let base = path.rsplit('/').next().unwrap_or(path);
    base.rsplit_once('.').map(|(s, _)| s).unwrap_or(base)
}

impl SourceModel {
    fn build_symbols(&mut self) {
        let mut symbols = BTreeMap::new();
        for f in &self.functions {
            symbols.insert(
                f.key.clone(),
                Symbol {
                    kind: SymbolKind::Function,
                    loc: f.def.loc.clone(),
                },
            );
        }
        for (tag, r) in &self.records {
            symbols.insert(
                tag.clone(),
                Symbol {
                    kind: SymbolKind::Record,
                    loc: r.loc.clone(),
                },
            );
        }
        for (tag, e) in &self.enums {
            symbols.insert(
                tag.clone(),
                Symbol {
                    kind: SymbolKind::Enum,
                    loc: e.loc.clone(),
                },
            );
            for v in &e.variants {
                symbols.insert(
                    v.name.clone(),
                    Symbol {
                        kind: SymbolKind::Enumerator,
                        loc: e.loc.clone(),
                    },
                );
            }
        }
        for (name, t) in &self.typedefs {
            symbols.insert(
                name.clone(),
                Symbol {
                    kind: SymbolKind::Typedef,
                    loc: t.loc.clone(),
                },
            );
        }
        for (name, g) in &self.globals {
            symbols.insert(
                name.clone(),
                Symbol {
                    kind: SymbolKind::Global,
                    loc: g.loc.clone(),
                },
            );
        }
        self.symbols = symbols;
    }

    fn collect_unresolved(&mut self) {
        let mut unresolved = BTreeSet::new();
        for f in &self.functions {
            let Some(body) = &f.def.body else { continue };
            let mut locals: BTreeSet<&str> =
                f.def.params.iter().filter_map(|p| p.name.as_deref()).collect();
            for s in body {
                s.walk(&mut |s| {
                    if let StmtKind::Decl(ds) = &s.kind {
                        locals.extend(ds.iter().map(|d| d.name.as_str()));
                    }
                });
                s.walk_exprs(&mut |e| {
                    if let ExprKind::StmtExpr(inner) = &e.kind {
                        for s in inner {
                            s.walk(&mut |s| {
                                if let StmtKind::Decl(ds) = &s.kind {
                                    locals.extend(ds.iter().map(|d| d.name.as_str()));
                                }
                            });
                        }
                    }
                });
            }
            for s in body {
                s.walk_exprs(&mut |e| {
                    if let ExprKind::Ident(n) = &e.kind {
                        if !locals.contains(n.as_str())
                            && !self.symbols.contains_key(n)
                            && self.function_by_c_name(n).is_none()
                        {
                            unresolved.insert(n.clone());
                        }
                    }
                });
            }
        }
        self.unresolved = unresolved;
    }

    pub fn function(&self, key: &str) -> Option<&FunctionEntry> {
        self.functions
            .binary_search_by(|f| f.key.as_str().cmp(key))
            .ok()
            .map(|i| &self.functions[i])
    }

    fn function_by_c_name(&self, name: &str) -> Option<&FunctionEntry> {
        self.functions.iter().find(|f| f.def.name == name)
    }

    /// Resolves a call to `name` made from code in `from_file`: a `static` definition in the
    /// same file wins, then a unique non-static definition.
    pub fn resolve_function(&self, from_file: &str, name: &str) -> Option<&str> {
        let mut candidates = self.functions.iter().filter(|f| f.def.name == name);
        let all: Vec<&FunctionEntry> = candidates.by_ref().collect();
        if let Some(f) = all
            .iter()
            .find(|f| f.def.is_static && f.def.loc.file == from_file)
        {
            return Some(&f.key);
        }
        all.iter()
            .find(|f| !f.def.is_static)
            .or_else(|| (all.len() == 1).then(|| &all[0]))
            .map(|f| f.key.as_str())
    }

    /// Follows typedef names to the underlying type (qualifiers kept on the outer layer only).
    pub fn resolve_type<'a>(&'a self, ty: &'a CType) -> &'a CType {
        let mut t = ty.unqualified();
        let mut guard = 0;
        while let CType::Named(n) = t {
            match self.typedefs.get(n) {
                Some(td) if guard < 64 => {
                    t = td.ty.unqualified();
                    guard += 1;
                }
                _ => break,
            }
        }
        t
    }

    /// The record tag reached from `ty` after resolving typedefs.
    pub fn record_of<'a>(&'a self, ty: &'a CType) -> Option<&'a RecordDef> {
        match self.resolve_type(ty) {
            CType::Record(_, tag) => self.records.get(tag),
            _ => None,
        }
    }

    /// The record pointed to by a pointer (or array) type.
    pub fn pointee_record<'a>(&'a self, ty: &'a CType) -> Option<&'a RecordDef> {
        let t = self.resolve_type(ty);
        let pointee = t.pointee()?;
        self.record_of(pointee)
    }

    /// Is `ty` a pointer after typedef resolution?
    pub fn is_pointer(&self, ty: &CType) -> bool {
        matches!(self.resolve_type(ty), CType::Pointer { .. })
    }

    pub fn is_function_pointer(&self, ty: &CType) -> bool {
        match self.resolve_type(ty) {
            CType::Pointer { pointee, .. } => {
                matches!(self.resolve_type(pointee), CType::Function { .. })
            }
            _ => false,
        }
    }

    /// The typedef that names a record defined in the same or a separate declaration
    /// (`typedef struct tag {...} name;` or `typedef struct tag name;`), if exactly one does.
    pub fn record_typedef(&self, tag: &str) -> Option<&str> {
        let mut names = self.typedefs.values().filter(|t| {
            matches!(t.ty.unqualified(), CType::Record(_, tg) if tg == tag)
        });
        let first = names.next()?;
        names.next().is_none().then_some(first.name.as_str())
    }

    pub fn enum_typedef(&self, tag: &str) -> Option<&str> {
        let mut names = self
            .typedefs
            .values()
            .filter(|t| matches!(t.ty.unqualified(), CType::Enum(tg) if tg == tag));
        let first = names.next()?;
        names.next().is_none().then_some(first.name.as_str())
    }

    /// Name of the code unit a record becomes: its typedef name when one exists, else the tag.
    pub fn record_unit_name(&self, tag: &str) -> String {
        self.record_typedef(tag).unwrap_or(tag).to_string()
    }

    pub fn enum_unit_name(&self, tag: &str) -> String {
        self.enum_typedef(tag).unwrap_or(tag).to_string()
    }

    /// A typedef that only names a project record/enum is folded into that record's unit.
    pub fn collapsed_typedef_target(&self, name: &str) -> Option<(RecordOrEnum, &str)> {
        let td = self.typedefs.get(name)?;
        match td.ty.unqualified() {
            CType::Record(kind, tag)
                if self.records.contains_key(tag) && self.record_typedef(tag) == Some(name) =>
            {
                Some((RecordOrEnum::Record(*kind), tag.as_str()))
            }
            CType::Enum(tag)
                if self.enums.contains_key(tag) && self.enum_typedef(tag) == Some(name) =>
            {
                Some((RecordOrEnum::Enum, tag.as_str()))
            }
            _ => None,
        }
    }

    /// Human-oriented spelling of a type, preferring unit names for records.
    pub fn display_type(&self, ty: &CType) -> String {
        match ty.unqualified() {
            CType::Record(_, tag) if self.records.contains_key(tag) => self.record_unit_name(tag),
            CType::Enum(tag) if self.enums.contains_key(tag) => self.enum_unit_name(tag),
            other => other.to_string(),
        }
    }

    /// Type of a member of `record`, searching anonymous nested records too.
    pub fn field_type<'a>(&'a self, record: &'a RecordDef, field: &str) -> Option<&'a CType> {
        for f in &record.fields {
            if f.name == field {
                return Some(&f.ty);
            }
            if f.name.is_empty() {
                if let Some(inner) = self.record_of(&f.ty) {
                    if let Some(t) = self.field_type(inner, field) {
                        return Some(t);
                    }
                }
            }
        }
        None
    }

    pub fn origin_kind(loc: &Loc) -> OriginKind {
        OriginKind::from_path(&loc.file).unwrap_or(OriginKind::Source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::preprocess::{ExpandedFile, LineOrigin, ProjectSource};

    fn pre(files: &[(&str, &str)]) -> PreprocessedProject {
        let files = files
            .iter()
            .map(|(name, text)| ExpandedFile {
                rel_path: name.to_string(),
                text: text.to_string(),
                line_origins: text
                    .lines()
                    .enumerate()
                    .map(|(i, _)| LineOrigin {
                        file: name.to_string(),
                        line: i as u32 + 1,
                        system: false,
                    })
                    .collect(),
            })
            .collect();
        PreprocessedProject {
            source: ProjectSource {
                root: ".".into(),
                files: vec![],
            },
            files,
        }
    }

    #[test]
    fn static_collisions_are_qualified() {
        let m = parse_project(&pre(&[
            ("a.c", "static int h(void) { return 1; }\nint a(void) { return h(); }\n"),
            ("b.c", "static int h(void) { return 2; }\nint b(void) { return h() + printf(\"x\"); }\n"),
        ]))
        .unwrap();
        let keys: Vec<&str> = m.functions.iter().map(|f| f.key.as_str()).collect();
        assert_eq!(keys, ["a", "a.h", "b", "b.h"]);
        assert_eq!(m.resolve_function("b.c", "h"), Some("b.h"));
        assert!(m.unresolved.contains("printf"));
        assert!(!m.unresolved.contains("h"));
    }

    #[test]
    fn typedef_resolution() {
        let m = parse_project(&pre(&[(
            "t.c",
            "typedef struct n { struct n *next; } n_t;\ntypedef n_t *n_ptr;\nn_ptr head;\n",
        )]))
        .unwrap();
        let g = &m.globals["head"];
        assert!(m.is_pointer(&g.ty));
        assert_eq!(m.pointee_record(&g.ty).unwrap().tag, "n");
        assert_eq!(m.record_typedef("n"), Some("n_t"));
    }
}
