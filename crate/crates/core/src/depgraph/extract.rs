use std::collections::{BTreeMap, BTreeSet};

use super::outline::outline_function;
use super::{CodeUnit, DependencyEdge, FieldInfo, ParamInfo, Relation, UnitDecl, UnitKind};
use crate::frontend::ast::{CType, Expr, ExprKind, RecordKind, Stmt, StmtKind};
use crate::frontend::model::RecordOrEnum;
use crate::frontend::SourceModel;

/// One unit per project-origin declaration. Records named by a typedef absorb that typedef;
/// anonymous records that no typedef names stay inside their enclosing declaration.
pub fn extract_units(model: &SourceModel) -> Vec<CodeUnit> {
    let mut units = Vec::new();
    for f in &model.functions {
        let def = &f.def;
        units.push(CodeUnit {
            id: UnitKind::Func.unit_id(&f.key),
            kind: UnitKind::Func,
            name: f.key.clone(),
            source_text: def.text.clone(),
            origin_file: def.loc.file.clone(),
            origin_kind: SourceModel::origin_kind(&def.loc),
            line: def.loc.line,
            system: false,
            decl: UnitDecl::Func {
                c_name: def.name.clone(),
                params: def
                    .params
                    .iter()
                    .enumerate()
                    .map(|(i, p)| ParamInfo {
                        name: p.name.clone().unwrap_or_else(|| format!("arg{i}")),
                        ty: p.ty.clone(),
                    })
                    .collect(),
                ret: def.ret.clone(),
                variadic: def.variadic,
                parsed: def.body.is_some(),
                outline: outline_function(def),
            },
        });
    }
    for (tag, r) in &model.records {
        let typedef = model.record_typedef(tag).and_then(|n| model.typedefs.get(n));
        if r.anonymous && typedef.is_none() {
            continue;
        }
        let kind = match r.kind {
            RecordKind::Struct => UnitKind::Struct,
            RecordKind::Union => UnitKind::Union,
        };
        let name = model.record_unit_name(tag);
        units.push(CodeUnit {
            id: kind.unit_id(&name),
            kind,
            source_text: merged_text(&r.text, typedef.map(|t| t.text.as_str())),
            name,
            origin_file: r.loc.file.clone(),
            origin_kind: SourceModel::origin_kind(&r.loc),
            line: r.loc.line,
            system: false,
            decl: UnitDecl::Record {
                tag: tag.clone(),
                fields: r
                    .fields
                    .iter()
                    .map(|f| FieldInfo {
                        name: f.name.clone(),
                        ty: f.ty.clone(),
                    })
                    .collect(),
            },
        });
    }
    for (tag, e) in &model.enums {
        let typedef = model.enum_typedef(tag).and_then(|n| model.typedefs.get(n));
        if e.anonymous && typedef.is_none() {
            continue;
        }
        let name = model.enum_unit_name(tag);
        units.push(CodeUnit {
            id: UnitKind::Enum.unit_id(&name),
            kind: UnitKind::Enum,
            source_text: merged_text(&e.text, typedef.map(|t| t.text.as_str())),
            name,
            origin_file: e.loc.file.clone(),
            origin_kind: SourceModel::origin_kind(&e.loc),
            line: e.loc.line,
            system: false,
            decl: UnitDecl::Enum {
                tag: tag.clone(),
                variants: e.variants.iter().map(|v| v.name.clone()).collect(),
            },
        });
    }
    for (name, t) in &model.typedefs {
        if model.collapsed_typedef_target(name).is_some() {
            continue;
        }
        units.push(CodeUnit {
            id: UnitKind::Typedef.unit_id(name),
            kind: UnitKind::Typedef,
            name: name.clone(),
            source_text: t.text.clone(),
            origin_file: t.loc.file.clone(),
            origin_kind: SourceModel::origin_kind(&t.loc),
            line: t.loc.line,
            system: false,
            decl: UnitDecl::Typedef { ty: t.ty.clone() },
        });
    }
    for (name, g) in &model.globals {
        units.push(CodeUnit {
            id: UnitKind::GlobalVar.unit_id(name),
            kind: UnitKind::GlobalVar,
            name: name.clone(),
            source_text: g.text.clone(),
            origin_file: g.loc.file.clone(),
            origin_kind: SourceModel::origin_kind(&g.loc),
            line: g.loc.line,
            system: false,
            decl: UnitDecl::Global {
                ty: g.ty.clone(),
                is_static: g.is_static,
            },
        });
    }
    units.sort_by(|a, b| a.id.cmp(&b.id));
    units.dedup_by(|a, b| a.id == b.id);
    units
}

/// Text of a record plus the typedef naming it, without repeating a body the typedef already holds.
fn merged_text(record: &str, typedef: Option<&str>) -> String {
    match typedef {
        Some(t) if t.contains(record) => t.to_string(),
        Some(t) => format!("{record};\n{t}"),
        None => format!("{record};"),
    }
}

/// Call and reference edges between units. Targets that are not project units (library
/// functions, system typedefs) are emitted too and removed later by `filter_system`.
pub fn extract_edges(model: &SourceModel, units: &[CodeUnit]) -> BTreeSet<DependencyEdge> {
    let present: BTreeMap<&str, UnitKind> =
        units.iter().map(|u| (u.id.as_str(), u.kind)).collect();
    let mut edges = BTreeSet::new();
    for unit in units {
        let mut c = Collector {
            model,
            from_file: &unit.origin_file,
            locals: BTreeSet::new(),
            targets: BTreeSet::new(),
        };
        match unit.kind {
            UnitKind::Func => {
                let Some(f) = model.function(&unit.name) else { continue };
                let def = &f.def;
                c.ty(&def.ret);
                for p in &def.params {
                    c.ty(&p.ty);
                    if let Some(n) = &p.name {
                        c.locals.insert(n.clone());
                    }
                }
                match &def.body {
                    Some(body) => {
                        for s in body {
                            collect_locals(s, &mut c.locals);
                        }
                        for s in body {
                            c.stmt(s);
                        }
                    }
                    None => {
                        if let Some(ids) = model.raw_idents.get(&f.key) {
                            for id in ids {
                                c.raw_ident(id);
                            }
                        }
                    }
                }
            }
            UnitKind::Struct | UnitKind::Union => {
                if let super::UnitDecl::Record { fields, .. } = &unit.decl {
                    for f in fields {
                        c.ty(&f.ty);
                    }
                }
            }
            UnitKind::Enum => {
                if let super::UnitDecl::Enum { tag, .. } = &unit.decl {
                    if let Some(e) = model.enums.get(tag) {
                        for v in e.variants.iter().filter_map(|v| v.value.as_ref()) {
                            c.expr(v);
                        }
                    }
                }
            }
            UnitKind::Typedef => {
                if let Some(t) = model.typedefs.get(&unit.name) {
                    c.ty(&t.ty);
                }
            }
            UnitKind::GlobalVar => {
                if let Some(g) = model.globals.get(&unit.name) {
                    c.ty(&g.ty);
                    if let Some(init) = &g.init {
                        c.expr(init);
                    }
                }
            }
        }
        for (kind, name) in c.targets {
            let to = kind.unit_id(&name);
            // a target that exists must carry its own kind's tag; absent targets are system
            let relation = match present.get(to.as_str()) {
                Some(k) => Relation::for_target(*k),
                None => Relation::for_target(kind),
            };
            if relation == Relation::Call && unit.kind != UnitKind::Func {
                // function designators in initializers or enum values reference, not call
                if !present.contains_key(to.as_str()) {
                    continue;
                }
            }
            edges.insert(DependencyEdge {
                from: unit.id.clone(),
                to,
                relation,
            });
        }
    }
    // call edges may only originate in functions; designator references from other units
    // are recorded against the referencing unit as a call would not be well-formed
    edges.retain(|e| {
        e.relation != Relation::Call || present.get(e.from.as_str()) == Some(&UnitKind::Func)
    });
    edges
}

fn collect_locals(s: &Stmt, out: &mut BTreeSet<String>) {
    s.walk(&mut |s| {
        if let StmtKind::Decl(ds) = &s.kind {
            out.extend(ds.iter().map(|d| d.name.clone()));
        }
    });
    s.walk_exprs(&mut |e| {
        if let ExprKind::StmtExpr(inner) = &e.kind {
            for s in inner {
                s.walk(&mut |s| {
                    if let StmtKind::Decl(ds) = &s.kind {
                        out.extend(ds.iter().map(|d| d.name.clone()));
                    }
                });
            }
        }
    });
}

struct Collector<'m> {
    model: &'m SourceModel,
    from_file: &'m str,
    locals: BTreeSet<String>,
    targets: BTreeSet<(UnitKind, String)>,
}

impl Collector<'_> {
    fn ty(&mut self, ty: &CType) {
        let model = self.model;
        ty.walk(&mut |t| match t {
            CType::Record(kind, tag) => {
                let unit_kind = match kind {
                    RecordKind::Struct => UnitKind::Struct,
                    RecordKind::Union => UnitKind::Union,
                };
                let named = model.records.get(tag).is_some_and(|r| !r.anonymous)
                    || model.record_typedef(tag).is_some();
                if named || !model.records.contains_key(tag) {
                    self.targets
                        .insert((unit_kind, model.record_unit_name(tag)));
                } else if let Some(r) = model.records.get(tag) {
                    // anonymous nested record: its members' types are ours
                    for f in &r.fields {
                        self.ty(&f.ty.clone());
                    }
                }
            }
            CType::Enum(tag) => {
                if !model.enums.get(tag).is_some_and(|e| e.anonymous)
                    || model.enum_typedef(tag).is_some()
                {
                    self.targets.insert((UnitKind::Enum, model.enum_unit_name(tag)));
                }
            }
            CType::Named(n) => match model.collapsed_typedef_target(n) {
                Some((RecordOrEnum::Record(RecordKind::Struct), _)) => {
                    self.targets.insert((UnitKind::Struct, n.clone()));
                }
                Some((RecordOrEnum::Record(RecordKind::Union), _)) => {
                    self.targets.insert((UnitKind::Union, n.clone()));
                }
                Some((RecordOrEnum::Enum, _)) => {
                    self.targets.insert((UnitKind::Enum, n.clone()));
                }
                None => {
                    self.targets.insert((UnitKind::Typedef, n.clone()));
                }
            },
            _ => {}
        });
    }

    fn stmt(&mut self, s: &Stmt) {
        s.walk(&mut |s| {
            if let StmtKind::Decl(ds) = &s.kind {
                for d in ds {
                    self.ty(&d.ty);
                }
            }
        });
        s.walk_exprs(&mut |e| self.expr_node(e));
    }

    fn expr(&mut self, e: &Expr) {
        e.walk(&mut |x| self.expr_node(x));
    }

    fn expr_node(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Ident(n) => self.name(n),
            ExprKind::Cast { ty, .. } | ExprKind::SizeofType(ty) => self.ty(ty),
            ExprKind::BuiltinTyped { ty, .. } => self.ty(ty),
            ExprKind::StmtExpr(stmts) => {
                for s in stmts {
                    s.walk(&mut |s| {
                        if let StmtKind::Decl(ds) = &s.kind {
                            for d in ds {
                                self.ty(&d.ty);
                            }
                        }
                    });
                }
            }
            _ => {}
        }
    }

    fn name(&mut self, n: &str) {
        if self.locals.contains(n) {
            return;
        }
        let model = self.model;
        if let Some(key) = model.resolve_function(self.from_file, n) {
            self.targets.insert((UnitKind::Func, key.to_string()));
        } else if model.globals.contains_key(n) {
            self.targets.insert((UnitKind::GlobalVar, n.to_string()));
        } else if let Some(tag) = model.enumerators.get(n) {
            self.targets.insert((UnitKind::Enum, model.enum_unit_name(tag)));
        } else if model.unresolved.contains(n) {
            // library function or object: becomes a system edge and is filtered
            self.targets.insert((UnitKind::Func, n.to_string()));
        }
    }

    /// Dependencies of functions registered as raw text, recovered from their identifiers.
    fn raw_ident(&mut self, n: &str) {
        let model = self.model;
        if model.typedefs.contains_key(n) {
            self.ty(&CType::Named(n.to_string()));
        } else if let Some(r) = model.records.get(n) {
            self.ty(&CType::Record(r.kind, n.to_string()));
        } else if model.enums.contains_key(n) {
            self.ty(&CType::Enum(n.to_string()));
        } else if model.resolve_function(self.from_file, n).is_some()
            || model.globals.contains_key(n)
            || model.enumerators.contains_key(n)
        {
            self.name(n);
        }
    }
}
