//! Random pointer programs in a small C subset, rendered to C, plus a direct oracle for
//! the facts the analysis must derive from them. The oracle works on this IR only and
//! shares no code with the analysis.

use std::collections::{BTreeMap, BTreeSet};

use ptrkg::cli::PipelineConfig;
use ptrkg::depgraph::build_graph;
use ptrkg::frontend::{parse_project, preprocess, ProjectSource};
use ptrkg::ptrfacts::{analyze, ObjectKind, PointerAnalysis, Verdict};
use rand::seq::IndexedRandom;
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Ty {
    A,
    B,
}

impl Ty {
    pub fn tag(self) -> &'static str {
        match self {
            Ty::A => "A",
            Ty::B => "B",
        }
    }
}

/// Pointer-valued pointer fields: (record, field, pointee).
pub const PTR_FIELDS: [(Ty, &str, Ty); 3] = [(Ty::A, "next", Ty::A), (Ty::A, "peer", Ty::B), (Ty::B, "back", Ty::A)];
const INT_FIELDS: [(Ty, &str); 3] = [(Ty::A, "v"), (Ty::A, "w"), (Ty::B, "v")];
pub const GLOBALS: [(&str, Ty); 4] = [("gA0", Ty::A), ("gA1", Ty::A), ("gB0", Ty::B), ("gB1", Ty::B)];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PExpr {
    /// `&g`
    Global(String),
    /// `&g.inner`
    GlobalInner(String),
    /// `&l` for a local struct
    LocalAddr(String),
    /// `&l.inner`
    LocalInner(String),
    /// a pointer param or pointer local
    Var(String),
    /// `v->field` for a pointer field
    Load(String, &'static str),
    /// `&v->inner`
    Inner(String),
    Null,
}

#[derive(Debug, Clone)]
pub enum Stmt {
    WriteInt { var: String, field: &'static str, deref: bool },
    ReadInt { var: String, field: &'static str },
    Store { var: String, field: &'static str, val: PExpr },
    Call { callee: usize, args: Vec<PExpr> },
}

#[derive(Debug, Clone)]
pub struct Func {
    pub name: String,
    pub params: Vec<(String, Ty)>,
    pub locals: Vec<(String, Ty)>,
    pub ptr_locals: Vec<(String, Ty, PExpr)>,
    pub body: Vec<Stmt>,
}

impl Func {
    fn var_ty(&self, v: &str) -> Ty {
        self.params
            .iter()
            .map(|(n, t)| (n, *t))
            .chain(self.ptr_locals.iter().map(|(n, t, _)| (n, *t)))
            .find(|(n, _)| *n == v)
            .map(|(_, t)| t)
            .expect("declared variable")
    }
}

#[derive(Debug, Clone)]
pub struct RandProgram {
    pub funcs: Vec<Func>,
}

fn expr_c(e: &PExpr) -> String {
    match e {
        PExpr::Global(g) => format!("&{g}"),
        PExpr::GlobalInner(g) => format!("&{g}.inner"),
        PExpr::LocalAddr(l) => format!("&{l}"),
        PExpr::LocalInner(l) => format!("&{l}.inner"),
        PExpr::Var(v) => v.clone(),
        PExpr::Load(v, f) => format!("{v}->{f}"),
        PExpr::Inner(v) => format!("&{v}->inner"),
        PExpr::Null => "NULL".into(),
    }
}

struct Scope<'a> {
    params: &'a [(String, Ty)],
    locals: &'a [(String, Ty)],
    ptrs: &'a [(String, Ty, PExpr)],
}

impl Scope<'_> {
    fn vars(&self) -> Vec<(String, Ty)> {
        self.params
            .iter()
            .cloned()
            .chain(self.ptrs.iter().map(|(n, t, _)| (n.clone(), *t)))
            .collect()
    }

    /// Every expression of pointer type `want` available here.
    fn candidates(&self, want: Ty, allow_null: bool) -> Vec<PExpr> {
        let mut out = Vec::new();
        for (g, t) in GLOBALS {
            if t == want {
                out.push(PExpr::Global(g.into()));
            }
            if t == Ty::A && want == Ty::B {
                out.push(PExpr::GlobalInner(g.into()));
            }
        }
        for (l, t) in self.locals {
            if *t == want {
                out.push(PExpr::LocalAddr(l.clone()));
            }
            if *t == Ty::A && want == Ty::B {
                out.push(PExpr::LocalInner(l.clone()));
            }
        }
        for (v, t) in self.vars() {
            if t == want {
                out.push(PExpr::Var(v.clone()));
            }
            for (rec, f, pointee) in PTR_FIELDS {
                if rec == t && pointee == want {
                    out.push(PExpr::Load(v.clone(), f));
                }
            }
            if t == Ty::A && want == Ty::B {
                out.push(PExpr::Inner(v.clone()));
            }
        }
        if allow_null {
            out.push(PExpr::Null);
        }
        out
    }
}

fn pick_ty(rng: &mut impl Rng) -> Ty {
    if rng.random_bool(0.6) {
        Ty::A
    } else {
        Ty::B
    }
}

impl RandProgram {
    /// At most five functions, each with at most three call sites.
    pub fn generate(rng: &mut impl Rng) -> Self {
        let n = rng.random_range(1..=5);
        let mut funcs: Vec<Func> = (0..n)
            .map(|i| Func {
                name: format!("f{i}"),
                params: (0..rng.random_range(1..=3))
                    .map(|k| (format!("p{k}"), pick_ty(rng)))
                    .collect(),
                locals: Vec::new(),
                ptr_locals: Vec::new(),
                body: Vec::new(),
            })
            .collect();
        let sigs: Vec<Vec<Ty>> = funcs.iter().map(|f| f.params.iter().map(|p| p.1).collect()).collect();
        for f in &mut funcs {
            f.locals = (0..rng.random_range(0..=2))
                .map(|k| (format!("l{k}"), pick_ty(rng)))
                .collect();
            for k in 0..rng.random_range(0..=2) {
                let t = pick_ty(rng);
                let scope = Scope {
                    params: &f.params,
                    locals: &f.locals,
                    ptrs: &f.ptr_locals,
                };
                let cands = scope.candidates(t, false);
                let init = cands.choose(rng).expect("globals always qualify").clone();
                f.ptr_locals.push((format!("t{k}"), t, init));
            }
            let scope = Scope {
                params: &f.params,
                locals: &f.locals,
                ptrs: &f.ptr_locals,
            };
            let vars = scope.vars();
            let mut calls = 0;
            for _ in 0..rng.random_range(1..=6) {
                let (v, t) = vars.choose(rng).expect("at least one param").clone();
                let s = match rng.random_range(0..4) {
                    0 => {
                        let fields: Vec<_> = INT_FIELDS.iter().filter(|(r, _)| *r == t).collect();
                        let (_, field) = **fields.choose(rng).unwrap();
                        Stmt::WriteInt {
                            var: v,
                            field,
                            deref: rng.random_bool(0.3),
                        }
                    }
                    1 => {
                        let fields: Vec<_> = INT_FIELDS.iter().filter(|(r, _)| *r == t).collect();
                        let (_, field) = **fields.choose(rng).unwrap();
                        Stmt::ReadInt { var: v, field }
                    }
                    2 => {
                        let fields: Vec<_> = PTR_FIELDS.iter().filter(|(r, _, _)| *r == t).collect();
                        let (_, field, pointee) = **fields.choose(rng).unwrap();
                        let val = scope.candidates(pointee, true).choose(rng).unwrap().clone();
                        Stmt::Store { var: v, field, val }
                    }
                    _ if calls < 3 => {
                        calls += 1;
                        let callee = rng.random_range(0..n);
                        let args = sigs[callee]
                            .iter()
                            .map(|&pt| scope.candidates(pt, true).choose(rng).unwrap().clone())
                            .collect();
                        Stmt::Call { callee, args }
                    }
                    _ => Stmt::ReadInt {
                        var: v,
                        field: if t == Ty::A { "w" } else { "v" },
                    },
                };
                f.body.push(s);
            }
        }
        RandProgram { funcs }
    }

    pub fn to_c(&self) -> String {
        let mut s = String::from(
            "#include <stddef.h>\n\nstruct A;\n\
             struct B {\n    int v;\n    struct A *back;\n};\n\n\
             struct A {\n    int v;\n    int w;\n    struct A *next;\n    struct B *peer;\n    struct B inner;\n};\n\n\
             struct A gA0, gA1;\nstruct B gB0, gB1;\n\n",
        );
        let sig = |f: &Func| {
            let ps: Vec<String> = f
                .params
                .iter()
                .map(|(n, t)| format!("struct {} *{n}", t.tag()))
                .collect();
            format!("void {}({})", f.name, ps.join(", "))
        };
        for f in &self.funcs {
            s.push_str(&format!("{};\n", sig(f)));
        }
        for f in &self.funcs {
            s.push_str(&format!("\n{} {{\n", sig(f)));
            for (l, t) in &f.locals {
                s.push_str(&format!("    struct {} {l};\n", t.tag()));
            }
            for (n, t, init) in &f.ptr_locals {
                s.push_str(&format!("    struct {} *{n} = {};\n", t.tag(), expr_c(init)));
            }
            let mut reads = 0;
            for st in &f.body {
                match st {
                    Stmt::WriteInt { var, field, deref } => {
                        if *deref {
                            s.push_str(&format!("    (*{var}).{field} = 1;\n"));
                        } else {
                            s.push_str(&format!("    {var}->{field} = 1;\n"));
                        }
                    }
                    Stmt::ReadInt { var, field } => {
                        s.push_str(&format!("    int x{reads} = {var}->{field};\n"));
                        s.push_str(&format!("    (void)x{reads};\n"));
                        reads += 1;
                    }
                    Stmt::Store { var, field, val } => {
                        s.push_str(&format!("    {var}->{field} = {};\n", expr_c(val)))
                    }
                    Stmt::Call { callee, args } => {
                        let a: Vec<String> = args.iter().map(expr_c).collect();
                        s.push_str(&format!("    {}({});\n", self.funcs[*callee].name, a.join(", ")));
                    }
                }
            }
            s.push_str("}\n");
        }
        s
    }
}

/// Abstract objects and variables of the oracle.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Obj {
    Global(String),
    Local(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Var(usize, String),
    Field(Ty, &'static str),
}

#[derive(Debug, Default)]
pub struct Expected {
    /// (function, param) -> objects
    pub param_pts: BTreeMap<(String, String), BTreeSet<Obj>>,
    /// (record tag, field) -> objects
    pub field_pts: BTreeMap<(String, String), BTreeSet<Obj>>,
    /// (function, param a, param b) with a < b -> may alias; absent for uncalled functions
    pub alias: BTreeMap<(String, String, String), bool>,
    pub uncalled: BTreeSet<String>,
    /// (function, derived param, base param)
    pub derives: BTreeSet<(String, String, String)>,
    /// (function, param) -> (record, member)
    pub access: BTreeMap<(String, String), BTreeSet<(String, String)>>,
}

fn value(p: &RandProgram, fi: usize, e: &PExpr, sol: &BTreeMap<Slot, BTreeSet<Obj>>) -> BTreeSet<Obj> {
    let f = &p.funcs[fi];
    let get = |s: &Slot| sol.get(s).cloned().unwrap_or_default();
    match e {
        PExpr::Global(g) | PExpr::GlobalInner(g) => [Obj::Global(g.clone())].into(),
        PExpr::LocalAddr(l) | PExpr::LocalInner(l) => [Obj::Local(f.name.clone(), l.clone())].into(),
        PExpr::Var(v) | PExpr::Inner(v) => get(&Slot::Var(fi, v.clone())),
        PExpr::Load(v, field) => get(&Slot::Field(f.var_ty(v), field)),
        PExpr::Null => BTreeSet::new(),
    }
}

/// Names that hold the same pointer as `param` by direct copying.
fn aliases(f: &Func, param: &str) -> BTreeSet<String> {
    let mut set: BTreeSet<String> = [param.to_string()].into();
    loop {
        let before = set.len();
        for (n, _, init) in &f.ptr_locals {
            if let PExpr::Var(src) = init {
                if set.contains(src) {
                    set.insert(n.clone());
                }
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

fn touched(f: &Func, names: &BTreeSet<String>) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    let arg = |e: &PExpr, out: &mut BTreeSet<(String, String)>| match e {
        PExpr::Load(v, field) if names.contains(v) => {
            out.insert((f.var_ty(v).tag().to_string(), field.to_string()));
        }
        PExpr::Inner(v) if names.contains(v) => {
            out.insert(("A".to_string(), "inner".to_string()));
        }
        _ => {}
    };
    for (_, _, init) in &f.ptr_locals {
        arg(init, &mut out);
    }
    for s in &f.body {
        match s {
            Stmt::WriteInt { var, field, .. } | Stmt::ReadInt { var, field } => {
                if names.contains(var) {
                    out.insert((f.var_ty(var).tag().to_string(), field.to_string()));
                }
            }
            Stmt::Store { var, field, val } => {
                if names.contains(var) {
                    out.insert((f.var_ty(var).tag().to_string(), field.to_string()));
                }
                arg(val, &mut out);
            }
            Stmt::Call { args, .. } => {
                for a in args {
                    arg(a, &mut out);
                }
            }
        }
    }
    out
}

fn derived(d: &PExpr, b: &PExpr) -> bool {
    match (d, b) {
        (PExpr::Load(v, _) | PExpr::Inner(v), PExpr::Var(w)) => v == w,
        (PExpr::LocalInner(l), PExpr::LocalAddr(m)) => l == m,
        (PExpr::GlobalInner(g), PExpr::Global(h)) => g == h,
        _ => false,
    }
}

impl RandProgram {
    pub fn expected(&self) -> Expected {
        // Inclusion constraints, iterated until nothing grows.
        let mut flows: Vec<(Slot, usize, PExpr)> = Vec::new();
        for (fi, f) in self.funcs.iter().enumerate() {
            for (n, _, init) in &f.ptr_locals {
                flows.push((Slot::Var(fi, n.clone()), fi, init.clone()));
            }
            for s in &f.body {
                match s {
                    Stmt::Store { var, field, val } => {
                        flows.push((Slot::Field(f.var_ty(var), field), fi, val.clone()))
                    }
                    Stmt::Call { callee, args } => {
                        for (k, a) in args.iter().enumerate() {
                            let pname = self.funcs[*callee].params[k].0.clone();
                            flows.push((Slot::Var(*callee, pname), fi, a.clone()));
                        }
                    }
                    _ => {}
                }
            }
        }
        let mut sol: BTreeMap<Slot, BTreeSet<Obj>> = BTreeMap::new();
        loop {
            let mut changed = false;
            for (slot, fi, e) in &flows {
                let add = value(self, *fi, e, &sol);
                let entry = sol.entry(slot.clone()).or_default();
                let before = entry.len();
                entry.extend(add);
                changed |= entry.len() != before;
            }
            if !changed {
                break;
            }
        }

        let mut ex = Expected::default();
        let call_sites: Vec<(usize, usize, &Vec<PExpr>)> = self
            .funcs
            .iter()
            .enumerate()
            .flat_map(|(fi, f)| {
                f.body.iter().filter_map(move |s| match s {
                    Stmt::Call { callee, args } => Some((fi, *callee, args)),
                    _ => None,
                })
            })
            .collect();
        for (fi, f) in self.funcs.iter().enumerate() {
            for (p, _) in &f.params {
                let pts = sol.get(&Slot::Var(fi, p.clone())).cloned().unwrap_or_default();
                ex.param_pts.insert((f.name.clone(), p.clone()), pts);
            }
            let called = call_sites.iter().any(|(_, c, _)| *c == fi);
            if !called {
                ex.uncalled.insert(f.name.clone());
            }
            for i in 0..f.params.len() {
                for j in i + 1..f.params.len() {
                    let a = &ex.param_pts[&(f.name.clone(), f.params[i].0.clone())];
                    let b = &ex.param_pts[&(f.name.clone(), f.params[j].0.clone())];
                    let may = called && a.intersection(b).next().is_some();
                    ex.alias.insert((f.name.clone(), f.params[i].0.clone(), f.params[j].0.clone()), may);
                }
            }
        }
        for (rec, field, _) in PTR_FIELDS {
            let pts = sol.get(&Slot::Field(rec, field)).cloned().unwrap_or_default();
            ex.field_pts.insert((rec.tag().to_string(), field.to_string()), pts);
        }
        for (_, callee, args) in &call_sites {
            let g = &self.funcs[*callee];
            for i in 0..args.len() {
                for j in 0..args.len() {
                    if i != j && derived(&args[i], &args[j]) {
                        ex.derives.insert((g.name.clone(), g.params[i].0.clone(), g.params[j].0.clone()));
                    }
                }
            }
        }
        // Access: own touches plus callees reached by passing the param (or a copy) itself.
        let mut acc: BTreeMap<(usize, usize), BTreeSet<(String, String)>> = BTreeMap::new();
        let mut edges: Vec<((usize, usize), (usize, usize))> = Vec::new();
        for (fi, f) in self.funcs.iter().enumerate() {
            for (pi, (p, _)) in f.params.iter().enumerate() {
                let names = aliases(f, p);
                acc.insert((fi, pi), touched(f, &names));
                for s in &f.body {
                    if let Stmt::Call { callee, args } = s {
                        for (k, a) in args.iter().enumerate() {
                            if matches!(a, PExpr::Var(v) if names.contains(v)) {
                                edges.push(((fi, pi), (*callee, k)));
                            }
                        }
                    }
                }
            }
        }
        loop {
            let mut changed = false;
            for (from, to) in &edges {
                let add = acc[to].clone();
                let set = acc.get_mut(from).unwrap();
                let before = set.len();
                set.extend(add);
                changed |= set.len() != before;
            }
            if !changed {
                break;
            }
        }
        for ((fi, pi), set) in acc {
            let f = &self.funcs[fi];
            ex.access.insert((f.name.clone(), f.params[pi].0.clone()), set);
        }
        ex
    }
}

pub fn run_analysis(c: &str) -> PointerAnalysis {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("prog.c"), c).unwrap();
    let cfg = PipelineConfig::default();
    let source = ProjectSource::load(dir.path()).unwrap();
    let pre = preprocess(&source, &cfg).unwrap();
    let model = parse_project(&pre).unwrap();
    let graph = build_graph(&model).unwrap();
    analyze(&graph, &model, Some(&source), &cfg.analysis).unwrap()
}

fn objects(a: &PointerAnalysis, site: &str) -> Result<BTreeSet<Obj>, String> {
    let facts = a.facts(site).ok_or_else(|| format!("no facts for {site}"))?;
    facts
        .points_to
        .iter()
        .map(|o| match &o.kind {
            ObjectKind::Global { name } => Ok(Obj::Global(name.clone())),
            ObjectKind::Local { func, var } => Ok(Obj::Local(func.clone(), var.clone())),
            other => Err(format!("{site}: unexpected object {other:?}")),
        })
        .collect()
}

/// Compares one program; returns the deviations.
pub fn deviations(p: &RandProgram) -> Vec<String> {
    let a = run_analysis(&p.to_c());
    let ex = p.expected();
    let mut bad = Vec::new();
    let site_of = |unit: &str, label: &str| a.find(unit, label).map(|s| s.id.clone());
    for ((f, param), want) in &ex.param_pts {
        let unit = format!("Func:{f}");
        let Some(id) = site_of(&unit, param) else {
            bad.push(format!("{unit} {param}: no site"));
            continue;
        };
        match objects(&a, &id) {
            Ok(got) if &got == want => {}
            Ok(got) => bad.push(format!("points_to {id}: expected {want:?}, got {got:?}")),
            Err(e) => bad.push(e),
        }
        let want_acc: BTreeSet<(String, String)> = ex.access[&(f.clone(), param.clone())].clone();
        let got_acc = &a.facts(&id).unwrap().access_set;
        if got_acc != &want_acc {
            bad.push(format!("access {id}: expected {want_acc:?}, got {got_acc:?}"));
        }
        let want_der: BTreeSet<String> = ex
            .derives
            .iter()
            .filter(|(g, d, _)| g == f && d == param)
            .filter_map(|(_, _, b)| site_of(&unit, b))
            .collect();
        let got_der = &a.facts(&id).unwrap().derives_from;
        if got_der != &want_der {
            bad.push(format!("derives_from {id}: expected {want_der:?}, got {got_der:?}"));
        }
    }
    for (rec, field, _) in PTR_FIELDS {
        let unit = format!("Struct:{}", rec.tag());
        let want = &ex.field_pts[&(rec.tag().to_string(), field.to_string())];
        match site_of(&unit, field).map(|id| objects(&a, &id)) {
            Some(Ok(got)) if &got == want => {}
            Some(Ok(got)) => bad.push(format!("points_to {unit}.{field}: expected {want:?}, got {got:?}")),
            Some(Err(e)) => bad.push(e),
            None => bad.push(format!("{unit} {field}: no site")),
        }
    }
    for ((f, x, y), may) in &ex.alias {
        let unit = format!("Func:{f}");
        let (Some(sx), Some(sy)) = (site_of(&unit, x), site_of(&unit, y)) else {
            continue;
        };
        let want = if *may { Verdict::MayAlias } else { Verdict::NoAlias };
        match a.verdict(&sx, &sy) {
            Some(v) if v == want => {}
            got => bad.push(format!("alias {sx}/{sy}: expected {want:?}, got {got:?}")),
        }
        let unobserved = a
            .alias
            .iter()
            .any(|v| (v.a == sx || v.a == sy) && (v.b == sx || v.b == sy) && v.note.is_some());
        if unobserved != ex.uncalled.contains(f) {
            bad.push(format!("alias {sx}/{sy}: unobserved note should be {}", ex.uncalled.contains(f)));
        }
    }
    bad
}
