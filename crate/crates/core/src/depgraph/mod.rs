//! Code units and the call / reference edges between them.

mod extract;
pub mod outline;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::ast::CType;
use crate::frontend::OriginKind;

pub use extract::{extract_edges, extract_units};
pub use outline::{OutlineKind, OutlineStmt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UnitKind {
    Func,
    Struct,
    Enum,
    Union,
    Typedef,
    GlobalVar,
}

impl UnitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Func => "Func",
            UnitKind::Struct => "Struct",
            UnitKind::Enum => "Enum",
            UnitKind::Union => "Union",
            UnitKind::Typedef => "Typedef",
            UnitKind::GlobalVar => "GlobalVar",
        }
    }

    pub fn unit_id(self, name: &str) -> String {
        format!("{}:{name}", self.as_str())
    }

    pub fn is_record(self) -> bool {
        matches!(self, UnitKind::Struct | UnitKind::Union)
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "call")]
    Call,
    #[serde(rename = "refS")]
    RefS,
    #[serde(rename = "refE")]
    RefE,
    #[serde(rename = "refU")]
    RefU,
    #[serde(rename = "refT")]
    RefT,
    #[serde(rename = "refG")]
    RefG,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Call => "call",
            Relation::RefS => "refS",
            Relation::RefE => "refE",
            Relation::RefU => "refU",
            Relation::RefT => "refT",
            Relation::RefG => "refG",
        }
    }

    /// The relation an edge into a unit of `kind` must carry.
    pub fn for_target(kind: UnitKind) -> Relation {
        match kind {
            UnitKind::Func => Relation::Call,
            UnitKind::Struct => Relation::RefS,
            UnitKind::Enum => Relation::RefE,
            UnitKind::Union => Relation::RefU,
            UnitKind::Typedef => Relation::RefT,
            UnitKind::GlobalVar => Relation::RefG,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamInfo {
    pub name: String,
    pub ty: CType,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub name: String,
    pub ty: CType,
}

/// Typed declaration data a unit carries beyond its text (enough to synthesize stubs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum UnitDecl {
    Func {
        c_name: String,
        params: Vec<ParamInfo>,
        ret: CType,
        variadic: bool,
        /// False when the body fell outside the supported subset and is kept as raw text.
        parsed: bool,
        outline: Vec<OutlineStmt>,
    },
    Record {
        tag: String,
        fields: Vec<FieldInfo>,
    },
    Enum {
        tag: String,
        variants: Vec<String>,
    },
    Typedef {
        ty: CType,
    },
    Global {
        ty: CType,
        is_static: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeUnit {
    pub id: String,
    pub kind: UnitKind,
    pub name: String,
    pub source_text: String,
    pub origin_file: String,
    pub origin_kind: OriginKind,
    pub line: u32,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub system: bool,
    pub decl: UnitDecl,
}

impl CodeUnit {
    pub fn func_params(&self) -> &[ParamInfo] {
        match &self.decl {
            UnitDecl::Func { params, .. } => params,
            _ => &[],
        }
    }

    pub fn outline(&self) -> &[OutlineStmt] {
        match &self.decl {
            UnitDecl::Func { outline, .. } => outline,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DependencyEdge {
    pub from: String,
    pub to: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub units: BTreeMap<String, CodeUnit>,
    pub edges: BTreeSet<DependencyEdge>,
}

impl DependencyGraph {
    pub fn new(units: impl IntoIterator<Item = CodeUnit>, edges: BTreeSet<DependencyEdge>) -> Self {
        DependencyGraph {
            units: units.into_iter().map(|u| (u.id.clone(), u)).collect(),
            edges,
        }
    }

    /// Every edge endpoint is a present unit and refX tags match the target kind.
    pub fn check_closure(&self) -> Result<()> {
        for e in &self.edges {
            let from = self
                .units
                .get(&e.from)
                .ok_or_else(|| Error::Schema(format!("edge source {} is not a unit", e.from)))?;
            let to = self
                .units
                .get(&e.to)
                .ok_or_else(|| Error::Schema(format!("edge target {} is not a unit", e.to)))?;
            if Relation::for_target(to.kind) != e.relation {
                return Err(Error::Schema(format!(
                    "edge {} -> {} tagged {} but target is a {}",
                    e.from, e.to, e.relation, to.kind
                )));
            }
            if e.relation == Relation::Call && from.kind != UnitKind::Func {
                return Err(Error::Schema(format!(
                    "call edge from non-function {}",
                    e.from
                )));
            }
        }
        Ok(())
    }

    pub fn successors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a DependencyEdge> + 'a {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn predecessors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a DependencyEdge> + 'a {
        self.edges.iter().filter(move |e| e.to == id)
    }
}

/// Removes system-origin units and every edge that no longer has both endpoints.
pub fn filter_system(
    units: impl IntoIterator<Item = CodeUnit>,
    edges: BTreeSet<DependencyEdge>,
) -> (Vec<CodeUnit>, BTreeSet<DependencyEdge>) {
    let units: Vec<CodeUnit> = units.into_iter().filter(|u| !u.system).collect();
    let ids: BTreeSet<&str> = units.iter().map(|u| u.id.as_str()).collect();
    let edges = edges
        .into_iter()
        .filter(|e| ids.contains(e.from.as_str()) && ids.contains(e.to.as_str()))
        .collect();
    (units, edges)
}

/// Extracts, filters and closure-checks the dependency graph of a model.
pub fn build_graph(model: &crate::frontend::SourceModel) -> Result<DependencyGraph> {
    let units = extract_units(model);
    let edges = extract_edges(model, &units);
    let (units, edges) = filter_system(units, edges);
    let graph = DependencyGraph::new(units, edges);
    graph.check_closure()?;
    Ok(graph)
}
