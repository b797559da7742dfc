//! The Rust-side mirror of the knowledge graph, grown one translated unit at a time.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Triple;
use crate::depgraph::{DependencyEdge, DependencyGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeStatus {
    Translated,
    Stubbed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RustCopyNode {
    pub source_unit: String,
    pub rust_text: String,
    pub signature_text: String,
    pub placement_path: String,
    pub status: NodeStatus,
    pub carried_semantics: Vec<Triple>,
    /// Set once a later re-record changed the signature away from the first one.
    #[serde(default)]
    pub signature_diverged: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RustCopy {
    pub nodes: BTreeMap<String, RustCopyNode>,
    pub edges: BTreeSet<DependencyEdge>,
}

impl RustCopy {
    /// Inserts or updates a node and mirrors source edges between recorded units.
    #[allow(clippy::too_many_arguments)]
    pub fn record_translation(
        &mut self,
        unit: &str,
        rust_text: &str,
        signature: &str,
        placement: &str,
        semantics: Vec<Triple>,
        status: NodeStatus,
        source: &DependencyGraph,
    ) {
        match self.nodes.get_mut(unit) {
            Some(n) => {
                if n.signature_text != signature {
                    n.signature_diverged = true;
                }
                n.rust_text = rust_text.to_string();
                n.signature_text = signature.to_string();
                n.placement_path = placement.to_string();
                n.status = status;
            }
            None => {
                self.nodes.insert(
                    unit.to_string(),
                    RustCopyNode {
                        source_unit: unit.to_string(),
                        rust_text: rust_text.to_string(),
                        signature_text: signature.to_string(),
                        placement_path: placement.to_string(),
                        status,
                        carried_semantics: semantics,
                        signature_diverged: false,
                    },
                );
            }
        }
        for e in &source.edges {
            if (e.from == unit || e.to == unit)
                && self.nodes.contains_key(&e.from)
                && self.nodes.contains_key(&e.to)
            {
                self.edges.insert(e.clone());
            }
        }
    }

    pub fn remove(&mut self, unit: &str) {
        self.nodes.remove(unit);
        self.edges.retain(|e| e.from != unit && e.to != unit);
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)? + "\n";
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Nodes adjacent to `unit` (either direction), each with its carried `isA` annotations.
pub fn neighbors_of<'a>(
    unit: &str,
    copy: &'a RustCopy,
) -> Result<Vec<(&'a RustCopyNode, Vec<Triple>)>> {
    if !copy.nodes.contains_key(unit) {
        return Err(Error::NotFound(format!("{unit} is not in the Rust copy")));
    }
    let ids: BTreeSet<&str> = copy
        .edges
        .iter()
        .filter_map(|e| {
            if e.from == unit {
                Some(e.to.as_str())
            } else if e.to == unit {
                Some(e.from.as_str())
            } else {
                None
            }
        })
        .filter(|id| *id != unit)
        .collect();
    Ok(ids
        .into_iter()
        .filter_map(|id| copy.nodes.get(id))
        .map(|n| {
            let ann = n
                .carried_semantics
                .iter()
                .filter(|t| t.predicate == "isA")
                .cloned()
                .collect();
            (n, ann)
        })
        .collect())
}
