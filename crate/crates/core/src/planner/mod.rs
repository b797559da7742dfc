//! Translation planning: deallocation stripping, SCC detection and bottom-up ordering.

mod strip;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::{Deserialize, Serialize};

use crate::cli::config::AnalysisConfig;
use crate::depgraph::DependencyGraph;
use crate::error::{Error, Result};
use crate::kgstore::{KnowledgeGraph, Triple};

pub use strip::{strip_deallocations, Stripped};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedUnit {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationUnit {
    pub id: usize,
    pub members: BTreeSet<String>,
    #[serde(default)]
    pub semantics: Vec<Triple>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationPlan {
    pub units: Vec<TranslationUnit>,
    pub dropped_units: Vec<DroppedUnit>,
}

impl TranslationPlan {
    /// Position of the translation unit containing `unit`.
    pub fn position_of(&self, unit: &str) -> Option<usize> {
        self.units.iter().position(|u| u.members.contains(unit))
    }

    /// Checks partition and per-edge ordering against `graph`.
    pub fn check(&self, graph: &DependencyGraph) -> Result<()> {
        let mut seen = BTreeSet::new();
        for u in &self.units {
            if u.members.is_empty() {
                return Err(Error::PlanViolation(format!("unit {} is empty", u.id)));
            }
            for m in &u.members {
                if !seen.insert(m.as_str()) {
                    return Err(Error::PlanViolation(format!("{m} planned twice")));
                }
            }
        }
        for id in graph.units.keys() {
            if !seen.contains(id.as_str()) {
                return Err(Error::PlanViolation(format!("{id} missing from plan")));
            }
        }
        for e in &graph.edges {
            let (pu, pv) = (self.position_of(&e.from), self.position_of(&e.to));
            if let (Some(pu), Some(pv)) = (pu, pv) {
                if pv > pu {
                    return Err(Error::PlanViolation(format!(
                        "{} is planned before its dependency {}",
                        e.from, e.to
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Maximal strongly connected components (Tarjan), each sorted, listed by minimum member.
pub fn find_sccs(graph: &DependencyGraph) -> Vec<BTreeSet<String>> {
    let ids: Vec<&str> = graph.units.keys().map(String::as_str).collect();
    let index_of: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); ids.len()];
    for e in &graph.edges {
        if let (Some(&a), Some(&b)) = (index_of.get(e.from.as_str()), index_of.get(e.to.as_str())) {
            adj[a].push(b);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let comps = tarjan(&adj);
    let mut out: Vec<BTreeSet<String>> = comps
        .into_iter()
        .map(|c| c.into_iter().map(|i| ids[i].to_string()).collect())
        .collect();
    out.sort();
    out
}

/// Iterative Tarjan over an adjacency list; returns components as index lists.
pub fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i < adj[v].len() {
                let w = adj[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// Topologically orders the condensation, dependencies first, ties by minimum member id.
pub fn order(sccs: &[BTreeSet<String>], graph: &DependencyGraph) -> Result<TranslationPlan> {
    let mut comp_of: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, c) in sccs.iter().enumerate() {
        for m in c {
            comp_of.insert(m.as_str(), i);
        }
    }
    // waiting[i]: number of distinct components i depends on; users[j]: components depending on j.
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); sccs.len()];
    let mut users: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); sccs.len()];
    for e in &graph.edges {
        let (Some(&a), Some(&b)) = (comp_of.get(e.from.as_str()), comp_of.get(e.to.as_str()))
        else {
            continue;
        };
        if a != b {
            deps[a].insert(b);
            users[b].insert(a);
        }
    }
    let mut waiting: Vec<usize> = deps.iter().map(BTreeSet::len).collect();
    let key = |i: usize| sccs[i].iter().next().cloned().unwrap_or_default();
    let mut ready: BinaryHeap<Reverse<(String, usize)>> = (0..sccs.len())
        .filter(|&i| waiting[i] == 0)
        .map(|i| Reverse((key(i), i)))
        .collect();
    let mut units = Vec::with_capacity(sccs.len());
    while let Some(Reverse((_, i))) = ready.pop() {
        units.push(TranslationUnit {
            id: units.len(),
            members: sccs[i].clone(),
            semantics: Vec::new(),
        });
        for &u in &users[i] {
            waiting[u] -= 1;
            if waiting[u] == 0 {
                ready.push(Reverse((key(u), u)));
            }
        }
    }
    if units.len() != sccs.len() {
        return Err(Error::PlanViolation(
            "condensed graph is cyclic; SCC input was not a partition into maximal components"
                .into(),
        ));
    }
    Ok(TranslationPlan {
        units,
        dropped_units: Vec::new(),
    })
}

/// Full planning pipeline over a knowledge graph. Returns the plan and the stripped graph
/// whose function texts are the ones to translate.
pub fn plan(kg: &KnowledgeGraph, cfg: &AnalysisConfig) -> Result<(TranslationPlan, DependencyGraph)> {
    let stripped = strip_deallocations(&kg.graph, cfg);
    let sccs = find_sccs(&stripped.graph);
    let mut plan = order(&sccs, &stripped.graph)?;
    for u in &mut plan.units {
        u.semantics = kg.semantics_for(&u.members);
    }
    plan.dropped_units = stripped.dropped;
    plan.check(&stripped.graph)?;
    Ok((plan, stripped.graph))
}
