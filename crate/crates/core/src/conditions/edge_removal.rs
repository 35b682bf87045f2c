//! Graph-only counterpart of the entry elimination: edges of the bipartite
//! graph are dropped whenever a square subset pair has a perfect matching but
//! fewer vertex-disjoint paths than its size.
//!
//! Subset checks always use the original network and bipartite graph; the
//! set of already-examined edges keeps a dependency from being counted twice.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::combinatorics::{max_matching, max_vertex_disjoint_paths};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::model::{NetworkModel, VertexSet};
use crate::structure::BipartiteGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeRemovalStep {
    pub excited: VertexSet,
    pub measured: VertexSet,
    pub path_count: usize,
    /// Bipartite edge `(excited, measured)` that was dropped.
    pub removed: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeRemoval {
    /// Edges left after all removals, sorted.
    pub remaining: Vec<(usize, usize)>,
    pub log: Vec<EdgeRemovalStep>,
    pub max_subset: usize,
    pub truncated: bool,
}

/// Runs the edge-removal procedure for subset sizes `2..=max_subset`
/// (default `min(|R|, |C|)`). Pairs are visited excited subset outermost,
/// both lexicographic; the dropped edge is the smallest one still present.
pub fn remove_dependent_edges(
    m: &NetworkModel,
    b: &BipartiteGraph,
    max_subset: Option<usize>,
    execution: Execution,
) -> Result<EdgeRemoval> {
    let full = m.excited().len().min(m.measured().len());
    let limit = match max_subset {
        Some(k) if k < 2 => {
            return Err(Error::InvalidOption("max_subset must be at least 2".into()))
        }
        Some(k) => k.min(full),
        None => full,
    };

    let mut present: BTreeSet<(usize, usize)> = b.edges().iter().copied().collect();
    let mut examined: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut log = Vec::new();

    for k in 2..=limit {
        let measured_sets = m.measured().subsets(k);
        let pairs: Vec<(VertexSet, VertexSet)> = m
            .excited()
            .subsets(k)
            .into_iter()
            .flat_map(|r| measured_sets.iter().map(move |c| (r.clone(), c.clone())))
            .collect();
        // the dependency test only looks at the original graphs
        let hits = exec::map(execution, &pairs, |(r, c)| {
            if max_matching(b, c, r).len() < k {
                return None;
            }
            let paths = max_vertex_disjoint_paths(m, r, c);
            (paths < k).then_some(paths)
        });

        for ((r, c), hit) in pairs.iter().zip(hits) {
            let Some(path_count) = hit else { continue };
            let block = b.edges_between(r, c);
            if block.iter().all(|e| examined.contains(e)) {
                continue;
            }
            examined.extend(block.iter().copied());
            let removed = *block
                .iter()
                .find(|e| present.contains(e))
                .expect("an unexamined edge is never removed");
            present.remove(&removed);
            log.push(EdgeRemovalStep {
                excited: r.clone(),
                measured: c.clone(),
                path_count,
                removed,
            });
        }
    }

    Ok(EdgeRemoval {
        remaining: present.into_iter().collect(),
        log,
        max_subset: limit,
        truncated: limit < full,
    })
}
