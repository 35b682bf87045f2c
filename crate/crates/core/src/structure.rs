//! Structural pattern of `T = (I - G)^-1` derived from the topology alone.
//!
//! For `i != j` the entry `T[j][i]` is nonzero exactly when `j` is reachable
//! from `i`. A diagonal entry `T[i][i]` differs from the constant 1 exactly
//! when `i` lies on a directed cycle.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::Serialize;

use crate::model::{NetworkModel, VertexSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum EntryClass {
    Zero,
    ConstantOne,
    NonConstant,
}

/// L x L grid of entry classes, addressed with 1-based `(row, col)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralPattern {
    size: usize,
    cells: Vec<EntryClass>,
}

impl StructuralPattern {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Class of `T[row][col]`.
    pub fn get(&self, row: usize, col: usize) -> EntryClass {
        self.cells[(row - 1) * self.size + (col - 1)]
    }

    pub fn is_nonzero(&self, row: usize, col: usize) -> bool {
        self.get(row, col) != EntryClass::Zero
    }

    /// Rows of `*`/`0`, e.g. for printing `S`.
    pub fn rows_as_strings(&self) -> Vec<String> {
        (1..=self.size)
            .map(|r| {
                (1..=self.size)
                    .map(|c| if self.is_nonzero(r, c) { '*' } else { '0' })
                    .collect()
            })
            .collect()
    }
}

/// Computes the structural pattern by a BFS from every vertex.
///
/// `T[i][i]` is nonconstant iff `i` can reach itself through at least one
/// edge, i.e. `i` sits in a strongly connected component of size >= 2.
pub fn structural_pattern(m: &NetworkModel) -> StructuralPattern {
    let n = m.vertex_count();
    let succ = m.successors();
    let mut cells = vec![EntryClass::Zero; n * n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();

    for src in 0..n {
        seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        // walks of length >= 1 only, so `src` is marked iff it is on a cycle
        for &next in &succ[src] {
            if !seen[next] {
                seen[next] = true;
                queue.push_back(next);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &next in &succ[v] {
                if !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        for (dst, &reached) in seen.iter().enumerate() {
            let class = match (dst == src, reached) {
                (true, true) => EntryClass::NonConstant,
                (true, false) => EntryClass::ConstantOne,
                (false, true) => EntryClass::NonConstant,
                (false, false) => EntryClass::Zero,
            };
            cells[dst * n + src] = class;
        }
    }

    StructuralPattern { size: n, cells }
}

/// The nonconstant entries of `T_{C,R}` as `(measured, excited)` pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct FunctionSet(Vec<(usize, usize)>);

impl FunctionSet {
    pub fn from_entries(mut entries: Vec<(usize, usize)>) -> Self {
        entries.sort_unstable();
        entries.dedup();
        Self(entries)
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.0.binary_search(&(row, col)).is_ok()
    }

    pub(crate) fn remove(&mut self, row: usize, col: usize) -> bool {
        match self.0.binary_search(&(row, col)) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }
}

pub fn function_set(m: &NetworkModel) -> FunctionSet {
    function_set_from_pattern(m, &structural_pattern(m))
}

pub fn function_set_from_pattern(m: &NetworkModel, pattern: &StructuralPattern) -> FunctionSet {
    let mut entries = Vec::new();
    for row in m.measured().iter() {
        for col in m.excited().iter() {
            if pattern.get(row, col) == EntryClass::NonConstant {
                entries.push((row, col));
            }
        }
    }
    FunctionSet(entries)
}

/// Bipartite graph between excited (left) and measured (right) vertices with
/// an edge `(i, j)` whenever `T[j][i] != 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BipartiteGraph {
    excited: VertexSet,
    measured: VertexSet,
    /// `(excited, measured)`, sorted
    edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn from_parts(
        excited: VertexSet,
        measured: VertexSet,
        mut edges: Vec<(usize, usize)>,
    ) -> Self {
        edges.sort_unstable();
        edges.dedup();
        Self {
            excited,
            measured,
            edges,
        }
    }

    pub fn excited(&self) -> &VertexSet {
        &self.excited
    }

    pub fn measured(&self) -> &VertexSet {
        &self.measured
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, excited: usize, measured: usize) -> bool {
        self.edges.binary_search(&(excited, measured)).is_ok()
    }

    /// Edges with both endpoints in the given subsets, sorted.
    pub fn edges_between(&self, excited: &VertexSet, measured: &VertexSet) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(i, j)| excited.contains(i) && measured.contains(j))
            .collect()
    }

    /// Renders a Graphviz DOT description. Edges listed in `dashed` are drawn
    /// dashed (typically the edges removed by the edge-removal procedure).
    pub fn to_dot(&self, dashed: &[(usize, usize)]) -> String {
        let mut out = String::new();
        out.push_str("digraph bipartite {\n");
        out.push_str("  rankdir=LR;\n");
        out.push_str("  node [shape=circle];\n");
        out.push_str("  subgraph cluster_excited {\n    label=\"R\";\n");
        for v in self.excited.iter() {
            let _ = writeln!(out, "    r{v} [label=\"{v}\"];");
        }
        out.push_str("  }\n");
        out.push_str("  subgraph cluster_measured {\n    label=\"C\";\n");
        for v in self.measured.iter() {
            let _ = writeln!(out, "    c{v} [label=\"{v}\"];");
        }
        out.push_str("  }\n");
        for &(i, j) in &self.edges {
            if dashed.contains(&(i, j)) {
                let _ = writeln!(out, "  r{i} -> c{j} [arrowhead=none, style=dashed];");
            } else {
                let _ = writeln!(out, "  r{i} -> c{j} [arrowhead=none];");
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn bipartite_graph(m: &NetworkModel) -> BipartiteGraph {
    bipartite_graph_from_pattern(m, &structural_pattern(m))
}

pub fn bipartite_graph_from_pattern(
    m: &NetworkModel,
    pattern: &StructuralPattern,
) -> BipartiteGraph {
    let mut edges = Vec::new();
    for i in m.excited().iter() {
        for j in m.measured().iter() {
            if pattern.is_nonzero(j, i) {
                edges.push((i, j));
            }
        }
    }
    BipartiteGraph {
        excited: m.excited().clone(),
        measured: m.measured().clone(),
        edges,
    }
}
