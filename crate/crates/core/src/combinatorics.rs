//! Maximum bipartite matching (structural rank) and maximum sets of
//! vertex-disjoint directed paths (generic rank).

use std::collections::VecDeque;

use serde::Serialize;

use crate::model::{NetworkModel, VertexSet};
use crate::structure::BipartiteGraph;

/// A set of bipartite edges `(excited, measured)` sharing no endpoint.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Matching(Vec<(usize, usize)>);

impl Matching {
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Maximum matching between `cols ⊆ R` and `rows ⊆ C` in `b`.
///
/// The cardinality equals the structural rank of `T[rows][cols]`.
pub fn max_matching(b: &BipartiteGraph, rows: &VertexSet, cols: &VertexSet) -> Matching {
    let adj: Vec<Vec<usize>> = cols
        .iter()
        .map(|i| {
            rows.iter()
                .enumerate()
                .filter(|&(_, j)| b.has_edge(i, j))
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    let mate = hopcroft_karp(rows.len(), &adj);
    let mut edges: Vec<(usize, usize)> = mate
        .iter()
        .enumerate()
        .filter_map(|(l, r)| r.map(|r| (cols.as_slice()[l], rows.as_slice()[r])))
        .collect();
    edges.sort_unstable();
    Matching(edges)
}

/// Structural rank of a dense `rows x cols` nonzero mask (row-major).
pub(crate) fn mask_structural_rank(mask: &[bool], rows: usize, cols: usize) -> usize {
    let adj: Vec<Vec<usize>> = (0..rows)
        .map(|r| (0..cols).filter(|&c| mask[r * cols + c]).collect())
        .collect();
    hopcroft_karp(cols, &adj)
        .iter()
        .filter(|m| m.is_some())
        .count()
}

/// Hopcroft–Karp on a left side given by `adj` (left -> right indices) and a
/// right side of size `right`. Returns the mate of every left vertex.
pub(crate) fn hopcroft_karp(right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const FREE: usize = usize::MAX;
    let left = adj.len();
    let mut mate_l = vec![FREE; left];
    let mut mate_r = vec![FREE; right];
    let mut dist = vec![0usize; left];

    loop {
        // layered BFS from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..left {
            if mate_l[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let next = mate_r[r];
                if next == FREE {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }

        fn augment(
            l: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            mate_l: &mut [usize],
            mate_r: &mut [usize],
        ) -> bool {
            for &r in &adj[l] {
                let next = mate_r[r];
                if next == usize::MAX
                    || (dist[next] == dist[l] + 1 && augment(next, adj, dist, mate_l, mate_r))
                {
                    mate_l[l] = r;
                    mate_r[r] = l;
                    return true;
                }
            }
            dist[l] = usize::MAX;
            false
        }

        for l in 0..left {
            if mate_l[l] == FREE {
                augment(l, adj, &mut dist, &mut mate_l, &mut mate_r);
            }
        }
    }

    mate_l
        .into_iter()
        .map(|r| if r == FREE { None } else { Some(r) })
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Arc {
    to: usize,
    cap: u32,
    rev: usize,
    forward: bool,
}

/// Unit-capacity flow network on the vertex-split graph.
struct SplitFlow {
    arcs: Vec<Vec<Arc>>,
    source: usize,
    sink: usize,
}

impl SplitFlow {
    fn build(m: &NetworkModel, sources: &VertexSet, targets: &VertexSet) -> Self {
        let n = m.vertex_count();
        // v_in = 2v, v_out = 2v + 1 (0-based v)
        let source = 2 * n;
        let sink = 2 * n + 1;
        let mut flow = SplitFlow {
            arcs: vec![Vec::new(); 2 * n + 2],
            source,
            sink,
        };
        for v in 0..n {
            flow.add(2 * v, 2 * v + 1);
        }
        for (v, succ) in m.successors().iter().enumerate() {
            for &w in succ {
                flow.add(2 * v + 1, 2 * w);
            }
        }
        for s in sources.iter() {
            flow.add(source, 2 * (s - 1));
        }
        for t in targets.iter() {
            flow.add(2 * (t - 1) + 1, sink);
        }
        flow
    }

    fn add(&mut self, from: usize, to: usize) {
        let rev_from = self.arcs[to].len();
        let rev_to = self.arcs[from].len();
        self.arcs[from].push(Arc {
            to,
            cap: 1,
            rev: rev_from,
            forward: true,
        });
        self.arcs[to].push(Arc {
            to: from,
            cap: 0,
            rev: rev_to,
            forward: false,
        });
    }

    /// Augments along BFS shortest paths until none remain.
    fn run(&mut self) -> usize {
        let nodes = self.arcs.len();
        let mut total = 0;
        loop {
            let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
            let mut queue = VecDeque::from([self.source]);
            let mut reached = false;
            'bfs: while let Some(x) = queue.pop_front() {
                for (k, arc) in self.arcs[x].iter().enumerate() {
                    if arc.cap > 0 && arc.to != self.source && parent[arc.to].is_none() {
                        parent[arc.to] = Some((x, k));
                        if arc.to == self.sink {
                            reached = true;
                            break 'bfs;
                        }
                        queue.push_back(arc.to);
                    }
                }
            }
            if !reached {
                return total;
            }
            let mut node = self.sink;
            while let Some((prev, k)) = parent[node] {
                let rev = self.arcs[prev][k].rev;
                self.arcs[prev][k].cap -= 1;
                self.arcs[node][rev].cap += 1;
                node = prev;
            }
            total += 1;
        }
    }

    /// Decomposes the current flow into vertex sequences (1-based).
    fn paths(&self) -> Vec<Vec<usize>> {
        let carries = |arc: &Arc| arc.forward && arc.cap == 0;
        let mut out = Vec::new();
        for arc in self.arcs[self.source].iter().filter(|a| carries(a)) {
            let mut path = Vec::new();
            let mut node = arc.to;
            while node != self.sink {
                if node % 2 == 0 {
                    path.push(node / 2 + 1);
                }
                // vertex capacities are 1, so at most one outgoing arc carries flow
                node = self.arcs[node]
                    .iter()
                    .find(|a| carries(a))
                    .expect("flow conservation")
                    .to;
            }
            out.push(path);
        }
        out.sort();
        out
    }
}

/// Maximum number of mutually vertex-disjoint directed paths from `sources`
/// to `targets`. A vertex in both sets counts as a path of length zero.
pub fn max_vertex_disjoint_paths(
    m: &NetworkModel,
    sources: &VertexSet,
    targets: &VertexSet,
) -> usize {
    SplitFlow::build(m, sources, targets).run()
}

/// A maximum family of vertex-disjoint paths, each as its vertex sequence.
pub fn vertex_disjoint_paths(
    m: &NetworkModel,
    sources: &VertexSet,
    targets: &VertexSet,
) -> Vec<Vec<usize>> {
    let mut flow = SplitFlow::build(m, sources, targets);
    flow.run();
    flow.paths()
}
