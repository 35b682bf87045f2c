//! Network topology: the directed graph of modules together with the excited
//! set `R` and the measured set `C`.
//!
//! Vertices are numbered `1..=L` everywhere in the public API. An edge
//! `(from, to)` stands for the module `G[to][from]`, i.e. the signal of `from`
//! feeds into `to`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing, duplicate-free list of 1-based vertex indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VertexSet(Vec<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Sorts and deduplicates.
    pub fn from_unsorted(mut vertices: Vec<usize>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        Self(vertices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Position of `v` within the set, used to index rows/columns of submatrices.
    pub fn position(&self, v: usize) -> Option<usize> {
        self.0.binary_search(&v).ok()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut all = self.0.clone();
        all.extend_from_slice(&other.0);
        Self::from_unsorted(all)
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        Self(self.iter().filter(|&v| other.contains(v)).collect())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    /// All subsets of the given size, in lexicographic order.
    pub fn subsets(&self, size: usize) -> Vec<VertexSet> {
        let n = self.0.len();
        let mut out = Vec::new();
        if size > n {
            return out;
        }
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(Self(idx.iter().map(|&k| self.0[k]).collect()));
            // advance to the next combination
            let mut k = size;
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                if idx[k] != k + n - size {
                    break;
                }
                if k == 0 {
                    return out;
                }
            }
            idx[k] += 1;
            for t in k + 1..size {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        Self::from_unsorted(v)
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(v: [usize; N]) -> Self {
        Self::from_unsorted(v.to_vec())
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_unsorted(iter.into_iter().collect())
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// On-disk topology format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologyFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    excited: Vec<usize>,
    measured: Vec<usize>,
}

/// A validated network topology in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(try_from = "TopologyFile", into = "TopologyFile")]
pub struct NetworkModel {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    excited: VertexSet,
    measured: VertexSet,
    // 0-based adjacency
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl NetworkModel {
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        excited: impl IntoIterator<Item = usize>,
        measured: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::NoVertices);
        }
        let check = |index: usize| {
            if index == 0 || index > vertex_count {
                Err(Error::IndexOutOfRange {
                    index,
                    vertex_count,
                })
            } else {
                Ok(index)
            }
        };

        let mut edge_list = Vec::new();
        for (from, to) in edges {
            check(from)?;
            check(to)?;
            if from == to {
                return Err(Error::SelfLoop(from));
            }
            edge_list.push((from, to));
        }
        edge_list.sort_unstable();
        if let Some(w) = edge_list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge(w[0].0, w[0].1));
        }

        let vertex_set = |items: Vec<usize>, set: &'static str| -> Result<VertexSet> {
            let mut sorted = items;
            for &v in &sorted {
                check(v)?;
            }
            sorted.sort_unstable();
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::DuplicateVertex { vertex: w[0], set });
            }
            Ok(VertexSet(sorted))
        };
        let excited = vertex_set(excited.into_iter().collect(), "excited")?;
        let measured = vertex_set(measured.into_iter().collect(), "measured")?;

        let mut succ = vec![Vec::new(); vertex_count];
        let mut pred = vec![Vec::new(); vertex_count];
        for &(from, to) in &edge_list {
            succ[from - 1].push(to - 1);
            pred[to - 1].push(from - 1);
        }
        for list in pred.iter_mut() {
            list.sort_unstable();
        }

        Ok(Self {
            vertex_count,
            edges: edge_list,
            excited,
            measured,
            succ,
            pred,
        })
    }

    /// Parses the JSON topology format.
    pub fn parse(text: &str) -> Result<Self> {
        let file: TopologyFile = serde_json::from_str(text)?;
        file.try_into()
    }

    /// Serializes to the JSON topology format (canonical order).
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("topology serialization cannot fail")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet((1..=self.vertex_count).collect())
    }

    /// Edges sorted lexicographically as `(from, to)`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.binary_search(&(from, to)).is_ok()
    }

    pub fn excited(&self) -> &VertexSet {
        &self.excited
    }

    pub fn measured(&self) -> &VertexSet {
        &self.measured
    }

    /// `N_i^-`: vertices with an edge into `i`.
    pub fn in_neighbours(&self, i: usize) -> Result<VertexSet> {
        self.check_vertex(i)?;
        Ok(VertexSet(self.pred[i - 1].iter().map(|&v| v + 1).collect()))
    }

    /// `N_i^+`: vertices reached by an edge out of `i`.
    pub fn out_neighbours(&self, i: usize) -> Result<VertexSet> {
        self.check_vertex(i)?;
        Ok(VertexSet(self.succ[i - 1].iter().map(|&v| v + 1).collect()))
    }

    fn check_vertex(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.vertex_count {
            Err(Error::IndexOutOfRange {
                index: i,
                vertex_count: self.vertex_count,
            })
        } else {
            Ok(())
        }
    }

    /// 0-based successor lists.
    pub(crate) fn successors(&self) -> &[Vec<usize>] {
        &self.succ
    }
}

impl TryFrom<TopologyFile> for NetworkModel {
    type Error = Error;

    fn try_from(file: TopologyFile) -> Result<Self> {
        NetworkModel::new(
            file.vertices,
            file.edges.into_iter().map(|[a, b]| (a, b)),
            file.excited,
            file.measured,
        )
    }
}

impl From<NetworkModel> for TopologyFile {
    fn from(m: NetworkModel) -> Self {
        TopologyFile {
            vertices: m.vertex_count,
            edges: m.edges.iter().map(|&(a, b)| [a, b]).collect(),
            excited: m.excited.0,
            measured: m.measured.0,
        }
    }
}
