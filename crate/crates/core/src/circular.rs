//! Exact identifiability test for networks that form one directed cycle, and
//! recovery of every module of such a cycle from a numeric `T_{C,R}`.
//!
//! Along the ring `v_1 -> v_2 -> ... -> v_L -> v_1` write `g_u` for the
//! module on edge `v_u -> v_{u+1}` and `phi` for the loop gain (product of all
//! modules). Then `T[b][a] = P(a -> b) / (1 - phi)` where `P` is the product
//! of modules along the forward arc from `a` to `b` (empty product 1).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::combinatorics::max_vertex_disjoint_paths;
use crate::error::{Error, Result};
use crate::model::{NetworkModel, VertexSet};
use crate::numeric::instantiate;

/// Relative size under which a denominator is treated as zero.
pub const DEGENERATE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircleDescriptor {
    /// Vertices in ring order starting from vertex 1.
    ring: Vec<usize>,
    excited: VertexSet,
    measured: VertexSet,
}

impl CircleDescriptor {
    pub fn ring(&self) -> &[usize] {
        &self.ring
    }

    pub fn excited(&self) -> &VertexSet {
        &self.excited
    }

    pub fn measured(&self) -> &VertexSet {
        &self.measured
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    /// Builds the network this descriptor stands for.
    pub fn to_model(&self) -> NetworkModel {
        let n = self.ring.len();
        NetworkModel::new(
            n,
            (0..n).map(|u| (self.ring[u], self.ring[(u + 1) % n])),
            self.excited.iter(),
            self.measured.iter(),
        )
        .expect("descriptor is a valid ring")
    }

    /// Ring positions indexed by vertex (1-based vertex, slot 0 unused).
    fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.ring.len() + 1];
        for (u, &v) in self.ring.iter().enumerate() {
            pos[v] = u;
        }
        pos
    }

    /// Vertices on the forward arc from `a` to `b`, both included.
    fn arc(&self, pos: &[usize], a: usize, b: usize) -> Vec<usize> {
        let n = self.ring.len();
        let len = (pos[b] + n - pos[a]) % n;
        (0..=len).map(|k| self.ring[(pos[a] + k) % n]).collect()
    }
}

/// Accepts only graphs that are one directed cycle through all vertices.
pub fn detect_circle(m: &NetworkModel) -> Result<CircleDescriptor> {
    let n = m.vertex_count();
    if n < 2 || m.edge_count() != n {
        return Err(Error::NotACircle);
    }
    let succ = m.successors();
    if succ.iter().any(|s| s.len() != 1) {
        return Err(Error::NotACircle);
    }
    let mut ring = Vec::with_capacity(n);
    let mut v = 0;
    for _ in 0..n {
        ring.push(v + 1);
        v = succ[v][0];
    }
    let mut sorted = ring.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if v != 0 || sorted.len() != n {
        return Err(Error::NotACircle);
    }
    Ok(CircleDescriptor {
        ring,
        excited: m.excited().clone(),
        measured: m.measured().clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CircularCase {
    /// One excited vertex, which is also measured.
    SingleExcitedMeasured,
    /// One measured vertex, which is also excited.
    SingleMeasuredExcited,
    /// At least two excited and two measured vertices joined by two
    /// vertex-disjoint paths.
    TwoDisjointPaths,
    CoverFailed,
    CaseFailed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CircularWitness {
    Uncovered { vertices: Vec<usize> },
    Vertex { vertex: usize },
    DisjointPaths { paths: [Vec<usize>; 2] },
    PathCount { count: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CircularVerdict {
    pub identifiable: bool,
    pub condition: CircularCase,
    pub witness: CircularWitness,
}

/// Two vertex-disjoint forward arcs from excited to measured vertices:
/// shortest total length first, then lexicographic in `(a1, m1, a2, m2)`.
fn disjoint_arc_pair(d: &CircleDescriptor) -> Option<[Vec<usize>; 2]> {
    let pos = d.positions();
    let mut arcs = Vec::new();
    for a in d.excited.iter() {
        for m in d.measured.iter() {
            arcs.push(d.arc(&pos, a, m));
        }
    }
    // ((total length, endpoints), paths) of the best pair so far
    type Candidate = ((usize, [usize; 4]), [Vec<usize>; 2]);
    let mut best: Option<Candidate> = None;
    for (x, first) in arcs.iter().enumerate() {
        for second in &arcs[x + 1..] {
            if first[0] == second[0] || first.iter().any(|v| second.contains(v)) {
                continue;
            }
            let (p, q) = if first[0] < second[0] {
                (first, second)
            } else {
                (second, first)
            };
            let key = (
                p.len() + q.len(),
                [p[0], *p.last().unwrap(), q[0], *q.last().unwrap()],
            );
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, [p.clone(), q.clone()]));
            }
        }
    }
    best.map(|(_, pair)| pair)
}

/// Decides identifiability of a directed cycle.
pub fn circular_identifiable(d: &CircleDescriptor) -> CircularVerdict {
    let covered = d.excited.union(&d.measured);
    if covered.len() != d.ring.len() {
        let vertices = d
            .ring
            .iter()
            .copied()
            .filter(|&v| !covered.contains(v))
            .collect();
        return CircularVerdict {
            identifiable: false,
            condition: CircularCase::CoverFailed,
            witness: CircularWitness::Uncovered { vertices },
        };
    }
    let (nr, nc) = (d.excited.len(), d.measured.len());
    let failed = |witness| CircularVerdict {
        identifiable: false,
        condition: CircularCase::CaseFailed,
        witness,
    };

    if nr >= 2 && nc >= 2 {
        return match disjoint_arc_pair(d) {
            Some(paths) => CircularVerdict {
                identifiable: true,
                condition: CircularCase::TwoDisjointPaths,
                witness: CircularWitness::DisjointPaths { paths },
            },
            None => {
                let count = max_vertex_disjoint_paths(&d.to_model(), &d.excited, &d.measured);
                failed(CircularWitness::PathCount { count })
            }
        };
    }
    if nr == 1 {
        let v = d.excited.as_slice()[0];
        return if d.measured.contains(v) {
            CircularVerdict {
                identifiable: true,
                condition: CircularCase::SingleExcitedMeasured,
                witness: CircularWitness::Vertex { vertex: v },
            }
        } else {
            failed(CircularWitness::Vertex { vertex: v })
        };
    }
    if nc == 1 {
        let v = d.measured.as_slice()[0];
        return if d.excited.contains(v) {
            CircularVerdict {
                identifiable: true,
                condition: CircularCase::SingleMeasuredExcited,
                witness: CircularWitness::Vertex { vertex: v },
            }
        } else {
            failed(CircularWitness::Vertex { vertex: v })
        };
    }
    failed(CircularWitness::PathCount { count: 0 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RecoveredModule {
    pub from: usize,
    pub to: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CircleRecovery {
    /// Loop gain of the cycle.
    pub phi: f64,
    /// Excited/measured vertices `(a1, m1, a2, m2)` used for the loop gain.
    pub loop_vertices: [usize; 4],
    /// One entry per ring edge, in ring order.
    pub modules: Vec<RecoveredModule>,
}

/// Recovers all modules of an identifiable cycle (two-disjoint-path case)
/// from `t_cr`, whose rows follow the sorted measured set and whose columns
/// follow the sorted excited set.
pub fn recover_circle_modules(d: &CircleDescriptor, t_cr: &DMatrix<f64>) -> Result<CircleRecovery> {
    let verdict = circular_identifiable(d);
    let [first, second] = match verdict.witness {
        CircularWitness::DisjointPaths { paths } if verdict.identifiable => paths,
        _ => return Err(Error::RecoveryPrecondition),
    };
    let (nc, nr) = (d.measured.len(), d.excited.len());
    if t_cr.shape() != (nc, nr) {
        return Err(Error::Shape {
            rows: t_cr.nrows(),
            cols: t_cr.ncols(),
            expected_rows: nc,
            expected_cols: nr,
        });
    }
    let scale = t_cr.amax();
    let t = |row: usize, col: usize| {
        t_cr[(
            d.measured.position(row).expect("measured row"),
            d.excited.position(col).expect("excited column"),
        )]
    };
    let nonzero = |value: f64, what: &str| -> Result<f64> {
        if value.abs() <= DEGENERATE_TOLERANCE * scale.max(1.0) || !value.is_finite() {
            Err(Error::DegenerateInstance(format!(
                "{what} is numerically zero"
            )))
        } else {
            Ok(value)
        }
    };

    let (a1, m1) = (first[0], *first.last().unwrap());
    let (a2, m2) = (second[0], *second.last().unwrap());
    let phi = t(m2, a1) * t(m1, a2) / nonzero(t(m1, a1) * t(m2, a2), "T[m1][a1] T[m2][a2]")?;
    let one_minus_phi = nonzero(1.0 - phi, "1 - phi")?;

    let n = d.ring.len();
    let mut modules = Vec::with_capacity(n);
    for u in 0..n {
        let (from, to) = (d.ring[u], d.ring[(u + 1) % n]);
        let (from_r, from_c) = (d.excited.contains(from), d.measured.contains(from));
        let (to_r, to_c) = (d.excited.contains(to), d.measured.contains(to));
        let value = if from_c && to_c {
            // any excitation point other than `to` sees `from` before `to`
            let s = d.excited.iter().find(|&s| s != to).expect("|R| >= 2");
            t(to, s) / nonzero(t(from, s), "T[from][s]")?
        } else if from_r && to_c {
            one_minus_phi * t(to, from)
        } else if from_r && to_r {
            let m = d.measured.iter().find(|&m| m != from).expect("|C| >= 2");
            t(m, from) / nonzero(t(m, to), "T[m][to]")?
        } else {
            debug_assert!(from_c && to_r);
            phi / nonzero(one_minus_phi * t(from, to), "(1 - phi) T[from][to]")?
        };
        modules.push(RecoveredModule { from, to, value });
    }

    Ok(CircleRecovery {
        phi,
        loop_vertices: [a1, m1, a2, m2],
        modules,
    })
}

/// Outcome of instantiating a cycle, recovering it from `T_{C,R}` and
/// comparing against the drawn values.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RecoveryCheck {
    pub seed: u64,
    pub recovery: CircleRecovery,
    pub true_phi: f64,
    pub phi_relative_error: f64,
    pub max_relative_error: f64,
}

pub fn verify_recovery(d: &CircleDescriptor, seed: u64) -> Result<RecoveryCheck> {
    let model = d.to_model();
    let inst = instantiate(&model, seed)?;
    let recovery = recover_circle_modules(d, &inst.submatrix(&d.measured, &d.excited))?;
    let true_phi: f64 = model
        .edges()
        .iter()
        .map(|&(a, b)| inst.module(a, b))
        .product();
    let max_relative_error = recovery
        .modules
        .iter()
        .map(|r| {
            let truth = inst.module(r.from, r.to);
            ((r.value - truth) / truth).abs()
        })
        .fold(0.0, f64::max);
    Ok(RecoveryCheck {
        seed,
        phi_relative_error: ((recovery.phi - true_phi) / true_phi).abs(),
        true_phi,
        max_relative_error,
        recovery,
    })
}
